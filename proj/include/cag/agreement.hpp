#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cag/errors.hpp"

namespace cag::corpus {

/// Binary judgment channels for claim grounding.
enum class Channel { Audio, Video, Ocr, None };

std::string channel_name(Channel channel);
std::optional<Channel> channel_from_string(const std::string& name);

/// Judgments for one annotation round: every covered (claim, video) item
/// carries one binary value per channel; a null slot means the annotator
/// did not cover that item.
struct AnnotationMatrix {
  using ItemJudgment = std::array<int, 4>;  // indexed by Channel

  std::vector<std::string> annotators;
  std::vector<std::pair<std::string, std::string>> items;  // (claim_id, video_id)
  // judgments[annotator][item]
  std::vector<std::vector<std::optional<ItemJudgment>>> judgments;

  bool operator==(const AnnotationMatrix&) const = default;
};

class InsufficientJudgments : public Error {
public:
  using Error::Error;
};

/// Zero expected disagreement: alpha is undefined, signalled explicitly
/// instead of returning NaN.
class DegenerateData : public Error {
public:
  using Error::Error;
};

/// Krippendorff's alpha for nominal (here binary) data on one channel,
/// computed through the coincidence-matrix formulation:
/// alpha = 1 - D_o / D_e. Requires >= 2 annotators and at least one item
/// with >= 2 judgments on the channel.
double krippendorff_alpha(const AnnotationMatrix& matrix, Channel channel);

}  // namespace cag::corpus
