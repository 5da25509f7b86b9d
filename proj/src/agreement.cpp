#include "cag/agreement.hpp"

#include <map>

namespace cag::corpus {

std::string channel_name(Channel channel) {
  switch (channel) {
    case Channel::Audio: return "AUDIO";
    case Channel::Video: return "VIDEO";
    case Channel::Ocr: return "OCR";
    case Channel::None: return "NONE";
  }
  return "UNKNOWN";
}

std::optional<Channel> channel_from_string(const std::string& name) {
  if (name == "AUDIO") return Channel::Audio;
  if (name == "VIDEO") return Channel::Video;
  if (name == "OCR") return Channel::Ocr;
  if (name == "NONE") return Channel::None;
  return std::nullopt;
}

double krippendorff_alpha(const AnnotationMatrix& matrix, Channel channel) {
  if (matrix.annotators.size() < 2) {
    throw InsufficientJudgments("alpha needs at least 2 annotators, got " +
                                std::to_string(matrix.annotators.size()));
  }
  const std::size_t channel_index = static_cast<std::size_t>(channel);

  // Coincidence matrix over the two nominal values {0, 1}: each pairable
  // unit of m judgments contributes every ordered pair weighted 1/(m-1).
  double o[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  bool any_pairable = false;
  for (std::size_t item = 0; item < matrix.items.size(); ++item) {
    std::vector<int> values;
    for (std::size_t a = 0; a < matrix.judgments.size(); ++a) {
      if (item >= matrix.judgments[a].size()) continue;
      const auto& slot = matrix.judgments[a][item];
      if (slot) values.push_back((*slot)[channel_index] != 0 ? 1 : 0);
    }
    const std::size_t m = values.size();
    if (m < 2) continue;
    any_pairable = true;
    const double weight = 1.0 / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (i == j) continue;
        o[values[i]][values[j]] += weight;
      }
    }
  }
  if (!any_pairable) {
    throw InsufficientJudgments("no item has two or more judgments on channel " +
                                channel_name(channel));
  }

  const double n0 = o[0][0] + o[0][1];
  const double n1 = o[1][0] + o[1][1];
  const double n = n0 + n1;
  const double expected_disagreement = n * n - (n0 * n0 + n1 * n1);  // scaled by n(n-1)
  if (expected_disagreement <= 0.0) {
    throw DegenerateData("expected disagreement is zero on channel " + channel_name(channel) +
                         "; alpha is undefined");
  }
  const double observed_disagreement = o[0][1] + o[1][0];  // scaled by n
  return 1.0 - (n - 1.0) * observed_disagreement / expected_disagreement;
}

}  // namespace cag::corpus
