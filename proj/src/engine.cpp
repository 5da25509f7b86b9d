#include "cag/engine.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cag/logging.hpp"
#include "cag/metrics.hpp"
#include "cag/text.hpp"

namespace cag::engine {

namespace {

using nlohmann::json;

// Rethrows wire-level errors with a location tag so a failing run names the
// video (and round) it died on.
template <typename Fn>
auto tagged(const std::string& tag, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Transport& e) {
    throw Transport(tag + ": " + e.what());
  } catch (const ProtocolViolation& e) {
    throw ProtocolViolation(tag + ": " + e.what());
  } catch (const ContextOverflow& e) {
    throw ContextOverflow(tag + ": " + e.what());
  }
}

std::string summarize_with_prompt(const corpus::VideoRecord& video, const std::string& prompt,
                                  gateway::Gateway& gw) {
  gateway::ChatRequest request;
  request.role = gateway::Role::VideoSummarizer;
  request.messages.push_back({gateway::Speaker::User, prompt});
  request.media.push_back({video.uri, std::nullopt});
  return gw.complete(request).text;
}

std::string build_aggregator_input(const std::vector<SummaryTrace>& traces,
                                   const std::map<std::string, std::string>& transcripts,
                                   bool include_transcripts) {
  std::string content;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const SummaryTrace& trace = traces[i];
    const std::string label = "[Video " + std::to_string(i + 1) + "]";
    content += label + " Generic summary:\n" + trace.generic_summary + "\n\n";
    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
      content += label + " Follow-up query " + std::to_string(r + 1) + ": " +
                 trace.rounds[r].reprompt + "\n";
      content += label + " Follow-up summary " + std::to_string(r + 1) + ":\n" +
                 trace.rounds[r].summary + "\n\n";
    }
    if (include_transcripts) {
      auto it = transcripts.find(trace.video_id);
      if (it != transcripts.end()) {
        content += label + " Audio transcript:\n" + it->second + "\n\n";
      }
    }
  }
  while (!content.empty() && content.back() == '\n') content.pop_back();
  return content;
}

void fill_provenance(Provenance& provenance, const RunConfig& config, gateway::Gateway& gw,
                     const PromptSet& prompts) {
  provenance.config = config;
  provenance.prompt_hashes = prompts.hashes();
  for (const auto role : {gateway::Role::VideoSummarizer, gateway::Role::Reasoner,
                          gateway::Role::Aggregator}) {
    provenance.models[gateway::role_name(role)] = gw.model_id(role);
  }
}

}  // namespace

std::string method_token(Method method) {
  switch (method) {
    case Method::Concat0: return "concat0";
    case Method::ConcatReprompt: return "concatr";
    case Method::Cag0: return "cag0";
    case Method::CagR: return "cagr";
  }
  return "unknown";
}

std::optional<Method> method_from_token(const std::string& token) {
  if (token == "concat0") return Method::Concat0;
  if (token == "concatr") return Method::ConcatReprompt;
  if (token == "cag0") return Method::Cag0;
  if (token == "cagr") return Method::CagR;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (budget_r < 0) throw std::invalid_argument("budget_r must be >= 0");
  if (method == Method::Concat0 && budget_r != 0) {
    throw std::invalid_argument("concat0 requires budget_r = 0");
  }
  if (method == Method::Cag0 && budget_r != 0) {
    throw std::invalid_argument("cag0 requires budget_r = 0");
  }
  if (method == Method::CagR && budget_r < 1) {
    throw std::invalid_argument("cagr requires budget_r >= 1");
  }
  if (top_k < 1) throw std::invalid_argument("top_k must be positive");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");
}

std::string termination_name(Termination termination) {
  return termination == Termination::Sufficient ? "SUFFICIENT" : "BUDGET_EXHAUSTED";
}

std::string generic_summarize(const corpus::VideoRecord& video, gateway::Gateway& gw,
                              const PromptSet& prompts) {
  return tagged("video " + video.id,
                [&] { return summarize_with_prompt(video, prompts.generic, gw); });
}

Feedback relevance_feedback(const std::string& event_name, const std::string& summary,
                            gateway::Gateway& gw, const PromptSet& prompts) {
  if (text::trim(summary).empty()) {
    throw std::invalid_argument("relevance_feedback needs a non-empty summary");
  }
  const std::string prompt = render_prompt(
      prompts.reasoner, {{"event_name", event_name}, {"summary", summary}});

  gateway::ChatRequest request;
  request.role = gateway::Role::Reasoner;
  request.messages.push_back({gateway::Speaker::User, prompt});
  const auto response = gw.complete(request);

  // Reasoning models front-load a chain of thought; the answer is the last
  // blank-line-separated block.
  const std::string answer = text::strip_quotes(text::last_block(response.text));

  Feedback feedback;
  if (text::normalize_span(answer) == kSentinel) {
    feedback.kind = Feedback::Kind::Sufficient;
    return feedback;
  }
  if (text::starts_with_icase(answer, kRepromptPrefix)) {
    feedback.kind = Feedback::Kind::RePrompt;
    feedback.query = answer;
    return feedback;
  }
  logging::warn("unparseable reasoner feedback treated as sufficient: \"" + answer + "\"");
  feedback.kind = Feedback::Kind::Sufficient;
  feedback.fallback = true;
  return feedback;
}

SummaryTrace reprompt_loop(const corpus::VideoRecord& video, const std::string& event_name,
                           int budget_r, gateway::Gateway& gw, const PromptSet& prompts) {
  if (budget_r < 0) throw std::invalid_argument("budget_r must be >= 0");

  SummaryTrace trace;
  trace.video_id = video.id;
  trace.generic_summary = generic_summarize(video, gw, prompts);
  trace.terminated_by = Termination::BudgetExhausted;

  std::string current = trace.generic_summary;
  for (int round = 0; round < budget_r; ++round) {
    const std::string tag = "video " + video.id + " round " + std::to_string(round + 1);
    const Feedback feedback =
        tagged(tag, [&] { return relevance_feedback(event_name, current, gw, prompts); });
    if (feedback.kind == Feedback::Kind::Sufficient) {
      trace.terminated_by = Termination::Sufficient;
      break;
    }
    if (!text::starts_with_icase(feedback.query, kRepromptPrefix)) {
      throw std::logic_error(tag + ": reprompt lacks the mandated prefix");
    }
    const std::string summary =
        tagged(tag, [&] { return summarize_with_prompt(video, feedback.query, gw); });
    trace.rounds.push_back(RepromptRound{feedback.query, summary});
    current = summary;
  }
  return trace;
}

Article synthesize_article(const std::vector<SummaryTrace>& traces,
                           const std::map<std::string, std::string>& transcripts,
                           const corpus::EventTopic& event, gateway::Gateway& gw,
                           const PromptSet& prompts, const RunConfig& config) {
  if (traces.empty()) throw std::invalid_argument("synthesize_article needs traces");
  for (const auto& [video_id, transcript] : transcripts) {
    const bool known = std::any_of(traces.begin(), traces.end(), [&](const SummaryTrace& t) {
      return t.video_id == video_id;
    });
    if (!known) {
      throw std::invalid_argument("transcript for video " + video_id + " has no trace");
    }
  }

  gateway::ChatRequest request;
  request.role = gateway::Role::Aggregator;
  request.messages.push_back({gateway::Speaker::System, prompts.aggregator});
  request.messages.push_back(
      {gateway::Speaker::User,
       build_aggregator_input(traces, transcripts, config.include_transcripts)});

  std::string body;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto response = tagged("event " + event.id, [&] { return gw.complete(request); });
    const auto marker = response.text.find(kLeadMarker);
    if (marker != std::string::npos) {
      std::string extracted = response.text.substr(marker + kLeadMarker.size());
      extracted = text::replace_all(std::move(extracted), std::string(kLeadMarker), "");
      body = text::trim(extracted);
      if (!body.empty()) break;
    }
    if (attempt == 0) {
      logging::warn("aggregator reply for event " + event.id +
                    " lacks the lead marker; retrying once");
    } else {
      throw MissingLeadMarker("aggregator never produced the lead marker for event " + event.id);
    }
  }

  Article article;
  article.event_id = event.id;
  article.body = body;
  fill_provenance(article.provenance, config, gw, prompts);
  article.citations = cite_sentences(body, traces, &article.provenance.ungrounded_sentences);
  return article;
}

std::vector<std::vector<std::string>> cite_sentences(const std::string& body,
                                                     const std::vector<SummaryTrace>& traces,
                                                     std::vector<int>* ungrounded) {
  const auto sentences = text::split_sentences(body);

  std::vector<std::pair<std::string, metrics::TokenSeq>> trace_tokens;
  trace_tokens.reserve(traces.size());
  for (const auto& trace : traces) {
    std::string concatenated = trace.generic_summary;
    for (const auto& round : trace.rounds) {
      concatenated += ' ';
      concatenated += round.summary;
    }
    trace_tokens.emplace_back(trace.video_id, metrics::TokenSeq::tokenize(concatenated));
  }

  std::vector<std::vector<std::string>> citations(sentences.size());
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto sentence_tokens = metrics::TokenSeq::tokenize(sentences[s]);
    double best_recall = 0.0;
    std::string best_video;
    for (const auto& [video_id, tokens] : trace_tokens) {
      const double recall = metrics::unigram_recall(tokens, sentence_tokens);
      if (recall > best_recall ||
          (recall == best_recall && recall > 0.0 && video_id < best_video)) {
        best_recall = recall;
        best_video = video_id;
      }
    }
    if (best_recall > 0.0) {
      citations[s].push_back(best_video);
    } else if (ungrounded) {
      ungrounded->push_back(static_cast<int>(s));
    }
  }
  return citations;
}

RunArtifact execute_run(const RunConfig& config, const corpus::EventTopic& event,
                        const std::vector<corpus::VideoRecord>& videos, gateway::Gateway& gw,
                        const PromptSet& prompts) {
  config.validate();
  if (videos.empty()) throw std::invalid_argument("run_method needs at least one video");

  const int budget =
      (config.method == Method::Concat0 || config.method == Method::Cag0) ? 0 : config.budget_r;

  std::vector<SummaryTrace> traces(videos.size());
  if (config.parallelism <= 1 || videos.size() == 1) {
    for (std::size_t i = 0; i < videos.size(); ++i) {
      traces[i] = reprompt_loop(videos[i], event.name, budget, gw, prompts);
    }
  } else {
    // Wave scheduling keeps at most `parallelism` traces in flight.
    const std::size_t wave = static_cast<std::size_t>(config.parallelism);
    for (std::size_t start = 0; start < videos.size(); start += wave) {
      const std::size_t end = std::min(videos.size(), start + wave);
      std::vector<std::future<SummaryTrace>> futures;
      for (std::size_t i = start; i < end; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
          return reprompt_loop(videos[i], event.name, budget, gw, prompts);
        }));
      }
      for (std::size_t i = start; i < end; ++i) {
        traces[i] = futures[i - start].get();
      }
    }
  }

  std::map<std::string, std::string> transcripts;
  if (config.include_transcripts) {
    for (const auto& video : videos) {
      if (video.transcript) transcripts[video.id] = *video.transcript;
    }
  }

  Article article;
  switch (config.method) {
    case Method::Concat0: {
      std::string body;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        if (i > 0) body += "\n\n";
        body += traces[i].generic_summary;
      }
      article.event_id = event.id;
      article.body = body;
      fill_provenance(article.provenance, config, gw, prompts);
      article.citations = cite_sentences(body, traces, &article.provenance.ungrounded_sentences);
      break;
    }
    case Method::ConcatReprompt: {
      std::string body;
      bool any = false;
      for (const auto& trace : traces) {
        for (const auto& round : trace.rounds) {
          if (any) body += "\n\n";
          body += round.summary;
          any = true;
        }
      }
      if (!any) {
        throw EmptyOutput("no video produced a reprompted round for event " + event.id);
      }
      article.event_id = event.id;
      article.body = body;
      fill_provenance(article.provenance, config, gw, prompts);
      article.citations = cite_sentences(body, traces, &article.provenance.ungrounded_sentences);
      break;
    }
    case Method::Cag0:
    case Method::CagR:
      article = synthesize_article(traces, transcripts, event, gw, prompts, config);
      break;
  }

  // Every citation must point into the run's input set.
  for (const auto& sentence_citations : article.citations) {
    for (const auto& video_id : sentence_citations) {
      const bool known = std::any_of(videos.begin(), videos.end(), [&](const auto& v) {
        return v.id == video_id;
      });
      if (!known) {
        throw std::logic_error("citation references video outside the input set: " + video_id);
      }
    }
  }

  RunArtifact artifact;
  artifact.article = std::move(article);
  artifact.traces = std::move(traces);
  return artifact;
}

Article run_method(const RunConfig& config, const corpus::EventTopic& event,
                   const std::vector<corpus::VideoRecord>& videos, gateway::Gateway& gw,
                   const PromptSet& prompts) {
  return execute_run(config, event, videos, gw, prompts).article;
}

// ---------------------------------------------------------------------------
// Run artifacts

namespace {

json trace_to_json(const SummaryTrace& trace) {
  json rounds = json::array();
  for (const auto& round : trace.rounds) {
    rounds.push_back({{"reprompt", round.reprompt}, {"summary", round.summary}});
  }
  return {
      {"video_id", trace.video_id},
      {"generic_summary", trace.generic_summary},
      {"rounds", std::move(rounds)},
      {"terminated_by", termination_name(trace.terminated_by)},
  };
}

SummaryTrace trace_from_json(const json& spec) {
  SummaryTrace trace;
  trace.video_id = spec.at("video_id").get<std::string>();
  trace.generic_summary = spec.at("generic_summary").get<std::string>();
  for (const auto& round : spec.at("rounds")) {
    trace.rounds.push_back(RepromptRound{round.at("reprompt").get<std::string>(),
                                         round.at("summary").get<std::string>()});
  }
  trace.terminated_by = spec.at("terminated_by").get<std::string>() == "SUFFICIENT"
                            ? Termination::Sufficient
                            : Termination::BudgetExhausted;
  return trace;
}

}  // namespace

json run_artifact_to_json(const RunArtifact& artifact) {
  const Article& article = artifact.article;
  const Provenance& provenance = article.provenance;

  json citations = json::array();
  for (const auto& sentence : article.citations) citations.push_back(sentence);

  // Decoding is fixed engine-wide; recorded so runs are self-describing.
  const gateway::Decoding decoding;
  json decoding_json = {{"temperature", decoding.temperature},
                        {"max_tokens", decoding.max_tokens},
                        {"seed", decoding.seed ? json(*decoding.seed) : json(nullptr)}};

  json provenance_json = {
      {"method", method_token(provenance.config.method)},
      {"budget_r", provenance.config.budget_r},
      {"include_transcripts", provenance.config.include_transcripts},
      {"top_k", provenance.config.top_k},
      {"models", provenance.models},
      {"prompt_hashes", provenance.prompt_hashes},
      {"decoding", std::move(decoding_json)},
      {"ungrounded_sentences", provenance.ungrounded_sentences},
      {"citation_scheme", provenance.citation_scheme},
  };
  if (!provenance.generated_at.empty()) provenance_json["generated_at"] = provenance.generated_at;

  json traces = json::array();
  for (const auto& trace : artifact.traces) traces.push_back(trace_to_json(trace));

  return {
      {"article",
       {
           {"event_id", article.event_id},
           {"body", article.body},
           {"citations", std::move(citations)},
       }},
      {"traces", std::move(traces)},
      {"provenance", std::move(provenance_json)},
  };
}

RunArtifact run_artifact_from_json(const json& spec) {
  RunArtifact artifact;
  const json& article = spec.at("article");
  artifact.article.event_id = article.at("event_id").get<std::string>();
  artifact.article.body = article.at("body").get<std::string>();
  for (const auto& sentence : article.at("citations")) {
    artifact.article.citations.push_back(sentence.get<std::vector<std::string>>());
  }
  const json& provenance = spec.at("provenance");
  const auto method = method_from_token(provenance.at("method").get<std::string>());
  if (!method) {
    throw Error("run artifact has unknown method: " + provenance.at("method").get<std::string>());
  }
  artifact.article.provenance.config.method = *method;
  artifact.article.provenance.config.budget_r = provenance.value("budget_r", 0);
  artifact.article.provenance.config.include_transcripts =
      provenance.value("include_transcripts", false);
  artifact.article.provenance.config.top_k = provenance.value("top_k", 5);
  if (provenance.contains("models")) {
    artifact.article.provenance.models =
        provenance["models"].get<std::map<std::string, std::string>>();
  }
  if (provenance.contains("prompt_hashes")) {
    artifact.article.provenance.prompt_hashes =
        provenance["prompt_hashes"].get<std::map<std::string, std::string>>();
  }
  if (provenance.contains("ungrounded_sentences")) {
    artifact.article.provenance.ungrounded_sentences =
        provenance["ungrounded_sentences"].get<std::vector<int>>();
  }
  artifact.article.provenance.citation_scheme = provenance.value("citation_scheme", "");
  artifact.article.provenance.generated_at = provenance.value("generated_at", "");
  for (const auto& trace : spec.at("traces")) {
    artifact.traces.push_back(trace_from_json(trace));
  }
  return artifact;
}

std::filesystem::path write_run_artifact(const std::filesystem::path& runs_dir,
                                         const RunArtifact& artifact) {
  const std::filesystem::path dir = runs_dir / artifact.article.event_id;
  std::filesystem::create_directories(dir);
  const std::filesystem::path file =
      dir / (method_token(artifact.article.provenance.config.method) + ".json");
  std::ofstream out(file, std::ios::binary);
  out << run_artifact_to_json(artifact).dump(2) << '\n';
  return file;
}

RunArtifact load_run_artifact(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open run artifact: " + file.string());
  json spec;
  try {
    in >> spec;
  } catch (const json::exception& e) {
    throw Error("run artifact " + file.string() + " is not valid JSON: " + e.what());
  }
  return run_artifact_from_json(spec);
}

}  // namespace cag::engine
