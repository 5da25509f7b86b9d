#include "cag/app.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cag/claims.hpp"
#include "cag/http_gateway.hpp"
#include "cag/logging.hpp"
#include "cag/metrics.hpp"
#include "cag/mock_gateway.hpp"
#include "cag/retrieval.hpp"
#include "cag/text.hpp"

namespace cag::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string role_key(gateway::Role role) {
  return text::to_lower(gateway::role_name(role));
}

gateway::EndpointConfig resolve_endpoint(const AppConfig& config, gateway::Role role) {
  gateway::EndpointConfig endpoint;
  const std::string prefix = "gateway." + role_key(role) + ".";
  auto from_file = [&](const char* field) -> std::string {
    auto it = config.file_settings.find(prefix + field);
    return it == config.file_settings.end() ? "" : it->second;
  };
  endpoint.base_url = from_file("url");
  endpoint.model = from_file("model");
  endpoint.api_key = from_file("key");

  // Environment beats the config file.
  const auto env = gateway::endpoint_from_env(role);
  if (!env.base_url.empty()) endpoint.base_url = env.base_url;
  if (!env.model.empty()) endpoint.model = env.model;
  if (!env.api_key.empty()) endpoint.api_key = env.api_key;

  endpoint.max_retries = config.max_retries;
  endpoint.retry_backoff_ms = config.retry_backoff_ms;
  return endpoint;
}

struct GatewayHandle {
  std::unique_ptr<gateway::Gateway> gateway;
  bool mocked = false;
  std::map<gateway::Role, bool> configured;

  bool available(gateway::Role role) const {
    if (mocked) return true;
    auto it = configured.find(role);
    return it != configured.end() && it->second;
  }
};

GatewayHandle make_gateway(const AppConfig& config) {
  GatewayHandle handle;
  if (!config.mock_script.empty()) {
    if (!fs::exists(config.mock_script)) {
      throw ConfigInvalid("mock script not found: " + config.mock_script.string());
    }
    handle.gateway =
        std::make_unique<gateway::MockGateway>(gateway::MockScript::load(config.mock_script));
    handle.mocked = true;
    return handle;
  }
  std::map<gateway::Role, gateway::EndpointConfig> endpoints;
  for (const auto role :
       {gateway::Role::VideoSummarizer, gateway::Role::Reasoner, gateway::Role::Aggregator,
        gateway::Role::Extractor, gateway::Role::Judge}) {
    auto endpoint = resolve_endpoint(config, role);
    handle.configured[role] = !endpoint.base_url.empty();
    endpoints[role] = std::move(endpoint);
  }
  handle.gateway = std::make_unique<gateway::HttpGateway>(std::move(endpoints));
  return handle;
}

void require_roles(const GatewayHandle& handle, std::initializer_list<gateway::Role> roles) {
  for (const auto role : roles) {
    if (!handle.available(role)) {
      throw ConfigInvalid("no endpoint for role " + gateway::role_name(role) +
                          " (set CAG_GATEWAY_" + gateway::role_name(role) +
                          "_URL or pass --mock)");
    }
  }
}

corpus::Corpus load_corpus_checked(const AppConfig& config) {
  if (config.corpus_root.empty() || !fs::exists(config.corpus_root)) {
    throw ConfigInvalid("corpus root not found: " + config.corpus_root.string());
  }
  return corpus::load_corpus(config.corpus_root);
}

// ---------------------------------------------------------------------------
// Evaluation report

struct Row {
  std::string event_id;
  std::string method;
  std::optional<double> r1, r2, rl, bs, arg_ed, arg_ex, as_score, g, ndcg;
  std::vector<std::string> errors;
};

std::string format_cell(const std::optional<double>& value) {
  if (!value) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << (*value * 100.0);
  return out.str();
}

json value_or_null(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

void write_reports(const fs::path& out_dir, const std::vector<Row>& rows,
                   const std::optional<std::string>& judge_kind,
                   const std::optional<std::string>& bank_hash,
                   const std::optional<std::string>& scorer_version,
                   const std::vector<std::string>& notes) {
  fs::create_directories(out_dir);

  // Per-method unweighted means over events with a defined value.
  std::map<std::string, std::vector<const Row*>> by_method;
  for (const auto& row : rows) by_method[row.method].push_back(&row);

  auto mean_of = [](const std::vector<const Row*>& group,
                    std::optional<double> Row::*field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const Row* row : group) {
      if (row->*field) {
        sum += (row->*field).value();
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };

  json per_event = json::array();
  for (const auto& row : rows) {
    per_event.push_back({
        {"event_id", row.event_id},
        {"method", row.method},
        {"R1", value_or_null(row.r1)},
        {"R2", value_or_null(row.r2)},
        {"RL", value_or_null(row.rl)},
        {"BS", value_or_null(row.bs)},
        {"Arg_ED", value_or_null(row.arg_ed)},
        {"Arg_EX", value_or_null(row.arg_ex)},
        {"AS", value_or_null(row.as_score)},
        {"G", value_or_null(row.g)},
        {"nDCG", value_or_null(row.ndcg)},
        {"errors", row.errors},
    });
  }

  json aggregate = json::array();
  for (const auto& [method, group] : by_method) {
    aggregate.push_back({
        {"method", method},
        {"events", group.size()},
        {"R1", value_or_null(mean_of(group, &Row::r1))},
        {"R2", value_or_null(mean_of(group, &Row::r2))},
        {"RL", value_or_null(mean_of(group, &Row::rl))},
        {"BS", value_or_null(mean_of(group, &Row::bs))},
        {"Arg_ED", value_or_null(mean_of(group, &Row::arg_ed))},
        {"Arg_EX", value_or_null(mean_of(group, &Row::arg_ex))},
        {"AS", value_or_null(mean_of(group, &Row::as_score))},
        {"G", value_or_null(mean_of(group, &Row::g))},
        {"nDCG", value_or_null(mean_of(group, &Row::ndcg))},
    });
  }

  json report = {
      {"per_event", std::move(per_event)},
      {"aggregate", std::move(aggregate)},
      {"judge_kind", judge_kind ? json(*judge_kind) : json(nullptr)},
      {"question_bank_hash", bank_hash ? json(*bank_hash) : json(nullptr)},
      {"scorer_version", scorer_version ? json(*scorer_version) : json(nullptr)},
      {"notes", notes},
  };
  {
    std::ofstream out(out_dir / "report.json", std::ios::binary);
    out << report.dump(2) << '\n';
  }

  // Plain-text table, Table-2 column order, values scaled to percent.
  std::ostringstream table;
  const std::vector<std::string> headers = {"event",  "method", "R1", "R2", "RL",  "BS",
                                            "Arg_ED", "Arg_EX", "AS", "G",  "nDCG"};
  std::vector<std::vector<std::string>> lines;
  lines.push_back(headers);
  for (const auto& row : rows) {
    lines.push_back({row.event_id, row.method, format_cell(row.r1), format_cell(row.r2),
                     format_cell(row.rl), format_cell(row.bs), format_cell(row.arg_ed),
                     format_cell(row.arg_ex), format_cell(row.as_score), format_cell(row.g),
                     format_cell(row.ndcg)});
  }
  for (const auto& [method, group] : by_method) {
    lines.push_back({"MEAN", method, format_cell(mean_of(group, &Row::r1)),
                     format_cell(mean_of(group, &Row::r2)), format_cell(mean_of(group, &Row::rl)),
                     format_cell(mean_of(group, &Row::bs)),
                     format_cell(mean_of(group, &Row::arg_ed)),
                     format_cell(mean_of(group, &Row::arg_ex)),
                     format_cell(mean_of(group, &Row::as_score)),
                     format_cell(mean_of(group, &Row::g)),
                     format_cell(mean_of(group, &Row::ndcg))});
  }
  std::vector<std::size_t> widths(headers.size(), 0);
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  for (const auto& line : lines) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      table << std::left << std::setw(static_cast<int>(widths[c]) + 2) << line[c];
    }
    table << '\n';
  }
  for (const auto& note : notes) table << "# " << note << '\n';
  {
    std::ofstream out(out_dir / "report.txt", std::ios::binary);
    out << table.str();
  }
}

}  // namespace

std::map<std::string, std::string> parse_config_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigInvalid("cannot open config file: " + file.string());
  std::map<std::string, std::string> settings;
  std::string line;
  while (std::getline(in, line)) {
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed[0] == '#' || trimmed[0] == ';') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalid("config line is not `key = value`: " + trimmed);
    }
    const std::string key = text::trim(trimmed.substr(0, eq));
    std::string value = text::strip_quotes(text::trim(trimmed.substr(eq + 1)));
    if (key.empty()) throw ConfigInvalid("config line has empty key: " + trimmed);
    settings[key] = std::move(value);
  }
  return settings;
}

void apply_file_settings(AppConfig& config) {
  const auto& settings = config.file_settings;
  auto get = [&](const char* key) -> std::optional<std::string> {
    auto it = settings.find(key);
    if (it == settings.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("corpus")) config.corpus_root = *v;
  if (auto v = get("prompts")) config.prompts_dir = *v;
  if (auto v = get("questions")) config.questions_file = *v;
  if (auto v = get("out")) config.out_dir = *v;
  if (auto v = get("runs")) config.runs_dir = *v;
  if (auto v = get("mock")) config.mock_script = *v;
  if (auto v = get("run")) config.run_file = *v;
  if (auto v = get("qrels")) config.qrels_file = *v;
  if (auto v = get("judgments")) config.judgments_file = *v;
  if (auto v = get("grounding")) config.grounding = *v;
  if (auto v = get("scorer_url")) config.scorer_url = *v;
  if (auto v = get("method")) {
    const auto method = engine::method_from_token(*v);
    if (!method) throw ConfigInvalid("config: unknown method \"" + *v + "\"");
    config.run.method = *method;
  }
  if (auto v = get("budget")) config.run.budget_r = std::stoi(*v);
  if (auto v = get("top_k")) config.run.top_k = std::stoi(*v);
  if (auto v = get("transcripts")) config.run.include_transcripts = (*v == "true" || *v == "1");
  if (auto v = get("rag")) config.rag = (*v == "true" || *v == "1");
  if (auto v = get("concurrency")) config.run.parallelism = std::stoi(*v);
  if (auto v = get("retries")) config.max_retries = std::stoi(*v);
  if (auto v = get("backoff_ms")) config.retry_backoff_ms = std::stoi(*v);
}

int cmd_generate(const AppConfig& config) {
  try {
    config.run.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigInvalid(e.what());
  }
  if (config.corpus_root.empty() || !fs::exists(config.corpus_root)) {
    throw ConfigInvalid("corpus root not found: " + config.corpus_root.string());
  }
  if (!fs::exists(config.prompts_dir)) {
    throw ConfigInvalid("prompts directory not found: " + config.prompts_dir.string());
  }
  if (config.rag && (config.run_file.empty() || !fs::exists(config.run_file))) {
    throw ConfigInvalid("RAG mode needs an existing --run file, got: " +
                        config.run_file.string());
  }

  const corpus::Corpus corpus = load_corpus_checked(config);
  const PromptSet prompts = PromptSet::load(config.prompts_dir);
  GatewayHandle handle = make_gateway(config);
  require_roles(handle, {gateway::Role::VideoSummarizer});
  if (config.run.budget_r > 0) require_roles(handle, {gateway::Role::Reasoner});
  if (config.run.method == engine::Method::Cag0 || config.run.method == engine::Method::CagR) {
    require_roles(handle, {gateway::Role::Aggregator});
  }

  std::optional<retrieval::RankedRun> ranked;
  if (config.rag) ranked = retrieval::load_run(config.run_file);

  fs::create_directories(config.runs_dir);
  json summary = json::array();
  int failures = 0;
  for (const auto& event : corpus.events()) {
    try {
      std::vector<corpus::VideoRecord> videos;
      if (config.rag) {
        if (!ranked->has_event(event.id)) {
          throw corpus::UnknownId("run file has no ranking for event " + event.id);
        }
        for (const auto& video_id :
             retrieval::top_k(*ranked, event.id, static_cast<std::size_t>(config.run.top_k))) {
          if (!corpus.has_video(video_id)) {
            logging::warn("event " + event.id + ": ranked video " + video_id +
                          " is not in the corpus; skipping");
            continue;
          }
          videos.push_back(corpus.video(video_id));
        }
        if (videos.empty()) {
          throw corpus::UnknownId("no ranked video for event " + event.id +
                                  " resolves in the corpus");
        }
      } else {
        for (const auto& video_id : event.relevant_video_ids) {
          videos.push_back(corpus.video(video_id));
        }
      }

      engine::RunArtifact artifact =
          engine::execute_run(config.run, event, videos, *handle.gateway, prompts);
      artifact.article.provenance.generated_at = iso_utc_now();
      const fs::path file = engine::write_run_artifact(config.runs_dir, artifact);
      summary.push_back({{"event_id", event.id}, {"status", "ok"}, {"file", file.string()}});
    } catch (const Error& e) {
      ++failures;
      logging::warn("event " + event.id + " failed: " + e.what());
      summary.push_back({{"event_id", event.id}, {"status", "error"}, {"error", e.what()}});
    } catch (const std::exception& e) {
      ++failures;
      logging::warn("event " + event.id + " failed: " + e.what());
      summary.push_back({{"event_id", event.id}, {"status", "error"}, {"error", e.what()}});
    }
  }
  {
    std::ofstream out(config.runs_dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
  }
  return failures == 0 ? 0 : 1;
}

int cmd_evaluate(const AppConfig& config) {
  const corpus::Corpus corpus = load_corpus_checked(config);
  if (!fs::exists(config.runs_dir)) {
    throw MissingRuns("runs directory not found: " + config.runs_dir.string());
  }

  std::vector<fs::path> artifact_files;
  for (const auto& event_dir : fs::directory_iterator(config.runs_dir)) {
    if (!event_dir.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(event_dir.path())) {
      if (file.path().extension() == ".json") artifact_files.push_back(file.path());
    }
  }
  if (artifact_files.empty()) {
    throw MissingRuns("no run artifacts under " + config.runs_dir.string());
  }
  std::sort(artifact_files.begin(), artifact_files.end());

  if (config.grounding != "off" && config.grounding != "human" && config.grounding != "llm") {
    throw ConfigInvalid("grounding must be off, human or llm; got " + config.grounding);
  }
  if (config.grounding == "human" &&
      (config.judgments_file.empty() || !fs::exists(config.judgments_file))) {
    throw ConfigInvalid("grounding=human needs an existing --judgments file");
  }

  GatewayHandle handle = make_gateway(config);
  std::vector<std::string> notes;

  // Arg needs a question bank and an extractor; both are optional surfaces.
  std::optional<metrics::QuestionBank> bank;
  fs::path bank_path = config.questions_file;
  if (bank_path.empty() && fs::exists("data/questions.json")) bank_path = "data/questions.json";
  if (!bank_path.empty()) {
    if (!fs::exists(bank_path)) {
      throw ConfigInvalid("question bank not found: " + bank_path.string());
    }
    bank = metrics::QuestionBank::load(bank_path);
  }
  const bool arg_enabled = bank.has_value() && handle.available(gateway::Role::Extractor);
  if (!arg_enabled) {
    notes.push_back("Arg skipped: needs a question bank and an EXTRACTOR endpoint or --mock");
  }
  if (config.grounding != "off") require_roles(handle, {gateway::Role::Extractor});
  if (config.grounding == "llm") require_roles(handle, {gateway::Role::Judge});

  std::optional<PromptSet> prompts;
  if (arg_enabled || config.grounding != "off") {
    if (!fs::exists(config.prompts_dir)) {
      throw ConfigInvalid("prompts directory not found: " + config.prompts_dir.string());
    }
    prompts = PromptSet::load(config.prompts_dir);
  }

  std::optional<retrieval::NdcgReport> ndcg_report;
  if (config.rag) {
    if (config.run_file.empty() || !fs::exists(config.run_file)) {
      throw ConfigInvalid("RAG evaluation needs an existing --run file");
    }
    const auto run = retrieval::load_run(config.run_file);
    const auto qrels = config.qrels_file.empty() ? retrieval::Qrels::from_corpus(corpus)
                                                 : retrieval::Qrels::load(config.qrels_file);
    ndcg_report = retrieval::ndcg_at_k(run, qrels, static_cast<std::size_t>(config.run.top_k));
  }

  std::optional<std::string> judge_kind;
  std::optional<std::string> scorer_version;
  std::vector<Row> rows;
  int failures = 0;
  for (const auto& file : artifact_files) {
    engine::RunArtifact artifact;
    try {
      artifact = engine::load_run_artifact(file);
    } catch (const Error& e) {
      logging::warn(std::string("skipping unreadable artifact: ") + e.what());
      ++failures;
      continue;
    }
    Row row;
    row.event_id = artifact.article.event_id;
    row.method = engine::method_token(artifact.article.provenance.config.method);

    const corpus::EventTopic* event = nullptr;
    try {
      event = &corpus.event(row.event_id);
    } catch (const Error& e) {
      row.errors.push_back(e.what());
      rows.push_back(std::move(row));
      ++failures;
      continue;
    }
    const std::string& pred = artifact.article.body;
    const std::string& ref = event->reference_article;

    row.r1 = metrics::rouge_n(pred, ref, 1).f1;
    row.r2 = metrics::rouge_n(pred, ref, 2).f1;
    row.rl = metrics::rouge_l(pred, ref).f1;

    if (arg_enabled) {
      try {
        const auto arg = metrics::arg_f1(pred, ref, event->event_type, *bank, *handle.gateway,
                                         prompts->extract);
        if (arg.defined) {
          row.arg_ed = arg.edit_f1;
          row.arg_ex = arg.exact_f1;
        } else {
          row.errors.push_back("Arg undefined: no question had reference answers");
        }
      } catch (const Error& e) {
        row.errors.push_back(std::string("Arg: ") + e.what());
      }
    }

    if (!config.scorer_url.empty()) {
      const metrics::ScorerEndpoint scorer{config.scorer_url};
      try {
        const auto bs = metrics::external_score(pred, ref, metrics::Scorer::BertScore, scorer);
        row.bs = bs.score;
        scorer_version = bs.version;
      } catch (const Error& e) {
        row.errors.push_back(std::string("BS: ") + e.what());
      }
      try {
        const auto as =
            metrics::external_score(pred, ref, metrics::Scorer::AlignScore, scorer);
        row.as_score = as.score;
        scorer_version = as.version;
      } catch (const Error& e) {
        row.errors.push_back(std::string("AS: ") + e.what());
      }
    }

    if (config.grounding != "off") {
      try {
        claims::ClaimSet claim_set = claims::decompose(pred, *handle.gateway, prompts->decompose);
        claim_set.event_id = row.event_id;
        claim_set.method = row.method;
        claims::GroundingJudgment judgment;
        if (config.grounding == "human") {
          // A directory holds per-event files; a plain file applies as-is.
          fs::path judgments_file = config.judgments_file;
          if (fs::is_directory(judgments_file)) {
            const fs::path per_method =
                judgments_file / (row.event_id + "." + row.method + ".json");
            const fs::path per_event = judgments_file / (row.event_id + ".json");
            judgments_file = fs::exists(per_method) ? per_method : per_event;
          }
          judgment = claims::load_judgments(judgments_file, claim_set.claims.size());
        } else {
          std::vector<std::string> video_ids;
          std::map<std::string, std::string> evidence;
          for (const auto& trace : artifact.traces) {
            video_ids.push_back(trace.video_id);
            std::string evidence_text = trace.generic_summary;
            for (const auto& round : trace.rounds) {
              evidence_text += '\n';
              evidence_text += round.summary;
            }
            if (corpus.has_video(trace.video_id)) {
              const auto& video = corpus.video(trace.video_id);
              if (video.transcript) {
                evidence_text += '\n';
                evidence_text += *video.transcript;
              }
            }
            evidence[trace.video_id] = std::move(evidence_text);
          }
          if (video_ids.empty()) {
            // Concat artifacts may carry no traces; fall back to the oracle set.
            for (const auto& video_id : event->relevant_video_ids) video_ids.push_back(video_id);
          }
          judgment = claims::judge_grounding(claim_set, video_ids, evidence, *handle.gateway,
                                             prompts->judge);
        }
        judge_kind = claims::judge_kind_name(judgment.kind);
        row.g = claims::groundedness(judgment, claim_set);
      } catch (const Error& e) {
        row.errors.push_back(std::string("G: ") + e.what());
      }
    }

    if (ndcg_report) {
      auto it = ndcg_report->per_event.find(row.event_id);
      if (it != ndcg_report->per_event.end()) row.ndcg = it->second;
    }

    if (!row.errors.empty()) ++failures;
    rows.push_back(std::move(row));
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.event_id, a.method) < std::tie(b.event_id, b.method);
  });
  write_reports(config.out_dir, rows, judge_kind,
                bank ? std::optional<std::string>(bank->content_hash()) : std::nullopt,
                scorer_version, notes);
  return failures == 0 ? 0 : 1;
}

int cmd_stats(const AppConfig& config, const fs::path& json_out) {
  const corpus::Corpus corpus = load_corpus_checked(config);
  const corpus::StatsReport stats = corpus::corpus_stats(corpus);

  json alpha = json::object();
  if (corpus.annotations()) {
    for (const auto channel : {corpus::Channel::Audio, corpus::Channel::Video,
                               corpus::Channel::Ocr, corpus::Channel::None}) {
      const std::string name = corpus::channel_name(channel);
      try {
        alpha[name] = corpus::krippendorff_alpha(*corpus.annotations(), channel);
      } catch (const Error& e) {
        alpha[name] = nullptr;
        logging::warn("alpha " + name + ": " + e.what());
      }
    }
  }

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "events:                    " << stats.event_count << '\n'
      << "videos:                    " << stats.video_count << '\n'
      << "subclaims:                 " << stats.subclaim_count << '\n'
      << "mean video length (s):     " << stats.mean_video_length_s << '\n'
      << "mean article tokens:       " << stats.mean_article_tokens << '\n'
      << "mean videos/event:         " << stats.mean_videos_per_event << '\n'
      << "mean audio subclaims:      " << stats.mean_audio_subclaims << '\n'
      << "mean video subclaims:      " << stats.mean_video_subclaims << '\n'
      << "mean OCR subclaims:        " << stats.mean_ocr_subclaims << '\n'
      << "mean A/V/O subclaims:      " << stats.mean_all_modality_subclaims << '\n'
      << "mean total subclaims:      " << stats.mean_total_subclaims << '\n';
  if (!alpha.empty()) {
    for (const auto& [channel, value] : alpha.items()) {
      out << "alpha " << channel << ":" << std::string(19 - channel.size(), ' ');
      if (value.is_null()) {
        out << "undefined\n";
      } else {
        out << value.get<double>() << '\n';
      }
    }
  }
  std::cout << out.str();

  if (!json_out.empty()) {
    json report = {
        {"events", stats.event_count},
        {"videos", stats.video_count},
        {"subclaims", stats.subclaim_count},
        {"mean_video_length_s", stats.mean_video_length_s},
        {"mean_article_tokens", stats.mean_article_tokens},
        {"mean_videos_per_event", stats.mean_videos_per_event},
        {"mean_audio_subclaims", stats.mean_audio_subclaims},
        {"mean_video_subclaims", stats.mean_video_subclaims},
        {"mean_ocr_subclaims", stats.mean_ocr_subclaims},
        {"mean_all_modality_subclaims", stats.mean_all_modality_subclaims},
        {"mean_total_subclaims", stats.mean_total_subclaims},
        {"alpha", alpha},
    };
    std::ofstream file(json_out, std::ios::binary);
    file << report.dump(2) << '\n';
  }
  return 0;
}

int cmd_ndcg(const AppConfig& config, const fs::path& json_out) {
  if (config.run_file.empty() || !fs::exists(config.run_file)) {
    throw ConfigInvalid("ndcg needs an existing --run file");
  }
  const corpus::Corpus corpus = load_corpus_checked(config);
  const auto run = retrieval::load_run(config.run_file);
  const auto qrels = config.qrels_file.empty() ? retrieval::Qrels::from_corpus(corpus)
                                               : retrieval::Qrels::load(config.qrels_file);
  const auto report =
      retrieval::ndcg_at_k(run, qrels, static_cast<std::size_t>(config.run.top_k));

  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  for (const auto& [event_id, value] : report.per_event) {
    out << event_id << '\t' << value << '\n';
  }
  out << "macro-average\t" << report.macro_average << '\n';
  for (const auto& event_id : report.skipped) {
    out << "# skipped (no relevant videos): " << event_id << '\n';
  }
  std::cout << out.str();

  if (!json_out.empty()) {
    json payload = {
        {"per_event", report.per_event},
        {"macro_average", report.macro_average},
        {"skipped", report.skipped},
        {"k", config.run.top_k},
        {"run_tag", run.tag()},
    };
    std::ofstream file(json_out, std::ios::binary);
    file << payload.dump(2) << '\n';
  }
  return 0;
}

}  // namespace cag::app
