#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cag/app.hpp"
#include "cag/claims.hpp"
#include "cag/engine.hpp"

using namespace cag;
using namespace cag::app;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = std::string(CAG_FIXTURES_DIR);
const fs::path kSource = std::string(CAG_SOURCE_DIR);

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  REQUIRE(in.good());
  json parsed;
  in >> parsed;
  return parsed;
}

AppConfig base_config() {
  AppConfig config;
  config.corpus_root = kFixtures / "corpus";
  config.prompts_dir = kSource / "prompts";
  config.mock_script = kFixtures / "mock_e2e.json";
  return config;
}

}  // namespace

TEST_CASE("parse_config_file handles comments, quotes and errors") {
  const auto dir = fresh_dir("cag_configfile");
  const auto path = dir / "cag.toml";
  std::ofstream(path) << "# a comment\n"
                      << "method = cagr\n"
                      << "budget = 2\n"
                      << "out = \"/tmp/somewhere\"\n"
                      << "gateway.reasoner.url = http://host:1\n";
  const auto settings = parse_config_file(path);
  CHECK(settings.at("method") == "cagr");
  CHECK(settings.at("budget") == "2");
  CHECK(settings.at("out") == "/tmp/somewhere");
  CHECK(settings.at("gateway.reasoner.url") == "http://host:1");

  AppConfig config;
  config.file_settings = settings;
  apply_file_settings(config);
  CHECK(config.run.method == engine::Method::CagR);
  CHECK(config.run.budget_r == 2);
  CHECK(config.out_dir == "/tmp/somewhere");

  const auto bad = dir / "bad.toml";
  std::ofstream(bad) << "not a key value line\n";
  CHECK_THROWS_AS(parse_config_file(bad), ConfigInvalid);
}

TEST_CASE("cmd_stats reports fixture statistics and alpha") {
  AppConfig config = base_config();
  const auto dir = fresh_dir("cag_stats_out");
  const auto json_out = dir / "stats.json";
  CHECK(cmd_stats(config, json_out) == 0);

  const auto stats = read_json(json_out);
  CHECK(stats["events"] == 2);
  CHECK(stats["videos"] == 3);
  CHECK(stats["subclaims"] == 5);
  CHECK(stats["mean_videos_per_event"] == doctest::Approx(1.5));
  // (84 + 45.5 + 120) / 3
  CHECK(stats["mean_video_length_s"] == doctest::Approx(83.1666666).epsilon(1e-6));
  CHECK(stats["alpha"]["AUDIO"] == doctest::Approx(1.0));
}

TEST_CASE("generate writes run artifacts; evaluate writes deterministic reports") {
  AppConfig config = base_config();
  config.run.method = engine::Method::CagR;
  config.run.budget_r = 2;
  config.runs_dir = fresh_dir("cag_app_runs");
  config.out_dir = fresh_dir("cag_app_report");
  config.questions_file = kSource / "data/questions.json";

  REQUIRE(cmd_generate(config) == 0);
  CHECK(fs::exists(config.runs_dir / "evt-fire" / "cagr.json"));
  CHECK(fs::exists(config.runs_dir / "evt-vote" / "cagr.json"));
  CHECK(fs::exists(config.runs_dir / "summary.json"));

  const auto artifact = read_json(config.runs_dir / "evt-fire" / "cagr.json");
  CHECK(artifact["article"]["body"].get<std::string>().find("Granvale") != std::string::npos);
  CHECK(artifact["traces"].size() == 2);

  REQUIRE(cmd_evaluate(config) == 0);
  REQUIRE(fs::exists(config.out_dir / "report.json"));
  REQUIRE(fs::exists(config.out_dir / "report.txt"));

  const auto report = read_json(config.out_dir / "report.json");
  REQUIRE(report["per_event"].size() == 2);
  for (const auto& row : report["per_event"]) {
    CHECK(row["R1"].get<double>() > 0.0);
    CHECK(row["R1"].get<double>() <= 1.0);
    CHECK_FALSE(row["Arg_ED"].is_null());
    CHECK_FALSE(row["Arg_EX"].is_null());
    CHECK(row["Arg_ED"].get<double>() >= row["Arg_EX"].get<double>());
  }
  CHECK(report["aggregate"].size() == 1);
  CHECK(report["question_bank_hash"].is_string());
}

TEST_CASE("identical prediction and reference scores 1.0 across ROUGE") {
  AppConfig config = base_config();
  config.mock_script.clear();  // no gateway: Arg is skipped, ROUGE still runs
  config.runs_dir = fresh_dir("cag_identity_runs");
  config.out_dir = fresh_dir("cag_identity_report");

  const auto corpus = corpus::load_corpus(config.corpus_root);
  engine::RunArtifact artifact;
  artifact.article.event_id = "evt-fire";
  artifact.article.body = corpus.event("evt-fire").reference_article;
  artifact.article.provenance.config.method = engine::Method::Concat0;
  engine::write_run_artifact(config.runs_dir, artifact);

  REQUIRE(cmd_evaluate(config) == 0);
  const auto report = read_json(config.out_dir / "report.json");
  REQUIRE(report["per_event"].size() == 1);
  const auto& row = report["per_event"][0];
  CHECK(row["R1"] == doctest::Approx(1.0));
  CHECK(row["R2"] == doctest::Approx(1.0));
  CHECK(row["RL"] == doctest::Approx(1.0));
  CHECK(row["Arg_ED"].is_null());
}

TEST_CASE("report ROUGE values match the hand oracles to 1e-6") {
  // Reference "the cathedral spire collapsed" vs body "the spire collapsed":
  // R1 = 6/7, R2: bigram overlap 1 -> P 1/2, R 1/3, F1 2/5; RL: LCS 3 -> 6/7.
  const auto corpus_dir = fresh_dir("cag_rouge_corpus");
  std::ofstream(corpus_dir / "events.json") << json::array({{
      {"id", "e1"},
      {"name", "Spire event"},
      {"event_type", "natural_disaster"},
      {"year", 2024},
      {"reference_article", "the cathedral spire collapsed"},
      {"relevant_video_ids", json::array({"v1"})},
  }}).dump();
  std::ofstream(corpus_dir / "videos.json")
      << json::array({{{"id", "v1"}, {"uri", "media/v1.mp4"}, {"duration_s", 5.0}}}).dump();
  std::ofstream(corpus_dir / "subclaims.json") << "[]";

  AppConfig config;
  config.corpus_root = corpus_dir;
  config.runs_dir = fresh_dir("cag_rouge_runs");
  config.out_dir = fresh_dir("cag_rouge_report");

  engine::RunArtifact artifact;
  artifact.article.event_id = "e1";
  artifact.article.body = "the spire collapsed";
  artifact.article.provenance.config.method = engine::Method::Concat0;
  engine::write_run_artifact(config.runs_dir, artifact);

  REQUIRE(cmd_evaluate(config) == 0);
  const auto report = read_json(config.out_dir / "report.json");
  const auto& row = report["per_event"][0];
  CHECK(row["R1"].get<double>() == doctest::Approx(6.0 / 7.0).epsilon(1e-6));
  CHECK(row["R2"].get<double>() == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(row["RL"].get<double>() == doctest::Approx(6.0 / 7.0).epsilon(1e-6));
}

TEST_CASE("missing run file in RAG mode is ConfigInvalid") {
  AppConfig config = base_config();
  config.rag = true;
  config.run_file = "/nonexistent/run.txt";
  CHECK_THROWS_AS(cmd_generate(config), ConfigInvalid);
}

TEST_CASE("method/budget inconsistency is ConfigInvalid") {
  AppConfig config = base_config();
  config.run.method = engine::Method::CagR;
  config.run.budget_r = 0;
  CHECK_THROWS_AS(cmd_generate(config), ConfigInvalid);
}

TEST_CASE("evaluate without artifacts is MissingRuns") {
  AppConfig config = base_config();
  config.runs_dir = fresh_dir("cag_no_runs");
  config.out_dir = fresh_dir("cag_no_runs_out");
  CHECK_THROWS_AS(cmd_evaluate(config), MissingRuns);
}

TEST_CASE("human grounding populates G from a judgments file") {
  AppConfig config = base_config();
  config.runs_dir = fresh_dir("cag_g_runs");
  config.out_dir = fresh_dir("cag_g_report");
  config.grounding = "human";

  // One artifact with a two-sentence body.
  engine::RunArtifact artifact;
  artifact.article.event_id = "evt-fire";
  artifact.article.body = "A major fire broke out. The spire fell.";
  artifact.article.provenance.config.method = engine::Method::Cag0;
  engine::write_run_artifact(config.runs_dir, artifact);

  // Scripted decomposition for both sentences.
  const auto script_path = fs::temp_directory_path() / "cag_g_script.json";
  std::ofstream(script_path) << json{
      {"rules", json::array({
          {{"role", "EXTRACTOR"},
           {"match", "SENTENCE: A major fire broke out."},
           {"replies", json::array({"[{\"claim\":\"A major fire broke out\"}]"})}},
          {{"role", "EXTRACTOR"},
           {"match", "SENTENCE: The spire fell."},
           {"replies", json::array({"[{\"claim\":\"The spire fell\"}]"})}},
      })}}.dump();
  config.mock_script = script_path;

  const auto judgments_path = fs::temp_directory_path() / "cag_g_judgments.json";
  std::ofstream(judgments_path) << json::array({
      {{"claim_index", 0}, {"video_id", "vid-fire-1"}, {"supported", 1}},
      {{"claim_index", 1}, {"video_id", "vid-fire-1"}, {"supported", 0}},
  }).dump();
  config.judgments_file = judgments_path;

  REQUIRE(cmd_evaluate(config) == 0);
  const auto report = read_json(config.out_dir / "report.json");
  CHECK(report["judge_kind"] == "HUMAN_FILE");
  CHECK(report["per_event"][0]["G"] == doctest::Approx(0.5));
}

TEST_CASE("concat0 oracle generation writes one artifact per event") {
  AppConfig config = base_config();
  config.run.method = engine::Method::Concat0;
  config.runs_dir = fresh_dir("cag_concat0_runs");
  REQUIRE(cmd_generate(config) == 0);
  CHECK(fs::exists(config.runs_dir / "evt-fire" / "concat0.json"));
  CHECK(fs::exists(config.runs_dir / "evt-vote" / "concat0.json"));

  // Two generic summaries joined by a blank line, in corpus video order.
  const auto artifact = read_json(config.runs_dir / "evt-fire" / "concat0.json");
  const auto body = artifact["article"]["body"].get<std::string>();
  CHECK(body.find("\n\n") != std::string::npos);
  CHECK(artifact["traces"].size() == 2);
  CHECK(artifact["provenance"]["method"] == "concat0");
}

TEST_CASE("RAG generation uses at most top-k ranked videos in rank order") {
  AppConfig config = base_config();
  config.run.method = engine::Method::CagR;
  config.run.budget_r = 2;
  config.run.top_k = 2;
  config.rag = true;
  config.runs_dir = fresh_dir("cag_ragk_runs");

  const auto run_path = fs::temp_directory_path() / "cag_ragk_run.txt";
  std::ofstream(run_path) << "evt-fire Q0 vid-fire-2 1 3.0 tag\n"
                          << "evt-fire Q0 vid-fire-1 2 2.0 tag\n"
                          << "evt-fire Q0 vid-vote-1 3 1.0 tag\n"
                          << "evt-vote Q0 vid-vote-1 1 1.0 tag\n";
  config.run_file = run_path;

  REQUIRE(cmd_generate(config) == 0);
  const auto artifact = read_json(config.runs_dir / "evt-fire" / "cagr.json");
  REQUIRE(artifact["traces"].size() == 2);
  // Rank order, not corpus order.
  CHECK(artifact["traces"][0]["video_id"] == "vid-fire-2");
  CHECK(artifact["traces"][1]["video_id"] == "vid-fire-1");
}

TEST_CASE("per-event failures are recorded and exit nonzero") {
  AppConfig config = base_config();
  config.run.method = engine::Method::Concat0;
  config.runs_dir = fresh_dir("cag_partial_runs");

  // Script covers the fire videos only; evt-vote has no matching rule.
  const auto script_path = fs::temp_directory_path() / "cag_partial_script.json";
  std::ofstream(script_path) << json{
      {"rules", json::array({
          {{"role", "VIDEO_SUMMARIZER"},
           {"match", "vid-fire"},
           {"replies", json::array({"a fire summary"})},
           {"repeat_last", true}},
      })}}.dump();
  config.mock_script = script_path;

  CHECK(cmd_generate(config) == 1);
  CHECK(fs::exists(config.runs_dir / "evt-fire" / "concat0.json"));
  CHECK_FALSE(fs::exists(config.runs_dir / "evt-vote" / "concat0.json"));

  const auto summary = read_json(config.runs_dir / "summary.json");
  REQUIRE(summary.size() == 2);
  CHECK(summary[0]["status"] == "ok");
  CHECK(summary[1]["status"] == "error");
}

TEST_CASE("evaluate in RAG mode fills the nDCG column") {
  AppConfig config = base_config();
  config.run.method = engine::Method::CagR;
  config.run.budget_r = 2;
  config.runs_dir = fresh_dir("cag_rag_runs");
  config.out_dir = fresh_dir("cag_rag_report");
  REQUIRE(cmd_generate(config) == 0);

  const auto run_path = fs::temp_directory_path() / "cag_rag_eval_run.txt";
  std::ofstream(run_path) << "evt-fire Q0 vid-fire-1 1 3.0 tag\n"
                          << "evt-fire Q0 vid-vote-1 2 2.0 tag\n"
                          << "evt-fire Q0 vid-fire-2 3 1.0 tag\n"
                          << "evt-vote Q0 vid-vote-1 1 1.0 tag\n";
  config.rag = true;
  config.run_file = run_path;
  REQUIRE(cmd_evaluate(config) == 0);

  const auto report = read_json(config.out_dir / "report.json");
  for (const auto& row : report["per_event"]) {
    if (row["event_id"] == "evt-fire") {
      CHECK(row["nDCG"] == doctest::Approx(0.9197207891481876).epsilon(1e-9));
    }
    if (row["event_id"] == "evt-vote") {
      CHECK(row["nDCG"] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("llm grounding judges claims against trace evidence") {
  AppConfig config = base_config();
  config.runs_dir = fresh_dir("cag_llm_g_runs");
  config.out_dir = fresh_dir("cag_llm_g_report");
  config.grounding = "llm";

  engine::RunArtifact artifact;
  artifact.article.event_id = "evt-fire";
  artifact.article.body = "The spire collapsed.";
  artifact.article.provenance.config.method = engine::Method::Cag0;
  engine::SummaryTrace trace;
  trace.video_id = "vid-fire-1";
  trace.generic_summary = "footage of the spire collapsing";
  artifact.traces.push_back(trace);
  engine::write_run_artifact(config.runs_dir, artifact);

  const auto script_path = fs::temp_directory_path() / "cag_llm_g_script.json";
  std::ofstream(script_path) << json{
      {"rules", json::array({
          {{"role", "EXTRACTOR"},
           {"match", ""},
           {"replies", json::array({"[{\"claim\":\"The spire collapsed\"}]"})},
           {"repeat_last", true}},
          {{"role", "JUDGE"},
           {"match", "footage of the spire"},
           {"replies", json::array({"YES"})},
           {"repeat_last", true}},
      })}}.dump();
  config.mock_script = script_path;

  REQUIRE(cmd_evaluate(config) == 0);
  const auto report = read_json(config.out_dir / "report.json");
  CHECK(report["judge_kind"] == "LLM_JUDGE");
  CHECK(report["per_event"][0]["G"] == doctest::Approx(1.0));
}

TEST_CASE("external scorer fills BS/AS columns and records the version") {
  httplib::Server server;
  server.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
    const auto body = json::parse(req.body);
    const double score = body["scorer"] == "BERTSCORE" ? 0.9 : 0.4;
    res.set_content(json{{"score", score}, {"version", "stub-9"}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  AppConfig config = base_config();
  config.mock_script.clear();
  config.runs_dir = fresh_dir("cag_scorer_runs");
  config.out_dir = fresh_dir("cag_scorer_report");
  config.scorer_url = "http://127.0.0.1:" + std::to_string(port);

  engine::RunArtifact artifact;
  artifact.article.event_id = "evt-fire";
  artifact.article.body = "A fire.";
  artifact.article.provenance.config.method = engine::Method::Concat0;
  engine::write_run_artifact(config.runs_dir, artifact);

  REQUIRE(cmd_evaluate(config) == 0);
  server.stop();
  thread.join();

  const auto report = read_json(config.out_dir / "report.json");
  CHECK(report["per_event"][0]["BS"] == doctest::Approx(0.9));
  CHECK(report["per_event"][0]["AS"] == doctest::Approx(0.4));
  CHECK(report["scorer_version"] == "stub-9");
}

TEST_CASE("cmd_ndcg scores a run file against corpus qrels") {
  AppConfig config = base_config();
  const auto run_path = fs::temp_directory_path() / "cag_app_run.txt";
  std::ofstream(run_path) << "evt-fire Q0 vid-fire-1 1 3.0 tag\n"
                          << "evt-fire Q0 vid-vote-1 2 2.0 tag\n"
                          << "evt-fire Q0 vid-fire-2 3 1.0 tag\n";
  config.run_file = run_path;
  const auto json_out = fs::temp_directory_path() / "cag_app_ndcg.json";
  REQUIRE(cmd_ndcg(config, json_out) == 0);
  const auto report = read_json(json_out);
  // Relevant {vid-fire-1, vid-fire-2} at ranks 1 and 3:
  // DCG = 1 + 1/log2(4) = 1.5, IDCG = 1 + 1/log2(3).
  CHECK(report["per_event"]["evt-fire"] ==
        doctest::Approx(0.9197207891481876).epsilon(1e-9));
}
