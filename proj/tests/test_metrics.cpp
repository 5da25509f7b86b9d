#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include <httplib.h>

#include "cag/metrics.hpp"
#include "cag/mock_gateway.hpp"
#include "cag/text.hpp"

using namespace cag;
using namespace cag::metrics;

namespace {

std::string random_token_string(std::mt19937& rng, std::size_t max_tokens) {
  static const std::vector<std::string> vocab = {"fire",  "spire", "the",   "collapsed",
                                                 "paris", "vote",  "storm", "crowd"};
  std::uniform_int_distribution<std::size_t> count(0, max_tokens);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

std::string random_word(std::mt19937& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> ch('a', 'h');
  std::string out;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>(ch(rng)));
  return out;
}

// Exhaustive LCS: longest subsequence of `a` that is also a subsequence of `b`.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (const auto& token : b) {
      if (j < sub.size() && token == sub[j]) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

// Exact similarity on the 1/840 grid: every pair similarity here is
// (maxlen - lev)/maxlen with maxlen <= 8, and 840 = lcm(1..8). Integer
// units make "total weight equals the brute-force maximum" a statement
// about rationals, free of float summation order.
long long sim_units(const std::string& a, const std::string& b) {
  const std::string na = text::normalize_span(a);
  const std::string nb = text::normalize_span(b);
  const long long longest = static_cast<long long>(std::max(na.size(), nb.size()));
  REQUIRE(longest <= 8);
  if (longest == 0) return 840;
  const long long lev = static_cast<long long>(levenshtein(na, nb));
  return (longest - lev) * (840 / longest);
}

// Maximum assignment weight (in 1/840 units) by enumerating all
// permutations of the padded square instance.
long long brute_force_alignment_units(const std::vector<std::string>& pred,
                                      const std::vector<std::string>& ref) {
  const std::size_t n = std::max(pred.size(), ref.size());
  if (n == 0) return 0;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  long long best = 0;
  do {
    long long total = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const std::size_t j = perm[i];
      if (j < ref.size()) total += sim_units(pred[i], ref[j]);
    }
    best = std::max(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("rouge_n identity and hand oracle") {
  CHECK(rouge_n("a fire broke out", "a fire broke out", 1).f1 == doctest::Approx(1.0));

  // pred "the spire collapsed" vs ref "the cathedral spire collapsed":
  // unigram overlap 3, |pred| 3, |ref| 4 -> P 1, R 0.75, F1 6/7.
  const auto score = rouge_n("the spire collapsed", "the cathedral spire collapsed", 1);
  CHECK(score.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(score.recall == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(score.f1 == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
  CHECK_FALSE(score.degenerate);
}

TEST_CASE("rouge_n empty input is degenerate zeros") {
  const auto score = rouge_n("", "the spire", 1);
  CHECK(score.precision == 0.0);
  CHECK(score.recall == 0.0);
  CHECK(score.f1 == 0.0);
  CHECK(score.degenerate);
}

TEST_CASE("rouge_2 counts clipped bigrams") {
  // pred {a b, b c}, ref {a b, b d}: overlap 1.
  const auto score = rouge_n("a b c", "a b d", 2);
  CHECK(score.precision == doctest::Approx(0.5));
  CHECK(score.recall == doctest::Approx(0.5));
  CHECK(score.f1 == doctest::Approx(0.5));

  // Clipping: "a a a" vs "a" overlaps once, not three times.
  const auto clipped = rouge_n("a a a", "a", 1);
  CHECK(clipped.precision == doctest::Approx(1.0 / 3.0));
  CHECK(clipped.recall == doctest::Approx(1.0));
}

TEST_CASE("rouge symmetry: P(pred, ref) == R(ref, pred)") {
  std::mt19937 rng(7);
  for (int i = 0; i < 50; ++i) {
    const std::string a = random_token_string(rng, 8);
    const std::string b = random_token_string(rng, 8);
    for (int n = 1; n <= 2; ++n) {
      CHECK(rouge_n(a, b, n).precision == doctest::Approx(rouge_n(b, a, n).recall));
    }
    CHECK(rouge_l(a, b).precision == doctest::Approx(rouge_l(b, a).recall));
  }
}

TEST_CASE("rouge_l hand oracle") {
  CHECK(rouge_l("same text here", "same text here").f1 == doctest::Approx(1.0));

  // "a b c d" vs "a x c": LCS 2 -> P 0.5, R 2/3, F1 4/7.
  const auto score = rouge_l("a b c d", "a x c");
  CHECK(score.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(score.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(score.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-9));

  CHECK(rouge_l("", "a b").degenerate);
}

TEST_CASE("rouge_l matches exhaustive LCS on short strings") {
  std::mt19937 rng(13);
  std::uniform_int_distribution<std::size_t> len(0, 4);
  std::uniform_int_distribution<int> letter(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a, b;
    const std::size_t la = len(rng), lb = len(rng);
    for (std::size_t i = 0; i < la; ++i) a.push_back(letter(rng) ? "x" : "y");
    for (std::size_t i = 0; i < lb; ++i) b.push_back(letter(rng) ? "x" : "y");
    std::string sa, sb;
    for (const auto& t : a) sa += t + " ";
    for (const auto& t : b) sb += t + " ";
    const auto score = rouge_l(sa, sb);
    if (a.empty() || b.empty()) {
      CHECK(score.degenerate);
      continue;
    }
    const double lcs = score.precision * static_cast<double>(a.size());
    CHECK(lcs == doctest::Approx(static_cast<double>(brute_lcs(a, b))).epsilon(1e-9));
  }
}

TEST_CASE("levenshtein and normalized edit distance") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(normalized_edit_distance("kitten", "sitting") ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(normalized_edit_distance("same", "same") == 0.0);
  CHECK(normalized_edit_distance("Paris", "paris") == 0.0);
  CHECK(normalized_edit_distance("", "") == 0.0);
  CHECK(normalized_edit_distance("", "abc") == doctest::Approx(1.0));
}

TEST_CASE("normalized edit distance is a bounded symmetric surrogate") {
  std::mt19937 rng(21);
  for (int i = 0; i < 200; ++i) {
    const std::string a = random_word(rng, 8);
    const std::string b = random_word(rng, 8);
    const double d = normalized_edit_distance(a, b);
    CHECK(d == normalized_edit_distance(b, a));
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK((d == 0.0) == (text::normalize_span(a) == text::normalize_span(b)));
  }
}

TEST_CASE("align_answers trivial cases") {
  const auto identity = align_answers({"a"}, {"a"});
  REQUIRE(identity.pairs.size() == 1);
  CHECK(identity.pairs[0].pred_index == 0);
  CHECK(identity.pairs[0].ref_index == 0);
  CHECK(identity.pairs[0].similarity == doctest::Approx(1.0));
  CHECK(identity.unmatched_pred.empty());
  CHECK(identity.unmatched_ref.empty());

  // "paris" matches "Paris" exactly after normalization; "france" is left out.
  const auto partial = align_answers({"paris", "france"}, {"Paris"});
  REQUIRE(partial.pairs.size() == 1);
  CHECK(partial.pairs[0].pred_index == 0);
  CHECK(partial.pairs[0].ref_index == 0);
  CHECK(partial.pairs[0].similarity == doctest::Approx(1.0));
  REQUIRE(partial.unmatched_pred.size() == 1);
  CHECK(partial.unmatched_pred[0] == 1);

  const auto empty = align_answers({}, {});
  CHECK(empty.pairs.empty());

  const auto one_sided = align_answers({}, {"x"});
  CHECK(one_sided.pairs.empty());
  REQUIRE(one_sided.unmatched_ref.size() == 1);
}

TEST_CASE("align_answers equals the exhaustive assignment maximum") {
  std::mt19937 rng(42);
  std::uniform_int_distribution<std::size_t> size(0, 6);
  for (int instance = 0; instance < 200; ++instance) {
    std::vector<std::string> pred, ref;
    const std::size_t np = size(rng), nr = size(rng);
    for (std::size_t i = 0; i < np; ++i) pred.push_back(random_word(rng, 8));
    for (std::size_t i = 0; i < nr; ++i) ref.push_back(random_word(rng, 8));

    const auto alignment = align_answers(pred, ref);
    long long impl_units = 0;
    for (const auto& pair : alignment.pairs) {
      impl_units += sim_units(pred[pair.pred_index], ref[pair.ref_index]);
    }
    CHECK(impl_units == brute_force_alignment_units(pred, ref));
    // The reported float weight agrees with the chosen matching.
    CHECK(alignment.total_weight() ==
          doctest::Approx(static_cast<double>(impl_units) / 840.0).epsilon(1e-9));

    // The pairs really form a matching.
    std::vector<bool> used_pred(pred.size(), false), used_ref(ref.size(), false);
    for (const auto& pair : alignment.pairs) {
      CHECK_FALSE(used_pred[pair.pred_index]);
      CHECK_FALSE(used_ref[pair.ref_index]);
      used_pred[pair.pred_index] = true;
      used_ref[pair.ref_index] = true;
    }
  }
}

TEST_CASE("question bank loads and hashes") {
  const auto bank = QuestionBank::load(std::string(CAG_SOURCE_DIR) + "/data/questions.json");
  CHECK(bank.questions_by_type.size() == 7);
  CHECK_FALSE(bank.questions_for("election").empty());
  CHECK(bank.content_hash().size() == 16);
  CHECK_THROWS_AS(bank.questions_for("nonsense"), UnknownEventType);
}

TEST_CASE("arg_f1 identity, hand case and failure paths") {
  QuestionBank bank;
  bank.questions_by_type["election"] = {"who won?", "what margin?"};

  SUBCASE("identical answer lists give 1.0 on both scores") {
    gateway::MockScript script;
    script.rules.push_back({gateway::Role::Extractor, "", {"[\"mara voss\"]"}, true});
    gateway::MockGateway gw(std::move(script));
    const auto score = arg_f1("pred", "ref", "election", bank, gw, "{question} {article}");
    CHECK(score.defined);
    CHECK(score.edit_f1 == doctest::Approx(1.0));
    CHECK(score.exact_f1 == doctest::Approx(1.0));
    CHECK(score.questions_scored == 2);
  }

  SUBCASE("pred [paris, france] vs ref [paris] gives edit F1 of 2/3") {
    bank.questions_by_type["election"] = {"where?"};
    gateway::MockScript script;
    // First call extracts from pred, second from ref.
    script.rules.push_back(
        {gateway::Role::Extractor, "", {"[\"paris\", \"france\"]", "[\"paris\"]"}, false});
    gateway::MockGateway gw(std::move(script));
    const auto score = arg_f1("pred", "ref", "election", bank, gw, "{question} {article}");
    CHECK(score.defined);
    CHECK(score.edit_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(score.exact_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  }

  SUBCASE("near match scores edit above exact") {
    bank.questions_by_type["election"] = {"who?"};
    gateway::MockScript script;
    script.rules.push_back(
        {gateway::Role::Extractor, "", {"[\"pariss\"]", "[\"paris\"]"}, false});
    gateway::MockGateway gw(std::move(script));
    const auto score = arg_f1("pred", "ref", "election", bank, gw, "{question} {article}");
    CHECK(score.defined);
    CHECK(score.edit_f1 == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
    CHECK(score.exact_f1 == doctest::Approx(0.0));
    CHECK(score.edit_f1 >= score.exact_f1);
  }

  SUBCASE("empty reference answers everywhere leaves the score undefined") {
    gateway::MockScript script;
    script.rules.push_back({gateway::Role::Extractor, "", {"[]"}, true});
    gateway::MockGateway gw(std::move(script));
    const auto score = arg_f1("pred", "ref", "election", bank, gw, "{question} {article}");
    CHECK_FALSE(score.defined);
    CHECK(score.questions_skipped == 2);
  }

  SUBCASE("unusable extractor replies flag the question") {
    bank.questions_by_type["election"] = {"who?"};
    gateway::MockScript script;
    script.rules.push_back({gateway::Role::Extractor, "", {"sorry, I cannot"}, true});
    gateway::MockGateway gw(std::move(script));
    const auto score = arg_f1("pred", "ref", "election", bank, gw, "{question} {article}");
    CHECK_FALSE(score.defined);
    CHECK(score.questions_failed == 1);
  }

  SUBCASE("unknown event type throws") {
    gateway::MockScript script;
    script.rules.push_back({gateway::Role::Extractor, "", {"[]"}, true});
    gateway::MockGateway gw(std::move(script));
    CHECK_THROWS_AS(arg_f1("p", "r", "circus", bank, gw, "{question}"), UnknownEventType);
  }
}

TEST_CASE("extract_answers parses fenced and noisy replies") {
  gateway::MockScript script;
  script.rules.push_back({gateway::Role::Extractor,
                          "",
                          {"Here you go:\n```json\n[\"a\", \"b\"]\n```", "[]"},
                          false});
  gateway::MockGateway gw(std::move(script));
  const auto answers = extract_answers("q", "article", gw, "{question} {article}");
  REQUIRE(answers.has_value());
  CHECK(*answers == std::vector<std::string>{"a", "b"});
  const auto empty = extract_answers("q", "article", gw, "{question} {article}");
  REQUIRE(empty.has_value());
  CHECK(empty->empty());
}

TEST_CASE("external_score talks to the scorer service") {
  httplib::Server server;
  server.Post("/score", [](const httplib::Request& req, httplib::Response& res) {
    res.set_content("{\"score\": 0.5, \"version\": \"stub-1\"}", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const ScorerEndpoint endpoint{"http://127.0.0.1:" + std::to_string(port)};
  const auto result = external_score("pred", "ref", Scorer::BertScore, endpoint);
  CHECK(result.score == doctest::Approx(0.5));
  CHECK(result.version == "stub-1");

  server.stop();
  thread.join();

  // Service gone: transport error.
  CHECK_THROWS_AS(external_score("p", "r", Scorer::AlignScore, endpoint), Transport);
}

TEST_CASE("external_score rejects malformed replies") {
  httplib::Server server;
  server.Post("/score", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const ScorerEndpoint endpoint{"http://127.0.0.1:" + std::to_string(port)};
  CHECK_THROWS_AS(external_score("p", "r", Scorer::BertScore, endpoint), ProtocolViolation);

  server.stop();
  thread.join();
}
