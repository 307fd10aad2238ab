#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/verifier.hpp"

using namespace vsrag;

namespace {

std::vector<ScoredCandidate> table(std::vector<double> rel, std::vector<double> align) {
  std::vector<ScoredCandidate> out;
  for (std::size_t i = 0; i < rel.size(); ++i) {
    ScoredCandidate c;
    c.doc_id = "doc" + std::to_string(i + 1);
    c.ordinal = i;
    c.scores.reliability = rel[i];
    c.scores.alignment = align.empty() ? 0.0 : align[i];
    c.scores.reliability_scored = true;
    c.scores.alignment_scored = !align.empty();
    out.push_back(c);
  }
  return out;
}

SelectionStrategy strat(StrategyKind k, double delta = 0.05, std::uint64_t seed = 0) { return {k, delta, seed}; }

EmbeddingVector unit(std::vector<float> v) { return normalize_embedding(std::span<const float>(v)); }

}  // namespace

TEST(Reliability, DirectFormula) {
  EXPECT_DOUBLE_EQ(read_reliability(std::vector<TokenProbability>{{"Yes", 0.8}, {"No", 0.2}}).reliability, 0.8);
  EXPECT_DOUBLE_EQ(read_reliability(std::vector<TokenProbability>{{"Yes", 0.5}, {"No", 0.5}}).reliability, 0.5);
}

TEST(Reliability, VariantTokensAreSummed) {
  const auto r = read_reliability(
      std::vector<TokenProbability>{{" yes", 0.30}, {"Yes", 0.15}, {"No", 0.05}, {"no", 0.05}, {"Maybe", 0.2}});
  EXPECT_NEAR(r.p_yes, 0.45, 1e-15);
  EXPECT_NEAR(r.p_no, 0.10, 1e-15);
  EXPECT_NEAR(r.reliability, 0.45 / 0.55, 1e-12);
  EXPECT_FALSE(r.unscored);
}

TEST(Reliability, MissingTokensFallBackToHalf) {
  const auto r = read_reliability(std::vector<TokenProbability>{{"Perhaps", 0.9}});
  EXPECT_TRUE(r.unscored);
  EXPECT_DOUBLE_EQ(r.reliability, 0.5);
  EXPECT_TRUE(read_reliability({}).unscored);
}

TEST(Reliability, MonotoneInYesForFixedNo) {
  double prev = -1.0;
  for (double y = 0.01; y < 0.9; y += 0.01) {
    const double r = read_reliability(std::vector<TokenProbability>{{"Yes", y}, {"No", 0.1}}).reliability;
    EXPECT_GT(r, prev);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    prev = r;
  }
}

TEST(HighSet, Examples) {
  EXPECT_EQ(high_reliability_set(std::vector<double>{0.9, 0.87, 0.5}, 0.05), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(high_reliability_set(std::vector<double>{0.3, 0.9, 0.5}, 0.0), (std::vector<std::size_t>{1}));
  EXPECT_EQ(high_reliability_set(std::vector<double>{0.4, 0.4, 0.4}, 0.0), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(high_reliability_set(std::vector<double>{}, 0.05), ConfigError);
  EXPECT_THROW(high_reliability_set(std::vector<double>{0.5}, -0.1), ConfigError);
}

TEST(Alignment, MaxOverKeyframes) {
  const auto e1 = unit({1, 0, 0});
  EXPECT_NEAR(alignment_score(e1, std::vector<EmbeddingVector>{e1, e1}), 1.0, 1e-7);
  EXPECT_NEAR(alignment_score(unit({0, 1, 0}), std::vector<EmbeddingVector>{e1, unit({0, 0, 1})}), 0.0, 1e-7);
  auto at = [](float c) { return unit({c, std::sqrt(1.0f - c * c), 0}); };
  EXPECT_NEAR(alignment_score(e1, std::vector<EmbeddingVector>{at(0.3f), at(0.72f), at(0.5f)}), 0.72, 1e-6);
  EXPECT_THROW(alignment_score(e1, std::vector<EmbeddingVector>{}), ConfigError);
}

TEST(Alignment, EmbedsEntityThroughBackend) {
  MockFixtures f;
  f.dim = 3;
  f.embed_fixtures["cuttlefish"] = {1, 0, 0};
  f.embed_fixtures["squid"] = {0, 1, 0};
  f.latency["embed"] = LatencyModel{0, 0, 5};
  MockBackend m(f);
  DraftCandidate c;
  c.entity = "cuttlefish";
  const std::vector<EmbeddingVector> frames{unit({1, 0, 0})};
  const auto a = alignment_score(c, frames, m);
  EXPECT_NEAR(a.alignment, 1.0, 1e-7);
  EXPECT_DOUBLE_EQ(a.wall_time_ms, 5.0);
  c.entity = "squid";
  EXPECT_NEAR(alignment_score(c, frames, m).alignment, 0.0, 1e-7);
}

TEST(Select, TwoStagePrefersAlignmentWithinHighSet) {
  const auto s = select_final(table({0.9, 0.88}, {0.3, 0.7}), strat(StrategyKind::two_stage));
  EXPECT_EQ(s.selected, 1u);
  EXPECT_EQ(s.doc_id, "doc2");
}

TEST(Select, TwoStageFiltersUnreliableFirst) {
  const auto s = select_final(table({0.9, 0.5}, {0.3, 0.99}), strat(StrategyKind::two_stage));
  EXPECT_EQ(s.selected, 0u);
  EXPECT_FALSE(s.audit[1].scores.in_high_set);
  EXPECT_NE(std::find(s.audit[1].flags.begin(), s.audit[1].flags.end(), "filtered_reliability"), s.audit[1].flags.end());
  EXPECT_NE(std::find(s.audit[0].flags.begin(), s.audit[0].flags.end(), "selected"), s.audit[0].flags.end());
}

TEST(Select, SingleCandidateAlwaysWins) {
  for (StrategyKind k : kAllStrategies) {
    EXPECT_EQ(select_final(table({0.3}, {0.1}), strat(k, 0.05, 12345)).selected, 0u);
  }
}

TEST(Select, StrategyDefinitions) {
  const auto t = table({0.90, 0.86, 0.40}, {0.20, 0.60, 0.95});
  EXPECT_EQ(select_final(t, strat(StrategyKind::reliability_only)).selected, 0u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::self_consistent)).selected, 0u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::alignment_only)).selected, 2u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::two_stage)).selected, 1u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::addition)).selected, 1u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::invert, 0.4)).selected, 1u);
  EXPECT_EQ(select_final(t, strat(StrategyKind::invert, 0.0)).selected, 2u);
}

TEST(Select, TiesGoToLowestOrdinal) {
  auto t = table({0.7, 0.7, 0.7}, {0.5, 0.5, 0.5});
  std::swap(t[0].ordinal, t[2].ordinal);  // positions keep ids, ordinals reversed
  for (StrategyKind k : {StrategyKind::two_stage, StrategyKind::reliability_only, StrategyKind::alignment_only,
                         StrategyKind::addition, StrategyKind::invert}) {
    EXPECT_EQ(select_final(t, strat(k)).selected, 2u) << to_string(k);
  }
}

TEST(Select, RandomIsSeededAndCoversAllCandidates) {
  const auto t = table({0.1, 0.2, 0.3, 0.4}, {0.1, 0.2, 0.3, 0.4});
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = select_final(t, strat(StrategyKind::random, 0.05, seed));
    EXPECT_EQ(a.selected, select_final(t, strat(StrategyKind::random, 0.05, seed)).selected);
    seen.insert(a.selected);
  }
  EXPECT_EQ(seen.size(), 4u);
}

TEST(Select, AlignmentScalingKeepsChoice) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> rel(5), al(5);
    for (auto& x : rel) x = u(rng);
    for (auto& x : al) x = u(rng);
    auto scaled = al;
    const double k = 0.1 + 5.0 * u(rng);
    for (auto& x : scaled) x *= k;
    for (StrategyKind kind : {StrategyKind::two_stage, StrategyKind::alignment_only}) {
      EXPECT_EQ(select_final(table(rel, al), strat(kind)).selected, select_final(table(rel, scaled), strat(kind)).selected);
    }
  }
}

TEST(Select, TwoStageAtZeroDeltaMatchesReliabilityOnly) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> rel(4), al(4);
    for (auto& x : rel) x = u(rng);
    for (auto& x : al) x = u(rng);
    EXPECT_EQ(select_final(table(rel, al), strat(StrategyKind::two_stage, 0.0)).selected,
              select_final(table(rel, al), strat(StrategyKind::reliability_only)).selected);
  }
}

TEST(Select, StrategyNamesRoundTrip) {
  for (StrategyKind k : kAllStrategies) EXPECT_EQ(parse_strategy(to_string(k)), k);
  EXPECT_THROW(parse_strategy("best"), ConfigError);
}

namespace {

struct VerifyFixture : ::testing::Test {
  std::vector<Frame> video{solid_frame(0, 4, 4, 200, 10, 10)};
  std::vector<ImagePayload> images{frame_payload(video[0])};
  std::vector<EmbeddingVector> keyframe_embeddings{normalize_embedding(std::span<const double>(vsrag::testing::basis(4, 0)))};
  vsrag::testing::Script script;
  std::vector<DraftCandidate> candidates;
  const std::string question = "What animal is this?";

  void SetUp() override {
    script.fixtures.dim = 4;
    script.fixtures.latency["verifier"] = LatencyModel{0.0, 0.0, 100.0};
    script.fixtures.latency["embed"] = LatencyModel{0.0, 0.0, 5.0};
    add("a", "cuttlefish", "Cuttlefish hover.", "a cuttlefish", 0.88, {1, 0, 0, 0});
    add("b", "squid", "Squid jet.", "a squid", 0.90, {0, 1, 0, 0});
  }
  void add(const std::string& id, const std::string& entity, const std::string& rationale, const std::string& answer,
           double rel, std::vector<double> v) {
    DraftCandidate c;
    c.doc_id = id;
    c.entity = entity;
    c.rationale = rationale;
    c.answer = answer;
    c.ordinal = candidates.size();
    candidates.push_back(c);
    script.verdict(images, question, answer, entity, rationale, rel);
    script.pin(entity, std::move(v));
  }
};

}  // namespace

TEST_F(VerifyFixture, TwoStageScoresEveryCandidate) {
  MockBackend m(script.fixtures);
  const auto out = verify_candidates(question, images, candidates, keyframe_embeddings, script.templates, m, m,
                                     strat(StrategyKind::two_stage));
  EXPECT_EQ(out.selection.doc_id, "a");
  EXPECT_NEAR(out.scored[0].scores.reliability, 0.88, 1e-12);
  EXPECT_NEAR(out.scored[1].scores.alignment, 0.0, 1e-7);
  EXPECT_TRUE(out.scored[1].scores.alignment_scored);
  EXPECT_DOUBLE_EQ(out.reliability_ms, 100.0);
  EXPECT_DOUBLE_EQ(out.alignment_ms, 10.0);
}

TEST_F(VerifyFixture, ReliabilityOnlySkipsAlignment) {
  MockBackend m(script.fixtures);
  const auto out = verify_candidates(question, images, candidates, keyframe_embeddings, script.templates, m, m,
                                     strat(StrategyKind::reliability_only));
  EXPECT_EQ(out.selection.doc_id, "b");
  EXPECT_FALSE(out.scored[0].scores.alignment_scored);
  EXPECT_DOUBLE_EQ(out.alignment_ms, 0.0);
}

TEST_F(VerifyFixture, SelfConsistentUsesAnswerOnlyPrompt) {
  script.fixtures.chat_fixtures[fixture_key(self_consistent_request(images, question, "a cuttlefish", script.templates))] =
      vsrag::testing::yes_no_fixture(0.95, 0.05);
  script.fixtures.chat_fixtures[fixture_key(self_consistent_request(images, question, "a squid", script.templates))] =
      vsrag::testing::yes_no_fixture(0.40, 0.60);
  MockBackend m(script.fixtures);
  const auto out = verify_candidates(question, images, candidates, keyframe_embeddings, script.templates, m, m,
                                     strat(StrategyKind::self_consistent));
  EXPECT_EQ(out.selection.doc_id, "a");
  EXPECT_NEAR(out.scored[0].scores.reliability, 0.95, 1e-12);
  const auto req = self_consistent_request(images, question, "a squid", script.templates);
  EXPECT_EQ(req.messages.back().text.find("Squid jet."), std::string::npos);
  EXPECT_EQ(req.max_new_tokens, 1);
  EXPECT_TRUE(req.want_first_token_distribution);
  EXPECT_EQ(req.model_tag, ModelTag::verifier);
}

TEST_F(VerifyFixture, UnscoredCandidateStillParticipates) {
  script.fixtures.chat_fixtures[fixture_key(
      verify_request(images, question, "a squid", "squid", "Squid jet.", script.templates))] =
      ChatFixture{std::nullopt, std::nullopt, std::nullopt, std::vector<TokenProbability>{{"Hmm", 1.0}}};
  MockBackend m(script.fixtures);
  const auto out = verify_candidates(question, images, candidates, keyframe_embeddings, script.templates, m, m,
                                     strat(StrategyKind::reliability_only));
  EXPECT_TRUE(out.scored[1].scores.unscored);
  EXPECT_DOUBLE_EQ(out.scored[1].scores.reliability, 0.5);
  EXPECT_EQ(out.selection.doc_id, "a");
  const auto& flags = out.selection.audit[1].flags;
  EXPECT_NE(std::find(flags.begin(), flags.end(), "unscored"), flags.end());
}

TEST_F(VerifyFixture, VerifierFailurePropagates) {
  const auto key = fixture_key(verify_request(images, question, "a squid", "squid", "Squid jet.", script.templates));
  vsrag::testing::FailingBackend verifier(std::make_shared<MockBackend>(script.fixtures), {key});
  MockBackend embedder(script.fixtures);
  EXPECT_THROW(verify_candidates(question, images, candidates, keyframe_embeddings, script.templates, verifier,
                                 embedder, strat(StrategyKind::two_stage)),
               BackendError);
}
