#include <gtest/gtest.h>

#include "test_support.hpp"
#include "vsrag/draft.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/keyframe.hpp"

using namespace vsrag;
using vsrag::testing::Script;

namespace {

const std::string kQuestion = "Where does the bird in the video live?";

struct DraftFixture : ::testing::Test {
  std::vector<Frame> video{solid_frame(0, 4, 4, 250, 250, 250), solid_frame(1, 4, 4, 10, 10, 10)};
  KeyframeSet keyframes = extract_keyframes(video);
  std::vector<ImagePayload> images = keyframe_payloads(keyframes, 8);
  Script script;

  RetrievalResult doc(const std::string& id, const std::string& text, double score = 0.5) {
    return RetrievalResult{Document{id, text, EmbeddingVector{{1.0f}}, {}}, score, 0};
  }
  std::shared_ptr<MockBackend> backend() { return std::make_shared<MockBackend>(script.fixtures); }
};

}  // namespace

TEST_F(DraftFixture, ScriptedChainProducesTriple) {
  const std::string text = "Emperor penguins breed on Antarctic sea ice.";
  script.chain(images, kQuestion, text, "emperor penguin", "Emperor penguins breed in Antarctica.", "Antarctica");
  auto m = backend();
  const auto c = draft_one(keyframes, kQuestion, doc("penguin-1", text).doc, 0, script.templates, *m);
  EXPECT_EQ(c.doc_id, "penguin-1");
  EXPECT_EQ(c.entity, "emperor penguin");
  EXPECT_EQ(c.rationale, "Emperor penguins breed in Antarctica.");
  EXPECT_EQ(c.answer, "Antarctica");
  EXPECT_EQ(c.ordinal, 0u);
  const auto again = draft_one(keyframes, kQuestion, doc("penguin-1", text).doc, 0, script.templates, *m);
  EXPECT_EQ(again.answer, c.answer);
  EXPECT_EQ(again.step_ms, c.step_ms);
}

TEST_F(DraftFixture, AnswerStepConditionsOnRationaleNotDocument) {
  // Two documents lead to the same entity and rationale; the answer step sees only those,
  // so both chains must give the rationale-conditioned answer.
  const std::string text_a = "Document A says the species lives on Antarctic ice.";
  const std::string text_b = "Document B claims the species lives in South Africa.";
  const std::string rationale = "The emperor penguin lives in Antarctica.";
  script.chain(images, kQuestion, text_a, "emperor penguin", rationale, "Antarctica");
  script.chain(images, kQuestion, text_b, "emperor penguin", rationale, "Antarctica");
  // A document-conditioned answer step would need a key containing text_b; make that answer differ.
  auto m = backend();
  const auto a = draft_one(images, kQuestion, doc("a", text_a).doc, 0, script.templates, *m);
  const auto b = draft_one(images, kQuestion, doc("b", text_b).doc, 1, script.templates, *m);
  EXPECT_EQ(a.answer, "Antarctica");
  EXPECT_EQ(b.answer, "Antarctica");
  const auto step3 = answer_request(images, kQuestion, "emperor penguin", rationale, script.templates, script.limits);
  EXPECT_EQ(step3.messages.back().text.find(text_b), std::string::npos);
  EXPECT_NE(step3.messages.back().text.find(rationale), std::string::npos);
  const auto step2 =
      rationale_request(images, kQuestion, "emperor penguin", text_b, script.templates, script.limits);
  EXPECT_NE(step2.messages.back().text.find(text_b), std::string::npos);
}

TEST_F(DraftFixture, EveryStepUsesTheDrafterTag) {
  const auto r1 = entity_request(images, "doc", script.templates, script.limits);
  const auto r2 = rationale_request(images, kQuestion, "e", "doc", script.templates, script.limits);
  const auto r3 = answer_request(images, kQuestion, "e", "r", script.templates, script.limits);
  for (const auto* r : {&r1, &r2, &r3}) {
    EXPECT_EQ(r->model_tag, ModelTag::drafter);
    EXPECT_EQ(r->images, images);
  }
  EXPECT_EQ(r1.max_new_tokens, 16);
  EXPECT_EQ(r2.max_new_tokens, 64);
  EXPECT_EQ(r3.max_new_tokens, 32);
}

TEST_F(DraftFixture, EmptyOutputIsAStepError) {
  script.chain(images, kQuestion, "text", "", "r", "a");
  auto m = backend();
  try {
    draft_one(images, kQuestion, doc("d", "text").doc, 0, script.templates, *m);
    FAIL() << "expected DraftStepError";
  } catch (const DraftStepError& e) {
    EXPECT_EQ(e.step(), DraftStep::entity);
  }
}

TEST_F(DraftFixture, FailedChainIsIsolated) {
  std::vector<RetrievalResult> docs;
  for (int i = 0; i < 3; ++i) {
    const std::string text = "document number " + std::to_string(i);
    docs.push_back(doc("d" + std::to_string(i), text));
    script.chain(images, kQuestion, text, "entity " + std::to_string(i), "rationale " + std::to_string(i),
                 "answer " + std::to_string(i));
  }
  const auto failing = fixture_key(
      rationale_request(images, kQuestion, "entity 1", "document number 1", script.templates, script.limits));
  vsrag::testing::FailingBackend drafter(backend(), {failing});
  const auto batch = draft_all(images, kQuestion, docs, script.templates, drafter);
  ASSERT_EQ(batch.candidates.size(), 2u);
  EXPECT_EQ(batch.candidates[0].doc_id, "d0");
  EXPECT_EQ(batch.candidates[1].doc_id, "d2");
  EXPECT_EQ(batch.candidates[1].ordinal, 2u);
  ASSERT_EQ(batch.failures.size(), 1u);
  EXPECT_EQ(batch.failures[0].doc_id, "d1");
  EXPECT_EQ(batch.failures[0].step, DraftStep::rationale);
}

TEST_F(DraftFixture, AllChainsFailingRaisesNoDrafts) {
  std::vector<RetrievalResult> docs{doc("d0", "zero"), doc("d1", "one")};
  std::vector<std::string> failing;
  for (const auto& d : docs) failing.push_back(fixture_key(entity_request(images, d.doc.text, script.templates, script.limits)));
  vsrag::testing::FailingBackend drafter(backend(), failing);
  EXPECT_THROW(draft_all(images, kQuestion, docs, script.templates, drafter), NoDraftsError);
}

TEST_F(DraftFixture, CriticalPathIsTheLongestChain) {
  // Fixed 100 ms per call: every chain costs 300 ms.
  script.fixtures.latency["drafter"] = LatencyModel{0.0, 0.0, 100.0};
  std::vector<RetrievalResult> docs{doc("a", "alpha"), doc("b", "beta"), doc("c", "gamma")};
  auto m = backend();
  DraftOptions opts;
  opts.max_parallel = 3;
  const auto parallel = draft_all(images, kQuestion, docs, script.templates, *m, opts);
  EXPECT_DOUBLE_EQ(parallel.critical_path_ms, 300.0);
  opts.max_parallel = 1;
  EXPECT_DOUBLE_EQ(draft_all(images, kQuestion, docs, script.templates, *m, opts).critical_path_ms, 900.0);
  opts.max_parallel = 2;
  EXPECT_DOUBLE_EQ(draft_all(images, kQuestion, docs, script.templates, *m, opts).critical_path_ms, 600.0);
}

TEST_F(DraftFixture, SingleDocumentGivesOrdinalZero) {
  auto m = backend();
  const auto batch = draft_all(keyframes, kQuestion, std::vector<RetrievalResult>{doc("only", "text")},
                               script.templates, *m);
  ASSERT_EQ(batch.candidates.size(), 1u);
  EXPECT_EQ(batch.candidates[0].ordinal, 0u);
}

TEST_F(DraftFixture, OutputIndependentOfMaxParallel) {
  std::vector<RetrievalResult> docs;
  for (int i = 0; i < 7; ++i) docs.push_back(doc("d" + std::to_string(i), "text " + std::to_string(i)));
  auto m = backend();
  DraftOptions opts;
  opts.max_parallel = 1;
  const auto base = draft_all(images, kQuestion, docs, script.templates, *m, opts);
  for (std::size_t p : {2u, 3u, 8u}) {
    opts.max_parallel = p;
    const auto other = draft_all(images, kQuestion, docs, script.templates, *m, opts);
    ASSERT_EQ(other.candidates.size(), base.candidates.size());
    for (std::size_t i = 0; i < base.candidates.size(); ++i) {
      EXPECT_EQ(other.candidates[i].doc_id, base.candidates[i].doc_id);
      EXPECT_EQ(other.candidates[i].entity, base.candidates[i].entity);
      EXPECT_EQ(other.candidates[i].rationale, base.candidates[i].rationale);
      EXPECT_EQ(other.candidates[i].answer, base.candidates[i].answer);
    }
  }
}

TEST_F(DraftFixture, RejectsBadArguments) {
  auto m = backend();
  EXPECT_THROW(draft_all(images, kQuestion, std::vector<RetrievalResult>{}, script.templates, *m), ConfigError);
  DraftOptions zero;
  zero.max_parallel = 0;
  EXPECT_THROW(draft_all(images, kQuestion, std::vector<RetrievalResult>{doc("a", "t")}, script.templates, *m, zero),
               ConfigError);
  EXPECT_THROW(draft_one(images, "", doc("a", "t").doc, 0, script.templates, *m), ConfigError);
}

TEST(Templates, DefaultsValidateAndVersionTracksText) {
  auto t = PromptTemplateSet::defaults();
  EXPECT_NO_THROW(t.validate());
  const auto v = t.version();
  EXPECT_EQ(v.rfind("v1-", 0), 0u);
  t.answer += " ";
  EXPECT_NE(t.version(), v);
}

TEST(Templates, ParseOverridesSectionsAndChecksPlaceholders) {
  const auto t = PromptTemplateSet::parse("[label]\nexp\n[answer]\nQ: {question} E: {entity} R: {rationale}\n");
  EXPECT_EQ(t.label, "exp");
  EXPECT_EQ(t.answer, "Q: {question} E: {entity} R: {rationale}");
  EXPECT_EQ(t.entity, PromptTemplateSet::defaults().entity);
  EXPECT_THROW(PromptTemplateSet::parse("[answer]\nQ: {question} D: {document}\n").validate(), ConfigError);
  EXPECT_EQ(render("{a} and {b}", {{"a", "x"}, {"b", "y"}}), "x and y");
}

TEST(Templates, KeyframePayloadsAreCappedAndStrided) {
  KeyframeSet ks;
  for (std::size_t i = 0; i < 20; ++i) ks.frames.push_back(solid_frame(i, 2, 2, static_cast<std::uint8_t>(i), 0, 0));
  const auto p = keyframe_payloads(ks, 8);
  ASSERT_EQ(p.size(), 8u);
  EXPECT_EQ(p[0], frame_payload(ks.frames[0]));
  EXPECT_EQ(p[1], frame_payload(ks.frames[2]));
  EXPECT_EQ(p[7], frame_payload(ks.frames[17]));
}
