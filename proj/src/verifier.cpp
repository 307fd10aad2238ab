#include "vsrag/verifier.hpp"

#include <algorithm>
#include <cctype>
#include <exception>
#include <limits>

#include "vsrag/errors.hpp"
#include "vsrag/fanout.hpp"
#include "vsrag/hash.hpp"

namespace vsrag {

namespace {

std::string normalized_token(std::string_view token) {
  std::size_t b = 0;
  while (b < token.size() && std::isspace(static_cast<unsigned char>(token[b]))) ++b;
  std::string out(token.substr(b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Index of the best candidate among `pool` by `value`; ties to the lowest ordinal.
template <typename Value>
std::size_t argmax(std::span<const ScoredCandidate> candidates, const std::vector<std::size_t>& pool, Value value) {
  std::size_t best = pool.front();
  for (std::size_t i : pool) {
    const double v = value(candidates[i]);
    const double b = value(candidates[best]);
    if (v > b || (v == b && candidates[i].ordinal < candidates[best].ordinal)) best = i;
  }
  return best;
}

}  // namespace

ReliabilityReading read_reliability(std::span<const TokenProbability> distribution) {
  ReliabilityReading r;
  bool found = false;
  for (const auto& t : distribution) {
    const std::string token = normalized_token(t.token);
    if (token == "yes") {
      r.p_yes += t.prob;
      found = true;
    } else if (token == "no") {
      r.p_no += t.prob;
      found = true;
    }
  }
  const double total = r.p_yes + r.p_no;
  if (!found || !(total > 0.0)) {
    r.reliability = 0.5;
    r.unscored = true;
  } else {
    r.reliability = r.p_yes / total;
  }
  return r;
}

ReliabilityReading reliability_score(const std::string& question, std::span<const ImagePayload> keyframe_images,
                                     const DraftCandidate& candidate, const PromptTemplateSet& templates,
                                     InferenceBackend& verifier, bool self_consistent) {
  const ChatRequest request =
      self_consistent
          ? self_consistent_request(keyframe_images, question, candidate.answer, templates)
          : verify_request(keyframe_images, question, candidate.answer, candidate.entity, candidate.rationale, templates);
  const ChatResponse response = verifier.chat(request);
  ReliabilityReading r;
  if (response.first_token_distribution) {
    r = read_reliability(*response.first_token_distribution);
  } else {
    r = read_reliability({});
  }
  r.wall_time_ms = response.wall_time_ms;
  return r;
}

std::vector<std::size_t> high_reliability_set(std::span<const double> reliabilities, double delta) {
  if (reliabilities.empty()) throw ConfigError("high_reliability_set needs at least one candidate");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  const double threshold = *std::max_element(reliabilities.begin(), reliabilities.end()) - delta;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < reliabilities.size(); ++i) {
    if (reliabilities[i] >= threshold) out.push_back(i);
  }
  return out;
}

double alignment_score(const EmbeddingVector& entity, std::span<const EmbeddingVector> keyframe_embeddings) {
  if (keyframe_embeddings.empty()) throw ConfigError("alignment needs at least one keyframe embedding");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& k : keyframe_embeddings) best = std::max(best, cosine_similarity(entity, k));
  return best;
}

AlignmentReading alignment_score(const DraftCandidate& candidate, std::span<const EmbeddingVector> keyframe_embeddings,
                                 InferenceBackend& embedder) {
  if (candidate.entity.empty()) throw ConfigError("candidate entity is empty");
  const EmbedResponse response = embedder.embed(EmbedRequest::for_text(candidate.entity));
  const EmbeddingVector entity = normalize_embedding(std::span<const double>(response.embedding));
  return AlignmentReading{alignment_score(entity, keyframe_embeddings), response.wall_time_ms};
}

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::two_stage: return "two_stage";
    case StrategyKind::reliability_only: return "reliability_only";
    case StrategyKind::alignment_only: return "alignment_only";
    case StrategyKind::addition: return "addition";
    case StrategyKind::invert: return "invert";
    case StrategyKind::self_consistent: return "self_consistent";
    case StrategyKind::random: return "random";
  }
  return "two_stage";
}

StrategyKind parse_strategy(std::string_view text) {
  for (StrategyKind k : kAllStrategies) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

bool uses_reliability(StrategyKind kind) noexcept {
  return kind != StrategyKind::alignment_only && kind != StrategyKind::random;
}

bool uses_alignment(StrategyKind kind) noexcept {
  return kind == StrategyKind::two_stage || kind == StrategyKind::alignment_only || kind == StrategyKind::addition ||
         kind == StrategyKind::invert;
}

Selection select_final(std::span<const ScoredCandidate> candidates, const SelectionStrategy& strategy) {
  if (candidates.empty()) throw ConfigError("select_final needs at least one candidate");
  if (!(strategy.delta >= 0.0)) throw ConfigError("delta must be >= 0");

  const std::size_t n = candidates.size();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  std::vector<double> reliabilities(n);
  double max_alignment = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    reliabilities[i] = candidates[i].scores.reliability;
    max_alignment = std::max(max_alignment, candidates[i].scores.alignment);
  }
  const auto high = high_reliability_set(reliabilities, strategy.delta);

  Selection sel;
  sel.strategy = strategy;
  sel.audit.reserve(n);
  for (const auto& c : candidates) {
    CandidateAudit a{c.doc_id, c.ordinal, c.scores, {}};
    a.scores.in_high_set = false;
    a.scores.combined.reset();
    if (c.scores.unscored) a.flags.emplace_back("unscored");
    sel.audit.push_back(std::move(a));
  }
  for (std::size_t i : high) sel.audit[i].scores.in_high_set = true;

  const auto reliability = [](const ScoredCandidate& c) { return c.scores.reliability; };
  const auto alignment = [](const ScoredCandidate& c) { return c.scores.alignment; };

  switch (strategy.kind) {
    case StrategyKind::two_stage: {
      for (std::size_t i = 0; i < n; ++i) {
        if (!sel.audit[i].scores.in_high_set) sel.audit[i].flags.emplace_back("filtered_reliability");
      }
      sel.selected = argmax(candidates, high, alignment);
      break;
    }
    case StrategyKind::reliability_only:
    case StrategyKind::self_consistent:
      sel.selected = argmax(candidates, all, reliability);
      break;
    case StrategyKind::alignment_only:
      sel.selected = argmax(candidates, all, alignment);
      break;
    case StrategyKind::addition: {
      for (std::size_t i = 0; i < n; ++i) sel.audit[i].scores.combined = reliability(candidates[i]) + alignment(candidates[i]);
      sel.selected = argmax(candidates, all, [](const ScoredCandidate& c) { return c.scores.reliability + c.scores.alignment; });
      break;
    }
    case StrategyKind::invert: {
      std::vector<std::size_t> aligned;
      const double threshold = max_alignment - strategy.delta;
      for (std::size_t i = 0; i < n; ++i) {
        if (candidates[i].scores.alignment >= threshold) {
          aligned.push_back(i);
        } else {
          sel.audit[i].flags.emplace_back("filtered_alignment");
        }
      }
      sel.selected = argmax(candidates, aligned, reliability);
      break;
    }
    case StrategyKind::random: {
      std::uint64_t state = strategy.rng_seed;
      sel.selected = static_cast<std::size_t>(uniform_index(state, n));
      break;
    }
  }
  sel.audit[sel.selected].flags.emplace_back("selected");
  sel.doc_id = candidates[sel.selected].doc_id;
  return sel;
}

VerificationOutcome verify_candidates(const std::string& question, std::span<const ImagePayload> keyframe_images,
                                      std::span<const DraftCandidate> candidates,
                                      std::span<const EmbeddingVector> keyframe_embeddings,
                                      const PromptTemplateSet& templates, InferenceBackend& verifier,
                                      InferenceBackend& embedder, const SelectionStrategy& strategy,
                                      const VerifyOptions& options) {
  if (candidates.empty()) throw ConfigError("verification needs at least one candidate");
  const std::size_t n = candidates.size();
  VerificationOutcome out;
  out.scored.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.scored[i].doc_id = candidates[i].doc_id;
    out.scored[i].ordinal = candidates[i].ordinal;
  }

  if (uses_reliability(strategy.kind)) {
    const bool reduced = strategy.kind == StrategyKind::self_consistent;
    std::vector<ReliabilityReading> readings(n);
    std::vector<std::exception_ptr> errors(n);
    bounded_parallel_for(n, options.max_parallel, [&](std::size_t i) {
      try {
        readings[i] = reliability_score(question, keyframe_images, candidates[i], templates, verifier, reduced);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    std::vector<double> costs(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = out.scored[i].scores;
      s.p_yes = readings[i].p_yes;
      s.p_no = readings[i].p_no;
      s.reliability = readings[i].reliability;
      s.unscored = readings[i].unscored;
      s.reliability_scored = true;
      costs[i] = readings[i].wall_time_ms;
    }
    out.reliability_ms = list_schedule_makespan(costs, options.max_parallel);
  }

  if (uses_alignment(strategy.kind)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = alignment_score(candidates[i], keyframe_embeddings, embedder);
      out.scored[i].scores.alignment = a.alignment;
      out.scored[i].scores.alignment_scored = true;
      out.alignment_ms += a.wall_time_ms;
    }
  }

  out.selection = select_final(out.scored, strategy);
  for (std::size_t i = 0; i < n; ++i) out.scored[i].scores = out.selection.audit[i].scores;
  return out;
}

}  // namespace vsrag
