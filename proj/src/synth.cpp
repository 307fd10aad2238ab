#include "vsrag/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "vsrag/dataset.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/hash.hpp"
#include "vsrag/image_io.hpp"
#include "vsrag/index_io.hpp"
#include "vsrag/mock_backend.hpp"

namespace vsrag {

namespace {

constexpr std::array<const char*, 30> kNouns = {
    "penguin", "heron",   "gecko",  "lynx",    "otter",   "falcon",  "tortoise", "salamander", "macaque", "ibis",
    "marmot",  "cuttlefish", "kestrel", "viper", "badger", "pelican", "chameleon", "wombat", "crane", "newt",
    "bison",   "puffin",  "tapir",  "stork",   "iguana",  "lemur",   "weasel",   "grouse",     "beetle",  "seal"};

constexpr std::array<const char*, 20> kModifiers = {
    "emperor", "african", "crested", "spotted", "northern", "southern", "golden", "pygmy", "giant", "striped",
    "alpine",  "desert",  "marsh",   "royal",   "hooded",   "dwarf",    "common", "arctic", "forest", "coastal"};

constexpr std::array<const char*, 32> kPlaces = {
    "Antarctica", "Madagascar", "Borneo",   "Patagonia", "Siberia",  "Tasmania",  "Iceland",  "Sumatra",
    "Namibia",    "Mongolia",   "Greenland", "Sardinia", "Bolivia",  "Ethiopia",  "Norway",   "Chile",
    "Kenya",      "Peru",       "Laos",     "Fiji",      "Tibet",    "Morocco",   "Alaska",   "Yukon",
    "Bhutan",     "Gabon",      "Belize",   "Oman",      "Crete",    "Cuba",      "Nepal",    "Sicily"};

constexpr std::array<const char*, 24> kFiller = {
    "observed", "records", "season",   "habitat", "behaviour", "survey", "population", "range",
    "feeding",  "nesting", "climate",  "water",   "coastline", "forest", "specimen",   "field",
    "study",    "local",   "migration", "winter", "summer",    "terrain", "colony",    "notes"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  double uniform() { return unit_double(state_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_index(state_, n)); }
  double normal() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::uint64_t state_;
};

using Vec = std::vector<double>;

Vec unit(Vec v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
  return v;
}

Vec random_unit(Rng& rng, std::size_t dim) {
  Vec v(dim);
  for (double& x : v) x = rng.normal();
  return unit(std::move(v));
}

// Unit vector whose cosine with the unit vector `base` is exactly `cosine`.
Vec with_cosine(Rng& rng, const Vec& base, double cosine) {
  Vec o = random_unit(rng, base.size());
  double proj = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) proj += o[i] * base[i];
  for (std::size_t i = 0; i < base.size(); ++i) o[i] -= proj * base[i];
  o = unit(std::move(o));
  const double s = std::sqrt(1.0 - cosine * cosine);
  Vec out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = cosine * base[i] + s * o[i];
  return unit(std::move(out));
}

Vec jitter(Rng& rng, const Vec& base, double scale) {
  Vec v = base;
  for (double& x : v) x += scale * rng.normal();
  return unit(std::move(v));
}

std::string pad_words(std::string text, std::size_t words, Rng& rng) {
  std::size_t count = static_cast<std::size_t>(count_tokens(text));
  while (count < words) {
    text += ' ';
    text += kFiller[rng.index(kFiller.size())];
    ++count;
  }
  return text;
}

enum class Pattern { transfer, substitution, clean };

const char* tag_of(Pattern p) {
  switch (p) {
    case Pattern::transfer: return kTagTransfer;
    case Pattern::substitution: return kTagSubstitution;
    case Pattern::clean: return kTagClean;
  }
  return kTagClean;
}

// What a drafter says about one document.
struct Draft {
  std::string entity;
  std::string rationale;
  std::string answer;
  double reliability = 0.5;
  double self_consistent = 0.5;
};

struct DocInfo {
  std::string doc_id;
  std::string text;
  Vec embedding;
  std::string subject;  ///< entity a drafter extracts when the document is off-topic
  std::string place;
  std::size_t owner = 0;
};

struct ItemPlan {
  std::string item_id;
  Pattern pattern = Pattern::clean;
  std::string noun;
  std::string correct_subject;
  std::string distractor_subject;
  std::string question;
  std::string gold;
  Vec topic;
  std::vector<Frame> frames;
  std::vector<Vec> frame_embeddings;
  std::size_t correct_doc = 0;
  std::size_t distractor_doc = 0;
  Draft correct_draft;
  Draft distractor_draft;
  std::string standard_answer;
  std::string no_rag_answer;
};

std::string item_name(std::size_t i) {
  std::string s = std::to_string(i);
  return "item-" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

void validate(const SynthOptions& o) {
  if (o.size < 2) throw ConfigError("synthetic corpus size must be >= 2");
  if (o.size > kNouns.size() * (kModifiers.size() / 2)) {
    throw ConfigError("synthetic corpus size must be <= " + std::to_string(kNouns.size() * (kModifiers.size() / 2)));
  }
  const auto in_unit = [](double f) { return std::isfinite(f) && f >= 0.0 && f <= 1.0; };
  if (!in_unit(o.transfer_fraction) || !in_unit(o.substitution_fraction)) {
    throw ConfigError("pattern fractions must lie in [0, 1]");
  }
  const auto n_t = static_cast<std::size_t>(std::llround(o.transfer_fraction * static_cast<double>(o.size)));
  const auto n_s = static_cast<std::size_t>(std::llround(o.substitution_fraction * static_cast<double>(o.size)));
  if (n_t + n_s > o.size) throw ConfigError("pattern fractions sum to more than the corpus size");
  if (o.dim < 8) throw ConfigError("synthetic embedding dim must be >= 8");
  if (o.frames_per_item < 2) throw ConfigError("synthetic items need at least 2 frames");
  if (o.doc_tokens < 12) throw ConfigError("doc_tokens must be >= 12");
  validate(o.drafter_latency);
  validate(o.verifier_latency);
  validate(o.embed_latency);
}

std::vector<Frame> make_item_frames(std::size_t item, std::size_t count, Rng& rng) {
  constexpr int kWidth = 16;
  constexpr int kHeight = 12;
  std::array<std::uint8_t, 3> scene_a{};
  for (auto& c : scene_a) c = static_cast<std::uint8_t>(rng.index(256));
  std::array<std::uint8_t, 3> scene_b{};
  for (int c = 0; c < 3; ++c) scene_b[c] = static_cast<std::uint8_t>(scene_a[c] ^ 0x80);

  std::vector<Frame> frames;
  for (std::size_t j = 0; j < count; ++j) {
    const auto& colour = j < count / 2 ? scene_a : scene_b;
    Frame f = solid_frame(j, kWidth, kHeight, colour[0], colour[1], colour[2]);
    f.pixels[0] = static_cast<std::uint8_t>(item & 0xff);
    f.pixels[1] = static_cast<std::uint8_t>((item >> 8) & 0xff);
    f.pixels[2] = static_cast<std::uint8_t>(j & 0xff);
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

SynthReport generate_synthetic_corpus(const SynthOptions& options, const std::filesystem::path& out_dir,
                                      const PipelineConfig& config) {
  validate(options);
  config.validate();
  Rng rng(options.seed ^ 0x5eed5eed5eedULL);

  std::vector<std::string> nouns(kNouns.begin(), kNouns.end());
  std::vector<std::string> mods(kModifiers.begin(), kModifiers.end());
  rng.shuffle(nouns);
  rng.shuffle(mods);

  const std::size_t n = options.size;
  const auto n_t = static_cast<std::size_t>(std::llround(options.transfer_fraction * static_cast<double>(n)));
  const auto n_s = static_cast<std::size_t>(std::llround(options.substitution_fraction * static_cast<double>(n)));
  std::vector<Pattern> patterns(n, Pattern::clean);
  std::fill_n(patterns.begin(), n_t, Pattern::transfer);
  std::fill_n(patterns.begin() + static_cast<std::ptrdiff_t>(n_t), n_s, Pattern::substitution);
  rng.shuffle(patterns);

  std::vector<ItemPlan> items(n);
  std::vector<DocInfo> docs;
  std::map<std::string, Vec> entity_vectors;

  for (std::size_t i = 0; i < n; ++i) {
    ItemPlan& it = items[i];
    it.item_id = item_name(i);
    it.pattern = patterns[i];
    it.noun = nouns[i % nouns.size()];
    const std::size_t round = i / nouns.size();
    it.correct_subject = mods[2 * round] + " " + it.noun;
    it.distractor_subject = mods[2 * round + 1] + " " + it.noun;

    std::vector<std::size_t> place_ids(kPlaces.size());
    for (std::size_t p = 0; p < place_ids.size(); ++p) place_ids[p] = p;
    rng.shuffle(place_ids);
    const std::string place_c = kPlaces[place_ids[0]];
    const std::string place_d = kPlaces[place_ids[1]];
    const std::string place_o = kPlaces[place_ids[2]];

    it.question = "Where is the " + it.noun + " shown in this video found in the wild?";
    it.gold = place_c;
    it.topic = random_unit(rng, options.dim);
    it.frames = make_item_frames(i, options.frames_per_item, rng);
    for (std::size_t j = 0; j < it.frames.size(); ++j) it.frame_embeddings.push_back(jitter(rng, it.topic, 0.02));

    it.correct_doc = docs.size();
    docs.push_back(DocInfo{it.item_id + "-correct",
                           pad_words("The " + it.correct_subject + " is found in " + place_c + ".", options.doc_tokens, rng),
                           with_cosine(rng, it.topic, 0.95), it.correct_subject, place_c, i});
    it.distractor_doc = docs.size();
    docs.push_back(DocInfo{it.item_id + "-distractor",
                           pad_words("The " + it.distractor_subject + " is found in " + place_d + ".", options.doc_tokens, rng),
                           with_cosine(rng, it.topic, 0.85), it.distractor_subject, place_d, i});
    const std::string station = "station " + std::to_string(i);
    docs.push_back(DocInfo{it.item_id + "-background",
                           pad_words("Weather " + station + " logs rainfall near " + place_o + ".", options.doc_tokens, rng),
                           with_cosine(rng, it.topic, 0.65), station, place_o, i});

    entity_vectors[it.correct_subject] = with_cosine(rng, it.topic, 0.80);
    entity_vectors[it.distractor_subject] = with_cosine(rng, it.topic, 0.05);
    entity_vectors[station] = with_cosine(rng, it.topic, 0.20);

    const double r_c = rng.uniform(0.86, 0.95);
    auto sc = [&](double r) { return std::clamp(r + rng.uniform(-0.15, 0.15), 0.02, 0.98); };
    it.correct_draft = Draft{it.correct_subject,
                             "The video shows the " + it.correct_subject + ", which the document places in " + place_c + ".",
                             place_c, r_c, sc(r_c)};
    Draft& d = it.distractor_draft;
    d.answer = place_d;
    switch (it.pattern) {
      case Pattern::transfer: {
        d.entity = it.noun + " with " + mods[2 * round] + " markings";
        entity_vectors[d.entity] = with_cosine(rng, it.topic, 0.88);
        d.rationale = "The video shows the " + it.correct_subject + "; the document on the " + it.distractor_subject +
                      " places it in " + place_d + ".";
        d.reliability = r_c - rng.uniform(0.06, 0.18);
        break;
      }
      case Pattern::substitution:
        d.entity = it.distractor_subject;
        d.rationale = "The video shows the " + it.distractor_subject + ", which the document places in " + place_d + ".";
        d.reliability = std::min(0.99, r_c + rng.uniform(0.005, 0.04));
        break;
      case Pattern::clean:
        d.entity = it.distractor_subject;
        d.rationale = "The document describes the " + it.distractor_subject +
                      ", which may differ from the video; it lives in " + place_d + ".";
        d.reliability = r_c - rng.uniform(0.3, 0.5);
        break;
    }
    d.self_consistent = sc(d.reliability);
    it.standard_answer = it.pattern == Pattern::substitution ? place_d : place_c;
    it.no_rag_answer = rng.uniform() < 0.3 ? place_c : place_o;
  }

  MockFixtures fixtures;
  fixtures.seed = options.seed;
  fixtures.dim = options.dim;
  fixtures.latency["drafter"] = options.drafter_latency;
  fixtures.latency["verifier"] = options.verifier_latency;
  fixtures.latency["embed"] = options.embed_latency;
  for (const auto& [text, v] : entity_vectors) fixtures.embed_fixtures[text] = v;
  for (const auto& it : items) {
    for (std::size_t j = 0; j < it.frames.size(); ++j) {
      fixtures.embed_fixtures[image_fixture_key(frame_payload(it.frames[j]))] = it.frame_embeddings[j];
    }
  }

  std::vector<DocumentInput> inputs;
  inputs.reserve(docs.size());
  for (const auto& d : docs) {
    inputs.push_back(DocumentInput{d.doc_id, d.text, d.embedding, {{"owner", items[d.owner].item_id}}});
  }
  const Index index = Index::build(std::move(inputs), {{"generator", "synthetic"},
                                                       {"seed", std::to_string(options.seed)},
                                                       {"size", std::to_string(options.size)}});
  std::map<std::string, std::size_t> doc_by_id;
  for (std::size_t d = 0; d < docs.size(); ++d) doc_by_id[docs[d].doc_id] = d;

  // Keyframe embeddings exactly as the pipeline will read them back from the fixture file.
  MockBackend embedder(MockFixtures::parse(nlohmann::json::parse(fixtures.to_json().dump())));

  const TokenLimits& limits = config.draft.limits;
  const PromptTemplateSet& templates = config.templates;
  auto set_text = [&](const ChatRequest& r, const std::string& text) {
    fixtures.chat_fixtures[fixture_key(r)] = ChatFixture{text, std::nullopt, std::nullopt, std::nullopt};
  };
  auto set_prob = [&](const ChatRequest& r, double yes) {
    fixtures.chat_fixtures[fixture_key(r)] = ChatFixture{std::nullopt, yes, 1.0 - yes, std::nullopt};
  };

  for (const auto& it : items) {
    const KeyframeSet keyframes = extract_keyframes(it.frames, config.keyframe);
    const auto images = keyframe_payloads(keyframes, config.draft.max_keyframes_per_call);
    std::vector<EmbeddingVector> keyframe_embeddings;
    for (const auto& f : keyframes.frames) {
      const auto e = embedder.embed(EmbedRequest::for_image(frame_payload(f)));
      keyframe_embeddings.push_back(normalize_embedding(std::span<const double>(e.embedding)));
    }
    const auto retrieved = retrieve_top_k(index, keyframe_embeddings, config.retrieval);

    std::vector<std::string> texts;
    for (const auto& r : retrieved) {
      texts.push_back(r.doc.text);
      const std::size_t d = doc_by_id.at(r.doc.doc_id);
      Draft draft;
      if (d == it.correct_doc) {
        draft = it.correct_draft;
      } else if (d == it.distractor_doc) {
        draft = it.distractor_draft;
      } else {
        const double rel = rng.uniform(0.10, 0.35);
        draft = Draft{docs[d].subject,
                      "The document on " + docs[d].subject + " does not describe the video; it mentions " +
                          docs[d].place + ".",
                      docs[d].place, rel, std::clamp(rel + rng.uniform(-0.1, 0.1), 0.02, 0.98)};
      }
      set_text(entity_request(images, r.doc.text, templates, limits), draft.entity);
      set_text(rationale_request(images, it.question, draft.entity, r.doc.text, templates, limits), draft.rationale);
      set_text(answer_request(images, it.question, draft.entity, draft.rationale, templates, limits), draft.answer);
      set_prob(verify_request(images, it.question, draft.answer, draft.entity, draft.rationale, templates),
               draft.reliability);
      set_prob(self_consistent_request(images, it.question, draft.answer, templates), draft.self_consistent);
    }
    set_text(standard_rag_request(images, it.question, texts, templates, limits, ModelTag::verifier),
             it.standard_answer);
    set_text(no_rag_request(images, it.question, templates, limits, config.no_rag_model), it.no_rag_answer);
  }

  std::filesystem::create_directories(out_dir);
  SynthReport report;
  Dataset dataset;
  for (const auto& it : items) {
    const auto dir = out_dir / "frames" / it.item_id;
    std::filesystem::create_directories(dir);
    for (const auto& f : it.frames) {
      std::string name = std::to_string(f.index);
      name = std::string(name.size() < 3 ? 3 - name.size() : 0, '0') + name + ".ppm";
      const auto bytes = encode_ppm(f);
      write_file_bytes(dir / name, bytes);
    }
    dataset.items.push_back(QAItem{it.item_id, dir, it.question, {it.gold}, {tag_of(it.pattern)}});
    ++report.tag_counts[tag_of(it.pattern)];
  }
  dataset.index_path = out_dir / "index.bin";
  dataset.documents_path = out_dir / "docs.jsonl";
  save_index(index, dataset.index_path);
  export_index_jsonl(index, dataset.documents_path);
  report.manifest = out_dir / "manifest.json";
  save_manifest(dataset, report.manifest);
  report.fixtures = out_dir / "fixtures.json";
  fixtures.save(report.fixtures);

  PipelineConfig run_config = config;
  run_config.endpoints = Endpoints{"mock:fixtures.json", "mock:fixtures.json", "mock:fixtures.json"};
  report.config = out_dir / "run.cfg";
  std::ofstream cfg(report.config);
  if (!cfg) throw DataError("cannot write " + report.config.string());
  cfg << to_config_text(run_config);
  if (!cfg) throw DataError("cannot write " + report.config.string());

  report.item_count = n;
  report.document_count = docs.size();
  return report;
}

}  // namespace vsrag
