#include "vsrag/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vsrag/errors.hpp"

namespace vsrag {

namespace {

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_uint(key, v)); }

std::string resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty() || p.rfind("http://", 0) == 0) return p;
  if (p.rfind("mock:", 0) == 0) return "mock:" + resolve(base, p.substr(5));
  const std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return p;
  return (base / path).lexically_normal().string();
}

}  // namespace

namespace {

// Drops a `#` or `;` comment that starts the line or follows whitespace.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

ConfigMap ConfigMap::parse(std::string_view text) {
  ConfigMap map;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    map.values_[key] = trim(s.substr(eq + 1));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::optional<std::string> ConfigMap::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::no_rag: return "no_rag";
    case Mode::standard_rag: return "standard_rag";
    case Mode::speculate_rag: return "speculate_rag";
  }
  return "speculate_rag";
}

Mode parse_mode(std::string_view text) {
  if (text == "no_rag") return Mode::no_rag;
  if (text == "standard_rag") return Mode::standard_rag;
  if (text == "speculate_rag") return Mode::speculate_rag;
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  validate_bins(keyframe.bins_per_channel);
  if (!(keyframe.theta > 0.0 && keyframe.theta <= 1.0)) throw ConfigError("keyframe.theta must lie in (0, 1]");
  if (retrieval.k == 0) throw ConfigError("retrieval.k must be >= 1");
  if (draft.max_parallel == 0 || verify.max_parallel == 0) throw ConfigError("max_parallel must be >= 1");
  if (draft.max_keyframes_per_call == 0) throw ConfigError("draft.max_keyframes must be >= 1");
  if (!(strategy.delta >= 0.0)) throw ConfigError("verify.delta must be >= 0");
  if (max_parallel_items == 0) throw ConfigError("pipeline.max_parallel_items must be >= 1");
  const auto& l = draft.limits;
  if (l.entity < 1 || l.rationale < 1 || l.answer < 1 || l.baseline_answer < 1) {
    throw ConfigError("token limits must be >= 1");
  }
  templates.validate();
}

void apply_setting(PipelineConfig& c, const std::string& key, const std::string& v,
                   const std::filesystem::path& base_dir) {
  if (key == "keyframe.theta") {
    c.keyframe.theta = to_double(key, v);
  } else if (key == "keyframe.bins") {
    c.keyframe.bins_per_channel = to_int(key, v);
  } else if (key == "keyframe.compare_to") {
    if (v == "previous_frame") {
      c.keyframe.compare_to = KeyframeReference::previous_frame;
    } else if (v == "previous_keyframe") {
      c.keyframe.compare_to = KeyframeReference::previous_keyframe;
    } else {
      throw ConfigError("keyframe.compare_to must be previous_frame or previous_keyframe");
    }
  } else if (key == "retrieval.k") {
    c.retrieval.k = to_uint(key, v);
  } else if (key == "retrieval.aggregation") {
    if (v == "max_over_keyframes") {
      c.retrieval.aggregation = RetrievalAggregation::max_over_keyframes;
    } else if (v == "per_keyframe_union") {
      c.retrieval.aggregation = RetrievalAggregation::per_keyframe_union;
    } else {
      throw ConfigError("retrieval.aggregation must be max_over_keyframes or per_keyframe_union");
    }
  } else if (key == "retrieval.per_keyframe_k") {
    c.retrieval.per_keyframe_k = to_uint(key, v);
  } else if (key == "draft.max_parallel") {
    c.draft.max_parallel = to_uint(key, v);
  } else if (key == "draft.max_keyframes") {
    c.draft.max_keyframes_per_call = to_uint(key, v);
  } else if (key == "draft.entity_tokens") {
    c.draft.limits.entity = to_int(key, v);
  } else if (key == "draft.rationale_tokens") {
    c.draft.limits.rationale = to_int(key, v);
  } else if (key == "draft.answer_tokens") {
    c.draft.limits.answer = to_int(key, v);
  } else if (key == "baseline.answer_tokens") {
    c.draft.limits.baseline_answer = to_int(key, v);
  } else if (key == "baseline.no_rag_model") {
    c.no_rag_model = parse_model_tag(v);
  } else if (key == "verify.delta") {
    c.strategy.delta = to_double(key, v);
  } else if (key == "verify.strategy") {
    c.strategy.kind = parse_strategy(v);
  } else if (key == "verify.seed") {
    c.strategy.rng_seed = to_uint(key, v);
  } else if (key == "verify.max_parallel") {
    c.verify.max_parallel = to_uint(key, v);
  } else if (key == "pipeline.mode") {
    c.mode = parse_mode(v);
  } else if (key == "pipeline.clock") {
    if (v == "virtual") {
      c.clock = ClockMode::virtual_time;
    } else if (v == "real") {
      c.clock = ClockMode::real_time;
    } else {
      throw ConfigError("pipeline.clock must be virtual or real");
    }
  } else if (key == "pipeline.judge") {
    if (v == "rule") {
      c.judge = JudgeMode::rule;
    } else if (v == "model") {
      c.judge = JudgeMode::model;
    } else {
      throw ConfigError("pipeline.judge must be rule or model");
    }
  } else if (key == "pipeline.max_parallel_items") {
    c.max_parallel_items = to_uint(key, v);
  } else if (key == "seed") {
    c.seed = to_uint(key, v);
  } else if (key == "templates") {
    c.template_path = resolve(base_dir, v);
    c.templates = c.template_path.empty() ? PromptTemplateSet::defaults() : PromptTemplateSet::load(c.template_path);
  } else if (key == "endpoint.drafter") {
    c.endpoints.drafter = resolve(base_dir, v);
  } else if (key == "endpoint.verifier") {
    c.endpoints.verifier = resolve(base_dir, v);
  } else if (key == "endpoint.embed") {
    c.endpoints.embed = resolve(base_dir, v);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

PipelineConfig pipeline_config_from(const ConfigMap& map, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  for (const auto& [key, value] : map.values()) apply_setting(c, key, value, base_dir);
  if (const char* e = std::getenv("VSRAG_ENDPOINT_DRAFTER")) c.endpoints.drafter = e;
  if (const char* e = std::getenv("VSRAG_ENDPOINT_VERIFIER")) c.endpoints.verifier = e;
  if (const char* e = std::getenv("VSRAG_ENDPOINT_EMBED")) c.endpoints.embed = e;
  c.validate();
  return c;
}

std::string to_config_text(const PipelineConfig& c) {
  std::ostringstream out;
  out << "seed = " << c.seed << "\n";
  if (!c.template_path.empty()) out << "templates = " << c.template_path << "\n";
  out << "\n[pipeline]\nmode = " << to_string(c.mode)
      << "\nclock = " << (c.clock == ClockMode::virtual_time ? "virtual" : "real")
      << "\njudge = " << (c.judge == JudgeMode::rule ? "rule" : "model")
      << "\nmax_parallel_items = " << c.max_parallel_items << "\n\n[keyframe]\ntheta = " << exact(c.keyframe.theta)
      << "\nbins = " << c.keyframe.bins_per_channel << "\ncompare_to = "
      << (c.keyframe.compare_to == KeyframeReference::previous_frame ? "previous_frame" : "previous_keyframe")
      << "\n\n[retrieval]\nk = " << c.retrieval.k << "\naggregation = "
      << (c.retrieval.aggregation == RetrievalAggregation::max_over_keyframes ? "max_over_keyframes"
                                                                              : "per_keyframe_union")
      << "\nper_keyframe_k = " << c.retrieval.per_keyframe_k << "\n\n[draft]\nmax_parallel = " << c.draft.max_parallel
      << "\nmax_keyframes = " << c.draft.max_keyframes_per_call << "\nentity_tokens = " << c.draft.limits.entity
      << "\nrationale_tokens = " << c.draft.limits.rationale << "\nanswer_tokens = " << c.draft.limits.answer
      << "\n\n[baseline]\nanswer_tokens = " << c.draft.limits.baseline_answer
      << "\nno_rag_model = " << to_string(c.no_rag_model) << "\n\n[verify]\nstrategy = " << to_string(c.strategy.kind)
      << "\ndelta = " << exact(c.strategy.delta) << "\nseed = " << c.strategy.rng_seed
      << "\nmax_parallel = " << c.verify.max_parallel << "\n\n[endpoint]\ndrafter = " << c.endpoints.drafter
      << "\nverifier = " << c.endpoints.verifier << "\nembed = " << c.endpoints.embed << "\n";
  return out.str();
}

}  // namespace vsrag
