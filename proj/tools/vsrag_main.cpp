#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "vsrag/backend.hpp"
#include "vsrag/config.hpp"
#include "vsrag/dataset.hpp"
#include "vsrag/errors.hpp"
#include "vsrag/eval.hpp"
#include "vsrag/index_io.hpp"
#include "vsrag/mock_server.hpp"
#include "vsrag/pipeline.hpp"
#include "vsrag/synth.hpp"

namespace {

using namespace vsrag;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

Backends connect(const PipelineConfig& config) {
  if (config.endpoints.drafter.empty() || config.endpoints.verifier.empty() || config.endpoints.embed.empty()) {
    throw ConfigError("endpoint.drafter, endpoint.verifier and endpoint.embed must all be set");
  }
  return Backends{make_backend(config.endpoints.drafter), make_backend(config.endpoints.verifier),
                  make_backend(config.endpoints.embed)};
}

struct RunInputs {
  std::string config_path;
  std::string dataset_path;
  std::vector<std::string> settings;
};

PipelineConfig load_config(const RunInputs& in) {
  PipelineConfig config;
  std::filesystem::path base;
  if (!in.config_path.empty()) {
    base = std::filesystem::path(in.config_path).parent_path();
    config = pipeline_config_from(ConfigMap::load(in.config_path), base);
  }
  for (const auto& s : in.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t");
      const auto e = v.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    apply_setting(config, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), std::filesystem::current_path());
  }
  config.validate();
  return config;
}

class RecordWriter {
 public:
  explicit RecordWriter(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path, std::ios::binary);
    if (!file_) throw DataError("cannot write " + path);
  }
  void operator()(const RunRecord& r) {
    std::ostream& out = file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout;
    out << to_json(r).dump() << '\n';
  }

 private:
  std::ofstream file_;
};

void write_summaries(const std::string& path, const nlohmann::ordered_json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

std::shared_ptr<const Index> dataset_index(const Dataset& dataset, const PipelineConfig& config,
                                           const Backends& backends) {
  if (config.mode == Mode::no_rag && dataset.index_path.empty() && dataset.documents_path.empty()) return nullptr;
  return std::make_shared<const Index>(load_dataset_index(dataset, backends.embedder.get()));
}

volatile std::sig_atomic_t g_stop = 0;

void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyframe retrieval, speculative drafting and two-stage verification for video QA"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "Build or export a document index");
  index_cmd->require_subcommand(1);
  std::string docs_path, embed_endpoint, index_out, index_in, export_out;
  auto* build_cmd = index_cmd->add_subcommand("build", "Embed documents and write a binary index");
  build_cmd->add_option("--docs", docs_path, "JSONL documents {doc_id, text, embedding?, metadata?}")->required();
  build_cmd->add_option("--embed-endpoint", embed_endpoint, "http://host:port or mock:fixtures.json")->required();
  build_cmd->add_option("--out", index_out, "Output index file")->required();
  auto* export_cmd = index_cmd->add_subcommand("export", "Write an index back out as JSONL");
  export_cmd->add_option("--index", index_in, "Binary index")->required();
  export_cmd->add_option("--out", export_out, "Output JSONL")->required();

  RunInputs run_in;
  std::string run_mode, run_strategy, run_out;
  std::optional<double> run_delta;
  auto* run_cmd = app.add_subcommand("run", "Answer every dataset item and write RunRecords");
  run_cmd->add_option("--config", run_in.config_path, "key=value config file");
  run_cmd->add_option("--dataset", run_in.dataset_path, "Dataset manifest")->required();
  run_cmd->add_option("--mode", run_mode, "no_rag | standard_rag | speculate_rag");
  run_cmd->add_option("--strategy", run_strategy, "Selection strategy");
  run_cmd->add_option("--delta", run_delta, "High-reliability margin");
  run_cmd->add_option("--set", run_in.settings, "Config override key=value (repeatable)");
  run_cmd->add_option("--out", run_out, "RunRecord JSONL output ('-' for stdout)")->required();

  std::string eval_records, eval_out;
  auto* eval_cmd = app.add_subcommand("eval", "Summarize RunRecords");
  eval_cmd->add_option("--records", eval_records, "RunRecord JSONL")->required();
  eval_cmd->add_option("--out", eval_out, "Summary JSON output");

  RunInputs sweep_in;
  std::string sweep_param, sweep_values, sweep_records, sweep_out;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate one parameter over a list of values");
  sweep_cmd->add_option("--config", sweep_in.config_path, "key=value config file");
  sweep_cmd->add_option("--dataset", sweep_in.dataset_path, "Dataset manifest")->required();
  sweep_cmd->add_option("--param", sweep_param, "delta | strategy | mode | theta | k | any config key")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_option("--set", sweep_in.settings, "Config override key=value (repeatable)");
  sweep_cmd->add_option("--records", sweep_records, "RunRecord JSONL output for every cell");
  sweep_cmd->add_option("--out", sweep_out, "Summary JSON output");

  SynthOptions synth;
  std::string synth_out, synth_config;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic misleading-document corpus");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--size", synth.size, "Number of items");
  synth_cmd->add_option("--transfer-fraction", synth.transfer_fraction, "Share of cross-entity-transfer items");
  synth_cmd->add_option("--substitution-fraction", synth.substitution_fraction, "Share of entity-substitution items");
  synth_cmd->add_option("--doc-tokens", synth.doc_tokens, "Words per document");
  synth_cmd->add_option("--config", synth_config, "Base config whose templates and limits the fixtures follow");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  std::string serve_fixtures, serve_host = "127.0.0.1";
  int serve_port = 8765;
  bool serve_sleep = false;
  auto* serve_cmd = app.add_subcommand("mock-serve", "Serve a fixture-driven mock backend over HTTP");
  serve_cmd->add_option("--fixtures", serve_fixtures, "Fixture JSON")->required();
  serve_cmd->add_option("--port", serve_port, "Port (0 picks a free one)");
  serve_cmd->add_option("--host", serve_host, "Bind address");
  serve_cmd->add_flag("--real-sleep", serve_sleep, "Sleep for the simulated wall time");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build_cmd) {
      auto embedder = make_backend(embed_endpoint);
      const Index index = build_index_from_documents(read_documents_jsonl(docs_path), embedder.get());
      save_index(index, index_out);
      std::cout << "indexed " << index.size() << " documents (dim " << index.dim() << ") -> " << index_out << '\n';
    } else if (*export_cmd) {
      export_index_jsonl(load_index(index_in), export_out);
    } else if (*run_cmd) {
      if (!run_mode.empty()) run_in.settings.push_back("pipeline.mode=" + run_mode);
      if (!run_strategy.empty()) run_in.settings.push_back("verify.strategy=" + run_strategy);
      if (run_delta) {
        std::ostringstream d;
        d.precision(17);
        d << *run_delta;
        run_in.settings.push_back("verify.delta=" + d.str());
      }
      const PipelineConfig config = load_config(run_in);
      const Dataset dataset = load_dataset(run_in.dataset_path);
      const Backends backends = connect(config);
      RecordWriter writer(run_out);
      const EvalRun run = run_eval(dataset, config, backends, dataset_index(dataset, config, backends), std::ref(writer));
      std::ostream& table_out = run_out == "-" ? std::cerr : std::cout;
      table_out << format_table(std::span<const EvalSummary>(&run.summary, 1));
    } else if (*eval_cmd) {
      std::ifstream in(eval_records);
      if (!in) throw DataError("cannot read " + eval_records);
      std::vector<RecordDigest> digests;
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        digests.push_back(digest_from_json(nlohmann::json::parse(line)));
      }
      if (digests.empty()) throw DataError("no records in " + eval_records);
      const auto summaries = summarize(digests);
      std::cout << format_table(summaries);
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& s : summaries) j.push_back(to_json(s));
      write_summaries(eval_out, j);
    } else if (*sweep_cmd) {
      const PipelineConfig config = load_config(sweep_in);
      const Dataset dataset = load_dataset(sweep_in.dataset_path);
      const Backends backends = connect(config);
      const auto values = split_list(sweep_values);
      RecordWriter writer(sweep_records);
      RecordSink sink;
      if (!sweep_records.empty()) sink = std::ref(writer);
      const auto cells =
          run_sweep(dataset, config, backends, dataset_index(dataset, config, backends), sweep_param, values, sink);
      std::vector<EvalSummary> summaries;
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const auto& c : cells) {
        EvalSummary s = c.summary;
        s.label = c.param + "=" + c.value + " " + s.label;
        summaries.push_back(s);
        auto cell = to_json(c.summary);
        cell["param"] = c.param;
        cell["value"] = c.value;
        j.push_back(std::move(cell));
      }
      std::ostream& table_out = sweep_records == "-" ? std::cerr : std::cout;
      table_out << format_table(summaries);
      write_summaries(sweep_out, j);
    } else if (*synth_cmd) {
      PipelineConfig base;
      if (!synth_config.empty()) {
        base = pipeline_config_from(ConfigMap::load(synth_config), std::filesystem::path(synth_config).parent_path());
      }
      const SynthReport report = generate_synthetic_corpus(synth, synth_out, base);
      std::cout << "wrote " << report.item_count << " items, " << report.document_count << " documents to "
                << synth_out << '\n';
      for (const auto& [tag, count] : report.tag_counts) std::cout << "  " << tag << ": " << count << '\n';
      std::cout << "run with: vsrag run --config " << report.config.string() << " --dataset "
                << report.manifest.string() << " --out records.jsonl\n";
    } else if (*serve_cmd) {
      auto backend = std::make_shared<MockBackend>(MockFixtures::load(serve_fixtures), MockOptions{serve_sleep});
      MockServer server(backend, serve_host);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int port = server.start(serve_port);
      std::cout << "serving " << serve_fixtures << " on http://" << serve_host << ":" << port << std::endl;
      while (g_stop == 0) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
