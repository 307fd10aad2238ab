#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vsrag/keyframe.hpp"
#include "vsrag/retrieval.hpp"

using namespace vsrag;

namespace {

std::vector<Frame> make_video(std::size_t frames, int w, int h) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<Frame> video;
  for (std::size_t i = 0; i < frames; ++i) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
    video.push_back(make_frame(i, w, h, std::move(px)));
  }
  return video;
}

Index make_index(std::size_t docs, std::size_t dim) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<DocumentInput> in;
  for (std::size_t i = 0; i < docs; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    in.push_back(DocumentInput{"doc" + std::to_string(i), "text", std::move(v), {}});
  }
  return Index::build(std::move(in));
}

std::vector<EmbeddingVector> make_queries(std::size_t count, std::size_t dim) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<EmbeddingVector> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    out.push_back(normalize_embedding(std::span<const double>(v)));
  }
  return out;
}

void BM_HistogramsParallel(benchmark::State& state) {
  const auto video = make_video(static_cast<std::size_t>(state.range(0)), 320, 180);
  for (auto _ : state) benchmark::DoNotOptimize(compute_histograms(video, 64));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_HistogramsSerial(benchmark::State& state) {
  const auto video = make_video(static_cast<std::size_t>(state.range(0)), 320, 180);
  for (auto _ : state) benchmark::DoNotOptimize(reference::compute_histograms_serial(video, 64));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KeyframesParallel(benchmark::State& state) {
  const auto video = make_video(static_cast<std::size_t>(state.range(0)), 320, 180);
  for (auto _ : state) benchmark::DoNotOptimize(extract_keyframes(video));
}

void BM_KeyframesSerial(benchmark::State& state) {
  const auto video = make_video(static_cast<std::size_t>(state.range(0)), 320, 180);
  for (auto _ : state) benchmark::DoNotOptimize(reference::extract_keyframes_serial(video, KeyframeOptions{}));
}

void BM_ScoreDocumentsParallel(benchmark::State& state) {
  const auto index = make_index(static_cast<std::size_t>(state.range(0)), 512);
  const auto queries = make_queries(8, 512);
  for (auto _ : state) benchmark::DoNotOptimize(score_documents(index, queries));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreDocumentsSerial(benchmark::State& state) {
  const auto index = make_index(static_cast<std::size_t>(state.range(0)), 512);
  const auto queries = make_queries(8, 512);
  for (auto _ : state) benchmark::DoNotOptimize(reference::score_documents_serial(index, queries));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_HistogramsParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_HistogramsSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_KeyframesParallel)->Arg(64)->Arg(256);
BENCHMARK(BM_KeyframesSerial)->Arg(64)->Arg(256);
BENCHMARK(BM_ScoreDocumentsParallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ScoreDocumentsSerial)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
