#include <benchmark/benchmark.h>

#include "neurogen/beam_search.hpp"
#include "neurogen/brain_adapter.hpp"
#include "neurogen/random.hpp"
#include "neurogen/text_metrics.hpp"
#include "neurogen/trainer.hpp"
#include "neurogen/transformer.hpp"

using namespace neurogen;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

std::vector<TokenId> random_tokens(std::size_t n, std::size_t vocab, Rng& rng) {
  std::vector<TokenId> out(n);
  for (auto& t : out) t = static_cast<TokenId>(Vocabulary::kReserved + rng.below(vocab - Vocabulary::kReserved));
  return out;
}

// The default desk-scale model: V = 345, d = 64, 2 layers, 4 heads.
LMConfig desk_lm() {
  LMConfig c;
  c.vocab_size = 345;
  return c;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_LmForward(benchmark::State& state) {
  const LanguageModel lm(desk_lm());
  Rng rng(2);
  const auto ids = random_tokens(static_cast<std::size_t>(state.range(0)), lm.vocab_size(), rng);
  const Matrix rows = lm.embed_tokens(ids);
  for (auto _ : state) benchmark::DoNotOptimize(lm.next_token_distribution(rows));
}
BENCHMARK(BM_LmForward)->Arg(8)->Arg(32)->Arg(96);

void BM_MainLossBackward(benchmark::State& state) {
  LanguageModel lm(desk_lm());
  lm.set_trainable(false);
  BrainAdapter adapter(32, lm.d_model(), 4, 3, lm.embedding_range());
  Rng rng(3);
  DataSample s;
  s.prompt = random_tokens(static_cast<std::size_t>(state.range(0)), lm.vocab_size(), rng);
  s.continuation = random_tokens(6, lm.vocab_size(), rng);
  s.recording = random_matrix(4, 32, rng);
  s.tr_budget = 6;
  for (auto _ : state) {
    adapter.zero_grad();
    benchmark::DoNotOptimize(main_loss_backward(adapter, lm, s, 1.0));
  }
}
BENCHMARK(BM_MainLossBackward)->Arg(0)->Arg(12)->Arg(24);

void BM_BeamSearch(benchmark::State& state) {
  const LanguageModel lm(desk_lm());
  Rng rng(4);
  const auto prompt = random_tokens(12, lm.vocab_size(), rng);
  const PromptInput in = build_text_input(lm, prompt);
  const auto width = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(beam_search(lm, in, width, 10));
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(3)->Arg(5);

void BM_Metrics(benchmark::State& state) {
  Rng rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_tokens(n, 40, rng), b = random_tokens(n, 40, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bleu1(a, b));
    benchmark::DoNotOptimize(wer(a, b));
    benchmark::DoNotOptimize(rouge_l(a, b));
    benchmark::DoNotOptimize(meteor(a, b));
  }
}
BENCHMARK(BM_Metrics)->Arg(10)->Arg(40)->Arg(170);

}  // namespace

BENCHMARK_MAIN();
