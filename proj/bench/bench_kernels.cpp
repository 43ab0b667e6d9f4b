#include <benchmark/benchmark.h>

#include <vector>

#include "canopysr/kernels.hpp"
#include "canopysr/parallel.hpp"
#include "canopysr/rng.hpp"

using namespace canopysr;

namespace {

std::vector<double> randn(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v)
    x = normal(rng, 0.0, 1.0);
  return v;
}

struct ConvCase {
  std::vector<double> x, w, b, y;
  int n = 1, cin = 64, h = 64, w_ = 64, cout = 64, k = 3;
  ConvCase() {
    auto rng = make_rng(1);
    x = randn(rng, std::size_t(n) * cin * h * w_);
    w = randn(rng, std::size_t(cout) * cin * k * k);
    b = randn(rng, cout);
    y.resize(std::size_t(n) * cout * h * w_);
  }
};

struct AttnCase {
  std::vector<double> feats, wk, wv, q, out, attn;
  std::vector<unsigned char> valid;
  int t = 12, heads = 4, d_head = 16, d_attn = 16, h = 64, w = 64;
  AttnCase() {
    auto rng = make_rng(2);
    const int d = heads * d_head;
    feats = randn(rng, std::size_t(t) * d * h * w);
    wk = randn(rng, std::size_t(heads) * d_head * d_attn);
    wv = randn(rng, std::size_t(heads) * d_head * d_attn);
    q = randn(rng, std::size_t(heads) * d_attn);
    valid.assign(t, 1);
    out.resize(std::size_t(heads) * d_attn * h * w);
    attn.resize(std::size_t(t) * heads * h * w);
  }
};

} // namespace

static void BM_Conv2dSerial(benchmark::State& state) {
  ConvCase c;
  for (auto _ : state) {
    kernels::ref::conv2d_forward(c.x.data(), c.w.data(), c.b.data(), c.y.data(),
                                 c.n, c.cin, c.h, c.w_, c.cout, c.k);
    benchmark::DoNotOptimize(c.y.data());
  }
}
BENCHMARK(BM_Conv2dSerial)->Unit(benchmark::kMillisecond);

static void BM_Conv2dParallel(benchmark::State& state) {
  ConvCase c;
  set_num_threads(int(state.range(0)));
  for (auto _ : state) {
    kernels::conv2d_forward(c.x.data(), c.w.data(), c.b.data(), c.y.data(), c.n,
                            c.cin, c.h, c.w_, c.cout, c.k);
    benchmark::DoNotOptimize(c.y.data());
  }
  set_num_threads(1);
}
BENCHMARK(BM_Conv2dParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_AttentionSerial(benchmark::State& state) {
  AttnCase c;
  for (auto _ : state) {
    kernels::ref::attention_forward(c.feats.data(), c.wk.data(), c.wv.data(),
                                    c.q.data(), c.valid.data(), c.out.data(),
                                    c.attn.data(), c.t, c.heads, c.d_head,
                                    c.d_attn, c.h, c.w);
    benchmark::DoNotOptimize(c.out.data());
  }
}
BENCHMARK(BM_AttentionSerial)->Unit(benchmark::kMillisecond);

static void BM_AttentionParallel(benchmark::State& state) {
  AttnCase c;
  set_num_threads(int(state.range(0)));
  for (auto _ : state) {
    kernels::attention_forward(c.feats.data(), c.wk.data(), c.wv.data(),
                               c.q.data(), c.valid.data(), c.out.data(),
                               c.attn.data(), c.t, c.heads, c.d_head, c.d_attn,
                               c.h, c.w);
    benchmark::DoNotOptimize(c.out.data());
  }
  set_num_threads(1);
}
BENCHMARK(BM_AttentionParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
