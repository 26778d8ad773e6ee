#include <benchmark/benchmark.h>

#include <cmath>

#include "specfield/filter.hpp"
#include "specfield/oracles.hpp"
#include "specfield/rng.hpp"
#include "specfield/simulate.hpp"

using namespace specfield;

namespace {

Vec bench_freqs() {
  Vec f(60);
  for (int i = 0; i < 60; ++i) {
    f[i] = 1.0 + i;
  }
  return f;
}

void BM_Linearize(benchmark::State& state) {
  const cmc::CmcParams p;
  double theta = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmc::linearize(p, theta));
    theta = theta < 0.5 ? theta + 1e-6 : 0.0;
  }
}
BENCHMARK(BM_Linearize);

void BM_TransferSpectrum(benchmark::State& state) {
  const cmc::CmcParams p;
  const auto sys = cmc::linearize(p, 0.0);
  const Vec freqs = bench_freqs();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmc::transfer_spectrum(sys, p, freqs));
  }
}
BENCHMARK(BM_TransferSpectrum);

void BM_ForwardModel20Channels(benchmark::State& state) {
  const cmc::CmcParams p;
  const Vec freqs = bench_freqs();
  Vec field = Vec::LinSpaced(20, -0.3, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cmc::forward_model(p, field, 0.0, freqs));
  }
}
BENCHMARK(BM_ForwardModel20Channels);

void BM_BasisEvaluation(benchmark::State& state) {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::rectangle;
  dom.Lx = 1.4;
  dom.Ly = 1.05;
  dom.alpha = 0.05;
  const auto basis = field::build_basis(dom, 4);
  std::vector<field::Point> pts;
  GaussianRng rng(1);
  for (int i = 0; i < 256; ++i) {
    pts.push_back({rng.uniform() * dom.Lx, rng.uniform() * dom.Ly});
  }
  field::FieldCoeffs c{Vec::Ones(basis.size())};
  for (auto _ : state) {
    benchmark::DoNotOptimize(field::evaluate_field(c, basis, pts));
  }
}
BENCHMARK(BM_BasisEvaluation);

void BM_ProjectInitial(benchmark::State& state) {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  const auto basis = field::build_basis(dom, 8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(field::project_initial(
        [](field::Point p) { return p.x * (1.0 - p.x); }, basis));
  }
}
BENCHMARK(BM_ProjectInitial);

void BM_InvertWindow(benchmark::State& state) {
  filter::FilterConfig cfg;
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  dom.alpha = 0.1;
  cfg.basis = field::build_basis(dom, 2);
  cfg.set_uniform_volatility(0.05);
  cfg.freqs_hz = bench_freqs();

  SpectralWindow w;
  w.t = 1.0;
  w.positions = {{0.3, 0.0}, {0.5, 0.0}, {0.7, 0.0}};
  const auto fwd = cmc::forward_model(cfg.cmc_params, Vec::Zero(3), 0.0,
                                      cfg.freqs_hz);
  w.power.resize(3, cfg.freqs_hz.size());
  GaussianRng rng(2);
  for (int ch = 0; ch < 3; ++ch) {
    for (Eigen::Index f = 0; f < cfg.freqs_hz.size(); ++f) {
      w.power(ch, f) = fwd.channels[static_cast<std::size_t>(ch)].power[f] *
                       std::pow(10.0, 0.02 * rng.normal());
    }
  }

  vl::GaussianBelief prior;
  prior.mean = Vec::Zero(3);
  prior.cov = Mat::Identity(3, 3);

  for (auto _ : state) {
    benchmark::DoNotOptimize(vl::invert_window(w, prior, cfg.hyper, cfg));
  }
}
BENCHMARK(BM_InvertWindow);

void BM_CrankNicolsonStep(benchmark::State& state) {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  dom.alpha = 1.0;
  field::BoundaryDrive drive;
  drive.phi0 = [](double t) { return std::sin(t); };
  drive.phi1 = [](double) { return 0.0; };
  drive.f0 = [](double) { return 0.0; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        harness::fd_heat_oracle(dom, drive, 1.0 / 256, 1e-3, 0.5));
  }
}
BENCHMARK(BM_CrankNicolsonStep);

} // namespace

BENCHMARK_MAIN();
