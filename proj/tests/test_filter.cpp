#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>

#include "specfield/filter.hpp"
#include "specfield/report.hpp"
#include "specfield/rng.hpp"

using namespace specfield;
using namespace specfield::filter;

namespace {

FilterConfig two_mode_config() {
  FilterConfig cfg;
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = M_PI;
  dom.alpha = 1.0;
  cfg.basis = field::build_basis(dom, 2); // decay rates exactly 1 and 4
  cfg.set_uniform_volatility(0.05);
  cfg.g7_walk_var = 0.01;
  cfg.freqs_hz.resize(8);
  for (int i = 0; i < 8; ++i) {
    cfg.freqs_hz[i] = 1.0 + i;
  }
  return cfg;
}

vl::GaussianBelief some_posterior() {
  vl::GaussianBelief b;
  b.mean.resize(3);
  b.mean << 1.0, 1.0, 0.3;
  b.cov.resize(3, 3);
  b.cov << 0.30, 0.02, 0.01, //
      0.02, 0.20, 0.00,      //
      0.01, 0.00, 0.10;
  return b;
}

std::vector<field::Point> interval_positions() {
  return {{0.8, 0.0}, {1.6, 0.0}, {2.4, 0.0}};
}

SpectralWindow window_at(const Vec& params, const FilterConfig& cfg, double t,
                         double noise_sd, std::uint64_t seed) {
  SpectralWindow w;
  w.t = t;
  w.positions = interval_positions();
  const Vec theta = field::evaluate_field(
      field::FieldCoeffs{params.head(cfg.basis.size())}, cfg.basis,
      w.positions);
  const auto fwd = cmc::forward_model(cfg.cmc_params, theta,
                                      params[cfg.basis.size()], cfg.freqs_hz);
  w.power.resize(3, cfg.freqs_hz.size());
  GaussianRng rng(seed);
  for (Eigen::Index ch = 0; ch < 3; ++ch) {
    for (Eigen::Index f = 0; f < cfg.freqs_hz.size(); ++f) {
      const double n = noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0;
      w.power(ch, f) = fwd.channels[static_cast<std::size_t>(ch)].power[f] *
                       std::pow(10.0, n);
    }
  }
  return w;
}

} // namespace

TEST_CASE("predict_prior: vanishing time step reduces to posterior + R") {
  auto cfg = two_mode_config();
  cfg.dt_window = 1e-12;
  const auto post = some_posterior();
  const auto prior = predict_prior(post, cfg);

  CHECK((prior.mean - post.mean).cwiseAbs().maxCoeff() < 1e-9);
  Mat expected = post.cov;
  expected(0, 0) += cfg.volatility[0];
  expected(1, 1) += cfg.volatility[1];
  expected(2, 2) += cfg.g7_walk_var;
  CHECK((prior.cov - expected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("predict_prior: closed-form exponential mean decay") {
  auto cfg = two_mode_config();
  cfg.dt_window = std::log(2.0);
  const auto post = some_posterior();
  const auto prior = predict_prior(post, cfg);

  CHECK(prior.mean[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prior.mean[1] == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(prior.mean[2] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("predict_prior: covariance is exactly D Q D^T plus R") {
  auto cfg = two_mode_config();
  cfg.dt_window = 0.7;
  const auto post = some_posterior();
  const auto prior = predict_prior(post, cfg);

  // replicate the push-forward with the same scalar operations
  Vec decay(3);
  const Vec lam = cfg.basis.decay_rates();
  decay[0] = std::exp(-lam[0] * cfg.dt_window);
  decay[1] = std::exp(-lam[1] * cfg.dt_window);
  decay[2] = 1.0;
  Mat expected(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      expected(i, j) = decay[i] * decay[j] * post.cov(i, j);
    }
  }
  expected(0, 0) += cfg.volatility[0];
  expected(1, 1) += cfg.volatility[1];
  expected(2, 2) += cfg.g7_walk_var;

  CHECK(std::memcmp(prior.cov.data(), expected.data(), sizeof(double) * 9) ==
        0);
}

TEST_CASE("predict_prior: paper-literal prediction skips the decay on Q") {
  auto cfg = two_mode_config();
  cfg.dt_window = 0.7;
  cfg.paper_literal_prediction = true;
  const auto post = some_posterior();
  const auto prior = predict_prior(post, cfg);

  Mat expected = post.cov;
  expected(0, 0) += cfg.volatility[0];
  expected(1, 1) += cfg.volatility[1];
  expected(2, 2) += cfg.g7_walk_var;
  CHECK(std::memcmp(prior.cov.data(), expected.data(), sizeof(double) * 9) ==
        0);
  // the mean still decays
  CHECK(prior.mean[0] == doctest::Approx(post.mean[0] * std::exp(-0.7))
                             .epsilon(1e-12));
}

TEST_CASE("predict_prior rejects invalid beliefs") {
  const auto cfg = two_mode_config();
  vl::GaussianBelief bad = some_posterior();
  bad.cov(0, 0) = -1.0;
  CHECK_THROWS_AS(predict_prior(bad, cfg), config_error);
}

TEST_CASE("run_filter: single window uses the init prior directly") {
  const auto cfg = two_mode_config();
  vl::GaussianBelief init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3);

  const auto w = window_at(Vec::Zero(3), cfg, 1.0, 0.02, 5);
  const auto traj = run_filter(std::vector<SpectralWindow>{w}, init, cfg);
  REQUIRE(traj.windows.size() == 1);
  CHECK(std::memcmp(traj.windows[0].prior.mean.data(), init.mean.data(),
                    sizeof(double) * 3) == 0);
  CHECK(std::memcmp(traj.windows[0].prior.cov.data(), init.cov.data(),
                    sizeof(double) * 9) == 0);
}

TEST_CASE("run_filter: repeated data keeps the posterior near the generator") {
  const auto cfg = two_mode_config();
  vl::GaussianBelief init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3);

  const auto base = window_at(init.mean, cfg, 0.0, 0.005, 1000);
  std::vector<SpectralWindow> windows;
  for (int k = 0; k < 10; ++k) {
    SpectralWindow w = base;
    w.t = 1.0 + k;
    windows.push_back(std::move(w));
  }
  const auto traj = run_filter(windows, init, cfg);
  REQUIRE(traj.windows.size() == 10);
  for (const auto& rec : traj.windows) {
    for (int i = 0; i < 3; ++i) {
      const double sd = std::sqrt(rec.report.posterior.cov(i, i));
      CHECK(std::abs(rec.report.posterior.mean[i] - init.mean[i]) <=
            3.0 * sd);
    }
  }
}

TEST_CASE("information accumulates when volatility is off") {
  auto cfg = two_mode_config();
  cfg.set_uniform_volatility(0.0);
  cfg.g7_walk_var = 0.0;
  cfg.process_noise = 0.0;

  vl::GaussianBelief init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3);

  const auto w = window_at(init.mean, cfg, 1.0, 0.02, 31);
  std::vector<SpectralWindow> windows;
  for (int k = 0; k < 5; ++k) {
    SpectralWindow copy = w;
    copy.t = 1.0 + k;
    windows.push_back(copy); // identical data repeated
  }
  const auto traj = run_filter(windows, init, cfg);

  auto entropy = [](const Mat& cov) {
    Eigen::LDLT<Mat> ldlt(cov);
    return ldlt.vectorD().array().log().sum();
  };
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& rec : traj.windows) {
    const double e = entropy(rec.report.posterior.cov);
    CHECK(e <= prev + 1e-9);
    prev = e;
  }
}

TEST_CASE("run_filter input validation") {
  const auto cfg = two_mode_config();
  vl::GaussianBelief init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3);

  CHECK_THROWS_AS(run_filter(std::vector<SpectralWindow>{}, init, cfg),
                  config_error);

  auto w1 = window_at(init.mean, cfg, 2.0, 0.0, 1);
  auto w2 = window_at(init.mean, cfg, 1.0, 0.0, 1);
  CHECK_THROWS_AS(
      run_filter(std::vector<SpectralWindow>{w1, w2}, init, cfg),
      config_error);
}

TEST_CASE("field_movie: zero means give zero maps, values match the basis") {
  const auto cfg = two_mode_config();

  BeliefTrajectory traj;
  for (int k = 0; k < 3; ++k) {
    WindowRecord rec;
    rec.t = 1.0 + k;
    rec.prior.mean = Vec::Zero(3);
    rec.prior.cov = Mat::Identity(3, 3);
    rec.report.posterior.mean = Vec::Zero(3);
    if (k == 2) {
      rec.report.posterior.mean << 0.7, -0.3, 0.0;
    }
    rec.report.posterior.cov = Mat::Identity(3, 3);
    traj.windows.push_back(rec);
  }

  const auto movie = field_movie(traj, cfg.basis, 33, 1);
  CHECK(movie.frames[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(movie.frames[1].cwiseAbs().maxCoeff() == 0.0);

  std::vector<field::Point> pts;
  for (Eigen::Index i = 0; i < movie.grid_x.size(); ++i) {
    pts.push_back({movie.grid_x[i], 0.0});
  }
  const Vec expect = field::evaluate_field(
      field::FieldCoeffs{traj.windows[2].report.posterior.mean.head(2)},
      cfg.basis, pts);
  for (Eigen::Index i = 0; i < expect.size(); ++i) {
    CHECK(movie.frames[2](0, i) == doctest::Approx(expect[i]).epsilon(1e-14));
  }
}

TEST_CASE("trajectory survives the results file format") {
  const auto cfg = two_mode_config();
  vl::GaussianBelief init;
  init.mean = Vec::Zero(3);
  init.cov = Mat::Identity(3, 3);

  std::vector<SpectralWindow> windows;
  for (int k = 0; k < 3; ++k) {
    windows.push_back(window_at(init.mean, cfg, 1.0 + k, 0.02,
                                50 + static_cast<std::uint64_t>(k)));
  }
  const auto traj = run_filter(windows, init, cfg);

  harness::DatasetManifest manifest;
  manifest.seed = 1;
  manifest.freqs_hz = cfg.freqs_hz;
  manifest.window_times = {1.0, 2.0, 3.0};
  manifest.layout.rows = 1;
  manifest.layout.cols = 3;
  manifest.layout.spacing = 0.8;
  manifest.layout.positions = interval_positions();
  manifest.domain = cfg.basis.domain;
  manifest.n_modes_per_axis = 2;
  manifest.has_ground_truth = false;

  const auto dir = std::filesystem::temp_directory_path() /
                   "specfield_test_roundtrip";
  std::filesystem::remove_all(dir);
  harness::write_results(traj, manifest, {}, dir);
  const auto loaded = harness::read_results(dir);

  REQUIRE(loaded.trajectory.windows.size() == traj.windows.size());
  for (std::size_t k = 0; k < traj.windows.size(); ++k) {
    const auto& a = traj.windows[k];
    const auto& b = loaded.trajectory.windows[k];
    CHECK(std::abs(a.t - b.t) <= 1e-12);
    CHECK((a.prior.mean - b.prior.mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.prior.cov - b.prior.cov).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.report.posterior.mean - b.report.posterior.mean)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK((a.report.posterior.cov - b.report.posterior.cov)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
    CHECK(std::abs(a.report.free_energy - b.report.free_energy) <= 1e-12);
    CHECK(a.report.iterations == b.report.iterations);
    CHECK(a.report.converged == b.report.converged);
    CHECK(std::abs(a.report.explained_variance -
                   b.report.explained_variance) <= 1e-12);
    CHECK((a.report.predicted_log10 - b.report.predicted_log10)
              .cwiseAbs()
              .maxCoeff() <= 1e-12);
  }
  std::filesystem::remove_all(dir);
}
