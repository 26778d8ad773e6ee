#include "specfield/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specfield::harness {

namespace {

std::string predicted_csv_name(std::size_t k) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "predicted_%03zu.csv", k);
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw format_error("cannot write " + file.string());
  }
  out << text;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw format_error("cannot open " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json belief_to_json(const vl::GaussianBelief& b) {
  ordered_json j;
  j["mean"] = std::vector<double>(b.mean.begin(), b.mean.end());
  ordered_json cov = ordered_json::array();
  for (Eigen::Index r = 0; r < b.cov.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < b.cov.cols(); ++c) {
      row.push_back(b.cov(r, c));
    }
    cov.push_back(row);
  }
  j["cov"] = cov;
  return j;
}

vl::GaussianBelief belief_from_json(const ordered_json& j) {
  vl::GaussianBelief b;
  const auto mean = j.at("mean").get<std::vector<double>>();
  b.mean = Eigen::Map<const Vec>(mean.data(),
                                 static_cast<Eigen::Index>(mean.size()));
  const auto& cov = j.at("cov");
  const auto d = static_cast<Eigen::Index>(cov.size());
  b.cov.resize(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const auto& row = cov.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != d) {
      throw format_error("trajectory covariance is not square");
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      b.cov(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
  return b;
}

char hex_digit(unsigned v) { return "0123456789abcdef"[v & 0xf]; }

std::string hash_to_hex(std::uint64_t h) {
  std::string s = "0x";
  for (int i = 15; i >= 0; --i) {
    s.push_back(hex_digit(static_cast<unsigned>(h >> (4 * i))));
  }
  return s;
}

std::uint64_t hex_to_hash(const std::string& s) {
  if (s.size() != 18 || s[0] != '0' || s[1] != 'x') {
    throw format_error("malformed manifest hash '" + s + "'");
  }
  return std::strtoull(s.c_str() + 2, nullptr, 16);
}

} // namespace

void write_results(const filter::BeliefTrajectory& trajectory,
                   const DatasetManifest& dataset_manifest,
                   const ordered_json& config_echo,
                   const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (trajectory.windows.empty()) {
    throw config_error("cannot write an empty trajectory");
  }
  fs::create_directories(dir / "predicted");

  const std::uint64_t hash = fnv1a64(manifest_to_string(dataset_manifest));
  const int n_modes =
      static_cast<int>(trajectory.windows.front().report.posterior.mean.size()) - 1;

  ordered_json manifest;
  manifest["format_version"] = kResultsFormatVersion;
  manifest["kind"] = "specfield-results";
  manifest["dataset_manifest_fnv1a"] = hash_to_hex(hash);
  manifest["n_modes"] = n_modes;
  manifest["windows"] = trajectory.windows.size();
  manifest["config"] = config_echo.is_null() ? ordered_json::object()
                                             : config_echo;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");

  ordered_json traj;
  traj["format_version"] = kResultsFormatVersion;
  ordered_json windows = ordered_json::array();
  for (const auto& rec : trajectory.windows) {
    ordered_json w;
    w["t"] = rec.t;
    w["prior"] = belief_to_json(rec.prior);
    w["posterior"] = belief_to_json(rec.report.posterior);
    w["free_energy"] = rec.report.free_energy;
    w["iterations"] = rec.report.iterations;
    w["converged"] = rec.report.converged;
    w["covariance_regularized"] = rec.report.covariance_regularized;
    w["explained_variance"] = rec.report.explained_variance;
    w["log_precision"] = rec.report.log_precision;
    w["fe_trace"] = rec.report.fe_trace;
    windows.push_back(w);
  }
  traj["windows"] = windows;
  write_text(dir / "trajectory.json", traj.dump(2) + "\n");

  std::vector<std::string> freq_headers;
  for (Eigen::Index f = 0; f < dataset_manifest.freqs_hz.size(); ++f) {
    freq_headers.push_back(format_double(dataset_manifest.freqs_hz[f]));
  }
  for (std::size_t k = 0; k < trajectory.windows.size(); ++k) {
    const Mat& pred = trajectory.windows[k].report.predicted_log10;
    std::vector<std::string> chan_ids;
    for (Eigen::Index ch = 0; ch < pred.rows(); ++ch) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "ch_%03lld",
                    static_cast<long long>(ch));
      chan_ids.push_back(buf);
    }
    write_matrix_csv(dir / "predicted" / predicted_csv_name(k), pred,
                     "channel", freq_headers, chan_ids);
  }
}

ResultsBundle read_results(const std::filesystem::path& dir) {
  ResultsBundle bundle;
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("results manifest is not valid JSON: ") +
                       e.what());
  }
  bundle.format_version = manifest.at("format_version").get<int>();
  if (bundle.format_version != kResultsFormatVersion) {
    throw format_error("unsupported results format version " +
                       std::to_string(bundle.format_version));
  }
  if (manifest.value("kind", "") != "specfield-results") {
    throw format_error("results manifest kind is not 'specfield-results'");
  }
  bundle.dataset_manifest_fnv1a =
      hex_to_hash(manifest.at("dataset_manifest_fnv1a").get<std::string>());
  bundle.n_modes = manifest.at("n_modes").get<int>();
  bundle.config_echo = manifest.value("config", ordered_json::object());

  ordered_json traj;
  try {
    traj = ordered_json::parse(read_text(dir / "trajectory.json"));
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("trajectory is not valid JSON: ") +
                       e.what());
  }
  std::size_t k = 0;
  for (const auto& w : traj.at("windows")) {
    filter::WindowRecord rec;
    rec.t = w.at("t").get<double>();
    rec.prior = belief_from_json(w.at("prior"));
    rec.report.posterior = belief_from_json(w.at("posterior"));
    rec.report.free_energy = w.at("free_energy").get<double>();
    rec.report.iterations = w.at("iterations").get<int>();
    rec.report.converged = w.at("converged").get<bool>();
    rec.report.covariance_regularized =
        w.at("covariance_regularized").get<bool>();
    rec.report.explained_variance = w.at("explained_variance").get<double>();
    rec.report.log_precision = w.at("log_precision").get<double>();
    rec.report.fe_trace = w.at("fe_trace").get<std::vector<double>>();
    rec.report.predicted_log10 =
        read_matrix_csv(dir / "predicted" / predicted_csv_name(k));
    bundle.trajectory.windows.push_back(std::move(rec));
    ++k;
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// SVG heatmaps

namespace {

// Small perceptual ramp (dark violet to yellow), linearly interpolated.
constexpr double kRamp[9][3] = {
    {0.267, 0.005, 0.329}, {0.283, 0.141, 0.458}, {0.254, 0.265, 0.530},
    {0.207, 0.372, 0.553}, {0.164, 0.471, 0.558}, {0.128, 0.567, 0.551},
    {0.135, 0.659, 0.518}, {0.478, 0.821, 0.318}, {0.993, 0.906, 0.144}};

void ramp_color(double t, int rgb[3]) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * 8.0;
  const int i = std::min(7, static_cast<int>(pos));
  const double f = pos - i;
  for (int c = 0; c < 3; ++c) {
    const double v = kRamp[i][c] + f * (kRamp[i + 1][c] - kRamp[i][c]);
    rgb[c] = static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  }
}

std::string svg_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

} // namespace

void write_heatmap_svg(const std::filesystem::path& file, const Mat& values,
                       double vmin, double vmax, const std::string& title) {
  const int ny = static_cast<int>(values.rows());
  const int nx = static_cast<int>(values.cols());
  if (nx < 1 || ny < 1) {
    throw config_error("heatmap needs a non-empty matrix");
  }
  const int cell = std::max(4, 480 / std::max(nx, ny));
  const int w = nx * cell;
  const int h = ny * cell;
  const int header = 36;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h + header << "\">\n";
  out << "<text x=\"4\" y=\"14\" font-family=\"monospace\" font-size=\"12\">"
      << title << "</text>\n";
  out << "<text x=\"4\" y=\"30\" font-family=\"monospace\" font-size=\"11\">"
      << "min=" << svg_num(vmin) << " max=" << svg_num(vmax) << "</text>\n";

  const double span = vmax > vmin ? vmax - vmin : 1.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int rgb[3];
      ramp_color((values(j, i) - vmin) / span, rgb);
      // row 0 at the bottom
      const int ypix = header + (ny - 1 - j) * cell;
      out << "<rect x=\"" << i * cell << "\" y=\"" << ypix << "\" width=\""
          << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << rgb[0]
          << ',' << rgb[1] << ',' << rgb[2] << ")\"/>\n";
    }
  }
  out << "</svg>\n";
  write_text(file, out.str());
}

// ---------------------------------------------------------------------------
// Report

namespace {

double pearson(const Vec& a, const Vec& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Vec da = a.array() - ma;
  const Vec db = b.array() - mb;
  const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (denom <= 0.0) {
    return 0.0;
  }
  return da.dot(db) / denom;
}

std::string map_csv_name(const char* prefix, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.csv", prefix, k);
  return buf;
}

std::string map_svg_name(const char* prefix, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03zu.svg", prefix, k);
  return buf;
}

} // namespace

ReportSummary report(const ResultsBundle& results, const Dataset& dataset,
                     const std::filesystem::path& out_dir, int grid_nx,
                     int grid_ny) {
  namespace fs = std::filesystem;
  const DatasetManifest& m = dataset.manifest;

  const std::uint64_t expect = fnv1a64(manifest_to_string(m));
  if (results.dataset_manifest_fnv1a != expect) {
    throw format_error("results bundle was not produced from this dataset "
                       "(manifest hash mismatch)");
  }
  if (results.trajectory.windows.size() != dataset.windows.size()) {
    throw format_error("results window count does not match dataset");
  }

  fs::create_directories(out_dir / "maps");

  ReportSummary summary;
  summary.windows = static_cast<int>(dataset.windows.size());
  summary.channels = m.layout.channels();

  // Explained variance from the stored predictions against the data.
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double grand_sum = 0.0;
  long grand_count = 0;
  std::vector<Mat> observed_log10;
  for (const auto& w : dataset.windows) {
    Mat lg(w.power.rows(), w.power.cols());
    for (Eigen::Index r = 0; r < w.power.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.power.cols(); ++c) {
        if (!(w.power(r, c) > 0.0)) {
          throw numeric_error("dataset contains non-positive power");
        }
        lg(r, c) = std::log10(w.power(r, c));
      }
    }
    grand_sum += lg.sum();
    grand_count += lg.size();
    observed_log10.push_back(std::move(lg));
  }
  const double grand_mean = grand_sum / static_cast<double>(grand_count);

  for (std::size_t k = 0; k < dataset.windows.size(); ++k) {
    const Mat& obs = observed_log10[k];
    const Mat& pred = results.trajectory.windows[k].report.predicted_log10;
    if (pred.rows() != obs.rows() || pred.cols() != obs.cols()) {
      throw format_error("stored prediction shape mismatch in window " +
                         std::to_string(k));
    }
    summary.per_window_ev.push_back(vl::explained_variance(obs, pred));
    summary.free_energy.push_back(
        results.trajectory.windows[k].report.free_energy);
    ss_res += (obs - pred).array().square().sum();
    ss_tot += (obs.array() - grand_mean).square().sum();
  }
  summary.total_explained_variance = 1.0 - ss_res / ss_tot;

  // Rebuild the inversion basis: per-axis mode count from the inversion
  // config when echoed, else from the dataset manifest.
  int modes_per_axis = m.n_modes_per_axis;
  if (results.config_echo.contains("n_modes_per_axis")) {
    modes_per_axis = results.config_echo.at("n_modes_per_axis").get<int>();
  }
  const field::EigenBasis basis = field::build_basis(m.domain, modes_per_axis);
  if (basis.size() != results.n_modes) {
    throw format_error("results mode count does not match its config");
  }

  // Posterior-mean field at the electrodes, one row per window.
  const Mat phi_elec = field::basis_matrix(basis, m.layout.positions);
  Mat est_elec(summary.windows, summary.channels);
  for (std::size_t k = 0; k < results.trajectory.windows.size(); ++k) {
    const Vec c =
        results.trajectory.windows[k].report.posterior.mean.head(basis.size());
    est_elec.row(static_cast<Eigen::Index>(k)) = (phi_elec * c).transpose();
  }

  const bool truth_present = dataset.truth.has_value();
  summary.has_truth = truth_present;
  if (truth_present) {
    const Mat& truth_elec = dataset.truth->field_at_electrodes;
    if (truth_elec.rows() != est_elec.rows() ||
        truth_elec.cols() != est_elec.cols()) {
      throw format_error("ground truth shape does not match results");
    }
    Vec tv(truth_elec.size());
    Vec ev(est_elec.size());
    Eigen::Index idx = 0;
    for (Eigen::Index r = 0; r < truth_elec.rows(); ++r) {
      for (Eigen::Index c = 0; c < truth_elec.cols(); ++c) {
        tv[idx] = truth_elec(r, c);
        ev[idx] = est_elec(r, c);
        ++idx;
      }
    }
    summary.field_correlation = pearson(tv, ev);

    // Hotspot agreement on the electrode grid: argmax within a Chebyshev
    // distance of one cell.
    int agree = 0;
    for (Eigen::Index k = 0; k < truth_elec.rows(); ++k) {
      Eigen::Index ti = 0, ei = 0;
      truth_elec.row(k).maxCoeff(&ti);
      est_elec.row(k).maxCoeff(&ei);
      const int tr = static_cast<int>(ti) / m.layout.cols;
      const int tc = static_cast<int>(ti) % m.layout.cols;
      const int er = static_cast<int>(ei) / m.layout.cols;
      const int ec = static_cast<int>(ei) % m.layout.cols;
      if (std::abs(tr - er) <= 1 && std::abs(tc - ec) <= 1) {
        ++agree;
      }
    }
    summary.hotspot_agreement =
        static_cast<double>(agree) / static_cast<double>(truth_elec.rows());
  }

  // Display maps: estimate always; truth when the scene is coefficient
  // based (so it can be evaluated anywhere).
  const bool is_rect = m.domain.kind == field::DomainKind::rectangle;
  if (grid_nx <= 0) {
    grid_nx = is_rect ? 49 : 129;
  }
  if (grid_ny <= 0) {
    grid_ny = is_rect ? 49 : 1;
  }
  const filter::FieldMovie movie =
      filter::field_movie(results.trajectory, basis, grid_nx, grid_ny);

  std::vector<std::string> xh;
  for (Eigen::Index i = 0; i < movie.grid_x.size(); ++i) {
    xh.push_back(format_double(movie.grid_x[i]));
  }
  std::vector<std::string> yh;
  for (Eigen::Index j = 0; j < movie.grid_y.size(); ++j) {
    yh.push_back(format_double(movie.grid_y[j]));
  }

  const bool truth_coeffs =
      truth_present && dataset.truth->coeffs.size() > 0 &&
      dataset.truth->coeffs.cols() == basis.size();
  std::vector<field::Point> grid_pts;
  if (truth_coeffs) {
    for (Eigen::Index j = 0; j < movie.grid_y.size(); ++j) {
      for (Eigen::Index i = 0; i < movie.grid_x.size(); ++i) {
        grid_pts.push_back({movie.grid_x[i], movie.grid_y[j]});
      }
    }
  }
  const Mat phi_grid =
      truth_coeffs ? field::basis_matrix(basis, grid_pts) : Mat();

  for (std::size_t k = 0; k < movie.frames.size(); ++k) {
    const Mat& frame = movie.frames[k];
    write_matrix_csv(out_dir / "maps" / map_csv_name("estimate", k), frame,
                     "y\\x", xh, yh);
    char title[64];
    std::snprintf(title, sizeof(title), "estimated field, window %03zu", k);
    write_heatmap_svg(out_dir / "maps" / map_svg_name("estimate", k), frame,
                      frame.minCoeff(), frame.maxCoeff(), title);

    if (truth_coeffs) {
      const Vec tc = dataset.truth->coeffs.row(static_cast<Eigen::Index>(k))
                         .transpose();
      const Vec vals = phi_grid * tc;
      Mat tframe(movie.grid_y.size(), movie.grid_x.size());
      for (Eigen::Index j = 0; j < movie.grid_y.size(); ++j) {
        for (Eigen::Index i = 0; i < movie.grid_x.size(); ++i) {
          tframe(j, i) = vals[j * movie.grid_x.size() + i];
        }
      }
      write_matrix_csv(out_dir / "maps" / map_csv_name("truth", k), tframe,
                       "y\\x", xh, yh);
      std::snprintf(title, sizeof(title), "true field, window %03zu", k);
      write_heatmap_svg(out_dir / "maps" / map_svg_name("truth", k), tframe,
                        tframe.minCoeff(), tframe.maxCoeff(), title);
    }
  }

  ordered_json sj;
  sj["format_version"] = 1;
  sj["kind"] = "specfield-report";
  sj["windows"] = summary.windows;
  sj["channels"] = summary.channels;
  sj["total_explained_variance"] = summary.total_explained_variance;
  sj["per_window_explained_variance"] = summary.per_window_ev;
  sj["free_energy"] = summary.free_energy;
  if (summary.field_correlation) {
    sj["field_correlation"] = *summary.field_correlation;
  }
  if (summary.hotspot_agreement) {
    sj["hotspot_agreement"] = *summary.hotspot_agreement;
  }
  write_text(out_dir / "summary.json", sj.dump(2) + "\n");

  return summary;
}

} // namespace specfield::harness
