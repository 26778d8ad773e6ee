#include "specfield/dataset.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specfield::harness {

namespace {

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw format_error("cannot open " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw format_error("cannot write " + file.string());
  }
  out << text;
}

std::string window_csv_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "window_%03zu.csv", k);
  return buf;
}

std::string channel_id(int row, int col, int cols) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ch_%03d", row * cols + col);
  return buf;
}

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

ordered_json domain_to_json(const field::DomainSpec& d) {
  ordered_json j;
  j["kind"] = d.kind == field::DomainKind::interval ? "interval" : "rectangle";
  j["Lx"] = d.Lx;
  if (d.kind == field::DomainKind::rectangle) {
    j["Ly"] = d.Ly;
  }
  j["alpha"] = d.alpha;
  return j;
}

field::DomainSpec domain_from_json(const ordered_json& j) {
  field::DomainSpec d;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "interval") {
    d.kind = field::DomainKind::interval;
  } else if (kind == "rectangle") {
    d.kind = field::DomainKind::rectangle;
  } else {
    throw format_error("unknown domain kind '" + kind + "'");
  }
  d.Lx = j.at("Lx").get<double>();
  d.Ly = j.value("Ly", 1.0);
  d.alpha = j.at("alpha").get<double>();
  return d;
}

} // namespace

std::string manifest_to_string(const DatasetManifest& m) {
  ordered_json j;
  j["format_version"] = m.format_version;
  j["kind"] = "specfield-dataset";
  j["seed"] = m.seed;
  j["freqs_hz"] = std::vector<double>(m.freqs_hz.begin(), m.freqs_hz.end());
  j["window_times"] = m.window_times;

  ordered_json el;
  el["rows"] = m.layout.rows;
  el["cols"] = m.layout.cols;
  el["spacing"] = m.layout.spacing;
  ordered_json pos = ordered_json::array();
  for (const auto& p : m.layout.positions) {
    pos.push_back({p.x, p.y});
  }
  el["positions"] = pos;
  j["electrodes"] = el;

  j["domain"] = domain_to_json(m.domain);
  j["n_modes_per_axis"] = m.n_modes_per_axis;
  j["has_ground_truth"] = m.has_ground_truth;
  j["config"] = m.config_echo.is_null() ? ordered_json::object()
                                        : m.config_echo;
  return j.dump(2) + "\n";
}

namespace {

DatasetManifest manifest_from_string(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kDatasetFormatVersion) {
    throw format_error("unsupported dataset format version " +
                       std::to_string(m.format_version));
  }
  if (j.value("kind", "") != "specfield-dataset") {
    throw format_error("manifest kind is not 'specfield-dataset'");
  }
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto freqs = j.at("freqs_hz").get<std::vector<double>>();
  m.freqs_hz = Eigen::Map<const Vec>(freqs.data(),
                                     static_cast<Eigen::Index>(freqs.size()));
  m.window_times = j.at("window_times").get<std::vector<double>>();

  const auto& el = j.at("electrodes");
  m.layout.rows = el.at("rows").get<int>();
  m.layout.cols = el.at("cols").get<int>();
  m.layout.spacing = el.at("spacing").get<double>();
  for (const auto& p : el.at("positions")) {
    m.layout.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  if (static_cast<int>(m.layout.positions.size()) != m.layout.channels()) {
    throw format_error("electrode position count does not match rows*cols");
  }

  m.domain = domain_from_json(j.at("domain"));
  m.n_modes_per_axis = j.at("n_modes_per_axis").get<int>();
  m.has_ground_truth = j.at("has_ground_truth").get<bool>();
  m.config_echo = j.value("config", ordered_json::object());
  return m;
}

} // namespace

void write_matrix_csv(const std::filesystem::path& file, const Mat& values,
                      const std::string& corner,
                      const std::vector<std::string>& col_headers,
                      const std::vector<std::string>& row_ids) {
  if (static_cast<Eigen::Index>(col_headers.size()) != values.cols() ||
      static_cast<Eigen::Index>(row_ids.size()) != values.rows()) {
    throw config_error("matrix CSV headers do not match matrix shape");
  }
  std::ostringstream out;
  out << corner;
  for (const auto& h : col_headers) {
    out << ',' << h;
  }
  out << "\r\n";
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out << row_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      out << ',' << format_double(values(r, c));
    }
    out << "\r\n";
  }
  write_file(file, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

Mat read_matrix_csv(const std::filesystem::path& file,
                    std::vector<std::string>* col_headers,
                    std::vector<std::string>* row_ids) {
  const std::string text = read_file(file);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw format_error("empty CSV file " + file.string());
  }
  const auto header = split_csv_line(line);
  if (header.size() < 2) {
    throw format_error("CSV header too short in " + file.string());
  }
  const std::size_t ncol = header.size() - 1;
  if (col_headers) {
    col_headers->assign(header.begin() + 1, header.end());
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != ncol + 1) {
      throw format_error("ragged CSV row in " + file.string());
    }
    ids.push_back(cells[0]);
    std::vector<double> vals(ncol);
    for (std::size_t i = 0; i < ncol; ++i) {
      char* end = nullptr;
      vals[i] = std::strtod(cells[i + 1].c_str(), &end);
      if (end == cells[i + 1].c_str()) {
        throw format_error("non-numeric cell in " + file.string());
      }
    }
    rows.push_back(std::move(vals));
  }
  if (row_ids) {
    *row_ids = ids;
  }
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(ncol));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < ncol; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return m;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const DatasetManifest& m = dataset.manifest;
  if (dataset.windows.size() != m.window_times.size()) {
    throw config_error("dataset window count does not match manifest");
  }

  fs::create_directories(dir / "windows");
  write_file(dir / "manifest.json", manifest_to_string(m));

  std::vector<std::string> freq_headers;
  for (Eigen::Index f = 0; f < m.freqs_hz.size(); ++f) {
    freq_headers.push_back(format_double(m.freqs_hz[f]));
  }
  std::vector<std::string> chan_ids;
  for (int r = 0; r < m.layout.rows; ++r) {
    for (int c = 0; c < m.layout.cols; ++c) {
      chan_ids.push_back(channel_id(r, c, m.layout.cols));
    }
  }

  for (std::size_t k = 0; k < dataset.windows.size(); ++k) {
    const SpectralWindow& w = dataset.windows[k];
    if (w.power.rows() != m.layout.channels() ||
        w.power.cols() != m.freqs_hz.size()) {
      throw config_error("window " + std::to_string(k) +
                         " shape does not match manifest");
    }
    write_matrix_csv(dir / "windows" / window_csv_name(k), w.power, "channel",
                     freq_headers, chan_ids);
  }

  if (dataset.truth.has_value() != m.has_ground_truth) {
    throw config_error("manifest has_ground_truth does not match payload");
  }
  if (dataset.truth) {
    fs::create_directories(dir / "truth");
    const GroundTruth& t = *dataset.truth;
    const auto K = static_cast<Eigen::Index>(dataset.windows.size());
    if (t.field_at_electrodes.rows() != K || t.g7_offsets.size() != K) {
      throw config_error("ground truth shape does not match window count");
    }

    std::vector<std::string> win_ids;
    for (std::size_t k = 0; k < dataset.windows.size(); ++k) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "w_%03zu", k);
      win_ids.push_back(buf);
    }
    write_matrix_csv(dir / "truth" / "field_electrodes.csv",
                     t.field_at_electrodes, "window", chan_ids, win_ids);

    Mat g7 = t.g7_offsets;
    write_matrix_csv(dir / "truth" / "g7_offsets.csv", g7, "window",
                     {"g7_log_offset"}, win_ids);

    if (t.coeffs.size() > 0) {
      if (t.coeffs.rows() != K) {
        throw config_error("ground truth coeffs do not match window count");
      }
      std::vector<std::string> coeff_headers;
      for (Eigen::Index i = 0; i < t.coeffs.cols(); ++i) {
        coeff_headers.push_back("c_" + std::to_string(i));
      }
      write_matrix_csv(dir / "truth" / "coeffs.csv", t.coeffs, "window",
                       coeff_headers, win_ids);
    }
  }
}

Dataset read_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Dataset ds;
  ds.manifest = manifest_from_string(read_file(dir / "manifest.json"));
  const DatasetManifest& m = ds.manifest;

  for (std::size_t k = 0; k < m.window_times.size(); ++k) {
    SpectralWindow w;
    w.t = m.window_times[k];
    w.positions = m.layout.positions;
    w.power = read_matrix_csv(dir / "windows" / window_csv_name(k));
    if (w.power.rows() != m.layout.channels() ||
        w.power.cols() != m.freqs_hz.size()) {
      throw format_error("window file " + window_csv_name(k) +
                         " does not match manifest dimensions");
    }
    if (!w.power.allFinite() || w.power.minCoeff() < 0.0) {
      throw format_error("window file " + window_csv_name(k) +
                         " contains negative or non-finite power");
    }
    ds.windows.push_back(std::move(w));
  }

  if (m.has_ground_truth) {
    GroundTruth t;
    t.field_at_electrodes =
        read_matrix_csv(dir / "truth" / "field_electrodes.csv");
    const Mat g7 = read_matrix_csv(dir / "truth" / "g7_offsets.csv");
    t.g7_offsets = g7.col(0);
    if (fs::exists(dir / "truth" / "coeffs.csv")) {
      t.coeffs = read_matrix_csv(dir / "truth" / "coeffs.csv");
    }
    ds.truth = std::move(t);
  }
  return ds;
}

} // namespace specfield::harness
