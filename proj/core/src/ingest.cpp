#include "qpgp/ingest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qpgp/error.hpp"

namespace qpgp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_missing_marker(const std::string& cell) {
  const std::string t = lower(trim(cell));
  return t.empty() || t == "nan" || t == "na";
}

std::optional<double> parse_number(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

std::pair<std::vector<double>, LoadReport> load_csv(const std::string& path,
                                                    const PreprocessSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error("file-not-found", "cannot open " + path);

  LoadReport report;
  std::vector<std::optional<double>> raw;
  std::vector<std::string> header;
  std::optional<double> last_time;
  int columns = 0;
  int value_col = -1;
  long line_no = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);

    if (columns == 0) {
      columns = static_cast<int>(cells.size());
      if (columns < 1 || columns > 2) {
        throw Error("csv-parse-error",
                    "line " + std::to_string(line_no) + ": expected one or two columns");
      }
      // Header detection: a first row whose cells are neither numbers nor
      // missing markers.
      bool numeric = false;
      for (const auto& c : cells) {
        if (parse_number(c) || is_missing_marker(c)) numeric = true;
      }
      if (!numeric) {
        report.had_header = true;
        header = cells;
        continue;
      }
    }
    if (static_cast<int>(cells.size()) != columns) {
      throw Error("csv-parse-error",
                  "line " + std::to_string(line_no) + ": inconsistent column count");
    }

    if (value_col < 0) {
      if (spec.column.empty()) {
        value_col = columns == 2 ? 1 : 0;
      } else if (report.had_header &&
                 std::find(header.begin(), header.end(), spec.column) != header.end()) {
        value_col = static_cast<int>(std::find(header.begin(), header.end(), spec.column) -
                                     header.begin());
      } else {
        const auto idx = parse_number(spec.column);
        if (!idx || *idx < 0 || *idx >= columns) {
          throw Error("bad-column", "value column '" + spec.column + "' not found");
        }
        value_col = static_cast<int>(*idx);
      }
    }

    if (columns == 2) {
      const int time_col = value_col == 0 ? 1 : 0;
      const auto t = parse_number(cells[static_cast<std::size_t>(time_col)]);
      if (!t) {
        throw Error("csv-parse-error",
                    "line " + std::to_string(line_no) + ": unparseable time value");
      }
      if (last_time && !(*t > *last_time)) {
        throw Error("csv-time-not-monotonic",
                    "line " + std::to_string(line_no) + ": time column must increase");
      }
      last_time = t;
    }

    const std::string& cell = cells[static_cast<std::size_t>(value_col)];
    if (is_missing_marker(cell)) {
      raw.push_back(std::nullopt);
      ++report.missing;
    } else {
      const auto v = parse_number(cell);
      if (!v) {
        throw Error("csv-parse-error",
                    "line " + std::to_string(line_no) + ": unparseable value '" + cell + "'");
      }
      raw.push_back(*v);
    }
  }

  report.rows = static_cast<long>(raw.size());
  report.column_used = report.had_header && value_col >= 0 &&
                               value_col < static_cast<int>(header.size())
                           ? header[static_cast<std::size_t>(value_col)]
                           : std::to_string(std::max(value_col, 0));
  if (raw.empty() || report.missing == report.rows) {
    throw Error("empty-series", "no usable values in " + path);
  }

  std::vector<double> values(raw.size());
  if (spec.impute == PreprocessSpec::Impute::Linear && report.missing > 0) {
    const long n = report.rows;
    long first_obs = -1, last_obs = -1;
    for (long i = 0; i < n; ++i) {
      if (raw[static_cast<std::size_t>(i)]) {
        if (first_obs < 0) first_obs = i;
        last_obs = i;
      }
    }
    // Boundary gaps take the nearest observed value; interior gaps are
    // linearly interpolated between their anchors.
    for (long i = 0; i < first_obs; ++i) {
      values[static_cast<std::size_t>(i)] = *raw[static_cast<std::size_t>(first_obs)];
      ++report.boundary_filled;
    }
    for (long i = last_obs + 1; i < n; ++i) {
      values[static_cast<std::size_t>(i)] = *raw[static_cast<std::size_t>(last_obs)];
      ++report.boundary_filled;
    }
    long prev = first_obs;
    for (long i = first_obs; i <= last_obs; ++i) {
      if (raw[static_cast<std::size_t>(i)]) {
        values[static_cast<std::size_t>(i)] = *raw[static_cast<std::size_t>(i)];
        if (i > prev + 1) {
          const double lo = *raw[static_cast<std::size_t>(prev)];
          const double hi = *raw[static_cast<std::size_t>(i)];
          for (long j = prev + 1; j < i; ++j) {
            const double frac = static_cast<double>(j - prev) / static_cast<double>(i - prev);
            values[static_cast<std::size_t>(j)] = lo + frac * (hi - lo);
          }
        }
        prev = i;
      }
    }
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      values[i] = raw[i] ? *raw[i] : std::numeric_limits<double>::quiet_NaN();
    }
  }
  return {std::move(values), report};
}

std::pair<std::vector<double>, QuadTrend> detrend_quadratic(const std::vector<double>& values) {
  const long n = static_cast<long>(values.size());
  if (n < 3) throw Error("detrend-insufficient-data", "quadratic detrend needs n >= 3");

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd y(n);
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i + 1);
    design(i, 0) = 1.0;
    design(i, 1) = t;
    design(i, 2) = t * t;
    y[i] = values[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d beta = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - design * beta;

  std::vector<double> out(resid.data(), resid.data() + n);
  return {std::move(out), QuadTrend{beta[0], beta[1], beta[2]}};
}

std::pair<std::vector<double>, double> detrend_mean(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] - mean;
  return {std::move(out), mean};
}

PreprocessResult load_and_preprocess(const std::string& path, const PreprocessSpec& spec) {
  auto [values, report] = load_csv(path, spec);
  PreprocessResult out;
  out.load = report;
  switch (spec.detrend) {
    case PreprocessSpec::Detrend::None:
      out.values = std::move(values);
      break;
    case PreprocessSpec::Detrend::Mean: {
      auto [resid, mean] = detrend_mean(values);
      out.values = std::move(resid);
      out.mean_removed = mean;
      break;
    }
    case PreprocessSpec::Detrend::Quadratic: {
      auto [resid, trend] = detrend_quadratic(values);
      out.values = std::move(resid);
      out.trend = trend;
      break;
    }
  }
  return out;
}

}  // namespace qpgp
