#ifndef CHERRYWINE_INGEST_HPP
#define CHERRYWINE_INGEST_HPP

// Sample loading, equal-frequency partitioning and the discrete sample copula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cherrywine/error.hpp"

namespace cherrywine {

// N x d matrix of finite observations with unique column labels.
class Dataset {
 public:
  Dataset(std::size_t rows, std::size_t cols, std::vector<double> values,
          std::vector<std::string> names = {})
      : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
    if (cols_ < 2) throw usage_error("ingest", "d >= 2 required");
    if (rows_ < 2) throw usage_error("ingest", "N >= 2 required");
    if (values_.size() != rows_ * cols_)
      throw integrity_error("ingest", "value count does not match N x d");
    if (names_.empty()) {
      for (std::size_t c = 0; c < cols_; ++c) names_.push_back("X" + std::to_string(c + 1));
    }
    if (names_.size() != cols_)
      throw integrity_error("ingest", "column label count does not match d");
    std::set<std::string> seen;
    for (const auto& n : names_) {
      if (!seen.insert(n).second)
        throw integrity_error("ingest", "duplicate column label '" + n + "'");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        if (!std::isfinite(values_[r * cols_ + c])) {
          throw integrity_error("ingest", "non-finite value at row " + std::to_string(r + 1) +
                                              ", column " + std::to_string(c + 1));
        }
      }
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::string> names_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

// Comma-separated numeric table, optional header row. Rows are reported
// 1-based counting data rows only (the header is not a row).
inline Dataset parse_csv(std::istream& in, bool header) {
  std::vector<std::string> names;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t row = 0;
  std::size_t line_no = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (first && header) {
      names = fields;
      cols = fields.size();
      first = false;
      continue;
    }
    if (first) {
      cols = fields.size();
      first = false;
    }
    ++row;
    if (fields.size() != cols) {
      throw integrity_error("ingest", "row " + std::to_string(row) + " (line " +
                                          std::to_string(line_no) + ") has " +
                                          std::to_string(fields.size()) + " columns, expected " +
                                          std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& f = fields[c];
      char* end = nullptr;
      const double v = f.empty() ? 0.0 : std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size()) {
        throw integrity_error("ingest", "cannot parse '" + f + "' at row " + std::to_string(row) +
                                            ", column " + std::to_string(c + 1));
      }
      if (!std::isfinite(v)) {
        throw integrity_error("ingest", "non-finite value at row " + std::to_string(row) +
                                            ", column " + std::to_string(c + 1));
      }
      values.push_back(v);
    }
  }
  if (cols < 2) throw usage_error("ingest", "d >= 2 required");
  return Dataset(row, cols, std::move(values), std::move(names));
}

inline Dataset load_csv(const std::filesystem::path& path, bool header) {
  std::ifstream in(path);
  if (!in) throw integrity_error("ingest", "cannot open " + path.string());
  return parse_csv(in, header);
}

// Header line plus one line per row, values with full round-trip precision.
inline void write_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.names()[c];
  out << "\n";
  char buf[32];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data(r, c));
      out << (c ? "," : "") << buf;
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Uniform (equal-frequency) partition.

// Boundaries x_0 < x_1 < ... < x_m of one variable. Bin j (1-based) is the
// half-open interval (x_{j-1}, x_j].
struct VariablePartition {
  std::vector<double> boundaries;
  std::vector<std::size_t> counts;  // sample values per bin, size m

  int bins() const noexcept { return static_cast<int>(counts.size()); }

  // 1-based bin index, 0 when x lies outside (x_0, x_m].
  int locate(double x) const {
    if (!(x > boundaries.front()) || x > boundaries.back()) return 0;
    auto it = std::lower_bound(boundaries.begin() + 1, boundaries.end(), x);
    return static_cast<int>(it - boundaries.begin());
  }
};

struct Partition {
  std::vector<VariablePartition> variables;

  std::size_t dimension() const noexcept { return variables.size(); }
  std::vector<int> bins() const {
    std::vector<int> m;
    for (const auto& v : variables) m.push_back(v.bins());
    return m;
  }
};

// floor(sqrt(N)) clamped to [2, 32].
inline int default_bin_count(std::size_t n) {
  std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return static_cast<int>(std::clamp<std::size_t>(r, 2, 32));
}

// Equal-frequency bin sizes: the first N mod m bins get ceil(N/m) points.
inline std::vector<std::size_t> target_bin_sizes(std::size_t n, int m) {
  const auto mm = static_cast<std::size_t>(m);
  std::vector<std::size_t> sizes(mm, n / mm);
  for (std::size_t j = 0; j < n % mm; ++j) ++sizes[j];
  return sizes;
}

inline VariablePartition partition_values(std::vector<double> values, int m,
                                          const std::string& label) {
  const std::size_t n = values.size();
  if (m < 1) throw usage_error("ingest", "bin count must be positive");
  if (static_cast<std::size_t>(m) > n)
    throw usage_error("ingest", "bin count " + std::to_string(m) + " exceeds N for " + label);
  std::sort(values.begin(), values.end());
  const double lo = values.front();
  const double hi = values.back();
  if (lo == hi && m > 1)
    throw numerical_error("ingest", "all values of " + label + " are identical");

  VariablePartition p;
  const double spread = hi > lo ? hi - lo : 1.0;
  p.boundaries.push_back(lo - spread);

  const auto sizes = target_bin_sizes(n, m);
  std::size_t target = 0;
  std::size_t end = 0;  // one past the last point already assigned
  for (int j = 0; j + 1 < m; ++j) {
    target += sizes[static_cast<std::size_t>(j)];
    std::size_t e = std::max(target, end + 1);
    // ties never straddle a boundary: move it past the last tied value
    while (e < n && values[e] == values[e - 1]) ++e;
    if (e >= n) {
      throw numerical_error("ingest", "tied values in " + label + " leave fewer than " +
                                          std::to_string(m) + " distinct bins");
    }
    p.boundaries.push_back(values[e - 1]);
    p.counts.push_back(e - end);
    end = e;
  }
  p.boundaries.push_back(hi);
  p.counts.push_back(n - end);
  return p;
}

inline Partition uniform_partition(const Dataset& data, std::span<const int> m) {
  if (m.size() != data.cols())
    throw usage_error("ingest", "need one bin count per variable");
  Partition p;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    p.variables.push_back(partition_values(data.column(c), m[c], data.names()[c]));
  }
  return p;
}

inline Partition uniform_partition(const Dataset& data, int m) {
  std::vector<int> all(data.cols(), m);
  return uniform_partition(data, all);
}

// ---------------------------------------------------------------------------
// Discretized sample.

// Average ranks r/(N+1) of one column, ties sharing their mean rank.
inline std::vector<double> pseudo_observations(std::span<const double> column) {
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> u(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && column[order[j + 1]] == column[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) u[order[k]] = rank / static_cast<double>(n + 1);
    i = j + 1;
  }
  return u;
}

// Rank-binned sample: bin indices j in 1..m_i with grid values u_j = j/m_i,
// plus the rank pseudo-observations used by pair-copula fitting.
class DiscretizedSample {
 public:
  DiscretizedSample(std::size_t rows, std::size_t cols, std::vector<int> bins,
                    std::vector<int> m, std::vector<double> pseudo)
      : rows_(rows), cols_(cols), bins_(std::move(bins)), m_(std::move(m)),
        pseudo_(std::move(pseudo)) {
    if (bins_.size() != rows_ * cols_ || m_.size() != cols_ || pseudo_.size() != rows_ * cols_)
      throw integrity_error("ingest", "discretized sample shape mismatch");
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        const int b = bins_[r * cols_ + c];
        if (b < 1 || b > m_[c])
          throw integrity_error("ingest", "bin index out of range at row " + std::to_string(r + 1));
      }
    }
  }

  // Builds a sample directly from bin indices; pseudo-observations come from
  // the ranks of the bins themselves.
  static DiscretizedSample from_bins(std::size_t rows, std::size_t cols, std::vector<int> bins,
                                     std::vector<int> m) {
    std::vector<double> pseudo(rows * cols);
    std::vector<double> col(rows);
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t r = 0; r < rows; ++r) col[r] = bins.at(r * cols + c);
      const auto u = pseudo_observations(col);
      for (std::size_t r = 0; r < rows; ++r) pseudo[r * cols + c] = u[r];
    }
    return DiscretizedSample(rows, cols, std::move(bins), std::move(m), std::move(pseudo));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int bin(std::size_t r, std::size_t c) const { return bins_[r * cols_ + c]; }
  double pseudo(std::size_t r, std::size_t c) const { return pseudo_[r * cols_ + c]; }
  const std::vector<int>& bin_counts() const noexcept { return m_; }
  const std::vector<int>& bins() const noexcept { return bins_; }

  // u_j^i = j / m_i for j = 0..m_i; `variable` is 1-based.
  double grid(int variable, int j) const {
    return static_cast<double>(j) / m_[static_cast<std::size_t>(variable - 1)];
  }
  std::vector<double> grid(int variable) const {
    const int m = m_[static_cast<std::size_t>(variable - 1)];
    std::vector<double> g(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) g[static_cast<std::size_t>(j)] = grid(variable, j);
    return g;
  }

  std::vector<double> pseudo_column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = pseudo(r, c);
    return out;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> bins_;
  std::vector<int> m_;
  std::vector<double> pseudo_;
};

// What to do with a value outside (x_0, x_m]: fail, or put it in the
// nearest end bin (used when scoring new data against a fitted partition).
enum class OutOfRange { error, clamp };

inline DiscretizedSample discretize(const Dataset& data, const Partition& p,
                                    OutOfRange policy = OutOfRange::error) {
  if (p.dimension() != data.cols())
    throw usage_error("ingest", "partition dimension does not match data");
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<int> bins(n * d);
  std::vector<double> pseudo(n * d);
  for (std::size_t c = 0; c < d; ++c) {
    const auto& var = p.variables[c];
    for (std::size_t r = 0; r < n; ++r) {
      const double x = data(r, c);
      int b = var.locate(x);
      if (b == 0 && policy == OutOfRange::clamp) b = x <= var.boundaries.front() ? 1 : var.bins();
      if (b == 0) {
        throw integrity_error("ingest", "value at row " + std::to_string(r + 1) + ", column " +
                                            std::to_string(c + 1) +
                                            " lies outside the partition range");
      }
      bins[r * d + c] = b;
    }
    const auto col = data.column(c);
    const auto u = pseudo_observations(col);
    for (std::size_t r = 0; r < n; ++r) pseudo[r * d + c] = u[r];
  }
  return DiscretizedSample(n, d, std::move(bins), p.bins(), std::move(pseudo));
}

// ---------------------------------------------------------------------------
// Sample-derived copula density: joint cell frequencies of the binned sample.

class SampleCopulaDensity {
 public:
  using Cell = std::vector<int>;

  SampleCopulaDensity(std::map<Cell, std::size_t> counts, std::vector<int> m, std::size_t n)
      : counts_(std::move(counts)), m_(std::move(m)), n_(n) {}

  std::size_t sample_size() const noexcept { return n_; }
  const std::vector<int>& bin_counts() const noexcept { return m_; }
  std::size_t nonzero_cells() const noexcept { return counts_.size(); }
  const std::map<Cell, std::size_t>& counts() const noexcept { return counts_; }

  double mass(const Cell& cell) const {
    auto it = counts_.find(cell);
    return it == counts_.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n_);
  }

  std::vector<std::pair<Cell, double>> cells() const {
    std::vector<std::pair<Cell, double>> out;
    out.reserve(counts_.size());
    for (const auto& [cell, c] : counts_)
      out.emplace_back(cell, static_cast<double>(c) / static_cast<double>(n_));
    return out;
  }

 private:
  std::map<Cell, std::size_t> counts_;
  std::vector<int> m_;
  std::size_t n_;
};

inline SampleCopulaDensity sample_copula(const DiscretizedSample& ds) {
  std::map<std::vector<int>, std::size_t> counts;
  std::vector<int> cell(ds.cols());
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.cols(); ++c) cell[c] = ds.bin(r, c);
    ++counts[cell];
  }
  return SampleCopulaDensity(std::move(counts), ds.bin_counts(), ds.rows());
}

// JSON forms. Cells are arrays [j_1, ..., j_d, mass].

inline nlohmann::json to_json(const DiscretizedSample& ds) {
  nlohmann::json j;
  j["N"] = ds.rows();
  j["d"] = ds.cols();
  j["m"] = ds.bin_counts();
  auto grid = nlohmann::json::array();
  for (std::size_t c = 0; c < ds.cols(); ++c) grid.push_back(ds.grid(static_cast<int>(c + 1)));
  j["grid"] = std::move(grid);
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    auto row = nlohmann::json::array();
    for (std::size_t c = 0; c < ds.cols(); ++c) row.push_back(ds.bin(r, c));
    rows.push_back(std::move(row));
  }
  j["bins"] = std::move(rows);
  return j;
}

inline nlohmann::json to_json(const SampleCopulaDensity& sc) {
  nlohmann::json j;
  j["N"] = sc.sample_size();
  j["m"] = sc.bin_counts();
  auto cells = nlohmann::json::array();
  for (const auto& [cell, mass] : sc.cells()) {
    auto entry = nlohmann::json::array();
    for (int b : cell) entry.push_back(b);
    entry.push_back(mass);
    cells.push_back(std::move(entry));
  }
  j["cells"] = std::move(cells);
  return j;
}

inline nlohmann::json to_json(const Partition& p) {
  nlohmann::json j;
  j["bins"] = p.bins();
  auto b = nlohmann::json::array();
  auto c = nlohmann::json::array();
  for (const auto& v : p.variables) {
    b.push_back(v.boundaries);
    c.push_back(v.counts);
  }
  j["boundaries"] = std::move(b);
  j["counts"] = std::move(c);
  return j;
}

inline Partition partition_from_json(const nlohmann::json& j) {
  Partition p;
  const auto& b = j.at("boundaries");
  const auto& c = j.at("counts");
  if (b.size() != c.size()) throw integrity_error("ingest", "partition arrays differ in length");
  for (std::size_t i = 0; i < b.size(); ++i) {
    VariablePartition v;
    v.boundaries = b[i].get<std::vector<double>>();
    v.counts = c[i].get<std::vector<std::size_t>>();
    if (v.boundaries.size() != v.counts.size() + 1 || v.counts.empty())
      throw integrity_error("ingest", "partition of variable " + std::to_string(i + 1) +
                                          " is malformed");
    for (std::size_t k = 1; k < v.boundaries.size(); ++k) {
      if (!(v.boundaries[k] > v.boundaries[k - 1]))
        throw integrity_error("ingest", "partition boundaries of variable " +
                                            std::to_string(i + 1) + " not increasing");
    }
    p.variables.push_back(std::move(v));
  }
  return p;
}

}  // namespace cherrywine

#endif  // CHERRYWINE_INGEST_HPP
