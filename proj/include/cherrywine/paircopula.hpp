#ifndef CHERRYWINE_PAIRCOPULA_HPP
#define CHERRYWINE_PAIRCOPULA_HPP

// Bivariate copula blocks, h-functions and truncated vine densities.
//
// Conditional copulas are taken not to depend on the value of their
// conditioning variables (the usual simplifying assumption); each edge carries
// one fixed bivariate copula.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cherrywine/error.hpp"
#include "cherrywine/ingest.hpp"
#include "cherrywine/normal.hpp"
#include "cherrywine/vine.hpp"
#include "json.hpp"

namespace cherrywine {

inline constexpr double kUnitClamp = 1e-12;
inline constexpr double kRhoMax = 0.9999;

inline double clamp_unit(double u) { return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp); }

enum class Family { independence, gaussian };

inline std::string family_name(Family f) { return f == Family::gaussian ? "gaussian" : "independence"; }

class PairCopula {
 public:
  PairCopula() = default;

  static PairCopula independence() { return {}; }
  static PairCopula gaussian(double rho) {
    if (!std::isfinite(rho) || std::fabs(rho) >= 1.0)
      throw usage_error("paircopula", "gaussian correlation must lie in (-1, 1), got " + std::to_string(rho));
    PairCopula pc;
    pc.family_ = Family::gaussian;
    pc.rho_ = rho;
    return pc;
  }

  Family family() const noexcept { return family_; }
  double rho() const noexcept { return rho_; }
  bool is_independence() const noexcept { return family_ == Family::independence; }

  friend bool operator==(const PairCopula&, const PairCopula&) = default;

 private:
  Family family_ = Family::independence;
  double rho_ = 0.0;
};

// c(u, v)
inline double pair_density(const PairCopula& pc, double u, double v) {
  if (pc.is_independence()) return 1.0;
  const double r = pc.rho();
  if (r == 0.0) return 1.0;
  const double x = normal_quantile(clamp_unit(u));
  const double y = normal_quantile(clamp_unit(v));
  const double s = 1.0 - r * r;
  return std::exp(-(r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * s)) / std::sqrt(s);
}

inline double log_pair_density(const PairCopula& pc, double u, double v) {
  if (pc.is_independence() || pc.rho() == 0.0) return 0.0;
  const double r = pc.rho();
  const double x = normal_quantile(clamp_unit(u));
  const double y = normal_quantile(clamp_unit(v));
  const double s = 1.0 - r * r;
  return -(r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * s) - 0.5 * std::log(s);
}

// h(u | v) = dC(u, v) / dv, the conditional CDF of U given V = v.
inline double h_function(const PairCopula& pc, double u, double v) {
  if (pc.is_independence()) return u;
  const double r = pc.rho();
  const double x = normal_quantile(clamp_unit(u));
  const double y = normal_quantile(clamp_unit(v));
  return normal_cdf((x - r * y) / std::sqrt(1.0 - r * r));
}

// ---------------------------------------------------------------------------

// Copula per vine edge; edges without an entry are independence.
class PairCopulaAssignment {
 public:
  void set(const VineEdge& e, PairCopula pc) { copulas_[e] = pc; }
  PairCopula get(const VineEdge& e) const {
    auto it = copulas_.find(e);
    return it == copulas_.end() ? PairCopula::independence() : it->second;
  }
  bool contains(const VineEdge& e) const { return copulas_.count(e) > 0; }
  std::size_t size() const noexcept { return copulas_.size(); }
  const std::map<VineEdge, PairCopula>& entries() const noexcept { return copulas_; }

  // Every key must be an edge of `v`.
  bool fits(const VineStructure& v) const {
    const auto edges = v.key();
    return std::all_of(copulas_.begin(), copulas_.end(), [&](const auto& kv) {
      return std::binary_search(edges.begin(), edges.end(), kv.first);
    });
  }

  friend bool operator==(const PairCopulaAssignment&, const PairCopulaAssignment&) = default;

 private:
  std::map<VineEdge, PairCopula> copulas_;
};

// All edges of levels >= `level` reset to independence.
inline PairCopulaAssignment truncate_assignment(const PairCopulaAssignment& a, int level) {
  PairCopulaAssignment out;
  for (const auto& [e, pc] : a.entries())
    if (e.level() < level) out.set(e, pc);
  return out;
}

inline nlohmann::json to_json(const PairCopulaAssignment& a) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [e, pc] : a.entries()) {
    nlohmann::json entry{{"family", family_name(pc.family())}};
    if (pc.family() == Family::gaussian) entry["rho"] = pc.rho();
    j[e.str()] = std::move(entry);
  }
  return j;
}

inline PairCopulaAssignment assignment_from_json(const nlohmann::json& j) {
  try {
    PairCopulaAssignment a;
    for (const auto& [key, value] : j.items()) {
      const auto fam = value.at("family").get<std::string>();
      if (fam == "gaussian") {
        a.set(parse_vine_edge(key), PairCopula::gaussian(value.at("rho").get<double>()));
      } else if (fam == "independence") {
        a.set(parse_vine_edge(key), PairCopula::independence());
      } else {
        throw integrity_error("paircopula", "unknown family '" + fam + "'");
      }
    }
    return a;
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("paircopula", std::string("malformed assignment: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::integrity) throw;
    throw integrity_error("paircopula", ex.what());
  }
}

// ---------------------------------------------------------------------------
// Univariate marginals.

struct NormalMarginal {
  double mean = 0.0;
  double sd = 1.0;
};

// Density constant on each bin of an equal-frequency partition, CDF linear
// in between the boundaries.
struct HistogramMarginal {
  VariablePartition partition;
};

class MarginalModel {
 public:
  using Component = std::variant<NormalMarginal, HistogramMarginal>;

  MarginalModel() = default;
  explicit MarginalModel(std::vector<Component> parts) : parts_(std::move(parts)) {
    for (const auto& p : parts_) {
      if (const auto* n = std::get_if<NormalMarginal>(&p)) {
        if (!(n->sd > 0.0) || !std::isfinite(n->mean))
          throw usage_error("paircopula", "normal marginal needs a finite mean and positive sd");
      } else {
        const auto& h = std::get<HistogramMarginal>(p).partition;
        if (h.boundaries.size() != h.counts.size() + 1 || h.counts.empty())
          throw usage_error("paircopula", "histogram marginal needs m + 1 boundaries");
      }
    }
  }

  static MarginalModel standard_normal(int d) {
    return MarginalModel(std::vector<Component>(static_cast<std::size_t>(d), NormalMarginal{}));
  }

  // Normal marginals with the sample mean and sd of each column.
  static MarginalModel fit_normal(const Dataset& data) {
    std::vector<Component> parts;
    for (std::size_t c = 0; c < data.cols(); ++c) {
      const auto col = data.column(c);
      const double n = static_cast<double>(col.size());
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : col) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      if (!(sd > 0.0)) throw numerical_error("paircopula", "column " + std::to_string(c + 1) + " is constant");
      parts.push_back(NormalMarginal{mean, sd});
    }
    return MarginalModel(std::move(parts));
  }

  static MarginalModel histogram(const Partition& p) {
    std::vector<Component> parts;
    for (const auto& v : p.variables) parts.push_back(HistogramMarginal{v});
    return MarginalModel(std::move(parts));
  }

  int dimension() const noexcept { return static_cast<int>(parts_.size()); }
  const std::vector<Component>& components() const noexcept { return parts_; }

  // `variable` is 1-based.
  double cdf(Vertex variable, double x) const {
    const auto& p = component(variable);
    if (const auto* n = std::get_if<NormalMarginal>(&p)) return normal_cdf((x - n->mean) / n->sd);
    const auto& h = std::get<HistogramMarginal>(p).partition;
    const auto& b = h.boundaries;
    if (x <= b.front()) return 0.0;
    if (x >= b.back()) return 1.0;
    const double total = static_cast<double>(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}));
    const int j = h.locate(x);  // 1-based, x in (b[j-1], b[j]]
    double below = 0.0;
    for (int i = 0; i + 1 < j; ++i) below += static_cast<double>(h.counts[static_cast<std::size_t>(i)]);
    const double frac = (x - b[static_cast<std::size_t>(j - 1)]) /
                        (b[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j - 1)]);
    return (below + frac * static_cast<double>(h.counts[static_cast<std::size_t>(j - 1)])) / total;
  }

  double pdf(Vertex variable, double x) const {
    const auto& p = component(variable);
    if (const auto* n = std::get_if<NormalMarginal>(&p)) return normal_pdf((x - n->mean) / n->sd) / n->sd;
    const auto& h = std::get<HistogramMarginal>(p).partition;
    const int j = h.locate(x);
    if (j == 0) return 0.0;
    const double total = static_cast<double>(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}));
    const auto& b = h.boundaries;
    return static_cast<double>(h.counts[static_cast<std::size_t>(j - 1)]) / total /
           (b[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j - 1)]);
  }

 private:
  const Component& component(Vertex variable) const {
    if (variable < 1 || variable > dimension())
      throw usage_error("paircopula", "marginal for variable " + std::to_string(variable) + " not defined");
    return parts_[static_cast<std::size_t>(variable - 1)];
  }

  std::vector<Component> parts_;
};

// ---------------------------------------------------------------------------
// Vine density.

// Evaluation plan. Slot (v, D) holds F_{v|D}; level-1 slots are the marginal
// CDF values, every edge a,b|D reads (a, D) and (b, D) and writes
// (a, D + b) and (b, D + a) for the level above.
class VineDensity {
 public:
  VineDensity(const VineStructure& v, PairCopulaAssignment assign)
      : d_(v.dimension()), assign_(std::move(assign)) {
    if (!assign_.fits(v)) throw usage_error("paircopula", "assignment names an edge outside the vine");
    std::map<std::pair<Vertex, VertexSet>, std::size_t> slot;
    for (Vertex x = 1; x <= d_; ++x) slot.emplace(std::make_pair(x, VertexSet{}), slot.size());
    for (const auto& t : v.trees()) {
      for (const auto& e : t.edges) {
        Step s;
        s.edge = e;
        s.copula = assign_.get(e);
        auto find = [&](Vertex x) {
          auto it = slot.find({x, e.given});
          if (it == slot.end())
            throw usage_error("paircopula", "edge " + e.str() + " has no valid parent for F_{" +
                                                std::to_string(x) + "|" + e.given.joined() + "}");
          return it->second;
        };
        s.in_a = find(e.a);
        s.in_b = find(e.b);
        s.out_a = slot.emplace(std::make_pair(e.a, e.given.with(e.b)), slot.size()).first->second;
        s.out_b = slot.emplace(std::make_pair(e.b, e.given.with(e.a)), slot.size()).first->second;
        steps_.push_back(std::move(s));
      }
    }
    slots_ = slot.size();
  }

  int dimension() const noexcept { return d_; }

  // Copula part only; u holds the d marginal CDF values.
  double copula_density(std::span<const double> u) const {
    std::vector<double> val(slots_, 0.0);
    std::copy(u.begin(), u.end(), val.begin());
    double c = 1.0;
    for (const auto& s : steps_) {
      const double a = val[s.in_a];
      const double b = val[s.in_b];
      c *= pair_density(s.copula, a, b);
      val[s.out_a] = h_function(s.copula, a, b);
      val[s.out_b] = h_function(s.copula, b, a);
    }
    return c;
  }

  double log_copula_density(std::span<const double> u) const {
    std::vector<double> val(slots_, 0.0);
    std::copy(u.begin(), u.end(), val.begin());
    double c = 0.0;
    for (const auto& s : steps_) {
      const double a = val[s.in_a];
      const double b = val[s.in_b];
      c += log_pair_density(s.copula, a, b);
      val[s.out_a] = h_function(s.copula, a, b);
      val[s.out_b] = h_function(s.copula, b, a);
    }
    return c;
  }

  // prod_k f_k(x_k), in order 1..d, times the copula part.
  double operator()(const MarginalModel& marg, std::span<const double> x) const {
    check(marg, x);
    std::vector<double> u(static_cast<std::size_t>(d_));
    double f = 1.0;
    for (Vertex k = 1; k <= d_; ++k) {
      const double xk = x[static_cast<std::size_t>(k - 1)];
      f *= marg.pdf(k, xk);
      u[static_cast<std::size_t>(k - 1)] = marg.cdf(k, xk);
    }
    return f * copula_density(u);
  }

  double log_density(const MarginalModel& marg, std::span<const double> x) const {
    check(marg, x);
    std::vector<double> u(static_cast<std::size_t>(d_));
    double f = 0.0;
    for (Vertex k = 1; k <= d_; ++k) {
      const double xk = x[static_cast<std::size_t>(k - 1)];
      f += std::log(marg.pdf(k, xk));
      u[static_cast<std::size_t>(k - 1)] = marg.cdf(k, xk);
    }
    return f + log_copula_density(u);
  }

 private:
  struct Step {
    VineEdge edge;
    PairCopula copula;
    std::size_t in_a = 0, in_b = 0, out_a = 0, out_b = 0;
  };

  void check(const MarginalModel& marg, std::span<const double> x) const {
    if (marg.dimension() != d_) throw usage_error("paircopula", "marginal model dimension mismatch");
    if (x.size() != static_cast<std::size_t>(d_)) throw usage_error("paircopula", "point dimension mismatch");
    for (double v : x)
      if (!std::isfinite(v)) throw usage_error("paircopula", "point must be finite");
  }

  int d_;
  PairCopulaAssignment assign_;
  std::vector<Step> steps_;
  std::size_t slots_ = 0;
};

inline double vine_density(const VineStructure& v, const PairCopulaAssignment& assign,
                           const MarginalModel& marg, std::span<const double> x) {
  return VineDensity(v, assign)(marg, x);
}

// ---------------------------------------------------------------------------
// Sequential gaussian fit.

namespace detail {

inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw numerical_error("paircopula", "constant pseudo-observation column");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

// Level by level: rho of each edge is the normal-scores correlation of its
// two arguments, which come from the pseudo-observations passed through the
// already fitted h-functions below it.
inline PairCopulaAssignment fit_gaussian_assignment(const VineStructure& v,
                                                    const std::vector<std::vector<double>>& pseudo) {
  if (pseudo.size() != static_cast<std::size_t>(v.dimension()))
    throw usage_error("paircopula", "pseudo-observation columns do not match the vine dimension");
  std::map<std::pair<Vertex, VertexSet>, std::vector<double>> slot;
  for (Vertex x = 1; x <= v.dimension(); ++x) slot[{x, VertexSet{}}] = pseudo[static_cast<std::size_t>(x - 1)];

  PairCopulaAssignment out;
  auto scores = [](const std::vector<double>& u) {
    std::vector<double> z(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) z[i] = normal_quantile(clamp_unit(u[i]));
    return z;
  };
  for (const auto& t : v.trees()) {
    for (const auto& e : t.edges) {
      auto ia = slot.find({e.a, e.given});
      auto ib = slot.find({e.b, e.given});
      if (ia == slot.end() || ib == slot.end())
        throw usage_error("paircopula", "edge " + e.str() + " has no valid parent");
      const double rho = std::clamp(detail::correlation(scores(ia->second), scores(ib->second)), -kRhoMax, kRhoMax);
      const auto pc = PairCopula::gaussian(rho);
      out.set(e, pc);
      const auto& ua = ia->second;
      const auto& ub = ib->second;
      std::vector<double> ha(ua.size()), hb(ua.size());
      for (std::size_t i = 0; i < ua.size(); ++i) {
        ha[i] = h_function(pc, ua[i], ub[i]);
        hb[i] = h_function(pc, ub[i], ua[i]);
      }
      slot[{e.a, e.given.with(e.b)}] = std::move(ha);
      slot[{e.b, e.given.with(e.a)}] = std::move(hb);
    }
  }
  return out;
}

inline PairCopulaAssignment fit_gaussian_assignment(const CherryWine& cw, const DiscretizedSample& ds) {
  if (ds.cols() != static_cast<std::size_t>(cw.vine.dimension()))
    throw usage_error("paircopula", "sample dimension does not match the cherry-wine");
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < ds.cols(); ++c) cols.push_back(ds.pseudo_column(c));
  return fit_gaussian_assignment(cw.vine, cols);
}

}  // namespace cherrywine

#endif  // CHERRYWINE_PAIRCOPULA_HPP
