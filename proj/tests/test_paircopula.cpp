#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cherrywine/paircopula.hpp"
#include "cherrywine/simulate.hpp"
#include "oracles.hpp"

using namespace cherrywine;

namespace {

// dC/dv by a five-point stencil on the oracle copula CDF
double fd_h(double u, double v, double rho) {
  const double d = 1e-3;
  auto c = [&](double t) { return oracle::gaussian_copula_cdf(u, t, rho); };
  return (c(v - 2 * d) - 8 * c(v - d) + 8 * c(v + d) - c(v + 2 * d)) / (12 * d);
}

TCherryJunctionTree single_cluster(int d) {
  const auto all = VertexSet::range(d);
  return TCherryJunctionTree::from_construction(d, {{all.back(), all.without(all.back())}});
}

PairCopulaAssignment gaussian_all(const VineStructure& v, std::mt19937_64& rng, double max_rho) {
  std::uniform_real_distribution<double> r(-max_rho, max_rho);
  PairCopulaAssignment a;
  for (const auto& e : v.edges()) a.set(e, PairCopula::gaussian(r(rng)));
  return a;
}

// midpoint rule over [-5, 5]^d with n points per axis, standard normal margins
double quadrature_mass(const VineDensity& dens, int d, int n) {
  const auto marg = MarginalModel::standard_normal(d);
  const double h = 10.0 / n;
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  double total = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = -5.0 + (idx[static_cast<std::size_t>(i)] + 0.5) * h;
    total += dens(marg, x);
    int i = 0;
    while (i < d && ++idx[static_cast<std::size_t>(i)] == n) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == d) break;
  }
  return total * std::pow(h, d);
}

}  // namespace

TEST(Normal, QuantileAgainstOracle) {
  for (double p : {1e-12, 1e-8, 0.001, 0.025, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
    EXPECT_NEAR(normal_quantile(p), oracle::phi_quantile(p), 1e-12 * std::max(1.0, std::fabs(oracle::phi_quantile(p))))
        << p;
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 * std::max(p, 1e-3));
  }
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
  EXPECT_TRUE(std::isinf(normal_quantile(0.0)));
  EXPECT_TRUE(std::isnan(normal_quantile(1.5)));
}

TEST(PairCopula, Construction) {
  EXPECT_THROW(PairCopula::gaussian(1.0), Error);
  EXPECT_THROW(PairCopula::gaussian(-1.2), Error);
  EXPECT_THROW(PairCopula::gaussian(std::nan("")), Error);
  EXPECT_EQ(PairCopula::gaussian(0.3).rho(), 0.3);
  EXPECT_TRUE(PairCopula().is_independence());
}

TEST(PairDensity, IndependenceAndZeroRho) {
  for (double u : {0.01, 0.3, 0.9})
    for (double v : {0.2, 0.5, 0.99}) {
      EXPECT_EQ(pair_density(PairCopula::independence(), u, v), 1.0);
      EXPECT_EQ(pair_density(PairCopula::gaussian(0.0), u, v), 1.0);
    }
}

TEST(PairDensity, MixedDerivativeOfCdf) {
  const double rho = 0.5;
  const double h = 1e-3;
  for (auto [u, v] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.2, 0.7}, {0.9, 0.85}}) {
    const double fd = (oracle::gaussian_copula_cdf(u + h, v + h, rho) - oracle::gaussian_copula_cdf(u + h, v - h, rho) -
                       oracle::gaussian_copula_cdf(u - h, v + h, rho) + oracle::gaussian_copula_cdf(u - h, v - h, rho)) /
                      (4 * h * h);
    EXPECT_NEAR(pair_density(PairCopula::gaussian(rho), u, v), fd, 1e-4);
  }
  // closed form at the centre: 1 / sqrt(1 - rho^2)
  EXPECT_NEAR(pair_density(PairCopula::gaussian(rho), 0.5, 0.5), 1.0 / std::sqrt(0.75), 1e-15);
}

TEST(PairDensity, LogMatches) {
  const auto pc = PairCopula::gaussian(-0.8);
  for (double u : {0.05, 0.4, 0.93})
    for (double v : {0.1, 0.6}) EXPECT_NEAR(log_pair_density(pc, u, v), std::log(pair_density(pc, u, v)), 1e-12);
}

TEST(HFunction, Independence) {
  for (double u : {0.1, 0.5, 0.8})
    for (double v : {0.01, 0.5, 0.99}) EXPECT_EQ(h_function(PairCopula::independence(), u, v), u);
}

TEST(HFunction, Symmetry) {
  EXPECT_NEAR(h_function(PairCopula::gaussian(0.0), 0.5, 0.5), 0.5, 1e-15);
  EXPECT_NEAR(h_function(PairCopula::gaussian(0.6), 0.5, 0.5), 0.5, 1e-15);
}

TEST(HFunction, FiniteDifferenceGrid) {
  const double rho = 0.7;
  for (int i = 0; i < 21; ++i)
    for (int j = 0; j < 21; ++j) {
      const double u = (i + 0.5) / 21.0;
      const double v = (j + 0.5) / 21.0;
      EXPECT_NEAR(h_function(PairCopula::gaussian(rho), u, v), fd_h(u, v, rho), 1e-6) << u << " " << v;
    }
}

TEST(HFunction, Monotone) {
  for (double rho : {-0.95, -0.5, 0.0, 0.3, 0.95}) {
    const auto pc = PairCopula::gaussian(rho);
    for (double v : {0.01, 0.3, 0.5, 0.99}) {
      double prev = -1.0;
      for (int i = 0; i <= 100; ++i) {
        const double h = h_function(pc, i / 100.0, v);
        EXPECT_GE(h, prev);
        EXPECT_GE(h, 0.0);
        EXPECT_LE(h, 1.0);
        prev = h;
      }
    }
  }
}

TEST(Assignment, DefaultsAndJson) {
  PairCopulaAssignment a;
  const VineEdge e(1, 3, VertexSet{2});
  EXPECT_TRUE(a.get(e).is_independence());
  a.set(e, PairCopula::gaussian(0.25));
  a.set(VineEdge(1, 2), PairCopula::independence());
  const auto j = to_json(a);
  ASSERT_TRUE(j.contains("1,3|2"));
  EXPECT_EQ(j["1,3|2"]["family"], "gaussian");
  EXPECT_EQ(j["1,3|2"]["rho"], 0.25);
  EXPECT_EQ(assignment_from_json(j), a);
  const auto t = truncate_assignment(a, 2);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_FALSE(t.contains(e));
}

TEST(Assignment, BadJson) {
  nlohmann::json j = {{"1,2", {{"family", "gaussian"}, {"rho", 1.5}}}};
  EXPECT_THROW(assignment_from_json(j), Error);
  nlohmann::json k = {{"1,2", {{"family", "clayton"}}}};
  EXPECT_THROW(assignment_from_json(k), Error);
}

TEST(Marginal, HistogramIsADistribution) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> v(200);
  for (auto& x : v) x = g(rng);
  std::vector<double> both;
  for (double x : v) both.insert(both.end(), {x, -x});
  const Dataset data(200, 2, both);
  const auto part = uniform_partition(data, 8);
  const auto m = MarginalModel::histogram(part);
  const auto& b = part.variables[0].boundaries;
  double prev = -1.0, mass = 0.0;
  const int n = 20000;
  const double lo = b.front(), hi = b.back();
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * (i + 0.5) / n;
    const double c = m.cdf(1, x);
    EXPECT_GE(c, prev);
    prev = c;
    mass += m.pdf(1, x) * (hi - lo) / n;
  }
  EXPECT_NEAR(mass, 1.0, 1e-3);
  EXPECT_EQ(m.cdf(1, lo - 1.0), 0.0);
  EXPECT_EQ(m.cdf(1, hi + 1.0), 1.0);
}

TEST(VineDensity, IndependenceIsProductOfMarginals) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  const auto cw = cherry_to_vine(single_cluster(4));
  const VineDensity dens(cw.vine, PairCopulaAssignment{});
  const MarginalModel marg({NormalMarginal{1.0, 2.0}, NormalMarginal{0.0, 1.0}, NormalMarginal{-3.0, 0.5},
                            NormalMarginal{0.0, 3.0}});
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(4);
    for (auto& xi : x) xi = 2.0 * g(rng);
    double want = 1.0;
    for (Vertex k = 1; k <= 4; ++k) want *= marg.pdf(k, x[static_cast<std::size_t>(k - 1)]);
    EXPECT_EQ(dens(marg, x), want);
  }
}

TEST(VineDensity, BivariateNormal) {
  const auto v = VineStructure::from_links(2, {{{0, 1}}});
  for (double rho : {-0.6, 0.3, 0.9}) {
    PairCopulaAssignment a;
    a.set(VineEdge(1, 2), PairCopula::gaussian(rho));
    const VineDensity dens(v, a);
    const auto marg = MarginalModel::standard_normal(2);
    for (double x : {-1.5, 0.0, 1.2})
      for (double y : {-0.7, 0.4, 2.0}) {
        const std::vector<double> p{x, y};
        EXPECT_NEAR(dens(marg, p), oracle::bvn_pdf(x, y, rho), 1e-9);
        EXPECT_NEAR(dens.log_density(marg, p), std::log(oracle::bvn_pdf(x, y, rho)), 1e-9);
      }
  }
}

TEST(VineDensity, TrivariateIntegratesToOne) {
  std::mt19937_64 rng(3);
  const auto cw = cherry_to_vine(single_cluster(3));
  const VineDensity dens(cw.vine, gaussian_all(cw.vine, rng, 0.8));
  EXPECT_NEAR(quadrature_mass(dens, 3, 60), 1.0, 1e-2);
}

TEST(VineDensity, FourVariableCherryWineIntegratesToOne) {
  std::mt19937_64 rng(4);
  const auto t = TCherryJunctionTree::from_construction(3, {{3, VertexSet{1, 2}}, {4, VertexSet{2, 3}}});
  const auto cw = cherry_to_vine(t);
  const VineDensity dens(cw.vine, gaussian_all(cw.vine, rng, 0.7));
  EXPECT_NEAR(quadrature_mass(dens, 4, 28), 1.0, 1e-2);
}

TEST(VineDensity, TruncationConsistency) {
  std::mt19937_64 rng(5);
  const auto full = cherry_to_vine(single_cluster(5)).vine;
  const auto a = gaussian_all(full, rng, 0.8);
  std::normal_distribution<double> g;
  const auto marg = MarginalModel::standard_normal(5);
  for (int level = 2; level <= 4; ++level) {
    std::vector<std::vector<VineEdge>> lower;
    for (int l = 1; l < level; ++l) lower.push_back(full.tree(l).edges);
    const auto cut = VineStructure::from_edges(5, lower);
    const auto ta = truncate_assignment(a, level);
    const VineDensity zeroed(full, ta);
    const VineDensity physical(cut, ta);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> x(5);
      for (auto& xi : x) xi = g(rng);
      EXPECT_EQ(zeroed(marg, x), physical(marg, x));
    }
  }
}

TEST(VineDensity, PositiveAndFinite) {
  std::mt19937_64 rng(6);
  const auto cw = cherry_to_vine(single_cluster(4));
  const VineDensity dens(cw.vine, gaussian_all(cw.vine, rng, 0.95));
  const auto marg = MarginalModel::standard_normal(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x(4);
    for (auto& xi : x) xi = 1.5 * g(rng);
    EXPECT_GE(dens(marg, x), 0.0);
    EXPECT_TRUE(std::isfinite(dens.log_density(marg, x)));
  }
}

TEST(VineDensity, ForeignAssignmentRejected) {
  const auto v = VineStructure::from_links(3, {{{0, 1}, {1, 2}}});
  PairCopulaAssignment a;
  a.set(VineEdge(1, 3), PairCopula::gaussian(0.2));
  EXPECT_THROW(VineDensity(v, a), Error);
  const std::vector<double> x{0.0, 0.0};
  EXPECT_THROW(VineDensity(v, {})(MarginalModel::standard_normal(3), x), Error);
}

TEST(Fit, IndependentColumnsSmallRho) {
  const std::size_t n = 2000;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(n * 3);
    for (auto& x : v) x = g(rng);
    const Dataset data(n, 3, v);
    const auto ds = discretize(data, uniform_partition(data, 10));
    const auto cw = cherry_to_vine(single_cluster(3));
    const auto a = fit_gaussian_assignment(cw, ds);
    EXPECT_EQ(a.size(), 3u);
    for (const auto& [e, pc] : a.entries()) EXPECT_LT(std::fabs(pc.rho()), 3.0 / std::sqrt(double(n))) << e.str();
  }
}

TEST(Fit, IdenticalColumnsClamped) {
  std::vector<double> v;
  for (int r = 0; r < 50; ++r) v.insert(v.end(), {double(r), double(r)});
  const auto vine = VineStructure::from_links(2, {{{0, 1}}});
  const Dataset data(50, 2, v);
  const auto ds = discretize(data, uniform_partition(data, 5));
  const auto a = fit_gaussian_assignment(vine, {ds.pseudo_column(0), ds.pseudo_column(1)});
  EXPECT_EQ(a.get(VineEdge(1, 2)).rho(), kRhoMax);
}

TEST(Fit, ConstantColumnIsNumericalError) {
  const auto vine = VineStructure::from_links(2, {{{0, 1}}});
  const std::vector<double> c(10, 0.5), u{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  try {
    fit_gaussian_assignment(vine, {c, u});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
  }
}

TEST(Fit, RecoversKnownCorrelations) {
  // X1 = e1, X2 = c X1 + ..., X3 = b (X1 + X2) + ...
  const double c = 0.6;
  const double b = c / std::sqrt(2.0 + 2.0 * c);
  const double r12 = c, r13 = b * (1.0 + c), r23 = b * (c + 1.0);
  SimulationOptions o;
  o.rows = 2000;
  o.strength = c;
  o.seed = 7;
  const auto t = single_cluster(3);
  const auto data = simulate_tcherry_gaussian(t, o);
  const auto ds = discretize(data, uniform_partition(data, 20));
  const auto cw = cherry_to_vine(t);
  const auto a = fit_gaussian_assignment(cw, ds);
  for (const auto& e : cw.vine.tree(1).edges) {
    const double truth = e == VineEdge(1, 2) ? r12 : e == VineEdge(1, 3) ? r13 : r23;
    EXPECT_NEAR(a.get(e).rho(), truth, 0.1) << e.str();
  }
}
