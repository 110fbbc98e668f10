#ifndef CHERRYWINE_SIMULATE_HPP
#define CHERRYWINE_SIMULATE_HPP

// Gaussian data that is Markov with respect to a given t-cherry tree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cherrywine/error.hpp"
#include "cherrywine/ingest.hpp"
#include "cherrywine/junction.hpp"

namespace cherrywine {

struct SimulationOptions {
  std::size_t rows = 1000;
  double strength = 0.8;  // correlation of each new variable with its separator sum
  // per generated variable after the first, overriding `strength`
  std::vector<double> strengths;
  std::uint64_t seed = 0;
};

// Variables are generated in construction order. Each new vertex v with
// separator S (and, inside the seed cluster, every vertex after the first
// with the earlier ones as S) is
//   X_v = (c / sd(sum_S X)) * sum_S X_s + sqrt(1 - c^2) * eps,
// so every X_v is standard normal and depends on the past only through X_S.
// c is either one common strength or one value per generated variable.
inline Dataset simulate_tcherry_gaussian(const TCherryJunctionTree& t, const SimulationOptions& opt) {
  if (opt.rows < 2) throw usage_error("simulate", "need at least 2 rows");
  const auto verts = t.tree().vertices();
  const int d = static_cast<int>(verts.size());
  if (verts != VertexSet::range(d)) throw usage_error("simulate", "t-cherry tree must cover 1..d");

  // (vertex, parents) in generation order
  std::vector<std::pair<Vertex, std::vector<Vertex>>> plan;
  const auto& steps = t.construction();
  const VertexSet seed = steps.front().cluster();
  std::vector<Vertex> earlier;
  for (Vertex v : seed) {
    plan.emplace_back(v, earlier);
    earlier.push_back(v);
  }
  for (std::size_t i = 1; i < steps.size(); ++i) plan.emplace_back(steps[i].vertex, steps[i].separator.items());

  std::vector<double> strength(plan.size(), opt.strength);
  if (!opt.strengths.empty()) {
    if (opt.strengths.size() + 1 != plan.size())
      throw usage_error("simulate", "need " + std::to_string(plan.size() - 1) + " strengths");
    std::copy(opt.strengths.begin(), opt.strengths.end(), strength.begin() + 1);
  }
  for (std::size_t p = 1; p < plan.size(); ++p)
    if (!(strength[p] > 0.0 && strength[p] < 1.0)) throw usage_error("simulate", "strength must lie in (0, 1)");

  // covariance of the generated variables, 0-based
  const auto n = static_cast<std::size_t>(d);
  std::vector<double> cov(n * n, 0.0);
  std::vector<double> beta(plan.size(), 0.0);
  for (std::size_t p = 0; p < plan.size(); ++p) {
    const auto v = static_cast<std::size_t>(plan[p].first - 1);
    const auto& parents = plan[p].second;
    cov[v * n + v] = 1.0;
    if (parents.empty()) continue;
    double var_sum = 0.0;
    for (Vertex a : parents)
      for (Vertex b : parents) var_sum += cov[static_cast<std::size_t>(a - 1) * n + static_cast<std::size_t>(b - 1)];
    beta[p] = strength[p] / std::sqrt(var_sum);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == v) continue;
      double s = 0.0;
      for (Vertex a : parents) s += cov[static_cast<std::size_t>(a - 1) * n + j];
      cov[v * n + j] = cov[j * n + v] = beta[p] * s;
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> values(opt.rows * n);
  for (std::size_t r = 0; r < opt.rows; ++r) {
    double* row = &values[r * n];
    for (std::size_t p = 0; p < plan.size(); ++p) {
      const auto v = static_cast<std::size_t>(plan[p].first - 1);
      const double eps = normal(rng);
      if (plan[p].second.empty()) {
        row[v] = eps;
        continue;
      }
      double s = 0.0;
      for (Vertex a : plan[p].second) s += row[static_cast<std::size_t>(a - 1)];
      row[v] = beta[p] * s + std::sqrt(1.0 - strength[p] * strength[p]) * eps;
    }
  }
  return Dataset(opt.rows, n, std::move(values), {});
}

}  // namespace cherrywine

#endif  // CHERRYWINE_SIMULATE_HPP
