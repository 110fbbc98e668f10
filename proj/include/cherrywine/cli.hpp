#ifndef CHERRYWINE_CLI_HPP
#define CHERRYWINE_CLI_HPP

// Subcommands of the cherrywine tool. Each command reads files, writes its
// results to `out` and its log to `log`, and reports failures by throwing
// cherrywine::Error; run_cli maps those onto exit codes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cherrywine/error.hpp"
#include "cherrywine/greedy.hpp"
#include "cherrywine/infotheory.hpp"
#include "cherrywine/ingest.hpp"
#include "cherrywine/junction.hpp"
#include "cherrywine/model.hpp"
#include "cherrywine/paircopula.hpp"
#include "cherrywine/simulate.hpp"
#include "cherrywine/vine.hpp"

namespace cherrywine {

namespace detail {

inline std::string fmt(double x, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw integrity_error("cli", "cannot write " + path);
  f << text;
}

inline std::string choices_str(const ChoiceVector& c) {
  std::string s = "[";
  for (std::size_t i = 0; i < c.size(); ++i) {
    s += i ? ",[" : "[";
    for (std::size_t j = 0; j < c[i].size(); ++j) s += (j ? "," : "") + std::to_string(c[i][j]);
    s += "]";
  }
  return s + "]";
}

inline void print_vine(const VineStructure& v, std::ostream& out) {
  for (const auto& t : v.trees()) {
    out << "  T" << t.level << ":";
    for (const auto& e : t.edges) out << " " << e.str();
    out << "\n";
  }
}

}  // namespace detail

struct FitOptions {
  std::string input;
  int k = 3;
  int bins = 0;  // 0: floor(sqrt N) clamped to [2, 32]
  std::string output;
  std::string policy = "deterministic";  // or "enumerate"
  std::string fit_pairs = "none";        // or "gaussian"
  bool trace = false;
};

// Fits a model from a dataset already in memory.
inline ModelFile fit_model(const Dataset& data, const FitOptions& opt, std::ostream& out, std::ostream& log) {
  const int d = static_cast<int>(data.cols());
  if (opt.k < 2) throw usage_error("greedy", "order must be at least 2");
  if (opt.k > d) throw usage_error("greedy", "order exceeds dimension");
  if (opt.policy != "deterministic" && opt.policy != "enumerate")
    throw usage_error("cli", "unknown policy '" + opt.policy + "'");
  if (opt.fit_pairs != "none" && opt.fit_pairs != "gaussian")
    throw usage_error("cli", "unknown pair family '" + opt.fit_pairs + "'");
  const int m = opt.bins > 0 ? opt.bins : default_bin_count(data.rows());

  ModelFile model;
  model.dataset = fingerprint(data);
  model.partition = uniform_partition(data, m);
  const auto ds = discretize(data, model.partition);
  const auto normal = MarginalModel::fit_normal(data);
  for (const auto& c : normal.components()) model.marginals.push_back(std::get<NormalMarginal>(c));

  auto greedy = build_tcherry_greedy(ds, opt.k);
  for (const auto& w : greedy.warnings) log << "[greedy] warning: " << w << "\n";
  if (opt.trace)
    for (const auto& t : greedy.trace) log << t.str() << "\n";
  model.tree = greedy.tree;

  if (opt.policy == "enumerate") {
    const auto all = enumerate_cherry_wines(model.tree);
    out << "variants: " << all.size() << "\n";
    for (std::size_t i = 0; i < all.size(); ++i) {
      out << "variant " << i + 1 << " choices=" << detail::choices_str(all[i].choices) << "\n";
      detail::print_vine(all[i].vine, out);
    }
    model.cherry_wine = all.front();
  } else {
    model.cherry_wine = cherry_to_vine(model.tree);
  }
  if (opt.fit_pairs == "gaussian") model.assignment = fit_gaussian_assignment(model.cherry_wine, ds);

  SampleInformation info(ds);
  model.diagnostics.weight = greedy.total_weight;
  model.diagnostics.information = info.information(VertexSet::range(d));
  model.diagnostics.kl = *model.diagnostics.information - greedy.total_weight;
  for (const auto& c : model.tree.clusters()) model.diagnostics.clusters.push_back({c, info.information(c)});
  return model;
}

inline ModelFile cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& log) {
  if (opt.input.empty()) throw usage_error("cli", "--input is required");
  const Dataset data = load_csv(opt.input, true);
  ModelFile model = fit_model(data, opt, out, log);
  if (!opt.output.empty()) save_model(model, opt.output);
  out << "total weight: " << detail::fmt(model.diagnostics.weight) << " bits\n";
  return model;
}

inline std::size_t cmd_enumerate(const std::string& model_path, std::ostream& out) {
  const ModelFile model = load_model(model_path);
  const auto all = enumerate_cherry_wines(model.tree);
  out << "variants: " << all.size() << "\n";
  for (std::size_t i = 0; i < all.size(); ++i) {
    out << "variant " << i + 1 << " choices=" << detail::choices_str(all[i].choices) << "\n";
    detail::print_vine(all[i].vine, out);
  }
  return all.size();
}

struct EvaluationReport {
  double weight = 0.0;
  double information = 0.0;
  double kl = 0.0;
  double bias_bound = 0.0;
  std::vector<ClusterInformation> clusters;
};

inline EvaluationReport evaluate_model(const ModelFile& model, const Dataset& data) {
  if (data.cols() != model.dataset.cols)
    throw usage_error("cli", "data has " + std::to_string(data.cols()) + " columns, model has " +
                                 std::to_string(model.dataset.cols));
  const auto ds = discretize(data, model.partition, OutOfRange::clamp);
  SampleInformation info(ds);
  EvaluationReport r;
  r.weight = tree_weight(model.tree.tree(), info);
  r.information = info.information(VertexSet::range(model.dimension()));
  r.kl = r.information - r.weight;
  int m = 0;
  for (int b : model.partition.bins()) m = std::max(m, b);
  r.bias_bound = 2.0 * model.dimension() * std::log2(static_cast<double>(m)) *
                 std::pow(static_cast<double>(m), model.order()) / static_cast<double>(data.rows());
  for (const auto& c : model.tree.clusters()) r.clusters.push_back({c, info.information(c)});
  return r;
}

inline EvaluationReport cmd_evaluate(const std::string& model_path, const std::string& data_path, std::ostream& out) {
  const ModelFile model = load_model(model_path);
  const Dataset data = load_csv(data_path, true);
  const auto r = evaluate_model(model, data);
  out << "tree weight: " << detail::fmt(r.weight) << " bits\n";
  out << "information I(X_V): " << detail::fmt(r.information) << " bits\n";
  out << "KL gap: " << detail::fmt(r.kl) << " bits\n";
  for (const auto& c : r.clusters) out << "cluster " << c.cluster.str() << " I=" << detail::fmt(c.information) << "\n";
  out << "caveat: plug-in bias bound 2*d*log2(m)*m^k/N = " << detail::fmt(r.bias_bound, 6) << " bits\n";
  return r;
}

// Log-density of every row of `points`.
inline std::vector<double> model_log_density(const ModelFile& model, const Dataset& points, const std::string& marginals) {
  if (points.cols() != model.dataset.cols) throw usage_error("cli", "points have the wrong dimension");
  MarginalModel marg;
  if (marginals == "normal") {
    std::vector<MarginalModel::Component> parts(model.marginals.begin(), model.marginals.end());
    marg = MarginalModel(std::move(parts));
  } else if (marginals == "histogram") {
    marg = MarginalModel::histogram(model.partition);
  } else {
    throw usage_error("cli", "unknown marginals '" + marginals + "'");
  }
  const VineDensity density(model.cherry_wine.vine, model.assignment.value_or(PairCopulaAssignment{}));
  std::vector<double> out;
  std::vector<double> x(points.cols());
  for (std::size_t r = 0; r < points.rows(); ++r) {
    for (std::size_t c = 0; c < points.cols(); ++c) x[c] = points(r, c);
    out.push_back(density.log_density(marg, x));
  }
  return out;
}

inline void cmd_density(const std::string& model_path, const std::string& points_path, const std::string& marginals,
                        const std::string& output, std::ostream& out, std::ostream& log) {
  const ModelFile model = load_model(model_path);
  if (!model.assignment) log << "[cli] model has no pair-copula assignment; using independence\n";
  const Dataset points = load_csv(points_path, true);
  std::ostringstream text;
  text << "log_density\n";
  for (double v : model_log_density(model, points, marginals)) text << detail::fmt(v, 17) << "\n";
  detail::write_text(output, text.str(), out);
}

inline std::string export_model(const ModelFile& model, const std::string& format) {
  if (format == "json") return dump_model(model);
  if (format == "dot") {
    std::string s = to_dot(model.tree.tree(), "junction_tree");
    for (int l = 1; l <= model.cherry_wine.vine.truncation(); ++l) s += to_dot(model.cherry_wine.vine, l);
    return s;
  }
  throw usage_error("cli", "unknown format '" + format + "'");
}

inline void cmd_export(const std::string& model_path, const std::string& format, const std::string& output,
                       std::ostream& out) {
  if (format != "json" && format != "dot") throw usage_error("cli", "unknown format '" + format + "'");
  const ModelFile model = load_model(model_path);
  detail::write_text(output, export_model(model, format), out);
}

struct SimulateOptions {
  std::string model;     // take the tree from a model file
  std::string clusters;  // or "1,2,3;2,3,4;..."
  int k = 0;
  std::size_t rows = 1000;
  double strength = 0.8;
  std::vector<double> strengths;
  std::uint64_t seed = 0;
  std::string output;
};

inline TCherryJunctionTree parse_cluster_list(const std::string& text) {
  std::vector<VertexSet> clusters;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    std::vector<Vertex> v;
    std::stringstream ps(part);
    std::string tok;
    while (std::getline(ps, tok, ',')) {
      try {
        v.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw usage_error("cli", "bad cluster list '" + text + "'");
      }
    }
    clusters.emplace_back(std::move(v));
  }
  if (clusters.empty()) throw usage_error("cli", "empty cluster list");
  const int k = static_cast<int>(clusters.front().size());
  auto jt = JunctionTree::from_clusters(std::move(clusters));
  return TCherryJunctionTree::from_junction_tree(std::move(jt), k);
}

inline void cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  TCherryJunctionTree t;
  if (!opt.model.empty()) {
    t = load_model(opt.model).tree;
  } else if (!opt.clusters.empty()) {
    t = parse_cluster_list(opt.clusters);
  } else {
    throw usage_error("simulate", "need --input or --clusters");
  }
  SimulationOptions so;
  so.rows = opt.rows;
  so.strength = opt.strength;
  so.strengths = opt.strengths;
  so.seed = opt.seed;
  const Dataset data = simulate_tcherry_gaussian(t, so);
  std::ostringstream text;
  write_csv(text, data);
  detail::write_text(opt.output, text.str(), out);
}

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cherrywine: t-cherry junction trees and truncated vine copulas"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "learn a t-cherry tree and its cherry-wine from a CSV file");
  fit_cmd->add_option("--input", fit.input, "CSV with a header row")->required();
  fit_cmd->add_option("--k", fit.k, "order of the t-cherry tree");
  fit_cmd->add_option("--bins", fit.bins, "bins per variable (default floor(sqrt N), within [2, 32])");
  fit_cmd->add_option("--output", fit.output, "model file to write");
  fit_cmd->add_option("--policy", fit.policy, "Step-2 policy")->check(CLI::IsMember({"deterministic", "enumerate"}));
  fit_cmd->add_option("--fit-pairs", fit.fit_pairs, "pair-copula family")->check(CLI::IsMember({"none", "gaussian"}));
  fit_cmd->add_flag("--trace", fit.trace, "log ACCEPT/REJECT lines");
  std::uint64_t unused_seed = 0;
  fit_cmd->add_option("--seed", unused_seed, "accepted for uniformity; fitting uses no randomness");

  std::string model, data, format = "json", output, marginals = "normal";
  auto* enum_cmd = app.add_subcommand("enumerate", "list every cherry-wine of a model's t-cherry tree");
  enum_cmd->add_option("--input", model, "model file")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "score a model's tree on a dataset");
  eval_cmd->add_option("--input", model, "model file")->required();
  eval_cmd->add_option("--data", data, "CSV with a header row")->required();

  auto* dens_cmd = app.add_subcommand("density", "log-density of the cherry-wine model at CSV points");
  dens_cmd->add_option("--input", model, "model file")->required();
  dens_cmd->add_option("--data", data, "CSV of points with a header row")->required();
  dens_cmd->add_option("--marginals", marginals, "marginal model")->check(CLI::IsMember({"normal", "histogram"}));
  dens_cmd->add_option("--output", output, "output CSV (default stdout)");

  auto* export_cmd = app.add_subcommand("export", "write a model as JSON or DOT");
  export_cmd->add_option("--input", model, "model file")->required();
  export_cmd->add_option("--format", format, "json or dot");
  export_cmd->add_option("--output", output, "output file (default stdout)");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw gaussian data that is Markov on a t-cherry tree");
  sim_cmd->add_option("--input", sim.model, "model file providing the tree");
  sim_cmd->add_option("--clusters", sim.clusters, "clusters as '1,2,3;2,3,4;...'");
  sim_cmd->add_option("--rows", sim.rows, "sample size");
  sim_cmd->add_option("--strength", sim.strength, "dependence strength in (0, 1)");
  sim_cmd->add_option("--strengths", sim.strengths, "one strength per generated variable after the first");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--output", sim.output, "output CSV (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "[cli] " << e.what() << "\n";
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*fit_cmd) cmd_fit(fit, out, err);
    else if (*enum_cmd) cmd_enumerate(model, out);
    else if (*eval_cmd) cmd_evaluate(model, data, out);
    else if (*dens_cmd) cmd_density(model, data, marginals, output, out, err);
    else if (*export_cmd) cmd_export(model, format, output, out);
    else if (*sim_cmd) cmd_simulate(sim, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    err << "[cli] out of memory\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::move(args), out, err);
}

}  // namespace cherrywine

#endif  // CHERRYWINE_CLI_HPP
