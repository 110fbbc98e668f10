#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "cherrywine/cli.hpp"

using namespace cherrywine;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cherrywine_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  write_csv(out, data);
}

TCherryJunctionTree worked_tree() {
  return TCherryJunctionTree::from_construction(
      3, {{3, VertexSet{1, 2}}, {4, VertexSet{2, 3}}, {6, VertexSet{2, 3}}, {5, VertexSet{3, 4}}});
}

Dataset independent(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n * d);
  for (auto& x : v) x = g(rng);
  return Dataset(n, d, v);
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

// A model file carrying `t`, with diagnostics measured on `data`. Built by
// hand so that it does not depend on what greedy picks.
std::string write_model_with_tree(const TempDir& dir, const Dataset& data, const TCherryJunctionTree& t) {
  ModelFile m;
  m.dataset = fingerprint(data);
  m.partition = uniform_partition(data, 4);
  const auto normal = MarginalModel::fit_normal(data);
  for (const auto& c : normal.components()) m.marginals.push_back(std::get<NormalMarginal>(c));
  m.tree = t;
  m.cherry_wine = cherry_to_vine(t);
  const auto r = evaluate_model(m, data);
  m.diagnostics.weight = r.weight;
  m.diagnostics.information = r.information;
  m.diagnostics.kl = r.kl;
  m.diagnostics.clusters = r.clusters;
  const auto path = dir.file("tree.json");
  save_model(m, path);
  return path;
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(CHERRYWINE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"fit"}).code, 2);
}

TEST(Cli, OrderExceedsDimension) {
  TempDir dir;
  save_csv(independent(50, 3, 1), dir.file("x.csv"));
  const auto r = cli({"fit", "--input", dir.file("x.csv"), "--k", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("order exceeds dimension"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("[greedy]"), std::string::npos);
}

TEST(Cli, BadCsvIsIntegrity) {
  TempDir dir;
  {
    std::ofstream f(dir.file("bad.csv"));
    f << "a,b\n1,2\n3\n";
  }
  EXPECT_EQ(cli({"fit", "--input", dir.file("bad.csv")}).code, 3);
  EXPECT_EQ(cli({"fit", "--input", dir.file("missing.csv")}).code, 3);
}

TEST(Cli, MalformedModelIsIntegrity) {
  TempDir dir;
  {
    std::ofstream f(dir.file("m.json"));
    f << "{\"version\": \"cherrywine/1\", \"dataset\": 7}";
  }
  {
    std::ofstream f(dir.file("junk.json"));
    f << "not json";
  }
  EXPECT_EQ(cli({"enumerate", "--input", dir.file("m.json")}).code, 3);
  EXPECT_EQ(cli({"export", "--input", dir.file("junk.json")}).code, 3);
  EXPECT_EQ(cli({"evaluate", "--input", dir.file("nope.json"), "--data", dir.file("nope.csv")}).code, 3);
}

TEST(Cli, TamperedTreeIsIntegrity) {
  TempDir dir;
  const auto data = independent(200, 6, 2);
  const auto path = write_model_with_tree(dir, data, worked_tree());
  auto j = nlohmann::json::parse(slurp(path));
  j["tcherry"]["clusters"][0] = {1, 2, 5};
  {
    std::ofstream f(dir.file("t.json"));
    f << j.dump();
  }
  const auto r = cli({"enumerate", "--input", dir.file("t.json")});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, EnumerateListsEightVariants) {
  TempDir dir;
  const auto path = write_model_with_tree(dir, independent(300, 6, 3), worked_tree());
  const auto r = cli({"enumerate", "--input", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("variants: 8\n"), std::string::npos) << r.out;
  EXPECT_EQ(count_of(r.out, "variant "), 8u);
}

TEST(Cli, ExportDotAndJson) {
  TempDir dir;
  const auto path = write_model_with_tree(dir, independent(300, 6, 4), worked_tree());
  const auto dot = cli({"export", "--input", path, "--format", "dot"});
  ASSERT_EQ(dot.code, 0) << dot.err;
  EXPECT_EQ(count_of(dot.out, "graph junction_tree {"), 1u);
  EXPECT_EQ(count_of(dot.out, "graph vine_T"), 2u);
  const auto js = cli({"export", "--input", path, "--format", "json", "--output", dir.file("copy.json")});
  ASSERT_EQ(js.code, 0) << js.err;
  EXPECT_EQ(slurp(dir.file("copy.json")), slurp(path));
  EXPECT_EQ(dump_model(load_model(path)), slurp(path));
  EXPECT_EQ(cli({"export", "--input", path, "--format", "yaml"}).code, 2);
}

TEST(Cli, FitWritesModelAndWeight) {
  TempDir dir;
  SimulationOptions so;
  so.rows = 2000;
  so.strength = 0.8;
  so.seed = 5;
  const auto data = simulate_tcherry_gaussian(worked_tree(), so);
  save_csv(data, dir.file("x.csv"));
  const auto r = cli({"fit", "--input", dir.file("x.csv"), "--k", "3", "--output", dir.file("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("total weight: "), std::string::npos);
  const auto m = load_model(dir.file("m.json"));
  EXPECT_EQ(m.order(), 3);
  EXPECT_EQ(m.dimension(), 6);
  EXPECT_TRUE(validate_tcherry(m.tree, 6).ok());
  EXPECT_EQ(m.partition.bins(), std::vector<int>(6, default_bin_count(2000)));
}

TEST(Cli, EvaluateOnTrainingDataReproducesWeight) {
  TempDir dir;
  SimulationOptions so;
  so.rows = 1500;
  so.seed = 6;
  save_csv(simulate_tcherry_gaussian(worked_tree(), so), dir.file("x.csv"));
  ASSERT_EQ(cli({"fit", "--input", dir.file("x.csv"), "--bins", "6", "--output", dir.file("m.json")}).code, 0);
  const auto m = load_model(dir.file("m.json"));
  std::ostringstream out;
  const auto r = cmd_evaluate(dir.file("m.json"), dir.file("x.csv"), out);
  EXPECT_NEAR(r.weight, m.diagnostics.weight, 1e-12);
  EXPECT_NEAR(r.information, *m.diagnostics.information, 1e-12);
  EXPECT_NEAR(r.kl, *m.diagnostics.kl, 1e-12);
  EXPECT_GE(r.kl, -1e-12);
  EXPECT_NE(out.str().find("caveat: plug-in bias bound"), std::string::npos);
}

TEST(Cli, KlVanishesWhenSampleFactorizes) {
  // copies of one column: the empirical law lives on the diagonal and is
  // Markov on any tree
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> v;
  for (int r = 0; r < 400; ++r) {
    const double x = g(rng);
    v.insert(v.end(), {x, x, x, x});
  }
  const Dataset data(400, 4, v);
  std::ostringstream sink;
  FitOptions o;
  o.k = 2;
  o.bins = 5;
  const auto m = fit_model(data, o, sink, sink);
  const auto r = evaluate_model(m, data);
  EXPECT_NEAR(r.kl, 0.0, 1e-12);
  EXPECT_NEAR(r.information, 3.0 * std::log2(5.0), 1e-12);
}

TEST(Cli, IndependentDataBelowBiasBound) {
  const auto data = independent(3000, 5, 8);
  std::ostringstream sink;
  FitOptions o;
  o.k = 3;
  o.bins = 4;
  const auto m = fit_model(data, o, sink, sink);
  const auto r = evaluate_model(m, data);
  EXPECT_GE(r.weight, 0.0);
  EXPECT_LT(r.information, r.bias_bound);
  EXPECT_LT(r.weight, r.bias_bound);
}

TEST(Cli, EvaluateClampsUnseenValues) {
  const auto data = independent(200, 3, 9);
  std::ostringstream sink;
  FitOptions o;
  o.bins = 4;
  const auto m = fit_model(data, o, sink, sink);
  std::vector<double> v{100.0, -100.0, 0.0, 0.0, 0.1, 0.2};
  EXPECT_NO_THROW(evaluate_model(m, Dataset(2, 3, v)));
  EXPECT_THROW(evaluate_model(m, Dataset(2, 2, {0.0, 0.0, 1.0, 1.0})), Error);
}

TEST(Cli, OrderTwoAgreesWithMaximumSpanningTree) {
  SimulationOptions so;
  so.rows = 3000;
  so.seed = 10;
  const auto t = TCherryJunctionTree::from_construction(
      2, {{2, VertexSet{1}}, {3, VertexSet{1}}, {4, VertexSet{3}}, {5, VertexSet{2}}});
  const auto data = simulate_tcherry_gaussian(t, so);
  std::ostringstream sink;
  FitOptions o;
  o.k = 2;
  o.bins = 8;
  const auto m = fit_model(data, o, sink, sink);
  // Prim on the pairwise mutual information of the same discretization
  const auto ds = discretize(data, m.partition);
  const int d = 5;
  std::vector<std::vector<double>> w(d + 1, std::vector<double>(d + 1, 0.0));
  for (Vertex a = 1; a <= d; ++a)
    for (Vertex b = a + 1; b <= d; ++b) w[a][b] = w[b][a] = information_content(ds, VertexSet{a, b});
  std::set<std::pair<Vertex, Vertex>> want;
  std::vector<bool> in(d + 1, false);
  in[1] = true;
  for (int step = 1; step < d; ++step) {
    double best = -1.0;
    std::pair<Vertex, Vertex> e{0, 0};
    for (Vertex a = 1; a <= d; ++a)
      for (Vertex b = 1; b <= d; ++b)
        if (in[a] && !in[b] && w[a][b] > best) best = w[a][b], e = {std::min(a, b), std::max(a, b)};
    in[e.first] = in[e.second] = true;
    want.insert(e);
  }
  std::set<std::pair<Vertex, Vertex>> got;
  for (const auto& c : m.tree.clusters()) got.insert({c.front(), c.back()});
  EXPECT_EQ(got, want);
  std::set<std::pair<Vertex, Vertex>> t1;
  for (const auto& e : m.cherry_wine.vine.tree(1).edges) t1.insert({e.a, e.b});
  EXPECT_EQ(t1, want);
}

TEST(Cli, FitIsDeterministic) {
  TempDir dir;
  save_csv(independent(500, 5, 11), dir.file("x.csv"));
  for (const char* name : {"a.json", "b.json"})
    ASSERT_EQ(cli({"fit", "--input", dir.file("x.csv"), "--fit-pairs", "gaussian", "--output", dir.file(name)}).code, 0);
  EXPECT_EQ(slurp(dir.file("a.json")), slurp(dir.file("b.json")));
}

TEST(Cli, PolicyEnumeratePrintsVariants) {
  TempDir dir;
  save_csv(independent(300, 4, 12), dir.file("x.csv"));
  const auto r = cli({"fit", "--input", dir.file("x.csv"), "--policy", "enumerate", "--output", dir.file("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("variants: "), std::string::npos);
  const auto m = load_model(dir.file("m.json"));
  const auto first = enumerate_cherry_wines(m.tree).front();
  EXPECT_EQ(m.cherry_wine.vine, first.vine);
  EXPECT_EQ(m.cherry_wine.choices, first.choices);
  EXPECT_EQ(cli({"fit", "--input", dir.file("x.csv"), "--policy", "random"}).code, 2);
}

TEST(Cli, TraceGoesToLog) {
  TempDir dir;
  save_csv(independent(100, 4, 13), dir.file("x.csv"));
  const auto r = cli({"fit", "--input", dir.file("x.csv"), "--trace"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("ACCEPT "), std::string::npos);
  EXPECT_EQ(r.out.find("ACCEPT "), std::string::npos);
}

TEST(Cli, DensityWithPairs) {
  TempDir dir;
  SimulationOptions so;
  so.rows = 800;
  so.seed = 14;
  save_csv(simulate_tcherry_gaussian(worked_tree(), so), dir.file("x.csv"));
  ASSERT_EQ(cli({"fit", "--input", dir.file("x.csv"), "--fit-pairs", "gaussian", "--output", dir.file("m.json")}).code,
            0);
  save_csv(independent(20, 6, 15), dir.file("p.csv"));
  for (const char* marg : {"normal", "histogram"}) {
    const auto r = cli({"density", "--input", dir.file("m.json"), "--data", dir.file("p.csv"), "--marginals", marg});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "log_density");
    int rows = 0;
    while (std::getline(in, line)) {
      const double v = std::stod(line);
      if (std::string(marg) == "normal") {
        EXPECT_TRUE(std::isfinite(v));
      }
      ++rows;
    }
    EXPECT_EQ(rows, 20);
  }
  // model without pairs still evaluates, under independence
  ASSERT_EQ(cli({"fit", "--input", dir.file("x.csv"), "--output", dir.file("n.json")}).code, 0);
  const auto r = cli({"density", "--input", dir.file("n.json"), "--data", dir.file("p.csv")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("independence"), std::string::npos);
}

TEST(Cli, SimulateSubcommand) {
  TempDir dir;
  const auto r = cli({"simulate", "--clusters", "1,2,3;2,3,4;3,4,5", "--rows", "40", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_of(r.out, "\n"), 41u);
  EXPECT_EQ(r.out, cli({"simulate", "--clusters", "1,2,3;2,3,4;3,4,5", "--rows", "40", "--seed", "3"}).out);
  EXPECT_NE(r.out, cli({"simulate", "--clusters", "1,2,3;2,3,4;3,4,5", "--rows", "40", "--seed", "4"}).out);
  EXPECT_EQ(cli({"simulate", "--clusters", "1,2,3;4,5,6"}).code, 2);
  EXPECT_EQ(cli({"simulate"}).code, 2);
}

TEST(Binary, ExitCodes) {
  TempDir dir;
  save_csv(independent(100, 3, 16), dir.file("x.csv"));
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary("fit --input " + dir.file("x.csv") + " --k 4"), 2);
  EXPECT_EQ(run_binary("fit --input " + dir.file("missing.csv")), 3);
  EXPECT_EQ(run_binary("fit --input " + dir.file("x.csv") + " --output " + dir.file("m.json")), 0);
  EXPECT_EQ(run_binary("enumerate --input " + dir.file("m.json")), 0);
}

TEST(Binary, ByteIdenticalFits) {
  TempDir dir;
  save_csv(independent(400, 5, 17), dir.file("x.csv"));
  ASSERT_EQ(run_binary("fit --input " + dir.file("x.csv") + " --output " + dir.file("a.json")), 0);
  ASSERT_EQ(run_binary("fit --input " + dir.file("x.csv") + " --output " + dir.file("b.json")), 0);
  EXPECT_EQ(slurp(dir.file("a.json")), slurp(dir.file("b.json")));
}
