#ifndef CHERRYWINE_MODEL_HPP
#define CHERRYWINE_MODEL_HPP

// Versioned model file: fitted structure, partition and diagnostics.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cherrywine/error.hpp"
#include "cherrywine/ingest.hpp"
#include "cherrywine/junction.hpp"
#include "cherrywine/paircopula.hpp"
#include "cherrywine/vine.hpp"
#include "json.hpp"

namespace cherrywine {

inline constexpr const char* kModelVersion = "cherrywine/1";

struct DatasetFingerprint {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::string> names;
  std::string hash;  // FNV-1a 64 of the values, hex

  friend bool operator==(const DatasetFingerprint&, const DatasetFingerprint&) = default;
};

inline std::string fnv1a_hex(const std::vector<double>& values) {
  std::uint64_t h = 14695981039346656037ull;
  for (double v : values) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

inline DatasetFingerprint fingerprint(const Dataset& data) {
  return {data.rows(), data.cols(), data.names(), fnv1a_hex(data.values())};
}

struct ClusterInformation {
  VertexSet cluster;
  double information = 0.0;
};

struct Diagnostics {
  double weight = 0.0;                 // tree weight, bits
  std::optional<double> information;   // plug-in I(X_V)
  std::optional<double> kl;            // I(X_V) - weight
  std::vector<ClusterInformation> clusters;
};

struct ModelFile {
  std::string version = kModelVersion;
  DatasetFingerprint dataset;
  Partition partition;
  std::vector<NormalMarginal> marginals;
  TCherryJunctionTree tree;
  CherryWine cherry_wine;
  std::optional<PairCopulaAssignment> assignment;
  Diagnostics diagnostics;

  int dimension() const { return static_cast<int>(dataset.cols); }
  int order() const { return tree.order(); }
};

inline nlohmann::json to_json(const ModelFile& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["dataset"] = {{"rows", m.dataset.rows},
                  {"cols", m.dataset.cols},
                  {"names", m.dataset.names},
                  {"fnv1a64", m.dataset.hash}};
  j["partition"] = to_json(m.partition);
  auto marg = nlohmann::json::array();
  for (const auto& n : m.marginals) marg.push_back({{"mean", n.mean}, {"sd", n.sd}});
  j["marginals"] = std::move(marg);
  j["order"] = m.order();
  j["tcherry"] = to_json(m.tree);
  j["cherry_wine"] = to_json(m.cherry_wine);
  if (m.assignment) j["assignment"] = to_json(*m.assignment);
  nlohmann::json diag;
  diag["weight"] = m.diagnostics.weight;
  if (m.diagnostics.information) diag["information"] = *m.diagnostics.information;
  if (m.diagnostics.kl) diag["kl"] = *m.diagnostics.kl;
  auto cl = nlohmann::json::array();
  for (const auto& c : m.diagnostics.clusters)
    cl.push_back({{"cluster", c.cluster.items()}, {"information", c.information}});
  diag["clusters"] = std::move(cl);
  j["diagnostics"] = std::move(diag);
  return j;
}

// Structures are validated while loading; any failure is an integrity error
// carrying the validator's report.
inline ModelFile model_from_json(const nlohmann::json& j) {
  try {
    ModelFile m;
    m.version = j.at("version").get<std::string>();
    if (m.version != kModelVersion)
      throw integrity_error("cli", "unrecognized model version '" + m.version + "'");
    const auto& ds = j.at("dataset");
    m.dataset = {ds.at("rows").get<std::size_t>(), ds.at("cols").get<std::size_t>(),
                 ds.at("names").get<std::vector<std::string>>(), ds.at("fnv1a64").get<std::string>()};
    const int d = m.dimension();
    if (d < 2 || m.dataset.names.size() != m.dataset.cols)
      throw integrity_error("cli", "dataset fingerprint is inconsistent");
    m.partition = partition_from_json(j.at("partition"));
    if (m.partition.dimension() != m.dataset.cols)
      throw integrity_error("cli", "partition covers " + std::to_string(m.partition.dimension()) +
                                       " variables, model has " + std::to_string(d));
    for (const auto& n : j.at("marginals")) m.marginals.push_back({n.at("mean").get<double>(), n.at("sd").get<double>()});
    if (m.marginals.size() != m.dataset.cols) throw integrity_error("cli", "marginal count does not match d");

    m.tree = tcherry_from_json(j.at("tcherry"));
    if (j.at("order").get<int>() != m.tree.order()) throw integrity_error("cli", "order does not match the tree");
    const auto report = validate_tcherry(m.tree, d);
    if (!report.ok()) throw integrity_error("cli", "t-cherry tree fails validation:\n" + report.str());
    m.cherry_wine = cherry_wine_from_json(j.at("cherry_wine"), m.tree);
    const auto vreport = validate_vine(m.cherry_wine.vine);
    if (!vreport.ok()) throw integrity_error("cli", "cherry-wine fails validation:\n" + vreport.str());
    if (j.contains("assignment")) {
      m.assignment = assignment_from_json(j.at("assignment"));
      if (!m.assignment->fits(m.cherry_wine.vine))
        throw integrity_error("cli", "assignment names an edge outside the cherry-wine");
    }
    const auto& diag = j.at("diagnostics");
    m.diagnostics.weight = diag.at("weight").get<double>();
    if (diag.contains("information")) m.diagnostics.information = diag.at("information").get<double>();
    if (diag.contains("kl")) m.diagnostics.kl = diag.at("kl").get<double>();
    for (const auto& c : diag.at("clusters"))
      m.diagnostics.clusters.push_back({VertexSet(c.at("cluster").get<std::vector<Vertex>>()),
                                        c.at("information").get<double>()});
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("cli", std::string("malformed model: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::integrity) throw;
    throw integrity_error("cli", ex.what());
  }
}

inline std::string dump_model(const ModelFile& m) { return to_json(m).dump(2) + "\n"; }

inline void save_model(const ModelFile& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw integrity_error("cli", "cannot write " + path.string());
  out << dump_model(m);
}

inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw integrity_error("cli", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw integrity_error("cli", "model " + path.string() + " is not valid JSON: " + ex.what());
  }
  return model_from_json(j);
}

}  // namespace cherrywine

#endif  // CHERRYWINE_MODEL_HPP
