#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gptd/embedding.hpp"
#include "gptd/errors.hpp"
#include "gptd/hermitian.hpp"
#include "gptd/model.hpp"

namespace gptd::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// FNV-1a 64-bit digest, hex-encoded; used to fingerprint input files.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Matrices travel as row-major arrays of [re, im] pairs, one array per row.
inline Json matrix_to_json(const HermMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.dim(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.dim(); ++j) {
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline HermMatrix matrix_from_json(const Json& rows,
                                   const std::string& field) {
  if (!rows.is_array() || rows.empty()) {
    throw ParseError(field + ": expected a non-empty array of rows");
  }
  const auto d = Eigen::Index(rows.size());
  ComplexMatrix<double> m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& row = rows[size_t(i)];
    if (!row.is_array() || Eigen::Index(row.size()) != d) {
      throw ParseError(field + ": row " + std::to_string(i) +
                       " must hold " + std::to_string(d) + " entries");
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto& pair = row[size_t(j)];
      if (!pair.is_array() || pair.size() != 2 ||
          !pair[0].is_number() || !pair[1].is_number()) {
        throw ParseError(field + ": entry (" + std::to_string(i) + "," +
                         std::to_string(j) + ") must be an [re, im] pair");
      }
      m(i, j) = std::complex<double>(pair[0].get<double>(),
                                     pair[1].get<double>());
    }
  }
  try {
    return HermMatrix(m);
  } catch (const ShapeError& err) {
    throw ParseError(field + ": " + err.what());
  }
}

inline Json parse_json(const std::string& text, const std::string& path) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ParseError("invalid JSON in " + path);
  }
  return j;
}

inline void require_version(const Json& j, const std::string& path) {
  if (!j.contains("format_version") ||
      !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kFormatVersion) {
    throw ParseError(path + ": format_version must be " +
                     std::to_string(kFormatVersion));
  }
}

struct LoadedModel {
  std::variant<GptModel, AbstractModel> value;

  bool is_abstract() const {
    return std::holds_alternative<AbstractModel>(value);
  }
  const GptModel& quantum_like() const { return std::get<GptModel>(value); }
  const AbstractModel& abstract() const {
    return std::get<AbstractModel>(value);
  }
};

inline LoadedModel load_model(const std::string& path, double tol) {
  const Json j = parse_json(read_file(path), path);
  require_version(j, path);

  if (j.contains("abstract")) {
    const auto& a = j["abstract"];
    if (!a.contains("dim_v") || !a["dim_v"].is_number_integer()) {
      throw ParseError(path + ": abstract.dim_v missing");
    }
    const auto dim_v = Eigen::Index(a["dim_v"].get<int>());
    if (!a.contains("generators") || !a["generators"].is_array() ||
        a["generators"].empty()) {
      throw ParseError(path + ": abstract.generators missing");
    }
    std::vector<Eigen::VectorXd> gens;
    for (const auto& g : a["generators"]) {
      if (!g.is_array() || Eigen::Index(g.size()) != dim_v) {
        throw ParseError(path + ": abstract generator of wrong length");
      }
      Eigen::VectorXd v(dim_v);
      for (Eigen::Index k = 0; k < dim_v; ++k) v[k] = g[size_t(k)].get<double>();
      gens.push_back(std::move(v));
    }
    if (!a.contains("unit") || !a["unit"].is_array() ||
        Eigen::Index(a["unit"].size()) != dim_v) {
      throw ParseError(path + ": abstract.unit missing or wrong length");
    }
    Eigen::VectorXd unit(dim_v);
    for (Eigen::Index k = 0; k < dim_v; ++k) {
      unit[k] = a["unit"][size_t(k)].get<double>();
    }
    return LoadedModel{AbstractModel(dim_v, std::move(gens), std::move(unit))};
  }

  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ParseError(path + ": dim missing");
  }
  const auto dim = Eigen::Index(j["dim"].get<int>());
  if (dim < 1 || dim > 64) {
    throw ParseError(path + ": dim out of supported range");
  }
  if (!j.contains("cone") || !j["cone"].contains("variant")) {
    throw ParseError(path + ": cone.variant missing");
  }
  const std::string variant = j["cone"]["variant"].get<std::string>();
  if (variant == "psd") {
    return LoadedModel{GptModel::psd(dim, tol)};
  }
  if (variant == "sep22") {
    if (dim != 4) {
      throw ParseError(path + ": sep22 requires dim = 4");
    }
    return LoadedModel{GptModel::sep22(tol)};
  }
  if (variant == "generators") {
    if (!j["cone"].contains("matrices") || !j["cone"]["matrices"].is_array()) {
      throw ParseError(path + ": cone.matrices missing");
    }
    std::vector<HermMatrix> gens;
    for (const auto& m : j["cone"]["matrices"]) {
      gens.push_back(matrix_from_json(m, path + ": generator"));
      if (gens.back().dim() != dim) {
        throw ParseError(path + ": generator dimension differs from dim");
      }
    }
    return LoadedModel{GptModel::from_generators(std::move(gens), tol)};
  }
  throw ParseError(path + ": unknown cone variant '" + variant + "'");
}

struct InstanceFile {
  HermMatrix rho0;
  HermMatrix rho1;
  double p = 0.5;
};

inline InstanceFile load_instance(const std::string& path) {
  const Json j = parse_json(read_file(path), path);
  require_version(j, path);
  if (!j.contains("rho0") || !j.contains("rho1")) {
    throw ParseError(path + ": rho0 and rho1 required");
  }
  InstanceFile f{matrix_from_json(j["rho0"], path + ": rho0"),
                 matrix_from_json(j["rho1"], path + ": rho1"), 0.5};
  if (j.contains("p")) {
    if (!j["p"].is_number()) {
      throw ParseError(path + ": p must be a number");
    }
    f.p = j["p"].get<double>();
  }
  return f;
}

inline HermMatrix load_state(const std::string& path) {
  const Json j = parse_json(read_file(path), path);
  require_version(j, path);
  if (!j.contains("state")) {
    throw ParseError(path + ": state required");
  }
  return matrix_from_json(j["state"], path + ": state");
}

inline std::vector<HermMatrix> load_effects(const std::string& path) {
  const Json j = parse_json(read_file(path), path);
  require_version(j, path);
  if (!j.contains("effects") || !j["effects"].is_array()) {
    throw ParseError(path + ": effects array required");
  }
  std::vector<HermMatrix> effects;
  for (const auto& e : j["effects"]) {
    effects.push_back(matrix_from_json(e, path + ": effect"));
  }
  return effects;
}

inline void write_instance(const std::string& path, const HermMatrix& rho0,
                           const HermMatrix& rho1, double p) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["rho0"] = matrix_to_json(rho0);
  j["rho1"] = matrix_to_json(rho1);
  j["p"] = p;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot write file: " + path);
  }
  out << j.dump(2) << "\n";
}

/// Machine-readable run report. Deterministic for fixed inputs and seed:
/// wall time is deliberately not part of the payload.
class Report {
public:
  Report(std::string command, std::vector<std::string> argv) {
    json_["format_version"] = kFormatVersion;
    json_["command"] = std::move(command);
    json_["argv"] = std::move(argv);
    json_["inputs"] = Json::object();
    json_["results"] = Json::object();
  }

  void add_input(const std::string& role, const std::string& path,
                 const std::string& bytes) {
    json_["inputs"][role] = {{"path", path}, {"fnv1a64", fnv1a64_hex(bytes)}};
  }
  void add_builtin_input(const std::string& role, const std::string& name) {
    json_["inputs"][role] = {{"builtin", name},
                             {"fnv1a64", fnv1a64_hex("builtin:" + name)}};
  }
  void set_tolerance(double tol) { json_["tolerance"] = tol; }
  void set_seed(std::uint64_t seed) { json_["seed"] = seed; }

  Json& results() { return json_["results"]; }

  void set_error(const std::string& kind, const std::string& message) {
    json_["error"] = {{"kind", kind}, {"message", message}};
  }
  void attach_certificate_entries(
      int dim, const std::vector<std::complex<double>>& entries) {
    if (dim <= 0 || entries.size() != size_t(dim) * size_t(dim)) return;
    ComplexMatrix<double> m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = entries[size_t(i * dim + j)];
    json_["error"]["certificate"] = matrix_to_json(HermMatrix(m, 1e-6));
  }

  std::string serialize() const { return json_.dump(2) + "\n"; }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw ParseError("cannot write report: " + path);
    }
    out << serialize();
  }

private:
  Json json_;
};

}  // namespace gptd::io
