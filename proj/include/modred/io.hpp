#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "modred/budget.hpp"
#include "modred/interconnect.hpp"
#include "modred/reduction.hpp"
#include "modred/state_space.hpp"

namespace modred {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j, Index rows, Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw InvalidArgument("model json: " + name + " must have " + std::to_string(rows) + " rows");
  Matrix M(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw InvalidArgument("model json: " + name + " row " + std::to_string(r) +
                            " must have " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw InvalidArgument("model json: non-numeric entry in " + name);
      M(r, c) = v.get<double>();
    }
  }
  return M;
}

inline Json model_to_json(const StateSpaceModel& sys) {
  Json j;
  j["n"] = sys.n();
  j["m"] = sys.m();
  j["p"] = sys.p();
  j["A"] = matrix_to_json(sys.A);
  j["B"] = matrix_to_json(sys.B);
  j["C"] = matrix_to_json(sys.C);
  j["D"] = matrix_to_json(sys.D);
  return j;
}

inline StateSpaceModel model_from_json(const Json& j) {
  for (const char* key : {"n", "m", "p", "A", "B", "C", "D"})
    if (!j.contains(key)) throw InvalidArgument(std::string("model json: missing key ") + key);
  const Index n = j["n"].get<Index>(), m = j["m"].get<Index>(), p = j["p"].get<Index>();
  if (n < 0 || m < 0 || p < 0) throw InvalidArgument("model json: negative dimension");
  StateSpaceModel sys;
  sys.A = matrix_from_json(j["A"], n, n, "A");
  sys.B = matrix_from_json(j["B"], n, m, "B");
  sys.C = matrix_from_json(j["C"], p, n, "C");
  sys.D = matrix_from_json(j["D"], p, m, "D");
  validate(sys, "model json");
  return sys;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw InvalidArgument("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json load_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("invalid json in " + path.string() + ": " + e.what());
  }
}

inline void save_model(const StateSpaceModel& sys, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(sys).dump(1) + "\n");
}

inline StateSpaceModel load_model(const std::filesystem::path& path) {
  return model_from_json(load_json_file(path));
}

/// Coupled-system description: inline subsystem models or {"file": path}
/// references (relative to the description file), the full interconnection
/// matrix, and the per-subsystem dimension bookkeeping.
inline Json coupled_to_json(const CoupledSystem& cs) {
  Json j;
  Json subs = Json::array();
  for (const auto& sys : cs.subsystems()) subs.push_back(model_to_json(sys));
  j["subsystems"] = std::move(subs);
  j["K"] = matrix_to_json(cs.K().full());
  j["input_dims"] = cs.K().input_dims;
  j["output_dims"] = cs.K().output_dims;
  return j;
}

inline CoupledSystem coupled_from_json(const Json& j, const std::filesystem::path& base_dir = ".") {
  for (const char* key : {"subsystems", "K", "input_dims", "output_dims"})
    if (!j.contains(key)) throw InvalidArgument(std::string("coupled json: missing key ") + key);
  std::vector<StateSpaceModel> models;
  for (const Json& entry : j["subsystems"]) {
    if (entry.is_object() && entry.contains("file"))
      models.push_back(load_model(base_dir / entry["file"].get<std::string>()));
    else
      models.push_back(model_from_json(entry));
  }
  std::vector<Index> mdims = j["input_dims"].get<std::vector<Index>>();
  std::vector<Index> pdims = j["output_dims"].get<std::vector<Index>>();
  Index mb = 0, pb = 0;
  for (Index v : mdims) mb += v;
  for (Index v : pdims) pb += v;
  const Json& kj = j["K"];
  if (!kj.is_array() || kj.empty()) throw InvalidArgument("coupled json: bad K");
  const Index krows = static_cast<Index>(kj.size());
  const Index kcols = static_cast<Index>(kj[0].size());
  if (krows < mb || kcols < pb)
    throw InvalidArgument("coupled json: K smaller than subsystem dimensions");
  const Matrix K = matrix_from_json(kj, krows, kcols, "K");
  return CoupledSystem(std::move(models),
                       InterconnectionMatrix::from_full(K, std::move(mdims), std::move(pdims)));
}

inline void save_coupled(const CoupledSystem& cs, const std::filesystem::path& path) {
  write_text_file(path, coupled_to_json(cs).dump(1) + "\n");
}

inline CoupledSystem load_coupled(const std::filesystem::path& path) {
  return coupled_from_json(load_json_file(path), path.parent_path());
}

inline Json reduction_to_json(const ReductionResult& r) {
  Json j;
  j["reduced"] = model_to_json(r.reduced);
  Json hank = Json::array();
  for (Index i = 0; i < r.hankel.size(); ++i) hank.push_back(r.hankel(i));
  j["hankel"] = std::move(hank);
  if (r.a_priori_bound)
    j["a_priori_bound"] = *r.a_priori_bound;
  else
    j["a_priori_bound"] = nullptr;
  j["convention"] = to_string(r.convention);
  j["tie_at_boundary"] = r.tie_at_boundary;
  return j;
}

/// BoundResult CSV: one line per frequency point with the certificate
/// scalings; "-" marks absent values (infeasible points), mirroring how
/// infeasible table entries are reported.
inline std::string bound_result_csv(const BoundResult& res, std::size_t k) {
  std::ostringstream out;
  out << "omega,feasible,value";
  for (std::size_t j = 1; j <= k; ++j) out << ",d_" << j;
  out << ",d_c\n";
  for (const auto& pt : res.per_frequency) {
    out << format_double(pt.omega) << ',' << (pt.feasible ? 1 : 0) << ',';
    out << (pt.value ? format_double(*pt.value) : "-");
    for (std::size_t j = 0; j < k; ++j) {
      out << ',';
      if (pt.certificate)
        out << format_double(pt.certificate->d(static_cast<Index>(j)));
      else
        out << '-';
    }
    out << ',';
    out << (pt.certificate ? format_double(pt.certificate->d_c) : "-");
    out << '\n';
  }
  return out.str();
}

inline Json bound_result_to_json(const BoundResult& res) {
  Json j;
  j["global_value"] = res.global_value ? Json(*res.global_value) : Json(nullptr);
  j["global_omega"] = res.global_omega ? Json(*res.global_omega) : Json(nullptr);
  j["wellposed_stable_certified"] = res.wellposed_stable_certified;
  Json pts = Json::array();
  for (const auto& pt : res.per_frequency) {
    Json p;
    p["omega"] = pt.omega;
    p["feasible"] = pt.feasible;
    p["value"] = pt.value ? Json(*pt.value) : Json(nullptr);
    if (pt.certificate) {
      Json d = Json::array();
      for (Index i = 0; i < pt.certificate->d.size(); ++i) d.push_back(pt.certificate->d(i));
      p["d"] = std::move(d);
      p["d_c"] = pt.certificate->d_c;
      p["normalized_index"] = pt.certificate->normalized_index;
    }
    pts.push_back(std::move(p));
  }
  j["per_frequency"] = std::move(pts);
  j["stats"] = {{"points", res.stats.points},
                {"infeasible_points", res.stats.infeasible_points},
                {"elapsed_seconds", res.stats.elapsed_seconds}};
  return j;
}

/// Generic per-frequency data table (the plotting payload): named columns
/// over a shared omega axis, "-" for absent entries.
inline std::string series_csv(const std::vector<std::string>& names,
                              const std::vector<double>& omegas,
                              const std::vector<std::vector<double>>& columns) {
  std::ostringstream out;
  out << "omega";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    out << format_double(omegas[i]);
    for (const auto& col : columns) {
      out << ',';
      if (i < col.size() && std::isfinite(col[i]))
        out << format_double(col[i]);
      else
        out << '-';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace modred
