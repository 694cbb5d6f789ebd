#pragma once

// JSON and CSV (de)serialization of matrices, patch sets, sampled fibrations,
// campaign configurations and reports, plus atomic file output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "tamekit/fibration.hpp"
#include "tamekit/search.hpp"
#include "tamekit/splicing.hpp"

namespace tamekit::io {

using Json = nlohmann::ordered_json;

// Numbers: finite doubles as JSON numbers, +-infinity as the strings "inf" /
// "-inf", NaN as null.
inline Json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline double parse_number(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
  }
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  throw ParseError(where + ": expected a number, got " + j.dump());
}

inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline Json rows_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// { "dim": m, "rows": [[...], ...] } for square matrices; non-square ones carry
// "shape": [rows, cols] instead of "dim".
inline Json matrix_json(const Matrix& m) {
  Json out;
  if (m.rows() == m.cols()) out["dim"] = m.rows();
  else out["shape"] = {m.rows(), m.cols()};
  out["rows"] = rows_json(m);
  return out;
}

inline Json complex_matrix_json(const CMatrix& m) {
  Json out;
  if (m.rows() == m.cols()) out["dim"] = m.rows();
  else out["shape"] = {m.rows(), m.cols()};
  out["re"] = rows_json(m.real());
  out["im"] = rows_json(m.imag());
  return out;
}

inline Matrix parse_rows(const Json& rows, const std::string& where) {
  if (!rows.is_array()) throw ParseError(where + ": rows must be an array");
  const auto r = static_cast<Eigen::Index>(rows.size());
  Eigen::Index c = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < r; ++i) {
    const Json& row = rows[i];
    if (!row.is_array()) throw ParseError(where + ": row " + std::to_string(i) + " is not an array");
    if (c < 0) {
      c = static_cast<Eigen::Index>(row.size());
      m.resize(r, c);
    } else if (static_cast<Eigen::Index>(row.size()) != c) {
      throw ParseError(where + ": ragged rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) {
      const double x = parse_number(row[j], where);
      if (!std::isfinite(x)) throw ParseError(where + ": non-finite entry");
      m(i, j) = x;
    }
  }
  if (c < 0) m.resize(0, 0);
  return m;
}

inline void check_dim(const Json& j, const Matrix& m, const std::string& where) {
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer()) throw ParseError(where + ": dim must be an integer");
    const auto dim = j["dim"].get<long long>();
    if (dim != m.rows() || dim != m.cols()) {
      throw ParseError(where + ": dim " + std::to_string(dim) + " does not match rows " +
                       linalg::shape(m));
    }
  }
  if (j.contains("shape")) {
    const Json& s = j["shape"];
    if (!s.is_array() || s.size() != 2 || s[0].get<long long>() != m.rows() ||
        s[1].get<long long>() != m.cols()) {
      throw ParseError(where + ": shape does not match rows " + linalg::shape(m));
    }
  }
}

inline Matrix parse_matrix(const Json& j, const std::string& where = "matrix") {
  if (j.is_array()) return parse_rows(j, where);
  if (!j.is_object() || !j.contains("rows")) {
    throw ParseError(where + ": expected an object with \"rows\"");
  }
  Matrix m = parse_rows(j["rows"], where);
  check_dim(j, m, where);
  return m;
}

inline CMatrix parse_complex_matrix(const Json& j, const std::string& where = "matrix") {
  if (j.is_object() && j.contains("re")) {
    const Matrix re = parse_rows(j["re"], where + ".re");
    const Matrix im = j.contains("im") ? parse_rows(j["im"], where + ".im") : Matrix::Zero(re.rows(), re.cols());
    if (re.rows() != im.rows() || re.cols() != im.cols()) {
      throw ParseError(where + ": re and im shapes differ");
    }
    check_dim(j, re, where);
    CMatrix out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }
  return parse_matrix(j, where).cast<Complex>();
}

inline bool is_complex_matrix(const Json& j) { return j.is_object() && j.contains("re"); }

inline Json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json(const std::filesystem::path& path) {
  return parse_json_text(read_file(path), path.string());
}

// Writes to a temporary sibling and renames it over the target.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp =
      path.string() + ".tmp." + std::to_string(static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Patch sets ---------------------------------------------------------------

inline LocalPatchSet parse_patch_set(const Json& j) {
  const Json* points = &j;
  if (j.is_object()) {
    if (!j.contains("points")) throw ParseError("patch set: expected a list or {\"points\": [...]}");
    points = &j["points"];
  }
  if (!points->is_array()) throw ParseError("patch set: points must be a list");
  LocalPatchSet out;
  for (std::size_t i = 0; i < points->size(); ++i) {
    const Json& p = (*points)[i];
    const std::string where = "point " + std::to_string(i);
    if (!p.is_object()) throw ParseError(where + ": expected an object");
    for (const char* key : {"weights", "structures", "T", "omega_F"}) {
      if (!p.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
    }
    PatchPoint pt;
    pt.id = p.contains("id") ? p["id"].get<std::string>() : std::to_string(i);
    if (!p["weights"].is_object() || !p["structures"].is_object()) {
      throw ParseError(where + ": weights and structures must be objects keyed by patch name");
    }
    for (const auto& [alpha, rho] : p["weights"].items()) {
      pt.weights[alpha] = parse_number(rho, where + ".weights." + alpha);
    }
    for (const auto& [alpha, m] : p["structures"].items()) {
      pt.structures[alpha] = parse_matrix(m, where + ".structures." + alpha);
    }
    pt.t = parse_matrix(p["T"], where + ".T");
    pt.omega_f = parse_matrix(p["omega_F"], where + ".omega_F");
    pt.certified_regular = p.value("certified_regular", false);
    out.points.push_back(std::move(pt));
  }
  return out;
}

inline Json patch_set_json(const LocalPatchSet& set) {
  Json points = Json::array();
  for (const auto& p : set.points) {
    Json o;
    o["id"] = p.id;
    Json w = Json::object();
    for (const auto& [alpha, rho] : p.weights) w[alpha] = number(rho);
    Json s = Json::object();
    for (const auto& [alpha, m] : p.structures) s[alpha] = matrix_json(m);
    o["weights"] = std::move(w);
    o["structures"] = std::move(s);
    o["T"] = matrix_json(p.t);
    o["omega_F"] = matrix_json(p.omega_f);
    if (p.certified_regular) o["certified_regular"] = true;
    points.push_back(std::move(o));
  }
  return Json{{"points", std::move(points)}};
}

// Sampled fibrations --------------------------------------------------------

inline Json fibration_json(const SampledFibration& fib) {
  Json out;
  out["schema"] = "fib/1";
  Json meta;
  meta["generator"] = fib.generator;
  meta["mesh"] = fib.mesh;
  Json params = Json::object();
  for (const auto& [k, v] : fib.parameters) params[k] = number(v);
  meta["parameters"] = std::move(params);
  out["metadata"] = std::move(meta);
  out["omega_Y"] = matrix_json(fib.omega_y);
  Json samples = Json::array();
  for (const auto& s : fib.samples) {
    Json o;
    o["id"] = s.id;
    o["base"] = Json::array();
    for (Eigen::Index i = 0; i < s.base.size(); ++i) o["base"].push_back(number(s.base(i)));
    o["regular"] = s.regular;
    o["df"] = matrix_json(s.df);
    o["J"] = matrix_json(s.j);
    o["eta"] = matrix_json(s.eta);
    o["base_pullback"] = matrix_json(s.base_pullback);
    o["kernel"] = matrix_json(s.kernel);
    samples.push_back(std::move(o));
  }
  out["samples"] = std::move(samples);
  return out;
}

inline SampledFibration parse_fibration(const Json& j) {
  if (!j.is_object() || j.value("schema", std::string()) != "fib/1") {
    throw ParseError("fibration: expected \"schema\": \"fib/1\"");
  }
  for (const char* key : {"omega_Y", "samples"}) {
    if (!j.contains(key)) throw ParseError(std::string("fibration: missing \"") + key + "\"");
  }
  SampledFibration fib;
  if (j.contains("metadata")) {
    const Json& meta = j["metadata"];
    fib.generator = meta.value("generator", std::string());
    fib.mesh = meta.value("mesh", std::string());
    if (meta.contains("parameters")) {
      for (const auto& [k, v] : meta["parameters"].items()) {
        fib.parameters[k] = parse_number(v, "metadata.parameters." + k);
      }
    }
  }
  fib.omega_y = parse_matrix(j["omega_Y"], "omega_Y");
  if (!j["samples"].is_array()) throw ParseError("fibration: samples must be a list");
  for (std::size_t i = 0; i < j["samples"].size(); ++i) {
    const Json& o = j["samples"][i];
    const std::string where = "sample " + std::to_string(i);
    for (const char* key : {"df", "J", "eta", "base_pullback", "kernel"}) {
      if (!o.contains(key)) throw ParseError(where + ": missing \"" + key + "\"");
    }
    PointSample s;
    s.id = o.value("id", std::to_string(i));
    if (o.contains("base")) {
      s.base.resize(static_cast<Eigen::Index>(o["base"].size()));
      for (std::size_t b = 0; b < o["base"].size(); ++b) {
        s.base(static_cast<Eigen::Index>(b)) = parse_number(o["base"][b], where + ".base");
      }
    }
    s.regular = o.value("regular", true);
    s.df = parse_matrix(o["df"], where + ".df");
    s.j = parse_matrix(o["J"], where + ".J");
    s.eta = parse_matrix(o["eta"], where + ".eta");
    s.base_pullback = parse_matrix(o["base_pullback"], where + ".base_pullback");
    s.kernel = parse_matrix(o["kernel"], where + ".kernel");
    if (s.kernel.size() == 0) s.kernel.resize(s.j.rows(), 0);
    fib.samples.push_back(std::move(s));
  }
  return fib;
}

inline std::string threshold_csv(const ThresholdReport& report) {
  std::string out = "sample_id,t0,margin_at_half_t0\n";
  for (const auto& r : report.rows) {
    out += r.id + "," + csv_number(r.t0) + "," + csv_number(r.margin_at_half) + "\n";
  }
  return out;
}

// Campaigns -----------------------------------------------------------------

inline SearchCampaign parse_campaign(const Json& j) {
  if (!j.is_object()) throw ParseError("campaign: expected an object");
  SearchCampaign c;
  try {
    c.dim = j.value("dim", c.dim);
    c.k = j.value("k", c.k);
    if (j.contains("mode")) c.mode = parse_search_mode(j["mode"].get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.trials = j.value("trials", c.trials);
    c.margin_floor = j.value("margin_floor", c.margin_floor);
    c.candidate_threshold = j.value("candidate_threshold", c.candidate_threshold);
    c.compatible_only = j.value("compatible_only", c.compatible_only);
    c.conjugator_scale = j.value("conjugator_scale", c.conjugator_scale);
    c.rejection_budget = j.value("rejection_budget", c.rejection_budget);
    c.descent_steps = j.value("descent_steps", c.descent_steps);
    c.descent_step = j.value("descent_step", c.descent_step);
    c.descent_shrink = j.value("descent_shrink", c.descent_shrink);
    c.descent_max_shrinks = j.value("descent_max_shrinks", c.descent_max_shrinks);
    c.simplex_floor = j.value("simplex_floor", c.simplex_floor);
    c.hybrid_starts = j.value("hybrid_starts", c.hybrid_starts);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("campaign: ") + e.what());
  }
  return c;
}

inline Json campaign_json(const SearchCampaign& c) {
  Json j;
  j["dim"] = c.dim;
  j["k"] = c.k;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["margin_floor"] = number(c.margin_floor);
  j["candidate_threshold"] = number(c.candidate_threshold);
  j["compatible_only"] = c.compatible_only;
  j["conjugator_scale"] = number(c.conjugator_scale);
  j["rejection_budget"] = c.rejection_budget;
  j["descent_steps"] = c.descent_steps;
  j["descent_step"] = number(c.descent_step);
  j["descent_shrink"] = number(c.descent_shrink);
  j["descent_max_shrinks"] = c.descent_max_shrinks;
  j["simplex_floor"] = number(c.simplex_floor);
  j["hybrid_starts"] = c.hybrid_starts;
  return j;
}

inline Json numbers_json(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

inline Json verification_json(const Verification& v) {
  return Json{{"verdict", to_string(v.verdict)},
              {"reason", v.reason},
              {"extended_objective", number(v.extended_objective)},
              {"extended_vertex_margins", numbers_json(v.extended_vertex_margins)}};
}

inline Json record_json(const TrialRecord& r, bool with_matrices) {
  Json o;
  o["trial"] = r.trial;
  o["mode"] = r.mode;
  o["objective"] = number(r.objective);
  o["min_vertex_margin"] = number(r.min_vertex_margin());
  o["vertex_margins"] = numbers_json(r.vertex_margins);
  o["t"] = numbers_json(r.t);
  o["attempts"] = r.attempts;
  if (!r.history.empty()) o["history"] = numbers_json(r.history);
  if (!r.error.empty()) o["error"] = r.error;
  if (r.verification) o["verification"] = verification_json(*r.verification);
  if (with_matrices) {
    Json vs = Json::array();
    for (const auto& v : r.vertices) vs.push_back(matrix_json(v));
    Json qs = Json::array();
    for (const auto& q : r.conjugators) qs.push_back(matrix_json(q));
    o["vertices"] = std::move(vs);
    o["conjugators"] = std::move(qs);
  }
  return o;
}

inline Json report_json(const CampaignReport& rep) {
  Json j;
  j["config"] = campaign_json(rep.config);
  j["omega"] = matrix_json(rep.omega);
  j["global_min"] = number(rep.global_min);
  j["argmin"] = rep.argmin;
  j["acceptance_rate"] = number(rep.acceptance_rate);
  j["candidate_count"] = rep.candidates.size();
  j["confirmed"] = rep.count(Verdict::confirmed);
  j["refuted"] = rep.count(Verdict::refuted);
  j["inconclusive"] = rep.count(Verdict::inconclusive);
  Json recs = Json::array();
  for (const auto& r : rep.records) recs.push_back(record_json(r, false));
  j["records"] = std::move(recs);
  return j;
}

// Candidates with every matrix, for independent re-checking.
inline Json candidates_json(const CampaignReport& rep) {
  Json list = Json::array();
  for (std::size_t i : rep.candidates) list.push_back(record_json(rep.records[i], true));
  return Json{{"omega", matrix_json(rep.omega)}, {"candidates", std::move(list)}};
}

inline std::string report_csv(const CampaignReport& rep) {
  std::string out = "trial,mode,objective,min_vertex_margin";
  for (int i = 0; i < rep.config.k; ++i) out += ",t" + std::to_string(i + 1);
  out += ",verdict\n";
  for (const auto& r : rep.records) {
    out += std::to_string(r.trial) + "," + r.mode + "," + csv_number(r.objective) + "," +
           csv_number(r.min_vertex_margin());
    for (int i = 0; i < rep.config.k; ++i) {
      out += "," + (static_cast<std::size_t>(i) < r.t.size() ? csv_number(r.t[i]) : std::string("nan"));
    }
    out += "," + (r.verification ? std::string(to_string(r.verification->verdict)) : std::string()) + "\n";
  }
  return out;
}

}  // namespace tamekit::io
