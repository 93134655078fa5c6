#pragma once

// JSON input (algebra and operator specs) and report output.
//
// Algebra spec:
//   {"name": "...", "basis": ["X", "Y", "T"], "degrees": [1, 1, 2],
//    "brackets": [{"i": "X", "j": "Y", "coeffs": {"T": 1}}], "generators": ["X", "Y"]}
// Indices may be given as labels or 0-based integers; coefficients as numbers
// or [re, im]. A bracket [e_j, e_i] not listed is filled in as -[e_i, e_j].
//
// Operator spec:
//   {"algebra": "heisenberg1" | {...} | "path.json", "order": 2,
//    "terms": [{"coeff": "2+sin(x)", "word": "XX"}]}

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypo/covering.hpp"
#include "hypo/diffop.hpp"
#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"
#include "hypo/probes.hpp"
#include "hypo/repr.hpp"

namespace hypo {

using json = nlohmann::ordered_json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": malformed JSON (" + std::string(e.what()) + ")", e.byte == 0 ? 0 : e.byte - 1);
  }
}

namespace io_detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

inline int basis_index(const json& v, const std::vector<std::string>& labels, const std::string& where) {
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= labels.size()) fail(where, "index out of range");
    return static_cast<int>(i);
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == s) return static_cast<int>(i);
    // Keys of "coeffs" arrive as strings even for integer indices.
    if (!s.empty() && std::all_of(s.begin(), s.end(), ::isdigit)) return basis_index(json(std::stoll(s)), labels, where);
    fail(where, "unknown basis label '" + s + "'");
  }
  fail(where, "expected a basis label or index");
}

inline cplx number(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  fail(where, "expected a number or [re, im]");
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

}  // namespace io_detail

/// Throws ParseError on malformed or non-antisymmetric input. Jacobi, grading
/// and generator conditions are left to validate().
inline AlgebraHandle algebra_from_json(const json& spec, const std::string& where = "algebra") {
  using namespace io_detail;
  if (spec.is_string() || (spec.is_object() && spec.contains("builtin"))) {
    const auto& name = spec.is_string() ? spec : spec.at("builtin");
    if (!name.is_string()) fail(where + ".builtin", "expected a string");
    try {
      return make_builtin(name.get<std::string>());
    } catch (const DomainError& e) {
      fail(where, e.what());
    }
  }
  const auto& basis = field(spec, "basis", where);
  if (!basis.is_array() || basis.empty()) fail(where + ".basis", "expected a nonempty array of labels");
  std::vector<std::string> labels;
  for (const auto& b : basis) {
    if (!b.is_string()) fail(where + ".basis", "labels must be strings");
    labels.push_back(b.get<std::string>());
  }
  const std::size_t d = labels.size();
  const auto& deg = field(spec, "degrees", where);
  if (!deg.is_array() || deg.size() != d) fail(where + ".degrees", "expected one degree per basis element");
  std::vector<int> degrees;
  for (const auto& x : deg) {
    if (!x.is_number_integer()) fail(where + ".degrees", "degrees must be integers");
    degrees.push_back(x.get<int>());
  }

  std::vector<cplx> s(d * d * d, 0.0);
  std::vector<char> listed(d * d, 0);
  if (spec.contains("brackets")) {
    const auto& br = spec.at("brackets");
    if (!br.is_array()) fail(where + ".brackets", "expected an array");
    for (std::size_t n = 0; n < br.size(); ++n) {
      const std::string w = where + ".brackets[" + std::to_string(n) + "]";
      const int i = basis_index(field(br[n], "i", w), labels, w + ".i");
      const int j = basis_index(field(br[n], "j", w), labels, w + ".j");
      if (listed[i * d + j]) fail(w, "bracket listed twice");
      listed[i * d + j] = 1;
      const auto& co = field(br[n], "coeffs", w);
      if (!co.is_object()) fail(w + ".coeffs", "expected an object {label: coefficient}");
      for (const auto& [key, val] : co.items()) {
        const int k = basis_index(json(key), labels, w + ".coeffs");
        const cplx c = number(val, w + ".coeffs." + key);
        if (i == j && c != cplx(0.0)) fail(w, "non-antisymmetric input: [" + labels[i] + ", " + labels[i] + "] != 0");
        s[(i * d + j) * d + k] = c;
      }
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        if (i == j || !listed[i * d + j]) continue;
        for (std::size_t k = 0; k < d; ++k) {
          const cplx a = s[(i * d + j) * d + k];
          if (!listed[j * d + i]) {
            s[(j * d + i) * d + k] = -a;
          } else if (std::abs(a + s[(j * d + i) * d + k]) > 1e-12) {
            fail(where + ".brackets", "non-antisymmetric input: [" + labels[i] + ", " + labels[j] + "] and [" +
                                          labels[j] + ", " + labels[i] + "] disagree");
          }
        }
      }
  }

  std::vector<int> gens;
  if (spec.contains("generators")) {
    const auto& g = spec.at("generators");
    if (!g.is_array()) fail(where + ".generators", "expected an array");
    for (const auto& x : g) gens.push_back(basis_index(x, labels, where + ".generators"));
  } else {
    for (std::size_t i = 0; i < d; ++i)
      if (degrees[i] == 1) gens.push_back(static_cast<int>(i));
  }
  const std::string name = spec.contains("name") ? spec.at("name").get<std::string>() : std::string("custom");
  try {
    return std::make_shared<const GradedLieAlgebra>(name, labels, degrees, s, gens);
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
}

/// `ref` is a builtin name or a path to an algebra spec file.
inline AlgebraHandle load_algebra(const std::string& ref) {
  if (std::filesystem::exists(ref)) return algebra_from_json(read_json_file(ref), ref);
  try {
    return make_builtin(ref);
  } catch (const DomainError&) {
    throw ParseError(ref + ": neither a readable file nor a builtin algebra");
  }
}

inline DiffOp operator_from_json(const json& spec, const std::string& where = "operator",
                                 const std::filesystem::path& base = {}) {
  using namespace io_detail;
  const auto& a = field(spec, "algebra", where);
  AlgebraHandle alg;
  if (a.is_string() && a.get<std::string>().ends_with(".json"))
    alg = algebra_from_json(read_json_file((base / a.get<std::string>()).string()), a.get<std::string>());
  else
    alg = algebra_from_json(a, where + ".algebra");
  int order = -1;
  if (spec.contains("order")) {
    if (!spec.at("order").is_number_integer() || spec.at("order").get<int>() < 0)
      fail(where + ".order", "expected a nonnegative integer");
    order = spec.at("order").get<int>();
  }
  DiffOp p(alg, order);
  const auto& terms = field(spec, "terms", where);
  if (!terms.is_array()) fail(where + ".terms", "expected an array");
  for (std::size_t n = 0; n < terms.size(); ++n) {
    const std::string w = where + ".terms[" + std::to_string(n) + "]";
    const auto& t = terms[n];
    const auto& c = field(t, "coeff", w);
    CoeffExpr coeff = CoeffExpr::constant(0.0, coordinate_names(*alg));
    try {
      if (c.is_string()) coeff = parse_coeff(c.get<std::string>(), *alg);
      else coeff = CoeffExpr::constant(number(c, w + ".coeff"), coordinate_names(*alg));
    } catch (const ParseError& e) {
      throw ParseError(w + ".coeff: " + e.message(), e.position());
    }
    Word word;
    if (t.contains("word")) {
      if (!t.at("word").is_string()) fail(w + ".word", "expected a string");
      try {
        word = parse_word(*alg, t.at("word").get<std::string>());
      } catch (const ParseError& e) {
        throw ParseError(w + ".word: " + e.message(), e.position());
      }
    }
    std::optional<double> bound;
    if (t.contains("declared_bound")) bound = t.at("declared_bound").get<double>();
    p.add_term(coeff, word, bound);
  }
  return p;
}

inline DiffOp load_operator(const std::string& path) {
  const auto spec = read_json_file(path);
  return operator_from_json(spec, path, std::filesystem::path(path).parent_path());
}

/// Constant-coefficient operators as elements of U(g); throws otherwise.
inline UEAElement constant_operator(const DiffOp& p) {
  UEAElement out(p.algebra());
  const std::vector<double> origin(p.algebra()->dim(), 0.0);
  for (const auto& t : p.terms()) {
    if (!t.coeff.is_constant()) throw DomainError("operator has non-constant coefficients");
    out += normal_order(p.algebra(), t.word) * t.coeff(origin);
  }
  return out;
}

inline json cplx_json(cplx c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

inline json algebra_json(const GradedLieAlgebra& alg) {
  json brackets = json::array();
  for (std::size_t i = 0; i < alg.dim(); ++i)
    for (std::size_t j = i + 1; j < alg.dim(); ++j) {
      if (alg.bracket(i, j).empty()) continue;
      json co = json::object();
      for (const auto& [k, c] : alg.bracket(i, j)) co[alg.label(k)] = cplx_json(c);
      brackets.push_back({{"i", alg.label(i)}, {"j", alg.label(j)}, {"coeffs", co}});
    }
  json gens = json::array();
  for (int g : alg.generators()) gens.push_back(alg.label(g));
  return {{"name", alg.name()}, {"basis", alg.labels()}, {"degrees", alg.degrees()}, {"brackets", brackets},
          {"generators", gens}};
}

inline json to_json(const ValidationReport& r) {
  json v = json::array();
  for (const auto& x : r) v.push_back({{"kind", to_string(x.kind)}, {"i", x.i}, {"j", x.j}, {"k", x.k}, {"message", x.message}});
  return v;
}

inline json to_json(const RocklandReport& r) {
  json w = json::array();
  for (const auto& x : r.witnesses) {
    json o{{"rep", x.rep}, {"ratio", x.ratio}, {"point", x.point}};
    if (x.rep == "char") o["character"] = {x.xi, x.eta};
    else o["level"] = x.level;
    w.push_back(o);
  }
  return {{"c_P", r.c_P}, {"elliptic", r.elliptic}, {"threshold", r.threshold}, {"witnesses", w},
          {"tail_ok", r.tail_ok}, {"exact_levels", r.exact_levels}, {"n_max", r.n_max}, {"order", r.order}};
}

inline json to_json(const PartitionStats& s) {
  return {{"samples", s.samples},         {"uncovered", s.uncovered},     {"max_identity_error", s.max_identity_error},
          {"theta_min", s.theta_min},     {"theta_max", s.theta_max},     {"theta_bound", s.theta_bound},
          {"max_overlap", s.max_overlap}, {"overlap_bound", s.overlap_bound}, {"max_active", s.max_active}};
}

inline json to_json(const ProbeRow& r) {
  json o{{"mode", to_string(r.mode)}, {"s", r.s},     {"c", r.c},           {"grid", r.grid},
         {"min_ratio", r.min_ratio},  {"max_ratio", r.max_ratio}, {"argmin", r.argmin}, {"argmax", r.argmax},
         {"hermitian_defect", r.hermitian_defect}};
  if (r.sigma_min) o["sigma_min"] = *r.sigma_min;
  if (r.mode == ProbeMode::Localization) o["constant"] = r.constant();
  return o;
}

inline json to_json(const PositivityReport& r) {
  return {{"group_side_min", r.group_side_min},
          {"rep_side_min", r.rep_side_min},
          {"group_side_positive", r.group_side_positive},
          {"rep_side_positive", r.rep_side_positive},
          {"consistent", r.consistent},
          {"test_functions", r.test_functions},
          {"level_cutoff", r.level_cutoff}};
}

/// %.12g, so CSV bodies are byte-identical for identical inputs.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string probe_csv(const std::vector<ProbeRow>& rows, const json& run_config) {
  std::string out = "# run_config " + run_config.dump() + "\n";
  out += "mode,s,c,grid,min_ratio,max_ratio\n";
  for (const auto& r : rows)
    out += to_string(r.mode) + "," + format_number(r.s) + "," + format_number(r.c) + "," + r.grid + "," +
           format_number(r.min_ratio) + "," + format_number(r.max_ratio) + "\n";
  return out;
}

/// Refuses to replace an existing file unless `force` is set.
inline void write_report(const std::filesystem::path& path, const std::string& content, bool force) {
  if (std::filesystem::exists(path) && !force)
    throw ParseError(path.string() + ": report exists (use --force to overwrite)");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path.string() + ": cannot write report");
  out << content;
}

}  // namespace hypo
