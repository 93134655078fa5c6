// hypo: command-line front end.
//
// Exit status: 0 success, 1 a check was violated, 2 input or usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "hypo/hypo.hpp"

using namespace hypo;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0, kViolated = 1, kInputError = 2;

struct Globals {
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::string out = "reports";
  bool force = false;
};

json base_config(const Globals& g, const std::string& command) {
  return {{"command", command}, {"seed", g.seed}, {"tol", g.tol}, {"out", g.out}};
}

void emit(const Globals& g, const std::string& file, const json& report) {
  write_report(fs::path(g.out) / file, report.dump(2) + "\n", g.force);
  std::cout << "wrote " << (fs::path(g.out) / file).string() << "\n";
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ParseError("bad number '" + item + "' in list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("empty list");
  return out;
}

// "L" -> [-L, L]^d; "lo:hi" -> [lo, hi]^d; "lo:hi,lo:hi,..." per axis.
std::vector<Interval> parse_box(const std::string& s, std::size_t d) {
  std::vector<Interval> box;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      const double L = parse_list(item)[0];
      box.push_back({-L, L});
    } else {
      box.push_back({parse_list(item.substr(0, colon))[0], parse_list(item.substr(colon + 1))[0]});
    }
  }
  if (box.size() == 1) box.assign(d, box[0]);
  if (box.size() != d) throw ParseError("box '" + s + "' has " + std::to_string(box.size()) + " axes, expected " + std::to_string(d));
  for (const auto& b : box)
    if (!(b.hi >= b.lo)) throw ParseError("box '" + s + "' has an empty axis");
  return box;
}

json box_json(const std::vector<Interval>& box) {
  json a = json::array();
  for (const auto& b : box) a.push_back({b.lo, b.hi});
  return a;
}

int algebra_validate(const Globals& g, const std::string& file) {
  const auto alg = load_algebra(file);
  const auto v = validate(*alg, g.tol);
  json cfg = base_config(g, "algebra validate");
  cfg["input"] = file;
  emit(g, "algebra-validate.json",
       {{"run_config", cfg}, {"algebra", alg->name()}, {"valid", v.empty()}, {"violations", to_json(v)}});
  for (const auto& x : v) std::cout << to_string(x.kind) << ": " << x.message << "\n";
  std::cout << (v.empty() ? "valid" : "invalid") << "\n";
  return v.empty() ? kOk : kViolated;
}

int algebra_info(const Globals& g, const std::string& file) {
  const auto alg = load_algebra(file);
  json cfg = base_config(g, "algebra info");
  cfg["input"] = file;
  json info = algebra_json(*alg);
  info["dimension"] = alg->dim();
  info["step"] = alg->step();
  info["homogeneous_dimension"] = homogeneous_dimension(*alg);
  info["generator_lcm"] = alg->generator_lcm();
  emit(g, "algebra-info.json", {{"run_config", cfg}, {"algebra", info}});
  std::cout << alg->name() << ": dim " << alg->dim() << ", step " << alg->step() << ", homogeneous dimension "
            << homogeneous_dimension(*alg) << "\n";
  return kOk;
}

int uea_normal_order(const Globals& g, const std::string& alg_ref, const std::string& word) {
  const auto alg = load_algebra(alg_ref);
  const auto w = parse_word(*alg, word);
  const auto nf = normal_order(alg, w);
  json cfg = base_config(g, "uea normal-order");
  cfg["algebra"] = alg_ref;
  cfg["word"] = word;
  emit(g, "uea-normal-order.json",
       {{"run_config", cfg}, {"word", to_string(*alg, w)}, {"weighted_length", w.weighted_length(*alg)},
        {"normal_form", nf.to_string()}, {"degree", nf.degree()}});
  std::cout << nf.to_string() << "\n";
  return kOk;
}

int rockland_check(const Globals& g, const std::string& file, int n_max, int N, int samples, const std::string& box_s) {
  const auto p = load_operator(file);
  const auto& alg = p.algebra();
  bool constant = true;
  for (const auto& t : p.terms()) constant = constant && t.coeff.is_constant();
  std::vector<GroupElement> points{GroupElement::identity(alg->dim())};
  const auto box = parse_box(box_s, alg->dim());
  if (!constant) {
    std::mt19937_64 rng(g.seed);
    for (int k = 0; k < samples; ++k) points.push_back(sample_box(box, rng));
  }
  RocklandOptions opt;
  opt.n_max = n_max;
  opt.truncation = N;
  opt.threshold = std::max(g.tol, 1e-12);
  const auto r = rockland_constant(p, points, opt);
  json cfg = base_config(g, "rockland check");
  cfg["input"] = file;
  cfg["n_max"] = n_max;
  cfg["N"] = N;
  cfg["samples"] = constant ? 0 : samples;
  cfg["box"] = box_json(box);
  json rep = to_json(r);
  rep["run_config"] = cfg;
  rep["points"] = points.size();
  emit(g, "rockland-check.json", rep);
  std::cout << "c_P = " << format_number(r.c_P) << (r.elliptic ? " (elliptic)" : " (not elliptic)") << "\n";
  if (!r.tail_ok) std::cout << "warning: tail check failed; increase --n-max\n";
  return r.elliptic ? kOk : kViolated;
}

int partition_cmd(const Globals& g, bool verify, const std::string& alg_ref, double eps, int N, const std::string& box_s,
                  int samples) {
  const auto alg = load_algebra(alg_ref);
  const auto box = parse_box(box_s, alg->dim());
  NetOptions nopt;
  nopt.seed = g.seed;
  const auto pou = build_partition(greedy_net(alg, box, eps, nopt), N);
  const auto st = verify_partition(pou, box, static_cast<std::size_t>(samples), g.seed + 1);
  json cfg = base_config(g, verify ? "partition verify" : "partition build");
  cfg["algebra"] = alg_ref;
  cfg["eps"] = eps;
  cfg["N"] = N;
  cfg["box"] = box_json(box);
  cfg["samples"] = samples;
  json rep{{"run_config", cfg}, {"eps", eps}, {"N", N}, {"centers", pou.centers().size()}, {"stats", to_json(st)}};
  if (!verify) {
    json centers = json::array();
    for (const auto& c : pou.centers()) centers.push_back(c.coords);
    rep["center_coords"] = centers;
  }
  const bool ok = st.uncovered == 0 && st.max_identity_error <= std::max(g.tol, 1e-10) && st.theta_min >= 1.0 &&
                  st.theta_max <= st.theta_bound;
  rep["ok"] = ok;
  emit(g, verify ? "partition-verify.json" : "partition-build.json", rep);
  std::cout << pou.centers().size() << " centers, max |sum psi^2 - 1| = " << format_number(st.max_identity_error)
            << ", uncovered " << st.uncovered << "/" << st.samples << "\n";
  return verify && !ok ? kViolated : kOk;
}

struct EstimateArgs {
  std::string file;
  int grid = 16;
  double half_width = 4.0;
  std::string s = "0";
  std::string c = "10";
  int tests = 16;
  double min_radius = 1.5, max_radius = 2.5;
  double eps = 1.0;
  int N = 2;
  std::string scan;
};

int estimate(const Globals& g, const std::string& mode_name, const EstimateArgs& a) {
  const auto p = load_operator(a.file);
  const auto& alg = p.algebra();
  const auto s_list = parse_list(a.s);
  const auto c_list = parse_list(a.c);
  if (a.grid < 4) throw ParseError("--grid must be at least 4");
  LatticeContext ctx(alg, Grid::cube(alg->dim(), a.grid, a.half_width));
  const auto tests = make_test_set(interior_region(ctx.grid(), 0.5), {.count = static_cast<std::size_t>(a.tests),
                                                                     .seed = g.seed,
                                                                     .min_radius = a.min_radius,
                                                                     .max_radius = a.max_radius});
  json cfg = base_config(g, "estimate " + mode_name);
  cfg["input"] = a.file;
  cfg["grid"] = a.grid;
  cfg["box_half_width"] = a.half_width;
  cfg["s"] = s_list;
  cfg["tests"] = a.tests;
  cfg["radius"] = {a.min_radius, a.max_radius};

  std::vector<ProbeRow> rows;
  bool ok = true;
  json extra = json::object();
  if (mode_name == "localize") {
    cfg["eps"] = a.eps;
    cfg["N"] = a.N;
    const auto pou = grid_partition(ctx, a.eps, a.N, g.seed);
    GridPartition part(pou, ctx.grid());
    for (double s : s_list) {
      rows.push_back(estimate_localization(ctx, part, s, tests));
      const auto& r = rows.back();
      ok = ok && r.min_ratio > 0;
      if (s == 0.0) ok = ok && std::abs(r.min_ratio - 1) <= 1e-8 && std::abs(r.max_ratio - 1) <= 1e-8;
    }
  } else {
    cfg["c"] = c_list;
    const auto mode = mode_name == "forward" ? ProbeMode::Forward : ProbeMode::Backward;
    const auto ph = ctx.discretize(p);
    for (double s : s_list)
      for (double c : c_list) {
        rows.push_back(estimate_probe(ctx, ph, mode, s, c, tests));
        ok = ok && rows.back().min_ratio > 0;
      }
    if (!a.scan.empty()) {
      const auto v = parse_list(a.scan);
      if (v.size() != 4) throw ParseError("--scan expects cmin,cmax,steps,floor");
      cfg["scan"] = v;
      const auto sc = scan_threshold(ctx, ph, s_list[0], tests, v[0], v[1], static_cast<int>(v[2]), v[3]);
      extra["scan"] = {{"c", sc.c_values}, {"min_ratio", sc.min_ratio}};
      extra["scan"]["smallest_admissible_c"] = sc.smallest_admissible ? json(*sc.smallest_admissible) : json(nullptr);
    }
  }
  const std::string stem = "estimate-" + mode_name;
  write_report(fs::path(g.out) / (stem + ".csv"), probe_csv(rows, cfg), g.force);
  json rj = json::array();
  for (const auto& r : rows) rj.push_back(to_json(r));
  json rep{{"run_config", cfg}, {"rows", rj}, {"ok", ok}};
  for (const auto& [k, v] : extra.items()) rep[k] = v;
  emit(g, stem + ".json", rep);
  std::cout << probe_csv(rows, cfg);
  return ok ? kOk : kViolated;
}

int positivity_cmd(const Globals& g, const std::string& file, int N, int grid, int tests_n) {
  const auto p = load_operator(file);
  UEAElement d(p.algebra());
  try {
    d = constant_operator(p);
  } catch (const DomainError& e) {
    throw ParseError(file + ": " + e.what());
  }
  LatticeContext ctx(p.algebra(), Grid::cube(3, grid, 4.0));
  const auto tests = make_test_set(interior_region(ctx.grid(), 0.5),
                                   {.count = static_cast<std::size_t>(tests_n), .seed = g.seed, .max_freq = 2});
  const auto r = positivity_transfer_check(d, N, ctx, tests, std::max(g.tol, 1e-10));
  json cfg = base_config(g, "positivity");
  cfg["input"] = file;
  cfg["N"] = N;
  cfg["grid"] = grid;
  cfg["tests"] = tests_n;
  json rep = to_json(r);
  rep["run_config"] = cfg;
  rep["operator"] = d.to_string();
  emit(g, "positivity.json", rep);
  std::cout << "group side min " << format_number(r.group_side_min) << ", representation side min "
            << format_number(r.rep_side_min) << (r.consistent ? "" : " (inconsistent)") << "\n";
  return r.consistent ? kOk : kViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded Lie algebras, Rockland checks and Sobolev estimate probes"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed recorded in every report");
  app.add_option("--tol", g.tol, "Tolerance for checks");
  app.add_option("--out", g.out, "Report directory");
  app.add_flag("--force", g.force, "Overwrite existing reports");

  std::function<int()> action;

  auto* algebra = app.add_subcommand("algebra", "Algebra specs")->require_subcommand(1);
  std::string alg_file;
  auto* av = algebra->add_subcommand("validate", "Check antisymmetry, Jacobi, grading and generators");
  av->add_option("file", alg_file, "Algebra spec file or builtin name")->required();
  av->callback([&] { action = [&] { return algebra_validate(g, alg_file); }; });
  auto* ai = algebra->add_subcommand("info", "Print dimensions and brackets");
  ai->add_option("file", alg_file, "Algebra spec file or builtin name")->required();
  ai->callback([&] { action = [&] { return algebra_info(g, alg_file); }; });

  auto* uea = app.add_subcommand("uea", "Universal enveloping algebra")->require_subcommand(1);
  std::string word;
  auto* un = uea->add_subcommand("normal-order", "PBW normal form of a word");
  un->add_option("algebra", alg_file, "Algebra spec file or builtin name")->required();
  un->add_option("word", word, "Word such as YX")->required();
  un->callback([&] { action = [&] { return uea_normal_order(g, alg_file, word); }; });

  auto* rock = app.add_subcommand("rockland", "Rockland constant")->require_subcommand(1);
  std::string op_file, box = "4";
  int n_max = 200, N = 0, samples = 64;
  auto* rc = rock->add_subcommand("check", "Rockland constant over sampled frozen top parts");
  rc->add_option("op", op_file, "Operator spec file")->required();
  rc->add_option("--n-max", n_max, "Highest Hermite level");
  rc->add_option("--N", N, "Matrix truncation size for non-diagonal tops");
  rc->add_option("--samples", samples, "Sample points for variable coefficients");
  rc->add_option("--box", box, "Sampling box: L, lo:hi or per-axis list");
  rc->callback([&] { action = [&] { return rockland_check(g, op_file, n_max, N, samples, box); }; });

  auto* part = app.add_subcommand("partition", "Covering and partition of unity")->require_subcommand(1);
  double eps = 1.0;
  int pN = 2, psamples = 10000;
  for (const char* name : {"build", "verify"}) {
    auto* sc = part->add_subcommand(name, std::string(name) + " a partition of unity over a box");
    sc->add_option("algebra", alg_file, "Algebra spec file or builtin name")->required();
    sc->add_option("--eps", eps, "Net separation");
    sc->add_option("--N", pN, "Support radius factor (>= 2)");
    sc->add_option("--box", box, "Region: L, lo:hi or per-axis list");
    sc->add_option("--samples", psamples, "Verification samples");
    const bool verify = std::string(name) == "verify";
    sc->callback([&, verify] { action = [&, verify] { return partition_cmd(g, verify, alg_file, eps, pN, box, psamples); }; });
  }

  auto* est = app.add_subcommand("estimate", "Grid probes of Sobolev estimates")->require_subcommand(1);
  EstimateArgs ea;
  for (const char* name : {"forward", "backward", "localize"}) {
    auto* sc = est->add_subcommand(name, std::string(name) + " probe");
    sc->add_option("op", ea.file, "Operator spec file")->required();
    sc->add_option("--grid", ea.grid, "Points per axis");
    sc->add_option("--box", ea.half_width, "Half width of the periodic box");
    sc->add_option("--s", ea.s, "Sobolev exponents, comma separated");
    sc->add_option("--tests", ea.tests, "Number of test functions");
    sc->add_option("--radius-min", ea.min_radius, "Smallest bump radius");
    sc->add_option("--radius-max", ea.max_radius, "Largest bump radius");
    const std::string mode = name;
    if (mode == "localize") {
      sc->add_option("--eps", ea.eps, "Net separation");
      sc->add_option("--N", ea.N, "Support radius factor");
    } else {
      sc->add_option("--c", ea.c, "Values of c, comma separated");
      sc->add_option("--scan", ea.scan, "Threshold scan cmin,cmax,steps,floor");
    }
    sc->callback([&, mode] { action = [&, mode] { return estimate(g, mode, ea); }; });
  }

  auto* pos = app.add_subcommand("positivity", "Group-side versus representation-side positivity");
  int posN = 30, pgrid = 12, ptests = 24;
  pos->add_option("op", op_file, "Constant-coefficient operator spec file")->required();
  pos->add_option("--N", posN, "Hermite levels per representation");
  pos->add_option("--grid", pgrid, "Points per axis");
  pos->add_option("--tests", ptests, "Number of test functions");
  pos->callback([&] { action = [&] { return positivity_cmd(g, op_file, posN, pgrid, ptests); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
