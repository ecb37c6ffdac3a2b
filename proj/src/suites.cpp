#include "cartan/suites.hpp"

#include "cartan/dynamics.hpp"
#include "cartan/holonomy.hpp"
#include "cartan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cartan {

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) { throw Error("ConfigInvalid", path + ": " + msg); }

std::string join_path(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }
std::string idx_path(const std::string& a, std::size_t i) { return a + "[" + std::to_string(i) + "]"; }

void only_keys(const Json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) invalid(path, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto& [k, v] : j.items())
    if (!ok.count(k)) invalid(join_path(path, k), "unknown field");
}

const Json* field(const Json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

long get_int(const Json& j, const char* key, const std::string& path, long def, long lo, long hi) {
  const Json* f = field(j, key);
  if (!f) return def;
  std::string p = join_path(path, key);
  if (!f->is_number_integer()) invalid(p, "expected an integer");
  long v = f->get<long>();
  if (v < lo || v > hi) invalid(p, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

double num_value(const Json& f, const std::string& p, double lo, double hi) {
  if (!f.is_number()) invalid(p, "expected a number");
  double v = f.get<double>();
  if (!(v >= lo && v <= hi)) invalid(p, "out of range");
  return v;
}

double get_num(const Json& j, const char* key, const std::string& path, double def, double lo, double hi) {
  const Json* f = field(j, key);
  return f ? num_value(*f, join_path(path, key), lo, hi) : def;
}

bool get_bool(const Json& j, const char* key, const std::string& path, bool def) {
  const Json* f = field(j, key);
  if (!f) return def;
  if (!f->is_boolean()) invalid(join_path(path, key), "expected a boolean");
  return f->get<bool>();
}

std::string get_str(const Json& j, const char* key, const std::string& path, const std::string& def,
                    const std::vector<std::string>& allowed = {}) {
  const Json* f = field(j, key);
  if (!f) return def;
  std::string p = join_path(path, key);
  if (!f->is_string()) invalid(p, "expected a string");
  std::string v = f->get<std::string>();
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string all;
    for (auto& a : allowed) all += (all.empty() ? "" : " | ") + a;
    invalid(p, "expected one of " + all);
  }
  return v;
}

const Json& get_array(const Json& j, const char* key, const std::string& path, bool nonempty) {
  const Json* f = field(j, key);
  std::string p = join_path(path, key);
  if (!f->is_array()) invalid(p, "expected an array");
  if (nonempty && f->empty()) invalid(p, "must not be empty");
  return *f;
}

std::vector<long> get_int_list(const Json& j, const char* key, const std::string& path, std::vector<long> def, long lo, long hi) {
  if (!field(j, key)) return def;
  const Json& a = get_array(j, key, path, true);
  std::vector<long> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::string p = idx_path(join_path(path, key), i);
    if (!a[i].is_number_integer()) invalid(p, "expected an integer");
    long v = a[i].get<long>();
    if (v < lo || v > hi) invalid(p, "out of range");
    out.push_back(v);
  }
  return out;
}

std::vector<double> get_num_list(const Json& j, const char* key, const std::string& path, std::vector<double> def, double lo,
                                 double hi) {
  if (!field(j, key)) return def;
  const Json& a = get_array(j, key, path, true);
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(num_value(a[i], idx_path(join_path(path, key), i), lo, hi));
  return out;
}

std::vector<std::string> get_str_list(const Json& j, const char* key, const std::string& path, std::vector<std::string> def) {
  if (!field(j, key)) return def;
  const Json& a = get_array(j, key, path, true);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_string()) invalid(idx_path(join_path(path, key), i), "expected a string");
    out.push_back(a[i].get<std::string>());
  }
  return out;
}

const Json& section(const Json& cfg, const char* name) {
  static const Json empty = Json::object();
  const Json* f = field(cfg, name);
  return f ? *f : empty;
}

ModelSpec parse_model(const std::string& tag, const std::string& path) {
  try {
    return ModelSpec::parse(tag);
  } catch (const Error& e) {
    invalid(path, e.what());
  }
}

P2 parse_p2(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) invalid(path, "expected a point [x, y]");
  return {parse_rat(j[0], idx_path(path, 0)), parse_rat(j[1], idx_path(path, 1))};
}

Json rat_json(const Rat& r) { return rat_str(r); }

Json quat_json(const QR& q) { return to_string(q); }

Json vec_json(const Vec<Rat>& v) {
  Json a = Json::array();
  for (auto& c : v) a.push_back(quat_json(c));
  return a;
}

Json point_json(const ProjPoint<Rat>& p) { return vec_json(p.canonical().v); }

// isotropy kinds used by scenarios
Mat<Rat> isotropy_for(const ModelSpec& s, const std::string& kind, const std::string& path) {
  if (kind == "projective") {
    if (!s.projective()) invalid(path, "projective isotropy needs cproj or hproj");
    IsotropyParams prm;
    prm.row.assign(s.m, QR());
    prm.row[0] = QR(1);
    return build_isotropy(s, prm).b;
  }
  if (s.kind != ModelKind::CR) invalid(path, kind + " isotropy needs a cr model");
  if (kind == "central") {
    IsotropyParams prm;
    prm.row.assign(s.p + s.q, QR());
    prm.s = 1;
    return build_isotropy(s, prm).b;
  }
  if (kind == "timelike") {
    if (s.p < 1) invalid(path, "timelike isotropy needs p >= 1");
    return cr_timelike_a(s.p, s.q);
  }
  invalid(path, "unknown isotropy " + kind);
}

struct Suite {
  std::string name;
  Json records = Json::array();

  void add(const std::string& id, const std::string& op, const std::string& anchor, Json inputs, Json outputs,
           const std::string& verdict, std::optional<double> residual = std::nullopt, Json series = nullptr) {
    Json r;
    r["id"] = name + "." + id;
    r["op"] = op;
    r["anchor"] = anchor;
    r["inputs"] = std::move(inputs);
    r["outputs"] = std::move(outputs);
    r["verdict"] = verdict;
    r["residual"] = residual ? Json(*residual) : Json(nullptr);
    if (!series.is_null()) r["series"] = std::move(series);
    records.push_back(std::move(r));
  }
  static std::string pf(bool ok) { return ok ? "PASS" : "FAIL"; }

  Json result() const {
    long pass = 0, fail = 0, info = 0;
    for (auto& r : records) {
      auto v = r["verdict"].get<std::string>();
      (v == "PASS" ? pass : v == "FAIL" ? fail : info)++;
    }
    Json out;
    out["suite"] = name;
    out["records"] = records;
    out["summary"] = {{"records", long(records.size())}, {"pass", pass}, {"fail", fail}, {"info", info}};
    out["ok"] = fail == 0;
    return out;
  }
};

std::uint64_t suite_seed(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
  return seed ^ h;
}

// ---------------------------------------------------------------- verify-models

struct ModelsParams {
  std::vector<std::string> models;
  long draws = 10;
};

ModelsParams parse_models(const Json& cfg) {
  const Json& j = section(cfg, "verify-models");
  std::string p = "verify-models";
  only_keys(j, p, {"models", "draws"});
  ModelsParams m;
  m.models = get_str_list(j, "models", p, {"cproj:1", "cproj:2", "cproj:3", "hproj:1", "hproj:2", "cr:1,0", "cr:1,1", "cr:2,1", "aff:1", "aff:2", "euc:2"});
  for (std::size_t i = 0; i < m.models.size(); ++i) parse_model(m.models[i], idx_path(p + ".models", i));
  m.draws = get_int(j, "draws", p, 10, 1, 10000);
  return m;
}

void run_models(Suite& S, const ModelsParams& P, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& tag : P.models) {
    ModelSpec s = ModelSpec::parse(tag);
    S.add("registry." + tag, "ModelSpec::parse", "model registry", {{"tag", tag}}, {{"round_trip", s.tag()}, {"flag_dim", s.flag_dim()}},
          Suite::pf(s.tag() == tag));

    long bad = 0, total = 0;
    std::string first;
    for (auto& X : algebra_basis<Rat>(s)) {
      Mat<Rat> sum(s.n, X.ring);
      for (int i = s.min_grade(); i <= s.max_grade(); ++i) {
        Mat<Rat> Xi = grading_project(s, X, i);
        sum = sum + Xi;
        ++total;
        bool ok = in_algebra(s, Xi) && grading_project(s, Xi, i) == Xi;
        for (int j = s.min_grade(); j <= s.max_grade(); ++j)
          if (j != i && !grading_project(s, Xi, j).is_zero()) ok = false;
        if (!ok && bad++ == 0) first = "grade " + std::to_string(i);
      }
      if (!(sum == X) && bad++ == 0) first = "projectors do not resolve the identity";
    }
    S.add("grading." + tag, "grading_project", "graded model algebra", {{"tag", tag}},
          {{"projections", total}, {"failures", bad}, {"first_failure", first}}, Suite::pf(bad == 0), double(bad));

    if (s.affine()) continue;
    long iso_bad = 0;
    Mat<Rat> H;
    if (s.kind == ModelKind::CR) H = hermitian_matrix<Rat>(s);
    for (long d = 0; d < P.draws; ++d) {
      IsotropyParams prm;
      int len = s.kind == ModelKind::CR ? s.p + s.q : s.m;
      for (int j = 0; j < len; ++j) prm.row.push_back(s.kind == ModelKind::HPROJ ? rng.quat_rational(4, 3) : rng.complex_rational(4, 3));
      if (s.kind == ModelKind::CR) prm.s = rng.rational(4, 3);
      Mat<Rat> b = build_isotropy(s, prm).b;
      bool ok = in_P(s, b);
      if (s.kind == ModelKind::CR) ok = ok && b.conj_transpose() * H * b == H;
      Mat<Rat> L = mat_log_unipotent(b, s.n);
      ok = ok && in_algebra(s, L) && grading_project(s, L, 0).is_zero() && mat_exp_nilpotent(L, s.n) == b;
      iso_bad += !ok;
    }
    S.add("isotropy." + tag, "build_isotropy", "isotropy in P_+", {{"tag", tag}, {"draws", P.draws}}, {{"failures", iso_bad}},
          Suite::pf(iso_bad == 0), double(iso_bad));
  }
}

// ---------------------------------------------------------------- verify-ballast

struct BallastParams {
  std::vector<long> m{1, 2, 3};
  long draws = 100;
  std::vector<long> h_m{2};
  long h_draws = 50;
  long eigen_m = 2;
  long eigen_draws = 20;
  std::vector<long> div_k{1, 10, 100, 1000};
};

BallastParams parse_ballast(const Json& cfg) {
  const Json& j = section(cfg, "verify-ballast");
  std::string p = "verify-ballast";
  only_keys(j, p, {"m", "draws", "quaternionic_m", "quaternionic_draws", "eigen_m", "eigen_draws", "divergence_k"});
  BallastParams b;
  b.m = get_int_list(j, "m", p, b.m, 1, 6);
  b.draws = get_int(j, "draws", p, b.draws, 1, 100000);
  b.h_m = get_int_list(j, "quaternionic_m", p, b.h_m, 1, 4);
  b.h_draws = get_int(j, "quaternionic_draws", p, b.h_draws, 0, 100000);
  b.eigen_m = get_int(j, "eigen_m", p, b.eigen_m, 2, 5);
  b.eigen_draws = get_int(j, "eigen_draws", p, b.eigen_draws, 1, 10000);
  b.div_k = get_int_list(j, "divergence_k", p, b.div_k, 1, 1000000);
  return b;
}

void run_ballast(Suite& S, const BallastParams& P, std::uint64_t seed) {
  Rng rng(seed);
  auto factor = [&](bool H, long m, long draws) {
    ModelSpec s = H ? ModelSpec::hproj(int(m)) : ModelSpec::cproj(int(m));
    long ok = 0;
    Json fails = Json::array();
    for (long d = 0; d < draws; ++d) {
      QR x;
      Vec<Rat> y;
      Rat t, k;
      for (;;) {
        x = H ? rng.quat_rational(5, 4) : rng.complex_rational(5, 4);
        y.clear();
        for (long j = 0; j < m - 1; ++j) y.push_back(H ? rng.quat_rational(5, 4) : rng.complex_rational(5, 4));
        t = rng.rational(4, 4);
        if (sgn(t) < 0) t = -t;
        k = rng.rational(30, 3);
        if (!x.is_zero() && !(QR(1) + x.scaled(Rat(k * t))).is_zero()) break;
      }
      bool eq = verify_factorization_identity(s, x, y, t, k).equal;
      ok += eq;
      if (!eq && fails.size() < 5) fails.push_back({{"x", quat_json(x)}, {"y", vec_json(y)}, {"t", rat_json(t)}, {"k", rat_json(k)}});
    }
    S.add("factorization." + s.tag(), "verify_factorization_identity", "a^k exp(tX) = exp(X t/(1+ktx)) b_k",
          {{"model", s.tag()}, {"draws", draws}, {"arithmetic", "exact"}}, {{"passed", ok}, {"failures", fails}},
          Suite::pf(ok == draws), double(draws - ok));
  };
  for (long m : P.m) factor(false, m, P.draws);
  if (P.h_draws > 0)
    for (long m : P.h_m) factor(true, m, P.h_draws);

  for (bool corrected : {false, true}) {
    long bad = 0;
    double worst = 0;
    std::map<std::string, long> per;
    Json fails = Json::array();
    int m = int(P.eigen_m);
    for (long d = 0; d < P.eigen_draws; ++d) {
      QR x;
      Rat k;
      for (;;) {
        x = rng.complex_rational(5, 4);
        k = rng.rational(30, 3);
        if (!x.is_zero() && !(QR(1) + x.scaled(k)).is_zero() && !(QR(2) + x.scaled(k)).is_zero()) break;
      }
      Vec<Rat> y;
      for (int j = 0; j < m - 1; ++j) y.push_back(rng.complex_rational(5, 4));
      EigenFamilyParams ep;
      for (int j = 0; j < m - 1; ++j) {
        ep.beta.push_back(rng.complex_rational(5, 4));
        ep.v.push_back(rng.complex_rational(5, 4));
      }
      ep.r1 = rng.complex_rational(5, 4);
      ep.r2 = rng.complex_rational(5, 4);
      ep.R = Mat<Rat>(m - 1);
      for (auto& q : ep.R.e) q = rng.complex_rational(5, 4);
      for (auto& r : verify_eigenstructure_projective(m, x, y, k, ep, corrected)) {
        if (r.ok) continue;
        ++bad;
        per[r.family]++;
        worst = std::max(worst, r.residual);
        if (fails.size() < 5)
          fails.push_back({{"family", r.family}, {"eigenvalue", r.eigenvalue}, {"x", quat_json(x)}, {"y", vec_json(y)}, {"k", rat_json(k)},
                           {"residual", r.residual}, {"detail", r.detail}});
      }
    }
    Json pf = Json::object();
    for (auto& [f, c] : per) pf[f] = c;
    S.add(corrected ? "eigenstructure.corrected" : "eigenstructure.displayed", "verify_eigenstructure_projective",
          corrected ? "Ad_{b_k} eigenvectors, eigenvalue-1 family with corrected lower-left entry" : "Ad_{b_k} eigenvectors as displayed",
          {{"m", m}, {"draws", P.eigen_draws}, {"corrected", corrected}}, {{"failures", bad}, {"failing_families", pf}, {"examples", fails}},
          Suite::pf(bad == 0), worst);
  }

  ModelSpec s = ModelSpec::cproj(2);
  std::function<Mat<Rat>(long)> gen = [&](long k) { return ballast_projective(s, QR(1), {QR(0)}, Rat(k)); };
  auto z = divergence_test<Rat>(s, gen, CurvatureTensor<Rat>(s.n), P.div_k);
  auto sb = slot_basis<Rat>(s);
  int i1 = -1, i2 = -1;
  for (std::size_t i = 0; i < sb.elems.size(); ++i) {
    if (sb.elems[i] == Mat<Rat>::unit(3, 0, 1)) i1 = int(i);
    if (sb.elems[i] == Mat<Rat>::unit(3, 0, 2)) i2 = int(i);
  }
  CurvatureTensor<Rat> w(s.n);
  w.add(i1, i2, Mat<Rat>::unit(3, 0, 1));
  auto dv = divergence_test<Rat>(s, gen, w, P.div_k);
  Json ks = P.div_k;
  S.add("divergence.zero", "divergence_test", "curvature under ballast", {{"model", "cproj:2"}, {"x", "1"}, {"tensor", "0"}, {"k", ks}},
        {{"verdict", to_string(z.verdict)}}, Suite::pf(z.verdict == DivergenceVerdict::ZERO));
  S.add("divergence.top", "divergence_test", "curvature under ballast", {{"model", "cproj:2"}, {"x", "1"}, {"tensor", "E01 ^ E02 -> E01"}, {"k", ks}},
        {{"verdict", to_string(dv.verdict)}, {"initial_norm", dv.initial_norm}}, Suite::pf(dv.verdict == DivergenceVerdict::DIVERGES),
        std::nullopt, {{"k", ks}, {"norm", dv.norms}});
}

// ---------------------------------------------------------------- dynamics

struct DynModel {
  std::string tag, iso;
};

struct DynParams {
  std::vector<DynModel> orbit{{"cproj:2", "projective"}, {"hproj:2", "projective"}, {"cr:1,1", "central"}};
  long nonfixed = 200, fixed = 50, k_max = 10000;
  double tol = 1e-6;
  std::vector<DynModel> flam{{"cproj:2", "projective"}, {"hproj:2", "projective"}, {"cr:1,1", "central"}, {"cr:2,1", "timelike"}};
  long flam_samples = 1000, flam_elements = 12;
  long codim_samples = 5;
};

std::vector<DynModel> parse_dyn_models(const Json& j, const char* key, const std::string& path, std::vector<DynModel> def) {
  if (!field(j, key)) return def;
  const Json& a = get_array(j, key, path, true);
  std::vector<DynModel> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::string p = idx_path(join_path(path, key), i);
    only_keys(a[i], p, {"model", "isotropy"});
    if (!field(a[i], "model")) invalid(p + ".model", "required");
    DynModel d{get_str(a[i], "model", p, ""), get_str(a[i], "isotropy", p, "projective", {"projective", "central", "timelike"})};
    ModelSpec s = parse_model(d.tag, p + ".model");
    isotropy_for(s, d.iso, p + ".isotropy");
    out.push_back(d);
  }
  return out;
}

DynParams parse_dynamics(const Json& cfg) {
  const Json& j = section(cfg, "dynamics");
  std::string p = "dynamics";
  only_keys(j, p, {"orbit_models", "nonfixed", "fixed", "k_max", "tol", "flamboyance_models", "flamboyance_samples", "flamboyance_elements", "codim_samples"});
  DynParams d;
  d.orbit = parse_dyn_models(j, "orbit_models", p, d.orbit);
  d.nonfixed = get_int(j, "nonfixed", p, d.nonfixed, 0, 100000);
  d.fixed = get_int(j, "fixed", p, d.fixed, 0, 100000);
  d.k_max = get_int(j, "k_max", p, d.k_max, 1, 100000000);
  d.tol = get_num(j, "tol", p, d.tol, 1e-300, 1);
  d.flam = parse_dyn_models(j, "flamboyance_models", p, d.flam);
  for (std::size_t i = 0; i < d.flam.size(); ++i)
    if (ModelSpec::parse(d.flam[i].tag).affine()) invalid(idx_path(p + ".flamboyance_models", i), "needs a parabolic model");
  d.flam_samples = get_int(j, "flamboyance_samples", p, d.flam_samples, 1, 1000000);
  d.flam_elements = get_int(j, "flamboyance_elements", p, d.flam_elements, 2, 1000);
  d.codim_samples = get_int(j, "codim_samples", p, d.codim_samples, 0, 1000);
  return d;
}

LineFamilyElement random_element(const ModelSpec& s, const Mat<Rat>& a, Rng& rng) {
  std::string fam = family_for(s, a);
  std::size_t len = fam == "cr_ell_xy" ? std::size_t(s.p + s.q) : fam == "cr_ell_y" ? std::size_t(s.p + s.q - 1) : std::size_t(s.m);
  for (;;) {
    LineFamilyElement e{fam, {}};
    e.dir.push_back(s.projective() ? QR(1) : QR(2));
    for (std::size_t j = 1; j < len; ++j) e.dir.push_back(fam == "quaternionic_line" ? rng.quat_rational(3, 2) : rng.complex_rational(s.projective() ? 5 : 1, s.projective() ? 4 : 1));
    if (family_condition(s, a, e)) return e;
  }
}

void run_dynamics(Suite& S, const DynParams& P, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& dm : P.orbit) {
    ModelSpec s = ModelSpec::parse(dm.tag);
    Mat<Rat> a = isotropy_for(s, dm.iso, "");
    std::vector<ProjPoint<Rat>> pts;
    for (long i = 0; i < P.nonfixed; ++i) pts.push_back(sample_nonfixed_point(s, a, rng));
    std::vector<OrbitReport> reps(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { reps[i] = orbit_converges(s, a, pts[i], P.k_max, P.tol); });
    long conv = 0;
    double worst = 0, kd_min = 1e300, kd_max = 0;
    Json first_fail;
    for (std::size_t i = 0; i < reps.size(); ++i) {
      conv += reps[i].converged;
      worst = std::max(worst, reps[i].final_distance);
      double kd = reps[i].final_distance * double(P.k_max);
      kd_min = std::min(kd_min, kd);
      kd_max = std::max(kd_max, kd);
      if (!reps[i].converged && first_fail.is_null()) first_fail = {{"point", point_json(pts[i])}, {"final_distance", reps[i].final_distance}};
    }
    Json series = nullptr;
    if (!reps.empty()) {
      Json k = Json::array(), dist = Json::array();
      for (auto& it : reps[0].iterates) k.push_back(it.k), dist.push_back(it.distance);
      series = {{"k", k}, {"distance", dist}};
    }
    S.add("orbit." + dm.tag, "orbit_converges", "a^k p tends to the base point", {{"model", dm.tag}, {"isotropy", dm.iso}, {"points", P.nonfixed}, {"k_max", P.k_max}, {"tol", P.tol}},
          {{"converged", conv}, {"max_final_distance", worst}, {"k_times_distance_min", reps.empty() ? 0 : kd_min},
           {"k_times_distance_max", kd_max}, {"first_failure", first_fail}},
          Suite::pf(conv == P.nonfixed), worst, series);

    long fixed_ok = 0;
    Json ff = nullptr;
    for (long i = 0; i < P.fixed; ++i) {
      auto p = sample_fixed_point(s, a, rng);
      bool ok = act_on_flag(s, a, p).v == p.canonical().v;
      fixed_ok += ok;
      if (!ok && ff.is_null()) ff = point_json(p);
    }
    S.add("fixed." + dm.tag, "is_fixed", "Fix(a) is pointwise fixed", {{"model", dm.tag}, {"isotropy", dm.iso}, {"points", P.fixed}, {"arithmetic", "exact"}},
          {{"fixed", fixed_ok}, {"first_failure", ff}}, Suite::pf(fixed_ok == P.fixed), double(P.fixed - fixed_ok));

    if (P.codim_samples > 0) {
      // the CR base point is a singular point of Fix(a)
      std::vector<ProjPoint<Rat>> fx;
      if (s.projective()) fx.push_back(base_point<Rat>(s));
      while (long(fx.size()) < P.codim_samples) fx.push_back(sample_fixed_point(s, a, rng));
      auto c = fixed_set_codimension_probe(s, a, fx);
      Json ranks = Json::array();
      for (auto& q : c.points) ranks.push_back(q.rank);
      S.add("codimension." + dm.tag, "fixed_set_codimension_probe", "codimension of Fix(a)", {{"model", dm.tag}, {"isotropy", dm.iso}, {"points", long(fx.size())}},
            {{"expected", c.expected}, {"ranks", ranks}}, Suite::pf(c.ok));
    }
  }

  for (auto& dm : P.flam) {
    ModelSpec s = ModelSpec::parse(dm.tag);
    Mat<Rat> a = isotropy_for(s, dm.iso, "");
    std::vector<LineFamilyElement> fam;
    for (long i = 0; i < P.flam_elements; ++i) fam.push_back(random_element(s, a, rng));
    auto r = flamboyance_check(s, a, fam, P.flam_samples, rng.bits());
    Json w = Json::array();
    for (std::size_t i = 0; i < r.witnesses.size() && i < 10; ++i) w.push_back(r.witnesses[i]);
    S.add("flamboyance." + dm.tag, "flamboyance_check", "a-invariant family covering the non-fixed points",
          {{"model", dm.tag}, {"isotropy", dm.iso}, {"family", family_for(s, a)}, {"elements", P.flam_elements}, {"samples", P.flam_samples}},
          {{"invariance", r.invariance}, {"fix_meets_base_only", r.fix_meets_base_only}, {"intersections", r.intersections}, {"coverage", r.coverage},
           {"checks", {{"invariance", r.invariance_checks}, {"fix", r.fix_checks}, {"intersection", r.intersection_checks}, {"coverage", r.coverage_checks}}},
           {"witness_count", long(r.witnesses.size())}, {"witnesses", w}},
          Suite::pf(r.ok()));
  }
}

// ---------------------------------------------------------------- shrinking

struct Sig {
  int p, q;
};

struct ShrinkParams {
  int p = 1, q = 0;
  QD x{0.0};
  std::vector<QD> y;
  double tau = 1;
  std::vector<double> k_list{10, 100, 1000, 10000};
  double tol_final = 1e-2, bound_rel_tol = 1e-8;
  std::vector<Sig> trap{{1, 0}, {2, 0}, {1, 1}};
  long trap_draws = 20;
  std::vector<Sig> cp{{1, 0}, {2, 0}, {1, 1}, {2, 1}};
  long cp_draws = 20;
  std::vector<Rat> lambdas{0, 1, 2, -1};
};

QD parse_cplx(const Json& j, const std::string& path) {
  if (j.is_number()) return QD(num_value(j, path, -1e6, 1e6));
  if (!j.is_array() || j.size() != 2) invalid(path, "expected a number or [re, im]");
  return QD(num_value(j[0], idx_path(path, 0), -1e6, 1e6), num_value(j[1], idx_path(path, 1), -1e6, 1e6));
}

std::vector<Sig> parse_sigs(const Json& j, const char* key, const std::string& path, std::vector<Sig> def) {
  if (!field(j, key)) return def;
  const Json& a = get_array(j, key, path, true);
  std::vector<Sig> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::string p = idx_path(join_path(path, key), i);
    if (!a[i].is_array() || a[i].size() != 2 || !a[i][0].is_number_integer() || !a[i][1].is_number_integer()) invalid(p, "expected [p, q]");
    Sig s{a[i][0].get<int>(), a[i][1].get<int>()};
    if (s.p < 1 || s.q < 0 || s.p + s.q > 4) invalid(p, "need p >= 1, q >= 0, p + q <= 4");
    out.push_back(s);
  }
  return out;
}

ShrinkParams parse_shrinking(const Json& cfg) {
  const Json& j = section(cfg, "shrinking");
  std::string p = "shrinking";
  only_keys(j, p, {"p", "q", "x", "y", "tau", "k_list", "tol_final", "bound_rel_tol", "trap_signatures", "trap_draws", "charpoly_signatures", "charpoly_draws", "lambdas"});
  ShrinkParams s;
  s.p = int(get_int(j, "p", p, 1, 1, 4));
  s.q = int(get_int(j, "q", p, 0, 0, 3));
  if (s.p + s.q > 4) invalid(p, "p + q <= 4");
  if (field(j, "x")) s.x = parse_cplx(j["x"], p + ".x");
  if (field(j, "y")) {
    const Json& a = j["y"];
    if (!a.is_array()) invalid(p + ".y", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) s.y.push_back(parse_cplx(a[i], idx_path(p + ".y", i)));
  }
  if (int(s.y.size()) != s.p + s.q - 1) invalid(p + ".y", "needs p + q - 1 entries");
  s.tau = get_num(j, "tau", p, 1, -1e6, 1e6);
  if (s.tau == 0) invalid(p + ".tau", "must be nonzero");
  if (field(j, "k_list") && j["k_list"].is_array() && j["k_list"].empty()) invalid(p + ".k_list", "must not be empty");
  s.k_list = get_num_list(j, "k_list", p, s.k_list, 1e-9, 1e9);
  s.tol_final = get_num(j, "tol_final", p, s.tol_final, 0, 1e6);
  s.bound_rel_tol = get_num(j, "bound_rel_tol", p, s.bound_rel_tol, 0, 1);
  s.trap = parse_sigs(j, "trap_signatures", p, s.trap);
  s.trap_draws = get_int(j, "trap_draws", p, s.trap_draws, 0, 10000);
  s.cp = parse_sigs(j, "charpoly_signatures", p, s.cp);
  s.cp_draws = get_int(j, "charpoly_draws", p, s.cp_draws, 0, 10000);
  if (field(j, "lambdas")) {
    const Json& a = get_array(j, "lambdas", p, true);
    s.lambdas.clear();
    for (std::size_t i = 0; i < a.size(); ++i) s.lambdas.push_back(parse_rat(a[i], idx_path(p + ".lambdas", i)));
  }
  return s;
}

CrParams random_cr(Rng& rng, Sig g) {
  CrParams Q;
  Q.p = g.p;
  Q.q = g.q;
  Q.x = rng.complex_rational(3, 2);
  for (int j = 0; j < g.p + g.q - 1; ++j) Q.y.push_back(rng.complex_rational(3, 2));
  Q.tau = rng.nonzero_rational(3, 2);
  Q.k = rng.range(1, 30);
  Q.t = rng.rational(4, 4);
  if (sgn(Q.t) < 0) Q.t = -Q.t;
  return Q;
}

Json cr_inputs(const CrParams& Q) {
  return {{"p", Q.p}, {"q", Q.q}, {"x", quat_json(Q.x)}, {"y", vec_json(Q.y)}, {"tau", rat_json(Q.tau)}, {"k", rat_json(Q.k)}, {"t", rat_json(Q.t)}};
}

std::string first_diff(const Mat<Rat>& A, const Mat<Rat>& B, double* res) {
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j)
      if (A(i, j) != B(i, j)) {
        *res = std::max(*res, to_double(A(i, j) - B(i, j)).abs());
        return "(" + std::to_string(i) + "," + std::to_string(j) + "): " + to_string(A(i, j)) + " vs " + to_string(B(i, j));
      }
  return "";
}

void run_shrinking(Suite& S, const ShrinkParams& P, std::uint64_t seed) {
  Rng rng(seed);
  Json yin = Json::array();
  for (auto& c : P.y) yin.push_back({c.w, c.x});
  Json in = {{"p", P.p}, {"q", P.q}, {"x", {P.x.w, P.x.x}}, {"y", yin}, {"tau", P.tau}, {"k_list", P.k_list}};
  auto r = shrinking_arclength(P.p, P.q, P.x, P.y, P.tau, P.k_list, 2048, P.tol_final, P.bound_rel_tol);
  bool bounds = std::all_of(r.below_bound.begin(), r.below_bound.end(), [](bool b) { return b; });
  bool decreasing = true;
  for (std::size_t i = 1; i < r.arclengths.size(); ++i) decreasing = decreasing && r.arclengths[i] < r.arclengths[i - 1];
  Json bnd = Json::array();
  double worst_ratio = 0;
  for (std::size_t i = 0; i < r.bounds.size(); ++i) {
    bnd.push_back(r.bounds[i].valid ? Json(r.bounds[i].bound) : Json(nullptr));
    if (r.bounds[i].valid && r.bounds[i].bound > 0) worst_ratio = std::max(worst_ratio, r.arclengths[i] / r.bounds[i].bound);
  }
  S.add("arclength", "shrinking_arclength", "length of a^k gamma beta_k^{-1} goes to 0", in,
        {{"verdict", r.verdict}, {"strictly_decreasing", decreasing}, {"below_bound", bounds}, {"max_length_over_bound", worst_ratio}, {"panels", r.panels}},
        Suite::pf(r.verdict == "SHRINKS" && decreasing && bounds), worst_ratio, {{"k", P.k_list}, {"arclength", r.arclengths}, {"bound", bnd}});

  // closed form for the x = 0, y absent, tau = 1 specialization
  if (P.p + P.q == 1 && P.x.abs() == 0 && P.tau == 1) {
    double worst = 0;
    Json cf = Json::array();
    for (std::size_t i = 0; i < P.k_list.size(); ++i) {
      double k = P.k_list[i];
      double c = std::sqrt(1 + k * k) * (2 / (k * k)) * std::atan(k * k / 2);
      cf.push_back(c);
      worst = std::max(worst, std::abs(c - r.arclengths[i]));
    }
    S.add("arclength.closed_form", "shrinking_arclength", "sqrt(1+k^2) (2/k^2) arctan(k^2/2)", in, {{"closed_form", cf}}, Suite::pf(worst < 1e-6), worst);
  }

  for (auto g : P.trap) {
    long trapped = 0, ydisp = 0, ycorr = 0, done = 0;
    double res = 0;
    Json fails = Json::array();
    for (long d = 0; d < P.trap_draws; ++d) {
      CrShrink c;
      CrParams Q;
      for (int tries = 0;; ++tries) {
        Q = random_cr(rng, g);
        try {
          c = cr_shrinking_paths(Q);
          break;
        } catch (const Error&) {
          if (tries > 100) throw;
        }
      }
      ++done;
      trapped += c.in_G_minus;
      ycorr += c.Y == c.Y_corrected;
      bool yd = c.Y == c.Y_displayed;
      ydisp += yd;
      if (!yd && fails.size() < 5) {
        double rr = 0;
        std::string where = first_diff(c.Y, c.Y_displayed, &rr);
        res = std::max(res, rr);
        Json f = cr_inputs(Q);
        f["entry"] = where;
        f["residual"] = rr;
        fails.push_back(f);
      } else if (!yd) {
        double rr = 0;
        first_diff(c.Y, c.Y_displayed, &rr);
        res = std::max(res, rr);
      }
    }
    std::string sig = std::to_string(g.p) + "," + std::to_string(g.q);
    Json gin = {{"p", g.p}, {"q", g.q}, {"draws", done}, {"arithmetic", "exact"}};
    S.add("trapping.cr:" + sig, "cr_shrinking_paths", "a^k exp(tX) beta_k(t)^{-1} stays in G_-", gin, {{"in_G_minus", trapped}}, Suite::pf(trapped == done),
          double(done - trapped));
    S.add("projection.displayed.cr:" + sig, "cr_shrinking_paths", "g_- projection of Ad_beta X as displayed", gin, {{"matches", ydisp}, {"mismatches", fails}},
          Suite::pf(ydisp == done), res);
    S.add("projection.corrected.cr:" + sig, "cr_shrinking_paths", "g_- projection of Ad_beta X, corrected y coefficient", gin, {{"matches", ycorr}},
          Suite::pf(ycorr == done), double(done - ycorr));
  }

  Json lam = Json::array();
  for (auto& l : P.lambdas) lam.push_back(rat_json(l));
  for (auto g : P.cp) {
    long ok = 0, total = 0;
    Json fails = Json::array();
    for (long d = 0; d < P.cp_draws; ++d) {
      std::vector<CharPolyCheck> cs;
      CrParams Q;
      for (int tries = 0;; ++tries) {
        Q = random_cr(rng, g);
        try {
          cs = verify_characteristic_polynomial(Q, P.lambdas);
          break;
        } catch (const Error&) {
          if (tries > 100) throw;
        }
      }
      for (auto& c : cs) {
        ++total;
        ok += c.equal;
        if (!c.equal && fails.size() < 5) {
          Json f = cr_inputs(Q);
          f["lambda"] = rat_json(c.lambda);
          f["det"] = quat_json(c.lhs);
          f["displayed"] = quat_json(c.rhs);
          fails.push_back(f);
        }
      }
    }
    std::string sig = std::to_string(g.p) + "," + std::to_string(g.q);
    S.add("charpoly.cr:" + sig, "verify_characteristic_polynomial", "characteristic polynomial of the beta_0 block",
          {{"p", g.p}, {"q", g.q}, {"draws", P.cp_draws}, {"lambdas", lam}}, {{"evaluations", total}, {"equal", ok}, {"failures", fails}},
          Suite::pf(ok == total), double(total - ok));
  }
}

// ---------------------------------------------------------------- sprawl

struct SprawlQuery {
  long i1, i2;
  P2 p1, p2;
  std::optional<Verdict> expect;
};

struct HausdorffParams {
  long i = 7;
  int mesh = 64, levels = 4;
  Rat scale = Rat(17, 16);
  long min_adjacent = 10;
};

struct SprawlCase {
  Scenario sc;
  long i_min = 0, i_max = 0;
  int atlas_mesh = 0;
  bool naive = true;
  std::optional<HausdorffParams> hausdorff;
  std::vector<SprawlQuery> queries;
  long max_certificates = 4;
  long max_identifications = 64;
};

std::vector<SprawlCase> default_sprawl_cases() {
  std::vector<SprawlCase> out;
  SprawlCase t;
  t.sc = torus_translation_scenario();
  t.i_min = -2, t.i_max = 2, t.atlas_mesh = 16;
  t.sc.budget.search_res = 32;
  out.push_back(t);
  SprawlCase r;
  r.sc = rotation_scenario();
  r.i_min = 0, r.i_max = 7, r.atlas_mesh = 12;
  r.hausdorff = HausdorffParams{};
  out.push_back(r);
  SprawlCase s;
  s.sc = affine_scaling_scenario();
  s.i_min = -4, s.i_max = 4, s.atlas_mesh = 8;
  out.push_back(s);
  return out;
}

std::vector<SprawlCase> parse_sprawl(const Json& cfg) {
  const Json& j = section(cfg, "sprawl");
  std::string p = "sprawl";
  only_keys(j, p, {"scenarios"});
  std::vector<SprawlCase> out;
  if (!field(j, "scenarios")) {
    out = default_sprawl_cases();
  } else {
    const Json& a = get_array(j, "scenarios", p, true);
    for (std::size_t n = 0; n < a.size(); ++n) {
      std::string q = idx_path(p + ".scenarios", n);
      const Json& e = a[n];
      if (!e.is_object()) invalid(q, "expected an object");
      Json sj = Json::object();
      for (auto& [k, v] : e.items())
        if (k != "atlas" && k != "hausdorff" && k != "queries" && k != "max_certificates" && k != "max_identifications") sj[k] = v;
      SprawlCase c;
      c.sc = parse_scenario(sj, q);
      c.i_min = -std::min<long>(c.sc.window, 2);
      c.i_max = std::min<long>(c.sc.window, 2);
      c.atlas_mesh = 0;
      c.max_certificates = get_int(e, "max_certificates", q, 4, 0, 100000);
      c.max_identifications = get_int(e, "max_identifications", q, 64, 0, 100000000);
      if (const Json* at = field(e, "atlas")) {
        std::string ap = q + ".atlas";
        only_keys(*at, ap, {"i_min", "i_max", "mesh", "naive"});
        c.i_min = get_int(*at, "i_min", ap, c.i_min, -1000, 1000);
        c.i_max = get_int(*at, "i_max", ap, c.i_max, -1000, 1000);
        if (c.i_min > c.i_max) invalid(ap, "empty chart window");
        c.atlas_mesh = int(get_int(*at, "mesh", ap, 16, 1, 512));
        c.naive = get_bool(*at, "naive", ap, true);
      }
      if (const Json* h = field(e, "hausdorff")) {
        std::string hp = q + ".hausdorff";
        only_keys(*h, hp, {"i", "mesh", "levels", "adjacent_scale", "min_adjacent"});
        HausdorffParams H;
        H.i = get_int(*h, "i", hp, H.i, -1000, 1000);
        H.mesh = int(get_int(*h, "mesh", hp, H.mesh, 1, 1024));
        H.levels = int(get_int(*h, "levels", hp, H.levels, 1, 30));
        if (field(*h, "adjacent_scale")) H.scale = parse_rat((*h)["adjacent_scale"], hp + ".adjacent_scale");
        H.min_adjacent = get_int(*h, "min_adjacent", hp, H.min_adjacent, 0, 1000000);
        c.hausdorff = H;
      }
      if (const Json* qs = field(e, "queries")) {
        if (!qs->is_array()) invalid(q + ".queries", "expected an array");
        for (std::size_t k = 0; k < qs->size(); ++k) {
          std::string qp = idx_path(q + ".queries", k);
          const Json& x = (*qs)[k];
          only_keys(x, qp, {"i1", "p1", "i2", "p2", "expect"});
          for (const char* req : {"i1", "p1", "i2", "p2"})
            if (!field(x, req)) invalid(join_path(qp, req), "required");
          SprawlQuery sq{get_int(x, "i1", qp, 0, -1000, 1000), get_int(x, "i2", qp, 0, -1000, 1000), parse_p2(x["p1"], qp + ".p1"), parse_p2(x["p2"], qp + ".p2"), {}};
          std::string ex = get_str(x, "expect", qp, "", {"YES", "NO", "UNKNOWN"});
          if (!ex.empty()) sq.expect = ex == "YES" ? Verdict::YES : ex == "NO" ? Verdict::NO : Verdict::UNKNOWN;
          c.queries.push_back(sq);
        }
      }
      out.push_back(c);
    }
  }
  if (const Json* m = field(cfg, "mesh")) {
    int mesh = m->get<int>();
    for (auto& c : out) {
      if (c.atlas_mesh > 0) c.atlas_mesh = mesh;
      if (c.hausdorff) c.hausdorff->mesh = mesh;
    }
  }
  return out;
}

Json scenario_json(const Scenario& s) {
  Json parts = Json::array();
  for (auto& P : s.U.parts) {
    Json q;
    switch (P.kind) {
      case PrimKind::BALL: q = {{"kind", "ball"}, {"center", to_json(P.c)}, {"r2", rat_json(P.r2)}}; break;
      case PrimKind::SECTOR: q = {{"kind", "sector"}, {"apex", to_json(P.c)}, {"d1", to_json(P.d1)}, {"d2", to_json(P.d2)}, {"r2", rat_json(P.r2)}}; break;
      case PrimKind::POLYGON: {
        Json v = Json::array();
        for (auto& x : P.vs) v.push_back(to_json(x));
        q = {{"kind", "polygon"}, {"vertices", v}};
        break;
      }
      case PrimKind::QUADRIC:
        q = {{"kind", "quadric"}, {"center", to_json(P.c)}, {"qa", rat_json(P.qa)}, {"qb", rat_json(P.qb)}, {"qc", rat_json(P.qc)}};
        break;
    }
    parts.push_back(q);
  }
  const Affine2& A = s.alpha;
  return {{"name", s.name},
          {"carrier", to_string(s.carrier)},
          {"alpha", {{"kind", "affine"}, {"linear", {rat_json(A.a), rat_json(A.b), rat_json(A.c), rat_json(A.d)}}, {"translation", {rat_json(A.tx), rat_json(A.ty)}}}},
          {"region", parts},
          {"base", to_json(s.base)},
          {"oracle", to_string(s.oracle)},
          {"mesh_res", s.mesh_res},
          {"window", s.window},
          {"budget",
           {{"max_depth", s.budget.max_depth}, {"bisect_depth", s.budget.bisect_depth}, {"search_res", s.budget.search_res},
            {"max_route_nodes", s.budget.max_route_nodes}, {"label_slack", s.budget.label_slack}}}};
}

std::string vstr(const std::optional<Verdict>& v) { return v ? to_string(*v) : "NONE"; }

void run_sprawl(Suite& S, const std::vector<SprawlCase>& cases) {
  for (auto& c : cases) {
    Sprawl sp(c.sc);
    const std::string& nm = c.sc.name;
    S.add(nm + ".scenario", "Sprawl", "distinguished component of U cap alpha(U)", scenario_json(c.sc),
          {{"U_connected", sp.U_connected()}, {"components_of_overlap", sp.components()}, {"mesh_res", sp.mesh_res()}}, Suite::pf(sp.U_connected()));

    if (c.atlas_mesh > 0) {
      auto cx = build_sprawl_atlas(sp, c.i_min, c.i_max, c.atlas_mesh, GluingMode::SPRAWL);
      long with_oracle = 0, agree = 0, yes_oracle = 0, unknown = 0, wrong = 0;
      Json disagree = Json::array();
      for (auto& q : cx.slots) {
        if (!q.comparable || !q.oracle) continue;
        ++with_oracle;
        bool said = q.search == Verdict::YES;
        bool truth = *q.oracle == Verdict::YES;
        if (truth) ++yes_oracle;
        if (truth && q.search == Verdict::UNKNOWN) ++unknown;
        bool ok = said == truth && !(q.search == Verdict::NO && truth);
        if (q.search == Verdict::YES && !truth) ++wrong;
        agree += ok;
        if (!ok && disagree.size() < 10)
          disagree.push_back({{"p", to_json(cx.samples[q.p])}, {"d", q.d}, {"q", to_json(q.q)}, {"search", to_string(q.search)}, {"oracle", vstr(q.oracle)}});
      }
      Json ids = Json::array();
      for (std::size_t k = 0; k < cx.ids.size() && long(k) < c.max_identifications; ++k) {
        auto& d = cx.ids[k];
        ids.push_back({{"i", d.i}, {"p", to_json(cx.samples[d.p])}, {"j", d.j}, {"q", to_json(d.q)}, {"certificate", d.cert}});
      }
      Json certs = Json::array();
      for (std::size_t k = 0; k < cx.certs.size() && long(k) < c.max_certificates; ++k) certs.push_back(to_json(cx.certs[k]));
      long comparable_yes = yes_oracle;
      double unknown_rate = comparable_yes ? double(unknown) / double(comparable_yes) : 0.0;
      bool ok = wrong == 0 && cx.symmetric && cx.sigma_respects && cx.transitive;
      if (c.sc.oracle == OracleKind::LIFT) ok = ok && agree == with_oracle;
      S.add(nm + ".atlas", "build_sprawl_atlas", "charts glued by sprawl-equivalence",
            {{"i_min", c.i_min}, {"i_max", c.i_max}, {"mesh", c.atlas_mesh}},
            {{"samples", long(cx.samples.size())}, {"queries", cx.queries}, {"comparable", cx.comparable}, {"with_oracle", with_oracle},
             {"agree_with_oracle", agree}, {"false_yes", wrong}, {"unknown", unknown}, {"unknown_rate", unknown_rate},
             {"identifications", long(cx.ids.size())}, {"unresolved", long(cx.unresolved.size())}, {"symmetric", cx.symmetric},
             {"sigma_respects", cx.sigma_respects}, {"transitive", cx.transitive}, {"transitivity_checks", cx.transitivity_checks},
             {"disagreements", disagree}, {"identification_list", ids}, {"certificates", certs}},
            Suite::pf(ok), double(with_oracle - agree));
      if (c.naive) {
        auto nx = build_sprawl_atlas(sp, c.i_min, c.i_max, c.atlas_mesh, GluingMode::NAIVE);
        long missing = 0;
        for (auto& d : nx.ids)
          if (!cx.identified(d.i, d.p, d.j, d.q)) ++missing;
        S.add(nm + ".naive", "build_sprawl_atlas", "naive gluing is coarser than sprawl gluing", {{"i_min", c.i_min}, {"i_max", c.i_max}, {"mesh", c.atlas_mesh}},
              {{"naive_identifications", long(nx.ids.size())}, {"sprawl_identifications", long(cx.ids.size())}, {"naive_not_in_sprawl", missing}},
              Suite::pf(missing == 0), double(missing));
      }
    }

    if (c.hausdorff) {
      const auto& H = *c.hausdorff;
      auto w = naive_hausdorff_violation(sp, H.i, H.mesh, H.levels);
      std::vector<Equivalence> eqs(w.size());
      std::vector<char> used(w.size(), 0);
      parallel_for(w.size(), [&](std::size_t k) {
        P2 y = c.sc.base + (w[k].x - c.sc.base).scaled(H.scale);
        if (!sp.in_U(y) || !sp.in_iterate(H.i, y)) return;
        used[k] = 1;
        eqs[k] = sprawl_equivalent(sp, 0, y, H.i, sp.alpha_pow(-H.i, y));
      });
      long tried = 0, yes = 0;
      Json ex = Json::array();
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (!used[k]) continue;
        ++tried;
        bool ok = eqs[k].search == Verdict::YES && eqs[k].cert && eqs[k].cert->check.ok;
        yes += ok;
        if (ok && ex.size() < 2) ex.push_back(to_json(*eqs[k].cert));
      }
      Json wl = Json::array();
      for (std::size_t k = 0; k < w.size() && k < 32; ++k) wl.push_back(to_json(w[k].x));
      S.add(nm + ".hausdorff", "naive_hausdorff_violation", "naive gluing is not Hausdorff",
            {{"i", H.i}, {"mesh", H.mesh}, {"levels", H.levels}, {"adjacent_scale", rat_json(H.scale)}},
            {{"witnesses", long(w.size())}, {"witness_list", wl}, {"adjacent_pairs", tried}, {"adjacent_yes", yes}, {"example_certificates", ex}},
            Suite::pf(!w.empty() && yes >= H.min_adjacent));
    }

    for (std::size_t k = 0; k < c.queries.size(); ++k) {
      auto& q = c.queries[k];
      Json in = {{"i1", q.i1}, {"p1", to_json(q.p1)}, {"i2", q.i2}, {"p2", to_json(q.p2)}};
      Equivalence e;
      try {
        e = sprawl_equivalent(sp, q.i1, q.p1, q.i2, q.p2);
      } catch (const Error& err) {
        S.add(nm + ".query." + std::to_string(k), "sprawl_equivalent", "sprawl-equivalence", in, {{"error", err.what()}}, "FAIL");
        continue;
      }
      bool ok = !(e.search == Verdict::YES && e.oracle == Verdict::NO) && !(e.search == Verdict::NO && e.oracle == Verdict::YES);
      if (e.cert) ok = ok && e.cert->check.ok && e.cert->thin.certified;
      if (q.expect) ok = ok && e.definitive == *q.expect;
      Json out = {{"search", to_string(e.search)}, {"oracle", vstr(e.oracle)}, {"definitive", to_string(e.definitive)}, {"reason", e.reason}};
      out["certificate"] = e.cert ? to_json(*e.cert) : Json(nullptr);
      S.add(nm + ".query." + std::to_string(k), "sprawl_equivalent", "sprawl-equivalence", in, out, Suite::pf(ok));
    }
  }
}

// ---------------------------------------------------------------- holonomy

struct HolParams {
  long lattice = 2, loops = 30;
  int bound = 6;
  long cap = 1000000;
  double tol = 1e-8;
};

HolParams parse_holonomy(const Json& cfg) {
  const Json& j = section(cfg, "holonomy");
  std::string p = "holonomy";
  only_keys(j, p, {"lattice_range", "random_loops", "aff1_word_bound", "element_cap", "tol"});
  HolParams h;
  h.lattice = get_int(j, "lattice_range", p, h.lattice, 0, 100);
  h.loops = get_int(j, "random_loops", p, h.loops, 0, 100000);
  h.bound = int(get_int(j, "aff1_word_bound", p, h.bound, 0, 12));
  h.cap = get_int(j, "element_cap", p, h.cap, 1, 100000000);
  h.tol = get_num(j, "tol", p, h.tol, 0, 1);
  return h;
}

void run_holonomy(Suite& S, const HolParams& P, bool exact, std::uint64_t seed) {
  ModelSpec e2 = ModelSpec::euc(2);
  Rng rng(seed);
  double worst = 0;
  long loops = 0;
  for (long k1 = -P.lattice; k1 <= P.lattice; ++k1)
    for (long k2 = -P.lattice; k2 <= P.lattice; ++k2) {
      ++loops;
      Rat x0 = rng.rational(3, 4), y0 = rng.rational(3, 4);
      if (exact) {
        auto T = flat_torus_exact({{Rat(1), Rat(0)}, {Rat(0), Rat(1)}});
        PLPath<Rat> p(e2, euc_translation<Rat>(2, {x0, y0}));
        p.then(translation_velocity<Rat>(2, {Rat(k1), Rat(0)})).then(translation_velocity<Rat>(2, {Rat(0), Rat(k2)}));
        Mat<Rat> H = loop_holonomy(T, p, Mat<Rat>::identity(3, Ring::R));
        worst = std::max(worst, to_double(Mat<Rat>(H - euc_translation<Rat>(2, {Rat(k1), Rat(k2)}))).norm());
      } else {
        auto T = flat_torus({{{1.0, 0.0}}, {{0.0, 1.0}}});
        PLPath<double> p(e2, euc_translation<double>(2, {x0.get_d(), y0.get_d()}));
        p.then(translation_velocity<double>(2, {double(k1), 0.0}), 0.5).then(translation_velocity<double>(2, {0.0, double(k2)}), 1.0);
        p.then(translation_velocity<double>(2, {double(k1), 0.0}), 0.5);
        Mat<double> H = loop_holonomy(T, p, Mat<double>::identity(3, Ring::R));
        worst = std::max(worst, (H - euc_translation<double>(2, {2.0 * 0.5 * k1, double(k2)})).norm());
      }
    }
  S.add("torus.lattice", "loop_holonomy", "lattice loops develop to lattice translations",
        {{"range", P.lattice}, {"arithmetic", exact ? "exact" : "float"}, {"tol", P.tol}}, {{"loops", loops}, {"max_residual", worst}},
        Suite::pf(exact ? worst == 0 : worst < P.tol), worst);

  long cert = 0, triv = 0;
  auto T = flat_torus_exact({{Rat(1), Rat(0)}, {Rat(0), Rat(1)}});
  for (long i = 0; i < P.loops; ++i) {
    PLPath<Rat> p(e2, euc_translation<Rat>(2, {rng.rational(3, 4), rng.rational(3, 4)}));
    long L = rng.range(1, 5);
    for (long j = 0; j < L; ++j) p.then(translation_velocity<Rat>(2, {rng.rational(3, 2), rng.rational(3, 2)}), rng.range(0, 1) ? rat(1) : rat(1, 2));
    auto loop = concat(p, reverse(p));
    bool c = certify_backtracking(loop).certified;
    cert += c;
    if (c) triv += loop_holonomy(T, loop, Mat<Rat>::identity(3, Ring::R)) == Mat<Rat>::identity(3, Ring::R);
  }
  S.add("backtracking", "certify_backtracking", "thinly null-homotopic loops have trivial holonomy", {{"loops", P.loops}, {"arithmetic", "exact"}},
        {{"certified", cert}, {"trivial_holonomy", triv}}, Suite::pf(cert == P.loops && triv == cert), double(cert - triv));

  ModelSpec a1 = ModelSpec::aff(1);
  Mat<Rat> t1 = Mat<Rat>::identity(2, Ring::R), half = Mat<Rat>::identity(2, Ring::R);
  t1(0, 1) = QR(1);
  half(0, 0) = QR(rat(1, 2));
  auto c = holonomy_closure<Rat>(a1, {t1}, half, P.bound, P.cap);
  std::set<Rat> got;
  bool translations = true;
  for (auto& g : c.elements) {
    translations = translations && g(0, 0) == QR(1);
    got.insert(g(0, 1).w);
  }
  auto want = aff1_dyadic_oracle(P.bound);
  Json shifts = Json::array();
  for (auto& v : got) shifts.push_back(rat_json(v));
  S.add("aff1.closure", "holonomy_closure", "smallest a-normalized subgroup containing the holonomy",
        {{"generator", "x -> x + 1"}, {"a", "x -> x/2"}, {"word_bound", P.bound}, {"element_cap", P.cap}},
        {{"elements", long(c.elements.size())}, {"oracle_elements", long(want.size())}, {"saturated", c.saturated}, {"status", c.saturated ? "SATURATED" : "UNSATURATED"},
         {"cap_exceeded", c.cap_exceeded}, {"translations", shifts}},
        Suite::pf(translations && got == want && !c.saturated && !c.cap_exceeded));
}

}  // namespace

// ---------------------------------------------------------------- public

std::string rat_str(const Rat& r) { return r.get_str(); }

Rat parse_rat(const Json& j, const std::string& path) {
  if (j.is_number_integer()) return Rat(j.get<long>());
  if (!j.is_string()) invalid(path, "expected a rational (integer or \"p/q\")");
  std::string s = j.get<std::string>();
  Rat r;
  if (s.empty() || r.set_str(s, 10) != 0) invalid(path, "malformed rational \"" + s + "\"");
  if (r.get_den() == 0) invalid(path, "zero denominator");
  r.canonicalize();
  return r;
}

Json to_json(const P2& p) { return Json::array({rat_str(p.x), rat_str(p.y)}); }

Json to_json(const Certificate& c) {
  Json v = Json::array(), dt = Json::array(), t = Json::array();
  for (auto& p : pl_vertices(c.loop)) v.push_back(to_json(p));
  for (auto& s : c.loop.segs) dt.push_back(rat_str(s.dt));
  for (auto& x : c.inc.t) t.push_back(rat_str(x));
  return {{"hub", c.hub},
          {"loop", {{"vertices", v}, {"durations", dt}}},
          {"incrementation", {{"t", t}, {"k", c.inc.k}}},
          {"backtracking", {{"certified", c.thin.certified}, {"cancellations", c.thin.cancellations}}},
          {"valid", c.check.ok}};
}

Scenario parse_scenario(const Json& j, const std::string& path) {
  only_keys(j, path, {"preset", "lambda", "name", "carrier", "alpha", "region", "base", "oracle", "mesh_res", "window", "budget"});
  Scenario s;
  std::string preset = get_str(j, "preset", path, "", {"torus", "rotation", "affine_scaling"});
  if (!preset.empty()) {
    for (const char* k : {"carrier", "alpha", "region", "base", "oracle"})
      if (field(j, k)) invalid(join_path(path, k), "not allowed with a preset");
    if (field(j, "lambda") && preset != "affine_scaling") invalid(path + ".lambda", "only for affine_scaling");
    if (preset == "torus") s = torus_translation_scenario();
    else if (preset == "rotation") s = rotation_scenario();
    else {
      Rat lam = field(j, "lambda") ? parse_rat(j["lambda"], path + ".lambda") : Rat(1, 2);
      if (!(sgn(lam) > 0 && lam < 1)) invalid(path + ".lambda", "must lie in (0, 1)");
      s = affine_scaling_scenario(lam);
    }
  } else {
    for (const char* k : {"carrier", "alpha", "region", "base"})
      if (!field(j, k)) invalid(join_path(path, k), "required");
    if (field(j, "lambda")) invalid(path + ".lambda", "only for the affine_scaling preset");
    s.name = "custom";
    s.carrier = get_str(j, "carrier", path, "plane", {"plane", "torus"}) == "torus" ? Carrier::TORUS : Carrier::PLANE;
    const Json& a = j["alpha"];
    std::string ap = path + ".alpha";
    if (!a.is_object()) invalid(ap, "expected an object");
    std::string kind = get_str(a, "kind", ap, "", {"translation", "rotation", "scaling", "affine"});
    if (kind.empty()) invalid(ap + ".kind", "required");
    P2 center;
    if (field(a, "center")) center = parse_p2(a["center"], ap + ".center");
    if (kind == "translation") {
      only_keys(a, ap, {"kind", "v"});
      if (!field(a, "v")) invalid(ap + ".v", "required");
      P2 v = parse_p2(a["v"], ap + ".v");
      s.alpha = Affine2::translation(v.x, v.y);
    } else if (kind == "rotation") {
      only_keys(a, ap, {"kind", "cos", "sin", "center"});
      if (!field(a, "cos") || !field(a, "sin")) invalid(ap, "cos and sin are required");
      Rat c = parse_rat(a["cos"], ap + ".cos"), sn = parse_rat(a["sin"], ap + ".sin");
      if (c * c + sn * sn != 1) invalid(ap, "cos^2 + sin^2 must be 1");
      s.alpha = Affine2::rotation(c, sn, center);
    } else if (kind == "scaling") {
      only_keys(a, ap, {"kind", "lambda", "center"});
      if (!field(a, "lambda")) invalid(ap + ".lambda", "required");
      Rat lam = parse_rat(a["lambda"], ap + ".lambda");
      if (sgn(lam) <= 0) invalid(ap + ".lambda", "must be positive");
      s.alpha = Affine2::scaling(lam, center);
    } else {
      only_keys(a, ap, {"kind", "linear", "translation"});
      if (!field(a, "linear") || !a["linear"].is_array() || a["linear"].size() != 4) invalid(ap + ".linear", "expected [a, b, c, d]");
      s.alpha.a = parse_rat(a["linear"][0], ap + ".linear[0]");
      s.alpha.b = parse_rat(a["linear"][1], ap + ".linear[1]");
      s.alpha.c = parse_rat(a["linear"][2], ap + ".linear[2]");
      s.alpha.d = parse_rat(a["linear"][3], ap + ".linear[3]");
      if (field(a, "translation")) {
        P2 t = parse_p2(a["translation"], ap + ".translation");
        s.alpha.tx = t.x;
        s.alpha.ty = t.y;
      }
      if (s.alpha.a * s.alpha.d - s.alpha.b * s.alpha.c == 0) invalid(ap + ".linear", "singular");
    }
    const Json& reg = get_array(j, "region", path, true);
    for (std::size_t i = 0; i < reg.size(); ++i) {
      std::string rp = idx_path(path + ".region", i);
      const Json& r = reg[i];
      if (!r.is_object()) invalid(rp, "expected an object");
      std::string k = get_str(r, "kind", rp, "", {"ball", "sector", "polygon", "quadric"});
      if (k.empty()) invalid(rp + ".kind", "required");
      auto need = [&](const char* key) -> const Json& {
        if (!field(r, key)) invalid(join_path(rp, key), "required");
        return r[key];
      };
      try {
        if (k == "ball") {
          only_keys(r, rp, {"kind", "center", "r2"});
          s.U.parts.push_back(Primitive::ball(parse_p2(need("center"), rp + ".center"), parse_rat(need("r2"), rp + ".r2")));
        } else if (k == "sector") {
          only_keys(r, rp, {"kind", "apex", "d1", "d2", "r2"});
          s.U.parts.push_back(Primitive::sector(parse_p2(need("apex"), rp + ".apex"), parse_p2(need("d1"), rp + ".d1"), parse_p2(need("d2"), rp + ".d2"),
                                                parse_rat(need("r2"), rp + ".r2")));
        } else if (k == "polygon") {
          only_keys(r, rp, {"kind", "vertices"});
          const Json& vs = need("vertices");
          if (!vs.is_array() || vs.size() < 3) invalid(rp + ".vertices", "needs at least 3 vertices");
          std::vector<P2> pts;
          for (std::size_t v = 0; v < vs.size(); ++v) pts.push_back(parse_p2(vs[v], idx_path(rp + ".vertices", v)));
          s.U.parts.push_back(Primitive::polygon(pts));
        } else {
          only_keys(r, rp, {"kind", "center", "qa", "qb", "qc"});
          s.U.parts.push_back(Primitive::quadric(parse_p2(need("center"), rp + ".center"), parse_rat(need("qa"), rp + ".qa"), parse_rat(need("qb"), rp + ".qb"),
                                                 parse_rat(need("qc"), rp + ".qc")));
        }
      } catch (const Error& e) {
        if (e.code == "ConfigInvalid") throw;
        invalid(rp, e.what());
      }
    }
    s.base = parse_p2(j["base"], path + ".base");
    std::string o = get_str(j, "oracle", path, "none", {"none", "lift", "fixed_star", "affine_scaling"});
    s.oracle = o == "lift" ? OracleKind::LIFT : o == "fixed_star" ? OracleKind::FIXED_STAR : o == "affine_scaling" ? OracleKind::AFFINE_SCALING : OracleKind::NONE;
  }
  s.name = get_str(j, "name", path, s.name.empty() ? preset : s.name);
  s.mesh_res = int(get_int(j, "mesh_res", path, s.mesh_res, 4, 4096));
  s.window = get_int(j, "window", path, s.window, 1, 1000);
  if (const Json* b = field(j, "budget")) {
    std::string bp = path + ".budget";
    only_keys(*b, bp, {"max_depth", "bisect_depth", "search_res", "max_route_nodes", "label_slack"});
    s.budget.max_depth = int(get_int(*b, "max_depth", bp, s.budget.max_depth, 0, 24));
    s.budget.bisect_depth = int(get_int(*b, "bisect_depth", bp, s.budget.bisect_depth, 0, 30));
    s.budget.search_res = int(get_int(*b, "search_res", bp, s.budget.search_res, 2, 1024));
    s.budget.max_route_nodes = get_int(*b, "max_route_nodes", bp, s.budget.max_route_nodes, 1, 100000000);
    s.budget.label_slack = int(get_int(*b, "label_slack", bp, s.budget.label_slack, 0, 100));
  }
  try {
    Sprawl probe(s);
  } catch (const Error& e) {
    if (e.code == "ConfigInvalid") invalid(path, e.what());
    throw;
  }
  return s;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n = {"verify-models", "verify-ballast", "dynamics", "shrinking", "sprawl", "holonomy"};
  return n;
}

Json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid(path, "cannot open config");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    invalid(path, std::string("malformed JSON: ") + e.what());
  }
}

Json effective_config(const Json& cfg, const RunOptions& opt) {
  if (!cfg.is_object()) invalid("$", "config must be an object");
  only_keys(cfg, "", {"suite", "seed", "exact", "mesh", "verify-models", "verify-ballast", "dynamics", "shrinking", "sprawl", "holonomy"});
  Json e = cfg;
  std::vector<std::string> allowed = suite_names();
  allowed.push_back("all");
  std::string suite = opt.suite ? *opt.suite : get_str(cfg, "suite", "", "all", allowed);
  if (std::find(allowed.begin(), allowed.end(), suite) == allowed.end()) invalid("suite", "unknown suite " + suite);
  e["suite"] = suite;
  if (opt.seed) e["seed"] = *opt.seed;
  else if (const Json* s = field(cfg, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0)) invalid("seed", "expected a non-negative integer");
  } else e["seed"] = 1;
  e["exact"] = opt.exact || get_bool(cfg, "exact", "", false);
  if (opt.mesh) e["mesh"] = *opt.mesh;
  if (field(e, "mesh")) e["mesh"] = get_int(e, "mesh", "", 0, 1, 1024);
  return e;
}

Json run_suite(const Json& cfg_in, const RunOptions& opt) {
  Json cfg = effective_config(cfg_in, opt);
  std::string suite = cfg["suite"].get<std::string>();
  std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  bool exact = cfg["exact"].get<bool>();
  std::vector<std::string> run;
  if (suite == "all") run = suite_names();
  else run = {suite};

  // parse every section up front so a bad config fails before any work
  ModelsParams mp;
  BallastParams bp;
  DynParams dp;
  ShrinkParams sp;
  std::vector<SprawlCase> sc;
  HolParams hp;
  for (auto& s : run) {
    if (s == "verify-models") mp = parse_models(cfg);
    if (s == "verify-ballast") bp = parse_ballast(cfg);
    if (s == "dynamics") dp = parse_dynamics(cfg);
    if (s == "shrinking") sp = parse_shrinking(cfg);
    if (s == "sprawl") sc = parse_sprawl(cfg);
    if (s == "holonomy") hp = parse_holonomy(cfg);
  }

  Json results = Json::array();
  long pass = 0, fail = 0, info = 0, nrec = 0;
  for (auto& s : run) {
    Suite S{s};
    std::uint64_t ss = suite_seed(seed, s);
    if (s == "verify-models") run_models(S, mp, ss);
    if (s == "verify-ballast") run_ballast(S, bp, ss);
    if (s == "dynamics") run_dynamics(S, dp, ss);
    if (s == "shrinking") run_shrinking(S, sp, ss);
    if (s == "sprawl") run_sprawl(S, sc);
    if (s == "holonomy") run_holonomy(S, hp, exact, ss);
    Json r = S.result();
    pass += r["summary"]["pass"].get<long>();
    fail += r["summary"]["fail"].get<long>();
    info += r["summary"]["info"].get<long>();
    nrec += r["summary"]["records"].get<long>();
    results.push_back(std::move(r));
  }
  Json rep;
  rep["tool"] = "cartan-lab";
  rep["version"] = kToolVersion;
  rep["suite"] = suite;
  rep["seed"] = seed;
  rep["config"] = cfg;
  rep["results"] = results;
  rep["summary"] = {{"suites", long(run.size())}, {"records", nrec}, {"pass", pass}, {"fail", fail}, {"info", info}};
  rep["ok"] = fail == 0;
  return rep;
}

bool report_ok(const Json& report) { return report.value("ok", false); }

std::string report_csv(const Json& report) {
  std::ostringstream o;
  o.precision(17);
  o << "record,series,index,value\n";
  for (auto& s : report["results"])
    for (auto& r : s["records"]) {
      if (!r.contains("series")) continue;
      for (auto& [name, vals] : r["series"].items())
        for (std::size_t i = 0; i < vals.size(); ++i) {
          o << r["id"].get<std::string>() << "," << name << "," << i << ",";
          if (vals[i].is_null()) o << "";
          else if (vals[i].is_string()) o << vals[i].get<std::string>();
          else o << vals[i].get<double>();
          o << "\n";
        }
    }
  return o.str();
}

}  // namespace cartan
