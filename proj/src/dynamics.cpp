#include "cartan/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cartan {

namespace {

QR cx(const Rat& a, const Rat& b = 0) { return QR(a, b); }
QR operator/(const QR& a, const QR& b) { return a * b.inv(); }

int sign_of(const ModelSpec& s, int mid) { return mid < s.p ? 1 : -1; }

// exact rank of a list of real vectors
int rank_rat(std::vector<std::vector<Rat>> rows, std::vector<int>* picked = nullptr) {
  if (rows.empty()) return 0;
  size_t cols = rows[0].size();
  std::vector<std::vector<Rat>> basis;
  std::vector<size_t> pivots;
  for (size_t r = 0; r < rows.size(); ++r) {
    std::vector<Rat> v = rows[r];
    for (size_t b = 0; b < basis.size(); ++b) {
      size_t pc = pivots[b];
      if (sgn(v[pc]) == 0) continue;
      Rat f = v[pc] / basis[b][pc];
      for (size_t c = 0; c < cols; ++c) v[c] -= f * basis[b][c];
    }
    size_t pc = cols;
    for (size_t c = 0; c < cols; ++c)
      if (sgn(v[c]) != 0) { pc = c; break; }
    if (pc == cols) continue;
    basis.push_back(v);
    pivots.push_back(pc);
    if (picked) picked->push_back(int(r));
  }
  return int(basis.size());
}

std::vector<Rat> real_coords(const Vec<Rat>& v) {
  std::vector<Rat> r;
  for (auto& q : v) {
    r.push_back(q.w);
    r.push_back(q.x);
    r.push_back(q.y);
    r.push_back(q.z);
  }
  return r;
}

double vnorm(const Vec<double>& v) {
  double s = 0;
  for (auto& q : v) s += q.norm2();
  return std::sqrt(s);
}

Vec<double> vec_double(const Vec<Rat>& v) {
  Vec<double> r;
  for (auto& q : v) r.push_back(to_double(q));
  return r;
}

bool vec_zero(const Vec<Rat>& v) {
  return std::all_of(v.begin(), v.end(), [](const QR& q) { return q.is_zero(); });
}

// P_+ row of a projective isotropy / beta of a CR isotropy
Vec<Rat> isotropy_row(const ModelSpec& s, const Mat<Rat>& a) {
  Vec<Rat> r;
  int hi = s.kind == ModelKind::CR ? s.n - 1 : s.n;
  for (int j = 1; j < hi; ++j) r.push_back(a(0, j));
  return r;
}

}  // namespace

Mat<Rat> unipotent_power(const Mat<Rat>& a, const Rat& k) {
  Mat<Rat> N = mat_log_unipotent(a, a.n + 1);
  return mat_exp_nilpotent(N.scaled(k), a.n + 1);
}

Mat<double> unipotent_power(const Mat<double>& a, double k) {
  Mat<double> N = mat_log_unipotent(a, a.n + 1);
  return mat_exp_nilpotent(N.scaled(k), a.n + 1);
}

std::vector<long> orbit_schedule(long k_max) {
  std::vector<long> ks;
  for (long k = 1; k <= std::min(10L, k_max); ++k) ks.push_back(k);
  for (long dec = 10; dec <= k_max; dec *= 10)
    for (long m : {2L, 5L, 10L}) {
      long k = dec * m;
      if (k <= k_max && k > ks.back()) ks.push_back(k);
    }
  if (ks.empty() || ks.back() != k_max) ks.push_back(k_max);
  return ks;
}

OrbitReport orbit_converges(const ModelSpec& s, const Mat<Rat>& a, const ProjPoint<Rat>& p, long k_max, double tol) {
  OrbitReport rep;
  rep.point = to_double(p.canonical());
  ProjPoint<Rat> e = base_point<Rat>(s);
  rep.is_fixed = is_fixed(s, a, p);
  if (rep.is_fixed) {
    rep.final_distance = chordal_distance(to_double(p), to_double(e));
    return rep;
  }
  ProjPoint<double> ed = to_double(e);
  for (long k : orbit_schedule(k_max)) {
    Mat<Rat> ak = unipotent_power(a, Rat(k));
    ProjPoint<Rat> q = act_on_flag(s, ak, p);
    OrbitIterate it;
    it.k = k;
    it.coords = to_double(q).v;
    it.distance = chordal_distance(to_double(q), ed);
    rep.iterates.push_back(it);
  }
  for (size_t i = 0; i < rep.iterates.size(); ++i) {
    bool ok = rep.iterates[i].distance < tol;
    for (size_t j = i + 1; ok && j < rep.iterates.size(); ++j)
      ok = rep.iterates[j].distance <= rep.iterates[j - 1].distance && rep.iterates[j].distance < tol;
    if (ok) {
      rep.converged = true;
      rep.first_below = rep.iterates[i].k;
      break;
    }
  }
  rep.final_distance = rep.iterates.back().distance;
  return rep;
}

int expected_codimension(const ModelSpec& s, const Mat<Rat>& a) {
  switch (s.kind) {
    case ModelKind::CPROJ: return 2;
    case ModelKind::HPROJ: return 4;
    case ModelKind::CR: return vec_zero(isotropy_row(s, a)) ? 2 : 4;
    default: throw Error("PreconditionFailed", "no fixed-set scenario for " + s.tag());
  }
}

// (a - I) v vanishes exactly on Fix(a) for unipotent a; its derivative along
// exp(sZ) v is (a - I) Z v
CodimReport fixed_set_codimension_probe(const ModelSpec& s, const Mat<Rat>& a, const std::vector<ProjPoint<Rat>>& samples) {
  CodimReport rep;
  rep.expected = expected_codimension(s, a);
  rep.ok = !samples.empty();
  Mat<Rat> A = a - Mat<Rat>::identity(s.n, a.ring);
  Mat<double> Ad_ = to_double(A);
  auto basis = algebra_basis<Rat>(s);
  for (auto& p0 : samples) {
    ProjPoint<Rat> p = p0.canonical();
    if (!vec_zero(A * p.v)) throw Error("PreconditionFailed", "codimension probe needs fixed points");
    CodimPoint cp;
    cp.point = p;
    std::vector<std::vector<Rat>> rows;
    for (auto& Z : basis) rows.push_back(real_coords(A * (Z * p.v)));
    std::vector<int> picked;
    cp.rank = rank_rat(rows, &picked);
    for (auto& r : rows)
      if (std::all_of(r.begin(), r.end(), [](const Rat& x) { return sgn(x) == 0; })) cp.tangent_count++;
    Vec<double> vd = to_double(p).v;
    double nv = vnorm(vd);
    for (int idx : picked) {
      CodimDirection d;
      d.basis_index = idx;
      d.derivative_norm = vnorm(vec_double(A * (basis[idx] * p.v))) / nv;
      d.leaves = d.derivative_norm > 0;
      Mat<double> Zd = to_double(basis[idx]);
      for (double h : {1e-2, 1e-3, 1e-4}) {
        Vec<double> w = mat_exp_general(Zd.scaled(h), 1e-12) * vd;
        d.ratios.push_back(vnorm(Ad_ * w) / vnorm(w) / h);
      }
      d.linear = std::abs(d.ratios.back() - d.derivative_norm) <= 1e-3 * d.derivative_norm;
      cp.directions.push_back(d);
      rep.ok = rep.ok && d.leaves && d.linear;
    }
    rep.ok = rep.ok && cp.rank == rep.expected;
    rep.points.push_back(cp);
  }
  return rep;
}

namespace {

Mat<Rat> ballast_raw(const ModelSpec& s, const QR& x, const Vec<Rat>& y, const Rat& k) {
  if (!s.projective()) throw Error("PreconditionFailed", "projective ballast needs CPROJ or HPROJ");
  if (int(y.size()) != s.m - 1) throw Error("DimensionMismatch", "y must have length m-1");
  QR L = QR(1) + x.scaled(k);
  if (L.is_zero()) throw Error("SingularParameter", "1 + kx = 0");
  QR Li = L.inv();
  Mat<Rat> b = Mat<Rat>::identity(s.n, s.ring);
  b(0, 0) = L;
  b(0, 1) = QR(k);
  b(1, 1) = Li;
  for (int j = 0; j < s.m - 1; ++j) b(2 + j, 1) = -(y[j] * Li).scaled(k);
  return b;
}

Mat<Rat> projective_X(const ModelSpec& s, const QR& x, const Vec<Rat>& y) {
  Mat<Rat> X(s.n, s.ring);
  X(1, 0) = x;
  for (int j = 0; j < s.m - 1; ++j) X(2 + j, 0) = y[j];
  return X;
}

}  // namespace

Mat<Rat> ballast_projective(const ModelSpec& s, const QR& x, const Vec<Rat>& y, const Rat& k) {
  if (x.is_zero()) throw Error("PreconditionFailed", "x must be nonzero");
  return ballast_raw(s, x, y, k);
}

bool ballast_sign_advisory(const QR& x) { return x.is_real() && sgn(x.w) < 0; }

FactorizationCheck verify_factorization_identity(const ModelSpec& s, const QR& x, const Vec<Rat>& y, const Rat& t, const Rat& k) {
  FactorizationCheck r;
  Mat<Rat> a = Mat<Rat>::identity(s.n, s.ring);
  a(0, 1) = QR(1);
  Mat<Rat> X = projective_X(s, x, y);
  Mat<Rat> I = Mat<Rat>::identity(s.n, s.ring);
  r.lhs = unipotent_power(a, k) * (I + X.scaled(t));
  QR L = QR(1) + x.scaled(Rat(k * t));
  if (L.is_zero()) throw Error("SingularParameter", "1 + ktx = 0");
  QR sc = L.inv().scaled(t);
  Vec<Rat> ty;
  for (auto& c : y) ty.push_back(c.scaled(t));
  r.rhs = (I + X.rscale(sc)) * ballast_raw(s, x.scaled(t), ty, k);
  r.equal = group_equal(s, r.lhs, r.rhs);
  return r;
}

std::vector<EigenFamilyResult> verify_eigenstructure_projective(int m, const QR& x, const Vec<Rat>& y, const Rat& k,
                                                                const EigenFamilyParams& prm, bool corrected) {
  ModelSpec s = ModelSpec::cproj(m);
  if (x.is_zero()) throw Error("PreconditionFailed", "x must be nonzero");
  Mat<Rat> b = ballast_raw(s, x, y, k);
  Mat<Rat> bi = b.inverse();
  int d = m - 1;
  QR L = QR(1) + x.scaled(k);
  QR c = L / (QR(2) + x.scaled(k));
  QR by;
  for (int j = 0; j < d; ++j) by += prm.beta[j] * y[j];
  QR byx = by / x;
  std::vector<EigenFamilyResult> out;
  auto run = [&](const std::string& fam, const std::string& lam_s, const QR& lam, const Mat<Rat>& V) {
    EigenFamilyResult r;
    r.family = fam;
    r.eigenvalue = lam_s + " = " + to_string(lam);
    Mat<Rat> D = alg_canonical(s, Mat<Rat>(Ad(b, bi, V) - V.lscale(lam)));
    r.ok = D.is_zero() && !alg_canonical(s, V).is_zero();
    r.residual = D.norm() / std::max(1.0, V.norm());
    if (!r.ok) {
      std::ostringstream os;
      os << "residual " << r.residual;
      r.detail = os.str();
    }
    out.push_back(r);
  };
  Mat<Rat> V(s.n);
  // p_+ families
  V = Mat<Rat>(s.n);
  V(0, 1) = -byx;
  for (int j = 0; j < d; ++j) V(0, 2 + j) = prm.beta[j];
  if (!vec_zero(prm.beta)) run("p+ row family", "1+kx", L, V);
  run("p+ E01", "(1+kx)^2", L * L, Mat<Rat>::unit(s.n, 0, 1));
  // g families
  V = Mat<Rat>(s.n);
  V(0, 0) = -(x * c);
  V(0, 1) = -(c * c);
  V(1, 0) = x * x;
  V(1, 1) = x * c;
  for (int j = 0; j < d; ++j) {
    V(2 + j, 0) = x * y[j];
    V(2 + j, 1) = c * y[j];
  }
  run("g lower family", "(1+kx)^-2", (L * L).inv(), V);
  V = Mat<Rat>(s.n);
  V(0, 1) = c * byx;
  V(1, 1) = -by;
  for (int j = 0; j < d; ++j) {
    V(0, 2 + j) = -(c * prm.beta[j]);
    V(1, 2 + j) = x * prm.beta[j];
    V(2 + j, 0) = x * prm.v[j];
    V(2 + j, 1) = c * prm.v[j] - byx * y[j];
    for (int i = 0; i < d; ++i) V(2 + j, 2 + i) = y[j] * prm.beta[i];
  }
  if (!vec_zero(prm.beta) || !vec_zero(prm.v)) run("g mixed family", "(1+kx)^-1", L.inv(), V);
  V = Mat<Rat>(s.n);
  V(0, 0) = prm.r1 * x;
  V(0, 1) = (prm.r1 - prm.r2) * c;
  V(1, 1) = prm.r2 * x;
  for (int j = 0; j < d; ++j) {
    QR Ry;
    for (int i = 0; i < d; ++i) Ry += prm.R(j, i) * y[i];
    V(2 + j, 1) = corrected ? prm.r2 * y[j] - Ry / x : prm.r2 * y[j];
    for (int i = 0; i < d; ++i) V(2 + j, 2 + i) = prm.R(j, i);
  }
  run(corrected ? "g diagonal family (repaired)" : "g diagonal family", "1", QR(1), V);
  V = Mat<Rat>(s.n);
  V(0, 1) = -byx;
  for (int j = 0; j < d; ++j) {
    V(0, 2 + j) = prm.beta[j];
    V(2 + j, 1) = prm.v[j];
  }
  if (!vec_zero(prm.beta) || !vec_zero(prm.v)) run("g upper family", "1+kx", L, V);
  run("g E01", "(1+kx)^2", L * L, Mat<Rat>::unit(s.n, 0, 1));
  return out;
}

std::string to_string(DivergenceVerdict v) {
  switch (v) {
    case DivergenceVerdict::DIVERGES: return "DIVERGES";
    case DivergenceVerdict::EXEMPT: return "EXEMPT";
    case DivergenceVerdict::ZERO: return "ZERO";
    default: return "INCONCLUSIVE";
  }
}

template <class T>
DivergenceReport divergence_test(const ModelSpec& s, const std::function<Mat<T>(long)>& ballast, const CurvatureTensor<T>& w,
                                 const std::vector<long>& k_list) {
  DivergenceReport r;
  r.ks = k_list;
  r.initial_norm = w.norm();
  bool grew = false;
  for (long k : k_list) {
    double nk = curvature_rep_action(s, ballast(k), w).norm();
    r.norms.push_back(nk);
    if (std::abs(k) <= kDivergenceKMax && nk > kDivergenceFactor * r.initial_norm) grew = true;
  }
  if (w.is_zero()) r.verdict = DivergenceVerdict::ZERO;
  else if (only_excluded_slots(s, w)) r.verdict = DivergenceVerdict::EXEMPT;
  else if (grew) r.verdict = DivergenceVerdict::DIVERGES;
  else r.verdict = DivergenceVerdict::INCONCLUSIVE;
  return r;
}

template DivergenceReport divergence_test<Rat>(const ModelSpec&, const std::function<Mat<Rat>(long)>&, const CurvatureTensor<Rat>&,
                                               const std::vector<long>&);
template DivergenceReport divergence_test<double>(const ModelSpec&, const std::function<Mat<double>(long)>&,
                                                  const CurvatureTensor<double>&, const std::vector<long>&);

Mat<Rat> cr_timelike_a(int p, int q) {
  ModelSpec s = ModelSpec::cr(p, q);
  if (p < 1) throw Error("PreconditionFailed", "timelike direction needs p >= 1");
  IsotropyParams prm;
  prm.row.assign(p + q, QR());
  prm.row[0] = QR(1);
  return build_isotropy(s, prm).b;
}

template <class T> Mat<T> cr_minus_element(int p, int q, const Quat<T>& x, const Vec<T>& y, const T& tau) {
  int n = p + q + 2;
  if (int(y.size()) != p + q - 1) throw Error("DimensionMismatch", "y must have length p+q-1");
  Mat<T> X(n, Ring::C);
  X(1, 0) = x;
  X(n - 1, 0) = Quat<T>(T(0), tau);
  X(n - 1, 1) = -x.conj();
  for (int j = 0; j < p + q - 1; ++j) {
    T eps = T(j < p - 1 ? 1 : -1);
    X(2 + j, 0) = y[j];
    X(n - 1, 2 + j) = -y[j].conj().scaled(eps);
  }
  return X;
}

template Mat<Rat> cr_minus_element<Rat>(int, int, const QR&, const Vec<Rat>&, const Rat&);
template Mat<double> cr_minus_element<double>(int, int, const QD&, const Vec<double>&, const double&);

CrShrink cr_shrinking_paths(const CrParams& P) {
  if (sgn(P.tau) == 0) throw Error("PreconditionFailed", "tau must be nonzero");
  ModelSpec s = ModelSpec::cr(P.p, P.q);
  int n = s.n, d = P.p + P.q - 1;
  if (int(P.y.size()) != d) throw Error("DimensionMismatch", "y must have length p+q-1");
  const Rat &k = P.k, &t = P.t, &tau = P.tau;
  const QR& x = P.x;
  Rat yIy = 0, yy = 0;
  for (int j = 0; j < d; ++j) {
    yIy += (j < P.p - 1 ? 1 : -1) * P.y[j].norm2();
    yy += P.y[j].norm2();
  }
  Rat mu = x.norm2() + yIy;
  CrShrink r;
  r.z = x.scaled(Rat(k * t)) + cx(Rat(k * k * t * t * mu / 4), Rat(-k * k * t * tau / 2));
  QR Z = QR(1) + r.z, Zb = Z.conj();
  if (Z.is_zero()) throw Error("SingularZ", "1 + z = 0");
  QR kt = cx(Rat(k * t));
  auto yI = [&](int j) { return P.y[j].conj().scaled(Rat(j < P.p - 1 ? 1 : -1)); };

  Mat<Rat>& b0 = r.beta0;
  b0 = Mat<Rat>::identity(n);
  b0(0, 0) = Z;
  b0(1, 1) = Zb / Z - cx(Rat(k * k * t * t * yIy / 2)) / Z;
  for (int j = 0; j < d; ++j) {
    b0(1, 2 + j) = kt * (kt * x + QR(2)) / (QR(2) * Z) * yI(j);
    b0(2 + j, 1) = -(kt * (kt * x.conj() + QR(2)) / (QR(2) * Z) * P.y[j]);
    for (int i = 0; i < d; ++i) b0(2 + i, 2 + j) -= cx(Rat(k * k * t * t / 2)) / Z * P.y[i] * yI(j);
  }
  b0(n - 1, n - 1) = Zb.inv();

  Mat<Rat>& bp = r.beta_plus;
  bp = Mat<Rat>::identity(n);
  bp(0, 1) = cx(k) * (kt * x.conj() + QR(2)) / (QR(2) * Z);
  for (int j = 0; j < d; ++j) {
    bp(0, 2 + j) = cx(Rat(k * k * t)) / (QR(2) * Z) * yI(j);
    bp(2 + j, n - 1) = -(cx(Rat(k * k * t)) / (QR(2) * Zb) * P.y[j]);
  }
  bp(0, n - 1) = -(cx(Rat(k * k)) / (QR(2) * Z));
  bp(1, n - 1) = -(cx(k) * (kt * x + QR(2)) / (QR(2) * Zb));
  r.beta_plus_displayed = bp;
  r.beta_plus_displayed(n - 1, n - 1) = Zb.inv();

  r.beta = b0 * bp;
  r.a = cr_timelike_a(P.p, P.q);
  r.X = cr_minus_element<Rat>(P.p, P.q, x, P.y, tau);
  Mat<Rat> path = unipotent_power(r.a, k) * mat_exp_nilpotent(r.X.scaled(t), 4);
  r.trapped = path * r.beta.inverse();
  r.in_G_minus = in_G_minus_pattern(s, r.trapped);
  r.in_G_minus_displayed = in_G_minus_pattern(s, Mat<Rat>(path * Mat<Rat>(b0 * r.beta_plus_displayed).inverse()));
  r.Y = project_minus(s, Ad(r.beta, r.X));

  QR Z2 = Z * Z;
  QR xs = (cx(Rat(1 + k * k * t * t * mu / 4)) * x + cx(Rat(k * t * mu), Rat(-k * tau))) / Z2;
  Rat tY = tau / Z.norm2();
  auto with_y = [&](const Rat& coef) {
    Vec<Rat> ys;
    for (int j = 0; j < d; ++j) ys.push_back(cx(coef) / Z2 * P.y[j]);
    return cr_minus_element<Rat>(P.p, P.q, xs, ys, tY);
  };
  r.Y_displayed = with_y(Rat(1 + k * k * t * t * mu / 2));
  r.Y_corrected = with_y(Rat(1 - k * k * t * t * mu / 4));
  return r;
}

template <class T> std::pair<Mat<T>, Mat<T>> gminus_p_split(const ModelSpec& s, const Mat<T>& g) {
  int n = s.n;
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < n; ++i) {
    int b = s.block(i);
    if (b >= int(blocks.size())) blocks.resize(b + 1);
    blocks[b].push_back(i);
  }
  Mat<T> U = g;
  Mat<T> L = Mat<T>::identity(n, g.ring);
  int B = int(blocks.size());
  for (int c = 0; c < B; ++c) {
    const auto& bc = blocks[c];
    int sz = int(bc.size());
    Mat<T> D(sz, g.ring);
    for (int i = 0; i < sz; ++i)
      for (int j = 0; j < sz; ++j) D(i, j) = U(bc[i], bc[j]);
    Mat<T> Di;
    try {
      Di = D.inverse();
    } catch (const Error&) {
      throw Error("Singular", "element outside the big cell G_- P");
    }
    for (int r = c + 1; r < B; ++r)
      for (int ri : blocks[r]) {
        Vec<T> F(sz);
        for (int j = 0; j < sz; ++j)
          for (int l = 0; l < sz; ++l) F[j] += U(ri, bc[l]) * Di(l, j);
        for (int j = 0; j < sz; ++j) L(ri, bc[j]) = F[j];
        for (int col = 0; col < n; ++col) {
          Quat<T> acc;
          for (int j = 0; j < sz; ++j) acc += F[j] * U(bc[j], col);
          U(ri, col) -= acc;
        }
      }
  }
  return {L, U};
}

template std::pair<Mat<Rat>, Mat<Rat>> gminus_p_split<Rat>(const ModelSpec&, const Mat<Rat>&);
template std::pair<Mat<double>, Mat<double>> gminus_p_split<double>(const ModelSpec&, const Mat<double>&);

namespace {

struct CrScalars {
  double mu = 0, yy = 0;
};

CrScalars cr_scalars(const QD& x, const Vec<double>& y, int p, int q) {
  if (int(y.size()) != p + q - 1) throw Error("DimensionMismatch", "y must have length p+q-1");
  CrScalars c;
  double yIy = 0;
  for (size_t j = 0; j < y.size(); ++j) {
    yIy += (int(j) < p - 1 ? 1 : -1) * y[j].norm2();
    c.yy += y[j].norm2();
  }
  c.mu = x.norm2() + yIy;
  return c;
}

}  // namespace

double cr_speed(const QD& x, const Vec<double>& y, int p, int q, double tau, double k, double t) {
  CrScalars c = cr_scalars(x, y, p, q);
  double a4 = k * k * t * t * c.mu / 4;
  QD Z = QD(1) + x.scaled(k * t) + QD(a4, -k * k * t * tau / 2);
  double Z2 = Z.norm2();
  if (Z2 < 1e-24) throw Error("QuadratureUnstable", "|1 + z| near zero");
  QD xs = x.scaled(1 + a4) + QD(k * t * c.mu, -k * tau);
  double num = xs.norm2() + (1 - a4) * (1 - a4) * c.yy + tau * tau;
  return std::sqrt(num) / Z2;
}

ShrinkBound shrink_bound(const QD& x, const Vec<double>& y, int p, int q, double tau, double k) {
  CrScalars c = cr_scalars(x, y, p, q);
  ShrinkBound b;
  double R = x.w, Im = x.x, mu = c.mu, xy = x.norm2() + c.yy;
  double gXX = xy + tau * tau;
  b.c_k = mu / 2 + (Im - k * tau / 2) * (Im - k * tau / 2);
  double D = b.c_k - R * R;
  b.valid = D > 0 && b.c_k > 0;
  b.f_k = std::sqrt(std::max(0.0, gXX - 2 * k * tau * (Im - k * tau / 2))) + std::sqrt(std::abs(2 * k * mu * R)) +
          k * std::sqrt(std::abs(mu / 2 * (xy - k * tau * Im + 2 * mu))) + k * std::abs(mu) * std::sqrt(k * std::abs(R) / 2);
  if (!b.valid) return b;
  double sD = std::sqrt(D);
  double at = std::atan((k * b.c_k + R) / sD) - std::atan(R / sD);
  b.I0 = at / (k * sD);
  b.I2 = (1 - R / (k * b.c_k) * std::log(k * k * b.c_k + 2 * k * R + 1) - (b.c_k - 2 * R * R) / (k * b.c_k * sD) * at) / (k * k * b.c_k);
  b.bound = b.f_k * b.I0 + k * k * std::abs(mu) / 4 * std::sqrt(xy) * b.I2;
  return b;
}

double graded_simpson(const std::function<double(double)>& f, double layer, int n0, double rel_tol, int* panels) {
  std::vector<double> cuts{0.0};
  if (layer > 0 && layer < 1) {
    for (double c = layer; c < 1; c *= 2) cuts.push_back(c);
  }
  cuts.push_back(1.0);
  if (n0 < 2) n0 = 2;
  if (n0 % 2) ++n0;
  double total = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    auto simpson = [&](int n) {
      double h = (b - a) / n, acc = f(a) + f(b);
      for (int j = 1; j < n; ++j) acc += (j % 2 ? 4 : 2) * f(a + j * h);
      return acc * h / 3;
    };
    int n = n0;
    double prev = simpson(n);
    for (;;) {
      n *= 2;
      double cur = simpson(n);
      if (std::abs(cur - prev) <= rel_tol * std::abs(cur) || n >= (1 << 20)) {
        prev = cur;
        break;
      }
      prev = cur;
    }
    total += prev;
  }
  if (panels) *panels = int(cuts.size()) - 1;
  return total;
}

namespace {

std::string shrink_verdict(const std::vector<double>& v, double tol_final) {
  // once below tol_final the sequence must keep strictly decreasing
  size_t first = v.size();
  for (size_t i = 0; i < v.size(); ++i)
    if (v[i] < tol_final) { first = i; break; }
  if (first == v.size()) return "NOT_SHRINKING";
  for (size_t i = first + 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]) || !(v[i] < tol_final)) return "NOT_SHRINKING";
  return "SHRINKS";
}

}  // namespace

ShrinkReport shrinking_arclength(int p, int q, const QD& x, const Vec<double>& y, double tau, const std::vector<double>& k_list,
                                 int quadrature_n, double tol_final, double bound_rel_tol) {
  if (tau == 0) throw Error("PreconditionFailed", "tau must be nonzero");
  if (k_list.empty()) throw Error("ConfigInvalid", "empty k-list");
  ShrinkReport r;
  r.ks = k_list;
  for (double k : k_list) {
    int panels = 0;
    double len = graded_simpson([&](double t) { return cr_speed(x, y, p, q, tau, k, t); }, 1.0 / (k * k), quadrature_n, 1e-12, &panels);
    r.panels = std::max(r.panels, panels);
    r.arclengths.push_back(len);
    ShrinkBound b = shrink_bound(x, y, p, q, tau, k);
    r.bounds.push_back(b);
    r.below_bound.push_back(b.valid && len <= b.bound * (1 + bound_rel_tol));
  }
  r.verdict = shrink_verdict(r.arclengths, tol_final);
  return r;
}

ShrinkReport shrinking_arclength_split(const ModelSpec& s, const Mat<double>& a, const Vec<double>& v, double tau,
                                       const std::vector<double>& k_list, int quadrature_n, double tol_final) {
  if (tau == 0) throw Error("PreconditionFailed", "tau must be nonzero");
  if (k_list.empty()) throw Error("ConfigInvalid", "empty k-list");
  if (s.kind != ModelKind::CR || int(v.size()) != s.p + s.q) throw Error("DimensionMismatch", "CR g_- data");
  int n = s.n;
  Mat<double> X(n);
  for (int j = 0; j < s.p + s.q; ++j) {
    X(1 + j, 0) = v[j];
    X(n - 1, 1 + j) = -v[j].conj().scaled(sign_of(s, j));
  }
  X(n - 1, 0) = QD(0, tau);
  Mat<double> X2 = X * X;
  ShrinkReport r;
  r.ks = k_list;
  for (double k : k_list) {
    Mat<double> ak = unipotent_power(a, k);
    auto speed = [&](double t) {
      Mat<double> g = ak * (Mat<double>::identity(n) + X.scaled(t) + X2.scaled(t * t / 2));
      auto [L, U] = gminus_p_split(s, g);
      Mat<double> Y = project_minus(s, Ad(U, X));
      double acc = 0;
      for (int j = 1; j < n - 1; ++j) acc += Y(j, 0).norm2();
      acc += Y(n - 1, 0).x * Y(n - 1, 0).x;
      return std::sqrt(acc);
    };
    int panels = 0;
    r.arclengths.push_back(graded_simpson(speed, 1.0 / (k * k), quadrature_n, 1e-10, &panels));
    r.panels = std::max(r.panels, panels);
  }
  r.verdict = shrink_verdict(r.arclengths, tol_final);
  return r;
}

template <class T> Quat<T> det_commutative(Mat<T> M) {
  int n = M.n;
  Quat<T> det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    if constexpr (Num<T>::exact) {
      for (int i = c; i < n; ++i)
        if (!M(i, c).is_zero()) { piv = i; break; }
    } else {
      double best = 0;
      for (int i = c; i < n; ++i)
        if (M(i, c).abs() > best) { best = M(i, c).abs(); piv = i; }
    }
    if (piv < 0) return Quat<T>(0);
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(M(c, j), M(piv, j));
      det = -det;
    }
    det = det * M(c, c);
    Quat<T> inv = M(c, c).inv();
    for (int i = c + 1; i < n; ++i) {
      Quat<T> f = M(i, c) * inv;
      if (f.is_zero()) continue;
      for (int j = c; j < n; ++j) M(i, j) -= f * M(c, j);
    }
  }
  return det;
}

template QR det_commutative<Rat>(Mat<Rat>);
template QD det_commutative<double>(Mat<double>);

std::vector<CharPolyCheck> verify_characteristic_polynomial(const CrParams& P, const std::vector<Rat>& lambdas) {
  CrShrink c = cr_shrinking_paths(P);
  int d = P.p + P.q;
  Mat<Rat> M(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) M(i, j) = c.beta0(1 + i, 1 + j);
  QR Z = QR(1) + c.z, Zb = Z.conj();
  Rat yIy = 0;
  for (int j = 0; j < d - 1; ++j) yIy += (j < P.p - 1 ? 1 : -1) * P.y[j].norm2();
  QR w = Zb / Z;
  QR shift = cx(Rat(P.k * P.k * P.t * P.t * yIy)) / Z;
  std::vector<CharPolyCheck> out;
  for (auto& lam : lambdas) {
    CharPolyCheck r;
    r.lambda = lam;
    Mat<Rat> A = Mat<Rat>::identity(d).scaled(lam) - M;
    r.lhs = det_commutative(A);
    QR L(lam);
    if (d >= 2) {
      QR pw(1);
      for (int e = 0; e < d - 2; ++e) pw = pw * (L - QR(1));
      r.rhs = pw * ((L - w) * (L - QR(1)) + shift * L);
    } else {
      r.rhs = L - w;
    }
    r.equal = r.lhs == r.rhs;
    out.push_back(r);
  }
  return out;
}

// ---------------- flamboyance ----------------

namespace {

template <class T> bool q_small(const Quat<T>& q, double tol) {
  if constexpr (Num<T>::exact) return q.is_zero();
  else return q.abs() <= tol;
}

// u lies in the right K-span of d
template <class T> bool right_proportional(const Vec<T>& u, const Vec<T>& d, bool commutative, double tol) {
  int j0 = -1;
  double best = 0;
  for (size_t j = 0; j < d.size(); ++j) {
    double a = to_double(d[j]).abs();
    if (a > best) { best = a; j0 = int(j); }
    if constexpr (Num<T>::exact)
      if (a > 0) break;
  }
  if (j0 < 0) return std::all_of(u.begin(), u.end(), [&](const Quat<T>& q) { return q_small(q, tol); });
  Quat<T> z = commutative ? rdiv(u[j0], d[j0]) : ldiv(d[j0], u[j0]);
  double scale = 1;
  if constexpr (!Num<T>::exact) {
    double nu = 0;
    for (auto& q : u) nu += q.norm2();
    scale = std::max(1.0, std::sqrt(nu));
  }
  for (size_t j = 0; j < d.size(); ++j)
    if (!q_small(Quat<T>(u[j] - d[j] * z), tol * scale)) return false;
  return true;
}

template <class T> Vec<T> slice(const Vec<T>& v, int lo, int hi) { return Vec<T>(v.begin() + lo, v.begin() + hi); }

template <class T> bool contains_impl(const ModelSpec& s, const LineFamilyElement& e, const Vec<T>& v, double tol) {
  Vec<T> dir;
  if constexpr (Num<T>::exact) dir = e.dir;
  else dir = vec_double(e.dir);
  int n = s.n;
  if (e.family == "complex_line" || e.family == "quaternionic_line")
    return right_proportional(slice(v, 1, n), dir, e.family == "complex_line", tol);
  if (s.kind != ModelKind::CR) return false;
  if (!nullcone_contains(s, v, tol)) return false;
  if (e.family == "cr_ell_xy") return right_proportional(slice(v, 1, n - 1), dir, true, tol);
  if (e.family == "cr_ell_y") return right_proportional(slice(v, 2, n - 1), dir, true, tol);
  throw Error("PreconditionFailed", "unknown family " + e.family);
}

Rat form_on(const ModelSpec& s, const Vec<Rat>& mid, int offset) {
  Rat f = 0;
  for (size_t j = 0; j < mid.size(); ++j) f += sign_of(s, int(j) + offset) * mid[j].norm2();
  return f;
}

// r with 2 Re(conj(r) c) = -h, plus a free i s c
QR null_r(const Rat& h, const QR& c, const Rat& s) { return c.scaled(Rat(-h / (2 * c.norm2()))) + QR(0, s) * c; }

QR rand_scalar(const ModelSpec& s, Rng& r, long num, long den) {
  return s.kind == ModelKind::HPROJ ? r.quat_rational(num, den) : r.complex_rational(num, den);
}

QR rand_unit_complex(Rng& r) {
  long a = r.range(-5, 5), b = r.range(1, 5);
  Rat d = Rat(a * a + b * b);
  return QR(Rat(a * a - b * b) / d, Rat(2 * a * b) / d);
}

}  // namespace

namespace {

void check_dir(const ModelSpec& s, const LineFamilyElement& e) {
  size_t want = e.family == "cr_ell_xy" ? size_t(s.n - 2) : e.family == "cr_ell_y" ? size_t(s.n - 3) : size_t(s.n - 1);
  if (e.dir.size() != want) throw Error("DimensionMismatch", e.family + " parameter has the wrong length");
}

}  // namespace

bool family_condition(const ModelSpec& s, const Mat<Rat>& a, const LineFamilyElement& e) {
  check_dir(s, e);
  if (vec_zero(e.dir)) return false;
  if (e.family == "complex_line" || e.family == "quaternionic_line") {
    Vec<Rat> beta = isotropy_row(s, a);
    QR acc;
    for (size_t j = 0; j < beta.size(); ++j) acc += beta[j] * e.dir[j];
    return !acc.is_zero();
  }
  if (e.family == "cr_ell_xy") return sgn(form_on(s, e.dir, 0)) != 0;
  if (e.family == "cr_ell_y") return sgn(form_on(s, e.dir, 1)) != 0;
  return false;
}

void require_family_condition(const ModelSpec& s, const Mat<Rat>& a, const LineFamilyElement& e) {
  if (family_condition(s, a, e)) return;
  Vec<Rat> w(s.n);
  if (e.family == "complex_line" || e.family == "quaternionic_line") {
    for (size_t j = 0; j < e.dir.size(); ++j) w[1 + j] = e.dir[j];
  } else if (e.family == "cr_ell_xy") {
    for (size_t j = 0; j < e.dir.size(); ++j) w[1 + j] = e.dir[j];
  } else {
    for (size_t j = 0; j < e.dir.size(); ++j) w[2 + j] = e.dir[j];
  }
  std::string wit;
  if (vec_zero(w)) wit = "zero direction";
  else {
    ProjPoint<Rat> p(s.tag(), w);
    p = p.canonical();
    for (auto& q : p.v) wit += to_string(q) + " ";
  }
  throw Error("FamilyConditionViolated", e.family + " element meets Fix away from the base point; witness [ " + wit + "]");
}

bool family_contains(const ModelSpec& s, const LineFamilyElement& e, const ProjPoint<Rat>& p) {
  check_dir(s, e);
  return contains_impl(s, e, p.v, 0);
}

ProjPoint<Rat> family_sample(const ModelSpec& s, const LineFamilyElement& e, Rng& r) {
  check_dir(s, e);
  int n = s.n;
  Vec<Rat> v(n);
  for (;;) {
    if (e.family == "complex_line" || e.family == "quaternionic_line") {
      v[0] = rand_scalar(s, r, 5, 4);
      QR z = rand_scalar(s, r, 5, 4);
      for (size_t j = 0; j < e.dir.size(); ++j) v[1 + j] = e.dir[j] * z;
    } else {
      QR z = r.complex_rational(5, 4), c = r.complex_rational(5, 4);
      int off = e.family == "cr_ell_xy" ? 1 : 2;
      for (int j = 1; j < n - 1; ++j) v[j] = QR();
      if (off == 2) v[1] = r.complex_rational(5, 4);
      for (size_t j = 0; j < e.dir.size(); ++j) v[off + j] = z * e.dir[j];
      if (c.is_zero()) {
        // only the base point is null with c = 0 on a good element
        for (int j = 1; j < n; ++j) v[j] = QR();
        v[0] = QR(1);
      } else {
        Vec<Rat> mid = slice(v, 1, n - 1);
        v[0] = null_r(form_on(s, mid, 0), c, r.rational(5, 4));
        v[n - 1] = c;
      }
    }
    if (!vec_zero(v)) break;
  }
  return ProjPoint<Rat>(s.tag(), v).canonical();
}

std::string family_for(const ModelSpec& s, const Mat<Rat>& a) {
  switch (s.kind) {
    case ModelKind::CPROJ: return "complex_line";
    case ModelKind::HPROJ: return "quaternionic_line";
    case ModelKind::CR: {
      Vec<Rat> beta = isotropy_row(s, a);
      if (vec_zero(beta)) return "cr_ell_xy";
      for (size_t j = 1; j < beta.size(); ++j)
        if (!beta[j].is_zero()) throw Error("PreconditionFailed", "non-central family needs beta along the first coordinate");
      return "cr_ell_y";
    }
    default: throw Error("PreconditionFailed", "no flamboyance family for " + s.tag());
  }
}

std::optional<LineFamilyElement> family_through(const ModelSpec& s, const Mat<Rat>& a, const std::string& family, const ProjPoint<Rat>& p) {
  int n = s.n;
  LineFamilyElement e;
  e.family = family;
  if (family == "complex_line" || family == "quaternionic_line") e.dir = slice(p.v, 1, n);
  else if (family == "cr_ell_xy") e.dir = slice(p.v, 1, n - 1);
  else e.dir = slice(p.v, 2, n - 1);
  if (vec_zero(e.dir)) {
    // p lies on every element; any good one will do
    if (family == "complex_line" || family == "quaternionic_line") {
      Vec<Rat> beta = isotropy_row(s, a);
      for (size_t j = 0; j < beta.size(); ++j) e.dir[j] = beta[j].conj();
    } else {
      e.dir[0] = QR(1);
    }
  }
  if (!family_condition(s, a, e) || !family_contains(s, e, p)) return std::nullopt;
  return e;
}

ProjPoint<Rat> sample_flag_point(const ModelSpec& s, Rng& r, long num, long den) {
  int n = s.n;
  Vec<Rat> v(n);
  if (s.projective()) {
    do {
      for (auto& q : v) q = rand_scalar(s, r, num, den);
    } while (vec_zero(v));
  } else if (s.kind == ModelKind::CR) {
    for (int j = 1; j < n - 1; ++j) v[j] = r.complex_rational(num, den);
    QR c;
    while (c.is_zero()) c = r.complex_rational(num, den);
    v[n - 1] = c;
    v[0] = null_r(form_on(s, slice(v, 1, n - 1), 0), c, r.rational(num, den));
  } else {
    throw Error("PreconditionFailed", "no flag sampler for " + s.tag());
  }
  return ProjPoint<Rat>(s.tag(), v).canonical();
}

ProjPoint<Rat> sample_fixed_point(const ModelSpec& s, const Mat<Rat>& a, Rng& r) {
  int n = s.n;
  Vec<Rat> v(n);
  if (s.projective()) {
    Vec<Rat> beta = isotropy_row(s, a);
    int j0 = -1;
    for (size_t j = 0; j < beta.size(); ++j)
      if (!beta[j].is_zero()) { j0 = int(j); break; }
    for (auto& q : v) q = rand_scalar(s, r, 5, 4);
    if (j0 >= 0) {
      QR acc;
      for (size_t j = 0; j < beta.size(); ++j)
        if (int(j) != j0) acc += beta[j] * v[1 + j];
      v[1 + j0] = -(beta[j0].inv() * acc);
    }
    if (vec_zero(v)) v[0] = QR(1);
  } else if (s.kind == ModelKind::CR) {
    Vec<Rat> beta = isotropy_row(s, a);
    int off = vec_zero(beta) ? 0 : 1;
    v[0] = r.complex_rational(5, 4);
    // null mid part: pair a positive slot with a negative one of equal modulus
    int pos = s.p - off, neg = s.q;
    for (int j = 0; j < std::min(pos, neg); ++j) {
      QR u = r.complex_rational(5, 4);
      v[1 + off + j] = u;
      v[1 + s.p + j] = u * rand_unit_complex(r);
    }
    if (vec_zero(v)) v[0] = QR(1);
  } else {
    throw Error("PreconditionFailed", "no fixed-point sampler for " + s.tag());
  }
  ProjPoint<Rat> p(s.tag(), v);
  if (!is_fixed(s, a, p)) throw Error("PreconditionFailed", "fixed-point sampler does not match this isotropy");
  return p.canonical();
}

ProjPoint<Rat> sample_nonfixed_point(const ModelSpec& s, const Mat<Rat>& a, Rng& r) {
  for (;;) {
    ProjPoint<Rat> p = sample_flag_point(s, r);
    if (!is_fixed(s, a, p)) return p;
  }
}

std::vector<ProjPoint<double>> intersection_path(const ModelSpec& s, const ProjPoint<Rat>& p0, int steps) {
  ProjPoint<double> p = to_double(p0.canonical());
  int n = s.n;
  std::vector<ProjPoint<double>> path;
  bool r_zero = p.v[0].abs() == 0;
  for (int i = 0; i <= steps; ++i) {
    double u = double(i) / steps;
    Vec<double> w = p.v;
    if (!r_zero) {
      // (r, u mid, u^2 c) stays on the null cone and ends at the base point
      for (int j = 1; j < n - 1; ++j) w[j] = p.v[j].scaled(u);
      if (s.kind == ModelKind::CR) w[n - 1] = p.v[n - 1].scaled(u * u);
      else
        for (int j = 1; j < n; ++j) w[j] = p.v[j].scaled(u);
    } else {
      // [cos th ; 0 ; i sin th c/|c|] from the base point to [0;...;c]
      double th = u * M_PI / 2;
      for (auto& q : w) q = QD();
      w[0] = QD(std::cos(th));
      QD c = p.v[n - 1];
      w[n - 1] = (QD(0, 1) * c).scaled(std::sin(th) / c.abs());
    }
    path.push_back(ProjPoint<double>(p.model, w));
  }
  return path;
}

FlamboyanceReport flamboyance_check(const ModelSpec& s, const Mat<Rat>& a, const std::vector<LineFamilyElement>& family,
                                    long sample_budget, std::uint64_t seed) {
  FlamboyanceReport rep;
  Rng rng(seed);
  ProjPoint<Rat> e = base_point<Rat>(s);
  std::string fam = family_for(s, a);
  auto wit = [&](const std::string& what, const ProjPoint<Rat>& p) {
    std::string w = what + ": [ ";
    for (auto& q : p.canonical().v) w += to_string(q) + " ";
    rep.witnesses.push_back(w + "]");
  };
  long per = std::max(1L, sample_budget / std::max<long>(1, long(family.size())));
  for (auto& el : family) {
    if (el.family != fam) throw Error("PreconditionFailed", "family " + el.family + " does not match " + s.tag());
    if (!family_contains(s, el, e)) {
      rep.invariance = false;
      wit("element misses the base point", e);
    }
    if (!family_condition(s, a, el)) {
      rep.fix_meets_base_only = false;
      try {
        require_family_condition(s, a, el);
      } catch (const Error& err) {
        rep.witnesses.push_back(err.what());
      }
      continue;
    }
    for (long i = 0; i < per; ++i) {
      ProjPoint<Rat> p = family_sample(s, el, rng);
      rep.invariance_checks++;
      if (!family_contains(s, el, act_on_flag(s, a, p))) {
        rep.invariance = false;
        wit("a moves a point off its element", p);
      }
      rep.fix_checks++;
      if (is_fixed(s, a, p) && !proj_equal(p, e)) {
        rep.fix_meets_base_only = false;
        wit("fixed point on an element", p);
      }
    }
  }
  // pairwise intersections
  for (size_t i = 0; i < family.size(); ++i)
    for (size_t j = i + 1; j < family.size() && j < i + 4; ++j) {
      const auto &A = family[i], &B = family[j];
      if (right_proportional(A.dir, B.dir, fam != "quaternionic_line", 0)) continue;
      for (long t = 0; t < std::max(2L, per / 4); ++t) {
        ProjPoint<Rat> p = family_sample(s, A, rng);
        rep.intersection_checks++;
        if (!family_contains(s, B, p)) continue;
        bool ok;
        if (s.projective()) ok = proj_equal(p, e);
        else if (fam == "cr_ell_xy") ok = vec_zero(slice(p.v, 1, s.n - 1));
        else ok = vec_zero(slice(p.v, 2, s.n - 1));
        if (!ok) {
          rep.intersections = false;
          wit("intersection point outside the closed-form locus", p);
        }
      }
      if (s.kind == ModelKind::CR) {
        // sample the locus itself and walk it back to the base point
        for (int t = 0; t < 4; ++t) {
          Vec<Rat> v(s.n);
          QR c = t == 0 ? QR(1) : rng.complex_rational(5, 4);
          if (fam == "cr_ell_y") v[1] = rng.complex_rational(5, 4);
          if (c.is_zero()) c = QR(1);
          v[s.n - 1] = c;
          v[0] = t == 0 && fam == "cr_ell_xy" ? QR() : null_r(form_on(s, slice(v, 1, s.n - 1), 0), c, rng.rational(5, 4));
          ProjPoint<Rat> p(s.tag(), v);
          rep.intersection_checks++;
          if (!family_contains(s, A, p) || !family_contains(s, B, p)) {
            rep.intersections = false;
            wit("locus point missing from an element", p);
            continue;
          }
          auto path = intersection_path(s, p, 16);
          bool ends = chordal_distance(path.front(), to_double(e)) < 1e-12 && chordal_distance(path.back(), to_double(p)) < 1e-12;
          for (auto& q : path)
            if (!contains_impl(s, A, q.v, 1e-9) || !contains_impl(s, B, q.v, 1e-9)) ends = false;
          if (!ends) {
            rep.intersections = false;
            wit("locus path leaves the intersection", p);
          }
        }
      }
    }
  // coverage of non-fixed points
  for (long i = 0; i < sample_budget; ++i) {
    ProjPoint<Rat> p = sample_nonfixed_point(s, a, rng);
    rep.coverage_checks++;
    if (!family_through(s, a, fam, p)) {
      rep.coverage = false;
      wit("non-fixed point on no element", p);
    }
  }
  return rep;
}

EmbeddingReport klein_embedding_image(const ModelSpec& s, const Mat<Rat>& a, const std::vector<ProjPoint<Rat>>& samples,
                                      double radius, const std::vector<long>& windows) {
  EmbeddingReport rep;
  rep.windows = windows;
  rep.radius = radius;
  long wmax = windows.empty() ? 0 : *std::max_element(windows.begin(), windows.end());
  ProjPoint<double> e = to_double(base_point<Rat>(s));
  Mat<double> N = to_double(mat_log_unipotent(a, a.n + 1));
  Mat<double> N2 = N * N;
  // a^i = I + iN + i^2 N^2/2 + ...; the models here have N^3 = 0
  if (!(N2 * N).is_zero()) throw Error("PreconditionFailed", "embedding probe expects N^3 = 0");
  std::vector<long> entry;
  for (auto& p : samples) {
    bool fixed = is_fixed(s, a, p);
    Vec<double> v = to_double(p).v;
    Vec<double> Nv = N * v, N2v = N2 * v;
    long hit = -1;
    for (long i = 0; i <= wmax && hit < 0; ++i)
      for (long sg : {1L, -1L}) {
        double k = double(sg * i);
        Vec<double> w(v.size());
        for (size_t j = 0; j < v.size(); ++j) w[j] = v[j] + Nv[j].scaled(k) + N2v[j].scaled(k * k / 2);
        if (chordal_distance(ProjPoint<double>(p.model, w), e) < radius) { hit = i; break; }
      }
    if (fixed) {
      rep.fixed++;
      if (hit >= 0 && chordal_distance(to_double(p), e) >= radius) rep.fixed_never_enter = false;
    } else {
      rep.nonfixed++;
      entry.push_back(hit);
      if (hit < 0) rep.complement_fixed = false;
    }
  }
  double prev = -1;
  for (long w : windows) {
    long c = std::count_if(entry.begin(), entry.end(), [&](long h) { return h >= 0 && h <= w; });
    double f = entry.empty() ? 1.0 : double(c) / double(entry.size());
    if (f < prev) rep.monotone = false;
    prev = f;
    rep.nonfixed_coverage.push_back(f);
  }
  return rep;
}

}  // namespace cartan
