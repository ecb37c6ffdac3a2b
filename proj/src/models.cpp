#include "cartan/models.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cartan {

ModelSpec ModelSpec::cproj(int m) {
  if (m < 1) throw Error("DimensionMismatch", "cproj needs m >= 1");
  ModelSpec s;
  s.kind = ModelKind::CPROJ;
  s.m = m;
  s.n = m + 1;
  s.ring = Ring::C;
  s.depth = 1;
  return s;
}

ModelSpec ModelSpec::hproj(int m) {
  ModelSpec s = cproj(m);
  s.kind = ModelKind::HPROJ;
  s.ring = Ring::H;
  return s;
}

ModelSpec ModelSpec::cr(int p, int q) {
  if (p < 0 || q < 0 || p + q < 1) throw Error("DimensionMismatch", "cr needs p,q >= 0 and p+q >= 1");
  ModelSpec s;
  s.kind = ModelKind::CR;
  s.p = p;
  s.q = q;
  s.n = p + q + 2;
  s.ring = Ring::C;
  s.depth = 2;
  return s;
}

ModelSpec ModelSpec::aff(int m) {
  if (m < 1) throw Error("DimensionMismatch", "aff needs m >= 1");
  ModelSpec s;
  s.kind = ModelKind::AFF;
  s.m = m;
  s.n = m + 1;
  s.ring = Ring::R;
  s.depth = 1;
  return s;
}

ModelSpec ModelSpec::euc(int m) {
  ModelSpec s = aff(m);
  s.kind = ModelKind::EUC;
  return s;
}

ModelSpec ModelSpec::parse(const std::string& tag) {
  std::string t;
  for (char c : tag)
    if (!std::isspace(static_cast<unsigned char>(c))) t += char(std::tolower(static_cast<unsigned char>(c)));
  auto colon = t.find(':');
  if (colon == std::string::npos) throw Error("ConfigInvalid", "model tag without ':' : " + tag);
  std::string head = t.substr(0, colon), rest = t.substr(colon + 1);
  auto num = [&](const std::string& x) {
    if (x.empty() || !std::all_of(x.begin(), x.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      throw Error("ConfigInvalid", "bad model parameter in " + tag);
    return std::stoi(x);
  };
  if (head == "cproj") return cproj(num(rest));
  if (head == "hproj") return hproj(num(rest));
  if (head == "aff") return aff(num(rest));
  if (head == "euc") return euc(num(rest));
  if (head == "cr") {
    auto comma = rest.find(',');
    if (comma == std::string::npos) throw Error("ConfigInvalid", "cr tag needs p,q: " + tag);
    return cr(num(rest.substr(0, comma)), num(rest.substr(comma + 1)));
  }
  throw Error("ConfigInvalid", "unknown model " + tag);
}

std::string ModelSpec::tag() const {
  switch (kind) {
    case ModelKind::CPROJ: return "cproj:" + std::to_string(m);
    case ModelKind::HPROJ: return "hproj:" + std::to_string(m);
    case ModelKind::CR: return "cr:" + std::to_string(p) + "," + std::to_string(q);
    case ModelKind::AFF: return "aff:" + std::to_string(m);
    case ModelKind::EUC: return "euc:" + std::to_string(m);
  }
  return "?";
}

int ModelSpec::block(int i) const {
  switch (kind) {
    case ModelKind::CPROJ:
    case ModelKind::HPROJ: return i == 0 ? 0 : 1;
    case ModelKind::CR: return i == 0 ? 0 : (i == n - 1 ? 2 : 1);
    case ModelKind::AFF:
    case ModelKind::EUC: return i == m ? 0 : 1;
  }
  return 0;
}

int ModelSpec::flag_dim() const {
  switch (kind) {
    case ModelKind::CPROJ: return 2 * m;
    case ModelKind::HPROJ: return 4 * m;
    case ModelKind::CR: return 2 * (p + q) + 1;
    default: return m;
  }
}

IsotropyResult build_isotropy(const ModelSpec& s, const IsotropyParams& prm) {
  IsotropyResult r;
  r.b = Mat<Rat>::identity(s.n, s.ring);
  switch (s.kind) {
    case ModelKind::CPROJ:
    case ModelKind::HPROJ: {
      if (int(prm.row.size()) != s.m) throw Error("DimensionMismatch", "P_+ row must have length m");
      bool nz = false;
      for (int j = 0; j < s.m; ++j) {
        if (s.kind == ModelKind::CPROJ && !prm.row[j].is_complex()) throw Error("DimensionMismatch", "quaternionic entry in a complex model");
        r.b(0, j + 1) = prm.row[j];
        nz = nz || !prm.row[j].is_zero();
      }
      r.non_null = nz;
      r.cls = "projective";
      break;
    }
    case ModelKind::CR: {
      int d = s.p + s.q;
      if (int(prm.row.size()) != d) throw Error("DimensionMismatch", "beta must have length p+q");
      Rat form = 0;
      for (int j = 0; j < d; ++j) {
        const QR& b = prm.row[j];
        if (!b.is_complex()) throw Error("DimensionMismatch", "quaternionic entry in a CR model");
        int eps = j < s.p ? 1 : -1;
        r.b(0, j + 1) = b;
        r.b(j + 1, s.n - 1) = b.conj().scaled(Rat(-eps));
        form += eps * b.norm2();
      }
      r.b(0, s.n - 1) = QR(Rat(-form / 2), prm.s);
      r.non_null = !r.b(0, s.n - 1).is_zero();
      bool beta_zero = std::all_of(prm.row.begin(), prm.row.end(), [](const QR& x) { return x.is_zero(); });
      if (beta_zero) r.cls = "central";
      else if (sgn(form) > 0) r.cls = "timelike";
      else if (sgn(form) < 0) r.cls = "spacelike";
      else r.cls = "null-direction";
      break;
    }
    case ModelKind::AFF:
    case ModelKind::EUC: {
      r.cls = "linear";
      r.non_null = true;
      break;
    }
  }
  if (prm.g0) {
    if (prm.g0->n != s.n) throw Error("DimensionMismatch", "G_0 part");
    r.b = *prm.g0 * r.b;
  }
  return r;
}

template <class T> static std::vector<T> flatten(const Mat<T>& M) {
  std::vector<T> v;
  v.reserve(M.e.size() * 4);
  for (auto& q : M.e) {
    v.push_back(q.w);
    v.push_back(q.x);
    v.push_back(q.y);
    v.push_back(q.z);
  }
  return v;
}

template <class T> static bool negligible(const T& v, double scale) {
  if constexpr (Num<T>::exact) return Num<T>::zero(v);
  else return std::abs(v) <= 1e-10 * std::max(1.0, scale);
}

// Gaussian elimination on columns; returns indices of a maximal independent subset
template <class T> static std::vector<int> independent_subset(const std::vector<Mat<T>>& elems) {
  std::vector<std::vector<T>> rows;  // reduced vectors
  std::vector<int> pivcol;
  std::vector<int> keep;
  for (size_t k = 0; k < elems.size(); ++k) {
    std::vector<T> v = flatten(elems[k]);
    double scale = elems[k].norm();
    for (size_t r = 0; r < rows.size(); ++r) {
      const T& pv = rows[r][pivcol[r]];
      if (Num<T>::zero(v[pivcol[r]])) continue;
      T f = T(v[pivcol[r]] / pv);
      for (size_t c = 0; c < v.size(); ++c) v[c] -= f * rows[r][c];
    }
    int pc = -1;
    double best = 0;
    for (size_t c = 0; c < v.size(); ++c) {
      if (negligible(v[c], scale)) continue;
      double a = std::abs(Num<T>::d(v[c]));
      if constexpr (Num<T>::exact) { pc = int(c); break; }
      if (a > best) { best = a; pc = int(c); }
    }
    if (pc < 0) continue;
    rows.push_back(v);
    pivcol.push_back(pc);
    keep.push_back(int(k));
  }
  return keep;
}

template <class T> std::vector<Mat<T>> algebra_basis(const ModelSpec& s) {
  std::vector<Mat<T>> B;
  const int n = s.n;
  switch (s.kind) {
    case ModelKind::CPROJ:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>(1), Ring::C));
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>::I(), Ring::C));
        }
      break;
    case ModelKind::HPROJ:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>(1), Ring::H));
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>::I(), Ring::H));
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>::J(), Ring::H));
          B.push_back(Mat<T>::unit(n, i, j, Quat<T>::K(), Ring::H));
        }
      break;
    case ModelKind::CR: {
      Mat<T> H = hermitian_matrix<T>(s);
      for (int i = 0; i < n; ++i) {
        B.push_back(H * Mat<T>::unit(n, i, i, Quat<T>::I()));
        for (int j = i + 1; j < n; ++j) {
          Mat<T> a = Mat<T>::unit(n, i, j) - Mat<T>::unit(n, j, i);
          Mat<T> b = Mat<T>::unit(n, i, j, Quat<T>::I()) + Mat<T>::unit(n, j, i, Quat<T>::I());
          B.push_back(H * a);
          B.push_back(H * b);
        }
      }
      break;
    }
    case ModelKind::AFF:
      for (int i = 0; i < s.m; ++i)
        for (int j = 0; j <= s.m; ++j) B.push_back(Mat<T>::unit(n, i, j, Quat<T>(1), Ring::R));
      break;
    case ModelKind::EUC:
      for (int i = 0; i < s.m; ++i)
        for (int j = i + 1; j < s.m; ++j) B.push_back(Mat<T>::unit(n, i, j, Quat<T>(1), Ring::R) - Mat<T>::unit(n, j, i, Quat<T>(1), Ring::R));
      for (int i = 0; i < s.m; ++i) B.push_back(Mat<T>::unit(n, i, s.m, Quat<T>(1), Ring::R));
      break;
  }
  return B;
}

template <class T> std::vector<Mat<T>> graded_basis(const ModelSpec& s, int grade) {
  std::vector<Mat<T>> proj;
  for (auto& X : algebra_basis<T>(s)) proj.push_back(grading_project(s, X, grade, false));
  std::vector<Mat<T>> out;
  for (int k : independent_subset(proj)) out.push_back(proj[k]);
  return out;
}

template <class T> SlotBasis<T> slot_basis(const ModelSpec& s) {
  SlotBasis<T> sb;
  if (s.affine()) {
    for (int i = 0; i < s.m; ++i) {
      sb.elems.push_back(Mat<T>::unit(s.n, i, s.m, Quat<T>(1), Ring::R));
      sb.grades.push_back(1);
    }
    return sb;
  }
  for (int g = 1; g <= s.depth; ++g)
    for (auto& X : graded_basis<T>(s, g)) {
      sb.elems.push_back(X);
      sb.grades.push_back(g);
    }
  return sb;
}

template <class T> std::vector<T> coordinates(const std::vector<Mat<T>>& basis, const Mat<T>& X) {
  const size_t d = basis.size();
  std::vector<std::vector<T>> cols;
  for (auto& b : basis) cols.push_back(flatten(b));
  std::vector<T> rhs = flatten(X);
  const size_t rows = rhs.size();
  // augmented [A | rhs] as row-major
  std::vector<std::vector<T>> A(rows, std::vector<T>(d + 1));
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < d; ++c) A[r][c] = cols[c][r];
    A[r][d] = rhs[r];
  }
  double scale = X.norm();
  for (auto& b : basis) scale = std::max(scale, b.norm());
  std::vector<int> pivrow(d, -1);
  size_t r0 = 0;
  for (size_t c = 0; c < d && r0 < rows; ++c) {
    size_t best = rows;
    double bv = 0;
    for (size_t r = r0; r < rows; ++r) {
      if (negligible(A[r][c], scale)) continue;
      if constexpr (Num<T>::exact) { best = r; break; }
      double a = std::abs(Num<T>::d(A[r][c]));
      if (a > bv) { bv = a; best = r; }
    }
    if (best == rows) throw Error("Singular", "dependent basis");
    std::swap(A[r0], A[best]);
    T inv = T(T(1) / A[r0][c]);
    for (size_t k = c; k <= d; ++k) A[r0][k] *= inv;
    for (size_t r = 0; r < rows; ++r) {
      if (r == r0 || Num<T>::zero(A[r][c])) continue;
      T f = A[r][c];
      for (size_t k = c; k <= d; ++k) A[r][k] -= f * A[r0][k];
    }
    pivrow[c] = int(r0);
    ++r0;
  }
  for (size_t r = r0; r < rows; ++r)
    if (!negligible(A[r][d], scale)) throw Error("NotInAlgebra", "element outside the span of the basis");
  std::vector<T> out(d);
  for (size_t c = 0; c < d; ++c) out[c] = A[pivrow[c]][d];
  return out;
}

// matrix of the induced action on slot coordinates: column a = coords of the image of slot a
template <class T> static std::vector<std::vector<T>> slot_action(const ModelSpec& s, const SlotBasis<T>& sb, const Mat<T>& b, const Mat<T>& binv) {
  const size_t d = sb.elems.size();
  std::vector<std::vector<T>> D(d, std::vector<T>(d));
  for (size_t a = 0; a < d; ++a) {
    auto c = coordinates(sb.elems, Ad(b, binv, sb.elems[a]));
    for (size_t r = 0; r < d; ++r) D[r][a] = c[r];
  }
  if (!s.affine()) return D;
  // dual action on covectors: inverse transpose
  Mat<T> M(int(d), Ring::R);
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) M(int(i), int(j)) = Quat<T>(D[i][j]);
  Mat<T> Mi = M.inverse();
  for (size_t i = 0; i < d; ++i)
    for (size_t j = 0; j < d; ++j) D[i][j] = Mi(int(j), int(i)).w;
  return D;
}

template <class T>
CurvatureTensor<T> curvature_rep_action(const ModelSpec& s, const Mat<T>& b, const CurvatureTensor<T>& w) {
  if (!in_P(s, b)) throw Error("NotInP", "group element is not in P");
  SlotBasis<T> sb = slot_basis<T>(s);
  Mat<T> binv = b.inverse();
  auto D = slot_action(s, sb, b, binv);
  const size_t d = sb.elems.size();
  CurvatureTensor<T> out(s.n);
  for (auto& kv : w.terms) {
    int a = kv.first.first, c = kv.first.second;
    Mat<T> W = alg_canonical(s, Ad(b, binv, kv.second));
    for (size_t i = 0; i < d; ++i) {
      if (Num<T>::zero(D[i][a])) continue;
      for (size_t j = 0; j < d; ++j) {
        if (i == j || Num<T>::zero(D[j][c])) continue;
        T coef = T(D[i][a] * D[j][c]);
        out.add(int(i), int(j), W.scaled(coef));
      }
    }
  }
  out.prune();
  return out;
}

template <class T> static bool component_nonzero(const Mat<T>& X) {
  if constexpr (Num<T>::exact) return !X.is_zero();
  else return X.norm() > 1e-12;
}

template <class T> bool regularity_check(const ModelSpec& s, const CurvatureTensor<T>& w) {
  SlotBasis<T> sb = slot_basis<T>(s);
  for (auto& kv : w.terms) {
    int ga = sb.grades.at(kv.first.first), gb = sb.grades.at(kv.first.second);
    for (int j = s.min_grade(); j <= s.max_grade(); ++j) {
      if (ga + gb + j >= 1) continue;
      if (component_nonzero(grading_project(s, kv.second, j, false))) return false;
    }
  }
  return true;
}

template <class T> bool only_excluded_slots(const ModelSpec& s, const CurvatureTensor<T>& w) {
  SlotBasis<T> sb = slot_basis<T>(s);
  bool any = false;
  for (auto& kv : w.terms) {
    int ga = sb.grades.at(kv.first.first), gb = sb.grades.at(kv.first.second);
    for (int j = s.min_grade(); j <= s.max_grade(); ++j) {
      if (!component_nonzero(grading_project(s, kv.second, j, false))) continue;
      if (ga + gb + j >= 1) return false;
      any = true;
    }
  }
  return any;
}

#define CARTAN_INST(T)                                                                                    \
  template std::vector<Mat<T>> algebra_basis<T>(const ModelSpec&);                                        \
  template std::vector<Mat<T>> graded_basis<T>(const ModelSpec&, int);                                    \
  template SlotBasis<T> slot_basis<T>(const ModelSpec&);                                                  \
  template std::vector<T> coordinates<T>(const std::vector<Mat<T>>&, const Mat<T>&);                      \
  template CurvatureTensor<T> curvature_rep_action<T>(const ModelSpec&, const Mat<T>&, const CurvatureTensor<T>&); \
  template bool regularity_check<T>(const ModelSpec&, const CurvatureTensor<T>&);                         \
  template bool only_excluded_slots<T>(const ModelSpec&, const CurvatureTensor<T>&);

CARTAN_INST(Rat)
CARTAN_INST(double)

}  // namespace cartan
