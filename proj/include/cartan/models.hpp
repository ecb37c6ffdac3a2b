#pragma once

#include "cartan/proj.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>

namespace cartan {

enum class ModelKind { CPROJ, HPROJ, CR, AFF, EUC };

struct ModelSpec {
  ModelKind kind = ModelKind::CPROJ;
  int m = 0, p = 0, q = 0;
  int n = 0;
  Ring ring = Ring::C;
  int depth = 1;

  static ModelSpec cproj(int m);
  static ModelSpec hproj(int m);
  static ModelSpec cr(int p, int q);
  static ModelSpec aff(int m);
  static ModelSpec euc(int m);
  // "cproj:2", "hproj:1", "cr:1,1", "aff:1", "euc:2"
  static ModelSpec parse(const std::string& tag);

  std::string tag() const;
  // block index of a coordinate; grade of entry (i,j) is block(j) - block(i)
  int block(int i) const;
  int grade(int i, int j) const { return block(j) - block(i); }
  int flag_dim() const;
  bool projective() const { return kind == ModelKind::CPROJ || kind == ModelKind::HPROJ; }
  bool affine() const { return kind == ModelKind::AFF || kind == ModelKind::EUC; }
  int min_grade() const { return -depth; }
  int max_grade() const { return affine() ? 0 : depth; }
};

template <class T> Mat<T> hermitian_matrix(const ModelSpec& s) {
  if (s.kind != ModelKind::CR) throw Error("DimensionMismatch", "hermitian form needs a CR model");
  Mat<T> H(s.n, Ring::C);
  H(0, s.n - 1) = Quat<T>(1);
  H(s.n - 1, 0) = Quat<T>(1);
  for (int j = 1; j <= s.p + s.q; ++j) H(j, j) = Quat<T>(j <= s.p ? 1 : -1);
  return H;
}

// z^* H z
template <class T> Quat<T> hermitian_form_eval(const ModelSpec& s, const Vec<T>& z) {
  if (int(z.size()) != s.n) throw Error("DimensionMismatch", "CR coordinates");
  Mat<T> H = hermitian_matrix<T>(s);
  Vec<T> Hz = H * z;
  Quat<T> r;
  for (int i = 0; i < s.n; ++i) r += z[i].conj() * Hz[i];
  return r;
}

template <class T> bool nullcone_contains(const ModelSpec& s, const Vec<T>& z, double tol = 1e-9) {
  Quat<T> h = hermitian_form_eval(s, z);
  if constexpr (Num<T>::exact) return h.is_zero();
  else {
    double nz = 0;
    for (auto& c : z) nz += Num<T>::d(c.norm2());
    return h.abs() <= tol * std::max(1.0, nz);
  }
}

template <class T> bool small(const Mat<T>& X, double tol) {
  if constexpr (Num<T>::exact) return X.is_zero();
  else return X.norm() <= tol;
}

template <class T> bool in_algebra(const ModelSpec& s, const Mat<T>& X, double tol = 1e-9) {
  if (X.n != s.n) return false;
  for (auto& q : X.e) {
    if (s.ring == Ring::C && !(Num<T>::exact ? q.is_complex() : std::abs(Num<T>::d(q.y)) + std::abs(Num<T>::d(q.z)) <= tol)) return false;
    if (s.ring == Ring::R && !(Num<T>::exact ? q.is_real() : to_double(q - Quat<T>(q.w)).abs() <= tol)) return false;
  }
  switch (s.kind) {
    case ModelKind::CPROJ:
    case ModelKind::HPROJ: return true;
    case ModelKind::CR: {
      Mat<T> H = hermitian_matrix<T>(s);
      return small(Mat<T>(X.conj_transpose() * H + H * X), tol);
    }
    case ModelKind::AFF:
    case ModelKind::EUC: {
      for (int j = 0; j < s.n; ++j)
        if (!small(Mat<T>::unit(s.n, 0, 0, X(s.m, j)), tol)) return false;
      if (s.kind == ModelKind::EUC)
        for (int i = 0; i < s.m; ++i)
          for (int j = 0; j < s.m; ++j)
            if (!small(Mat<T>::unit(s.n, 0, 0, X(i, j) + X(j, i)), tol)) return false;
      return true;
    }
  }
  return false;
}

template <class T> Mat<T> grading_project(const ModelSpec& s, const Mat<T>& X, int i, bool check = true) {
  if (check && !in_algebra(s, X)) throw Error("NotInAlgebra", "element not in " + s.tag());
  Mat<T> r(s.n, X.ring);
  for (int a = 0; a < s.n; ++a)
    for (int b = 0; b < s.n; ++b)
      if (s.grade(a, b) == i) r(a, b) = X(a, b);
  return r;
}

// projection onto the strictly negative part
template <class T> Mat<T> project_minus(const ModelSpec& s, const Mat<T>& X) {
  Mat<T> r(s.n, X.ring);
  for (int a = 0; a < s.n; ++a)
    for (int b = 0; b < s.n; ++b)
      if (s.grade(a, b) < 0) r(a, b) = X(a, b);
  return r;
}

// remove the central part so that equivalent algebra elements compare entrywise
template <class T> Mat<T> alg_canonical(const ModelSpec& s, const Mat<T>& X) {
  if (s.affine()) return X;
  Quat<T> tr = X.trace();
  if (s.kind == ModelKind::HPROJ) tr = Quat<T>(tr.w);
  Quat<T> c = tr.scaled(T(T(1) / T(s.n)));
  Mat<T> r = X;
  for (int i = 0; i < s.n; ++i) r(i, i) -= c;
  return r;
}

template <class T> bool alg_equal(const ModelSpec& s, const Mat<T>& A, const Mat<T>& B, double tol = 1e-9) {
  return approx_equal(alg_canonical(s, A), alg_canonical(s, B), Num<T>::exact ? 0.0 : tol);
}

// pivot entry used for projective scalar normalisation
template <class T> int pivot_index(const Mat<T>& A) {
  if constexpr (Num<T>::exact) {
    for (size_t k = 0; k < A.e.size(); ++k)
      if (!A.e[k].is_zero()) return int(k);
    return -1;
  } else {
    double best = 0;
    int at = -1;
    for (size_t k = 0; k < A.e.size(); ++k) {
      double v = A.e[k].abs();
      if (v > best * (1 + 1e-12)) { best = v; at = int(k); }
    }
    return at;
  }
}

// group equality under the model's centre: C^x, R^x (H), U(1) (CR), none (affine)
template <class T> bool group_equal(const ModelSpec& s, const Mat<T>& A, const Mat<T>& B, double tol = 1e-9) {
  if (A.n != B.n) throw Error("DimensionMismatch", "group elements");
  if (s.affine()) return approx_equal(A, B, Num<T>::exact ? 0.0 : tol);
  int k = pivot_index(B);
  if (k < 0 || A.e[k].is_zero()) return false;
  Quat<T> c = rdiv(A.e[k], B.e[k]);
  if (s.kind == ModelKind::HPROJ) {
    if constexpr (Num<T>::exact) {
      if (!c.is_real()) return false;
    } else {
      if (to_double(c - Quat<T>(c.w)).abs() > tol * c.abs()) return false;
      c = Quat<T>(c.w);
    }
  }
  if (s.kind == ModelKind::CR) {
    if constexpr (Num<T>::exact) {
      if (c.norm2() != T(1)) return false;
    } else {
      if (std::abs(c.abs() - 1.0) > tol) return false;
    }
  }
  Mat<T> cb = B.lscale(c);
  if constexpr (Num<T>::exact) return A == cb;
  else return (A - cb).norm() <= tol * std::max(1.0, A.norm());
}

// scalar-normalised copy; equal keys iff group_equal (affine and projective exact cases)
template <class T> Mat<T> group_canonical(const ModelSpec& s, const Mat<T>& A) {
  if (s.affine()) return A;
  int k = pivot_index(A);
  if (k < 0) throw Error("Singular", "zero matrix");
  Quat<T> c = A.e[k];
  if (s.kind == ModelKind::HPROJ) {
    // only real rescaling is allowed: use the first nonzero real component
    const T* parts[4] = {&c.w, &c.x, &c.y, &c.z};
    for (auto* pp : parts)
      if (!Num<T>::zero(*pp)) { c = Quat<T>(*pp); break; }
  }
  if (s.kind == ModelKind::CR) {
    QD cd = to_double(c);
    double a = cd.abs();
    if constexpr (Num<T>::exact) {
      // only the phase can be removed; keep the exact representative when |c| = 1
      if (c.norm2() == T(1)) return A.lscale(c.inv());
      return A;
    } else {
      return A.lscale(Quat<T>(cd.w / a, cd.x / a).inv());
    }
  }
  return A.lscale(c.inv());
}

template <class T> bool in_P(const ModelSpec& s, const Mat<T>& b, double tol = 1e-9) {
  if (b.n != s.n) return false;
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j)
      if (s.grade(i, j) < 0 && !(Num<T>::exact ? b(i, j).is_zero() : to_double(b(i, j)).abs() <= tol)) return false;
  return true;
}

// block lower unitriangular with respect to the grading blocks
template <class T> bool in_G_minus_pattern(const ModelSpec& s, const Mat<T>& g, double tol = 1e-9) {
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) {
      int gr = s.grade(i, j);
      Quat<T> expect = (gr == 0 && i == j) ? Quat<T>(1) : Quat<T>(0);
      if (gr < 0) continue;
      if constexpr (Num<T>::exact) {
        if (g(i, j) != expect) return false;
      } else {
        if (to_double(g(i, j) - expect).abs() > tol) return false;
      }
    }
  return true;
}

struct IsotropyParams {
  // P_+ row for CPROJ/HPROJ (length m); beta (length p+q) for CR; linear part for AFF/EUC
  Vec<Rat> row;
  Rat s = 0;
  std::optional<Mat<Rat>> g0;
};

struct IsotropyResult {
  Mat<Rat> b;
  bool non_null = false;
  std::string cls;  // central, timelike, spacelike, null, projective, linear
};

IsotropyResult build_isotropy(const ModelSpec& s, const IsotropyParams& prm);

// real spanning basis of the model algebra, and its graded pieces
template <class T> std::vector<Mat<T>> algebra_basis(const ModelSpec& s);
template <class T> std::vector<Mat<T>> graded_basis(const ModelSpec& s, int grade);

// p_+ basis used for curvature slots (g_1 then g_2); for affine models the
// slots are the dual translation basis
template <class T> struct SlotBasis {
  std::vector<Mat<T>> elems;
  std::vector<int> grades;
};
template <class T> SlotBasis<T> slot_basis(const ModelSpec& s);

// real coordinates of X in a basis; throws NotInAlgebra if X is outside the span
template <class T> std::vector<T> coordinates(const std::vector<Mat<T>>& basis, const Mat<T>& X);

template <class T> struct CurvatureTensor {
  // (a,b) with a<b -> W, where a,b index the slot basis
  std::map<std::pair<int, int>, Mat<T>> terms;
  int n = 0;

  explicit CurvatureTensor(int n_ = 0) : n(n_) {}

  void add(int a, int b, const Mat<T>& W) {
    if (a == b) return;
    Mat<T> w = W;
    if (a > b) { std::swap(a, b); w = -w; }
    auto it = terms.find({a, b});
    if (it == terms.end()) terms.emplace(std::make_pair(a, b), w);
    else it->second += w;
  }
  void prune() {
    for (auto it = terms.begin(); it != terms.end();) {
      bool z;
      if constexpr (Num<T>::exact) z = it->second.is_zero();
      else z = it->second.norm() == 0.0;
      if (z) it = terms.erase(it);
      else ++it;
    }
  }
  double norm() const {
    double t = 0;
    for (auto& kv : terms) t += kv.second.norm() * kv.second.norm();
    return std::sqrt(t);
  }
  bool is_zero() const {
    for (auto& kv : terms)
      if (!kv.second.is_zero()) return false;
    return true;
  }
};

template <class T>
CurvatureTensor<T> curvature_rep_action(const ModelSpec& s, const Mat<T>& b, const CurvatureTensor<T>& w);

template <class T> bool regularity_check(const ModelSpec& s, const CurvatureTensor<T>& w);

// true if every nonzero graded component sits in a homogeneity <= 0 slot
template <class T> bool only_excluded_slots(const ModelSpec& s, const CurvatureTensor<T>& w);

}  // namespace cartan
