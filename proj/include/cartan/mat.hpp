#pragma once

#include "cartan/scalar.hpp"

#include <vector>

namespace cartan {

template <class T> using Vec = std::vector<Quat<T>>;

template <class T> struct Mat {
  int n = 0;
  Ring ring = Ring::C;
  std::vector<Quat<T>> e;

  Mat() = default;
  Mat(int n_, Ring r = Ring::C) : n(n_), ring(r), e(size_t(n_) * n_) {}

  static Mat identity(int n, Ring r = Ring::C) {
    Mat m(n, r);
    for (int i = 0; i < n; ++i) m(i, i) = Quat<T>(1);
    return m;
  }
  static Mat unit(int n, int i, int j, Quat<T> v = Quat<T>(1), Ring r = Ring::C) {
    Mat m(n, r);
    m(i, j) = v;
    return m;
  }

  Quat<T>& operator()(int i, int j) { return e[size_t(i) * n + j]; }
  const Quat<T>& operator()(int i, int j) const { return e[size_t(i) * n + j]; }

  Mat operator+(const Mat& o) const {
    check(o);
    Mat r(n, join(ring, o.ring));
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = e[k] + o.e[k];
    return r;
  }
  Mat operator-(const Mat& o) const {
    check(o);
    Mat r(n, join(ring, o.ring));
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = e[k] - o.e[k];
    return r;
  }
  Mat operator-() const {
    Mat r(n, ring);
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = -e[k];
    return r;
  }
  Mat operator*(const Mat& o) const {
    check(o);
    Mat r(n, join(ring, o.ring));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const Quat<T>& a = (*this)(i, k);
        if (a.is_zero()) continue;
        for (int j = 0; j < n; ++j) r(i, j) += a * o(k, j);
      }
    return r;
  }
  Vec<T> operator*(const Vec<T>& v) const {
    if (int(v.size()) != n) throw Error("DimensionMismatch", "matrix-vector");
    Vec<T> r(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) r[i] += (*this)(i, k) * v[k];
    return r;
  }
  Mat& operator+=(const Mat& o) { return *this = *this + o; }
  Mat& operator-=(const Mat& o) { return *this = *this - o; }

  // s * M
  Mat lscale(const Quat<T>& s) const {
    Mat r(n, join(ring, s.ring()));
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = s * e[k];
    return r;
  }
  // M * s
  Mat rscale(const Quat<T>& s) const {
    Mat r(n, join(ring, s.ring()));
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = e[k] * s;
    return r;
  }
  Mat scaled(const T& s) const {
    Mat r(n, ring);
    for (size_t k = 0; k < e.size(); ++k) r.e[k] = e[k].scaled(s);
    return r;
  }

  Mat conj_transpose() const {
    Mat r(n, ring);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r(j, i) = (*this)(i, j).conj();
    return r;
  }

  bool is_zero() const {
    for (auto& q : e)
      if (!q.is_zero()) return false;
    return true;
  }
  bool operator==(const Mat& o) const { return n == o.n && e == o.e; }
  bool operator!=(const Mat& o) const { return !(*this == o); }

  Ring entry_ring() const {
    Ring r = Ring::R;
    for (auto& q : e) r = join(r, q.ring());
    return r;
  }

  double norm() const {
    double s = 0;
    for (auto& q : e) s += Num<T>::d(q.norm2());
    return std::sqrt(s);
  }

  Quat<T> trace() const {
    Quat<T> t;
    for (int i = 0; i < n; ++i) t += (*this)(i, i);
    return t;
  }

  // Gauss-Jordan with left row operations only, so it is valid over H
  Mat inverse() const {
    Mat a = *this;
    Mat b = identity(n, ring);
    for (int p = 0; p < n; ++p) {
      int piv = -1;
      if constexpr (Num<T>::exact) {
        for (int i = p; i < n; ++i)
          if (!a(i, p).is_zero()) { piv = i; break; }
      } else {
        double best = 0;
        for (int i = p; i < n; ++i) {
          double v = a(i, p).abs();
          if (v > best) { best = v; piv = i; }
        }
        if (best < 1e-300) piv = -1;
      }
      if (piv < 0) throw Error("Singular", "matrix not invertible");
      if (piv != p)
        for (int j = 0; j < n; ++j) {
          std::swap(a(p, j), a(piv, j));
          std::swap(b(p, j), b(piv, j));
        }
      Quat<T> s = a(p, p).inv();
      for (int j = 0; j < n; ++j) {
        a(p, j) = s * a(p, j);
        b(p, j) = s * b(p, j);
      }
      for (int i = 0; i < n; ++i) {
        if (i == p || a(i, p).is_zero()) continue;
        Quat<T> f = a(i, p);
        for (int j = 0; j < n; ++j) {
          a(i, j) -= f * a(p, j);
          b(i, j) -= f * b(p, j);
        }
      }
    }
    return b;
  }

  Mat pow(long k) const {
    Mat base = k < 0 ? inverse() : *this;
    unsigned long u = k < 0 ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
    Mat r = identity(n, ring);
    while (u) {
      if (u & 1) r = r * base;
      u >>= 1;
      if (u) base = base * base;
    }
    return r;
  }

  void check(const Mat& o) const {
    if (n != o.n) throw Error("DimensionMismatch", "matrix sizes differ");
  }
};

template <class T> Mat<double> to_double(const Mat<T>& m) {
  Mat<double> r(m.n, m.ring);
  for (size_t k = 0; k < m.e.size(); ++k) r.e[k] = to_double(m.e[k]);
  return r;
}

template <class T> Mat<T> commutator(const Mat<T>& a, const Mat<T>& b) { return a * b - b * a; }

// b X b^{-1}
template <class T> Mat<T> Ad(const Mat<T>& b, const Mat<T>& X) { return b * X * b.inverse(); }
template <class T> Mat<T> Ad(const Mat<T>& b, const Mat<T>& binv, const Mat<T>& X) { return b * X * binv; }

template <class T> bool approx_equal(const Mat<T>& a, const Mat<T>& b, double tol) {
  if constexpr (Num<T>::exact) {
    if (tol == 0) return a == b;
  }
  return (a - b).norm() <= tol;
}

// sum_{j<d} X^j / j!  exact when T is exact
template <class T> Mat<T> mat_exp_nilpotent(const Mat<T>& X, int bound) {
  Mat<T> P = Mat<T>::identity(X.n, X.ring);
  Mat<T> S = P;
  T fact(1);
  for (int j = 1; j <= bound; ++j) {
    P = P * X;
    bool z;
    if constexpr (Num<T>::exact) z = P.is_zero();
    else z = P.norm() <= 1e-13 * (1.0 + X.norm());
    if (z) return S;
    if (j == bound) break;
    fact = T(fact * T(j));
    S += P.scaled(T(T(1) / fact));
  }
  throw Error("NotNilpotent", "X^" + std::to_string(bound) + " != 0");
}

// log(I+N) for unipotent I+N via the finite Mercator series
template <class T> Mat<T> mat_log_unipotent(const Mat<T>& U, int bound) {
  Mat<T> N = U - Mat<T>::identity(U.n, U.ring);
  Mat<T> P = Mat<T>::identity(U.n, U.ring);
  Mat<T> S(U.n, U.ring);
  for (int j = 1; j <= bound; ++j) {
    P = P * N;
    bool z;
    if constexpr (Num<T>::exact) z = P.is_zero();
    else z = P.norm() <= 1e-13 * (1.0 + N.norm());
    if (z) return S;
    if (j == bound) break;
    T c = T(j % 2 ? 1 : -1) / T(j);
    S += P.scaled(c);
  }
  throw Error("NotNilpotent", "log of non-unipotent matrix");
}

Mat<double> mat_exp_general(const Mat<double>& X, double tol = 1e-9);

}  // namespace cartan
