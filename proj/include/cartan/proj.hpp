#pragma once

#include "cartan/mat.hpp"

#include <string>

namespace cartan {

// homogeneous column, rescaled on the right
template <class T> struct ProjPoint {
  std::string model;
  Vec<T> v;

  ProjPoint() = default;
  ProjPoint(std::string m, Vec<T> c) : model(std::move(m)), v(std::move(c)) {}

  int first_nonzero() const {
    for (size_t i = 0; i < v.size(); ++i)
      if (!v[i].is_zero()) return int(i);
    return -1;
  }

  ProjPoint canonical() const {
    int i = first_nonzero();
    if (i < 0) throw Error("Singular", "zero homogeneous vector");
    ProjPoint r = *this;
    Quat<T> s = v[i].inv();
    for (auto& c : r.v) c = c * s;
    r.v[i] = Quat<T>(1);
    return r;
  }
};

template <class T> ProjPoint<double> to_double(const ProjPoint<T>& p) {
  ProjPoint<double> r;
  r.model = p.model;
  for (auto& c : p.v) r.v.push_back(to_double(c));
  return r;
}

// min over unit scalars u of |p - q u| for unit representatives
template <class T> double chordal_distance(const ProjPoint<T>& p, const ProjPoint<T>& q) {
  if (p.v.size() != q.v.size()) throw Error("DimensionMismatch", "projective points");
  double np = 0, nq = 0;
  QD ip;
  for (size_t i = 0; i < p.v.size(); ++i) {
    QD a = to_double(p.v[i]), b = to_double(q.v[i]);
    np += a.norm2();
    nq += b.norm2();
    ip += b.conj() * a;
  }
  if (np == 0 || nq == 0) throw Error("Singular", "zero homogeneous vector");
  // the optimal unit scalar is the phase of <q,p>; evaluate |p - q u| directly for stability
  double a = ip.abs();
  QD u = a > 0 ? ip.scaled(1.0 / a) : QD(1);
  double sp = 1.0 / std::sqrt(np), sq = 1.0 / std::sqrt(nq), d2 = 0;
  for (size_t i = 0; i < p.v.size(); ++i) {
    QD diff = to_double(p.v[i]).scaled(sp) - (to_double(q.v[i]) * u).scaled(sq);
    d2 += diff.norm2();
  }
  return std::sqrt(d2);
}

template <class T> bool proj_equal(const ProjPoint<T>& p, const ProjPoint<T>& q, double tol = 1e-9) {
  if (p.v.size() != q.v.size() || p.model != q.model) throw Error("DimensionMismatch", "projective points");
  if constexpr (Num<T>::exact) {
    return p.canonical().v == q.canonical().v;
  } else {
    return chordal_distance(p, q) < tol;
  }
}

template <class T> ProjPoint<T> act(const Mat<T>& g, const ProjPoint<T>& p) {
  return ProjPoint<T>(p.model, g * p.v);
}

}  // namespace cartan
