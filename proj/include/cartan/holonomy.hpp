#pragma once

#include "cartan/models.hpp"

#include <array>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace cartan {

// constant velocity X in the model algebra for a time dt
template <class T> struct Segment {
  Mat<T> X;
  T dt = T(1);
  std::string label;
};

template <class T> struct PLPath {
  ModelSpec model;
  Mat<T> start;  // bundle point over the starting point
  std::vector<Segment<T>> segs;

  PLPath() = default;
  PLPath(const ModelSpec& m) : model(m), start(Mat<T>::identity(m.n, m.ring)) {}
  PLPath(const ModelSpec& m, Mat<T> g0) : model(m), start(std::move(g0)) {}

  PLPath& then(const Mat<T>& X, const T& dt = T(1), std::string label = "") {
    segs.push_back({X, dt, std::move(label)});
    return *this;
  }
  T duration() const {
    T d(0);
    for (auto& s : segs) d += s.dt;
    return d;
  }
};

template <class T> PLPath<T> reverse(const PLPath<T>& p);
template <class T> PLPath<T> concat(const PLPath<T>& a, const PLPath<T>& b);

template <class T> struct DevelopmentResult {
  std::vector<Mat<T>> breakpoints;  // gamma_G at each breakpoint, starting with e
  Mat<T> endpoint;
  std::vector<double> step_errors;
};

// exp(dt X) exactly when X is nilpotent; the double path falls back to the
// general exponential
template <class T> Mat<T> segment_exp(const Mat<T>& X, const T& dt);

template <class T> DevelopmentResult<T> develop_path(const PLPath<T>& p);

// time-dependent velocity: RKMK4 with step halving until the endpoint settles
struct GenericDevelopment {
  Mat<double> endpoint;
  int steps = 0;
  double error_estimate = 0;
};
GenericDevelopment develop_generic(const ModelSpec& s, const std::function<Mat<double>(double)>& A, double t0, double t1,
                                   double tol = 1e-10, int max_halvings = 16);

enum class GeometryKind { KLEIN, FLAT_QUOTIENT };

template <class T> struct Geometry {
  GeometryKind kind = GeometryKind::KLEIN;
  ModelSpec model;
  std::vector<Mat<T>> deck;  // lattice translations for FLAT_QUOTIENT
};

template <class T> Geometry<T> klein(const ModelSpec& s) { return Geometry<T>{GeometryKind::KLEIN, s, {}}; }
Geometry<double> flat_torus(const std::vector<std::array<double, 2>>& basis);
Geometry<Rat> flat_torus_exact(const std::vector<std::array<Rat, 2>>& basis);

template <class T> Mat<T> euc_translation(int m, const std::vector<T>& v);
template <class T> Mat<T> translation_velocity(int m, const std::vector<T>& v);

// gamma_G(1) h^{-1}; throws NotALoop if the bundle path does not close up
template <class T> Mat<T> loop_holonomy(const Geometry<T>& g, const PLPath<T>& p, const Mat<T>& h);

struct BacktrackCertificate {
  bool certified = false;
  std::vector<std::string> trace;
  int cancellations = 0;
};

template <class T> BacktrackCertificate certify_backtracking(const PLPath<T>& p);

template <class T> struct SubgroupClosure {
  std::vector<Mat<T>> generators;
  Mat<T> a;
  int word_bound = 0;
  std::vector<Mat<T>> elements;  // canonical forms, BFS order
  std::vector<int> new_per_level;
  bool saturated = false;
  bool cap_exceeded = false;
};

template <class T> std::string group_key(const ModelSpec& s, const Mat<T>& g);

template <class T>
SubgroupClosure<T> holonomy_closure(const ModelSpec& s, const std::vector<Mat<T>>& gens, const Mat<T>& a, int word_bound,
                                    long element_cap);

// translations c reached in AFF(1) by words of length <= L in t_1^{+-1}, a^{+-1}
// with a the scaling by 1/2 and total a-exponent 0
std::set<Rat> aff1_dyadic_oracle(int L);

}  // namespace cartan
