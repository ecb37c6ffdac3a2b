#include "cartan/holonomy.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace cartan {

template <class T> PLPath<T> reverse(const PLPath<T>& p) {
  PLPath<T> r(p.model, p.start * develop_path(p).endpoint);
  for (auto it = p.segs.rbegin(); it != p.segs.rend(); ++it) r.segs.push_back({-it->X, it->dt, it->label.empty() ? "" : it->label + "^-1"});
  return r;
}

template <class T> PLPath<T> concat(const PLPath<T>& a, const PLPath<T>& b) {
  PLPath<T> r = a;
  for (auto& s : b.segs) r.segs.push_back(s);
  return r;
}

template <class T> Mat<T> segment_exp(const Mat<T>& X, const T& dt) {
  Mat<T> Y = X.scaled(dt);
  Mat<T> P = Mat<T>::identity(Y.n, Y.ring), S = P;
  T fact(1);
  for (int j = 1; j <= Y.n; ++j) {
    P = P * Y;
    if (P.is_zero()) return S;
    fact = T(fact * T(j));
    S += P.scaled(T(T(1) / fact));
  }
  if constexpr (Num<T>::exact) {
    throw Error("StepFailure", "exact development needs nilpotent velocity");
  } else {
    try {
      return mat_exp_general(Y, 1e-12);
    } catch (const Error& e) {
      throw Error("StepFailure", e.what());
    }
  }
}

template <class T> DevelopmentResult<T> develop_path(const PLPath<T>& p) {
  DevelopmentResult<T> r;
  Mat<T> g = Mat<T>::identity(p.model.n, p.model.ring);
  r.breakpoints.push_back(g);
  for (auto& s : p.segs) {
    if (s.X.n != p.model.n) throw Error("DimensionMismatch", "segment velocity");
    g = g * segment_exp(s.X, s.dt);
    r.breakpoints.push_back(g);
    r.step_errors.push_back(0.0);
  }
  r.endpoint = g;
  return r;
}

namespace {

Mat<double> dexpinv(const Mat<double>& u, const Mat<double>& A) {
  Mat<double> c1 = commutator(u, A);
  return A + c1.scaled(0.5) + commutator(u, c1).scaled(1.0 / 12.0);
}

Mat<double> rkmk4(const ModelSpec& s, const std::function<Mat<double>(double)>& A, double t0, double t1, int steps) {
  Mat<double> g = Mat<double>::identity(s.n, s.ring);
  double h = (t1 - t0) / steps;
  Mat<double> zero(s.n, s.ring);
  for (int i = 0; i < steps; ++i) {
    double t = t0 + i * h;
    Mat<double> k1 = dexpinv(zero, A(t));
    Mat<double> k2 = dexpinv(k1.scaled(h / 2), A(t + h / 2));
    Mat<double> k3 = dexpinv(k2.scaled(h / 2), A(t + h / 2));
    Mat<double> k4 = dexpinv(k3.scaled(h), A(t + h));
    Mat<double> u = (k1 + k2.scaled(2) + k3.scaled(2) + k4).scaled(h / 6);
    g = g * segment_exp(u, 1.0);
  }
  return g;
}

}  // namespace

GenericDevelopment develop_generic(const ModelSpec& s, const std::function<Mat<double>(double)>& A, double t0, double t1, double tol,
                                   int max_halvings) {
  GenericDevelopment r;
  int steps = 1;
  Mat<double> prev = rkmk4(s, A, t0, t1, steps);
  for (int h = 0; h < max_halvings; ++h) {
    steps *= 2;
    Mat<double> cur = rkmk4(s, A, t0, t1, steps);
    double err = (cur - prev).norm();
    prev = cur;
    r.error_estimate = err;
    r.steps = steps;
    if (err <= tol * std::max(1.0, cur.norm())) {
      r.endpoint = cur;
      return r;
    }
  }
  throw Error("StepFailure", "development did not settle under step halving");
}

template <class T> Mat<T> euc_translation(int m, const std::vector<T>& v) {
  if (int(v.size()) != m) throw Error("DimensionMismatch", "translation vector");
  Mat<T> g = Mat<T>::identity(m + 1, Ring::R);
  for (int i = 0; i < m; ++i) g(i, m) = Quat<T>(v[i]);
  return g;
}

template <class T> Mat<T> translation_velocity(int m, const std::vector<T>& v) {
  if (int(v.size()) != m) throw Error("DimensionMismatch", "translation vector");
  Mat<T> X(m + 1, Ring::R);
  for (int i = 0; i < m; ++i) X(i, m) = Quat<T>(v[i]);
  return X;
}

Geometry<double> flat_torus(const std::vector<std::array<double, 2>>& basis) {
  Geometry<double> g{GeometryKind::FLAT_QUOTIENT, ModelSpec::euc(2), {}};
  for (auto& b : basis) g.deck.push_back(euc_translation<double>(2, {b[0], b[1]}));
  return g;
}

Geometry<Rat> flat_torus_exact(const std::vector<std::array<Rat, 2>>& basis) {
  Geometry<Rat> g{GeometryKind::FLAT_QUOTIENT, ModelSpec::euc(2), {}};
  for (auto& b : basis) g.deck.push_back(euc_translation<Rat>(2, {b[0], b[1]}));
  return g;
}

namespace {

template <class T> bool near_int(const T& v) {
  if constexpr (Num<T>::exact) return v.get_den() == 1;
  else return std::abs(v - std::round(v)) <= 1e-9;
}

// lambda is a pure translation whose vector is an integer combination of the deck vectors
template <class T> bool in_lattice(const Geometry<T>& g, const Mat<T>& lam) {
  int m = g.model.m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Quat<T> expect = Quat<T>(i == j ? 1 : 0);
      if constexpr (Num<T>::exact) {
        if (lam(i, j) != expect) return false;
      } else {
        if ((lam(i, j) - expect).abs() > 1e-9) return false;
      }
    }
  if (g.deck.size() != 2 || m != 2) throw Error("PreconditionFailed", "flat quotients are planar tori here");
  T a = g.deck[0](0, 2).w, b = g.deck[1](0, 2).w, c = g.deck[0](1, 2).w, d = g.deck[1](1, 2).w;
  T det = T(a * d - b * c);
  if (Num<T>::zero(det)) throw Error("Singular", "degenerate lattice");
  T vx = lam(0, 2).w, vy = lam(1, 2).w;
  T n1 = T((d * vx - b * vy) / det), n2 = T((a * vy - c * vx) / det);
  return near_int(n1) && near_int(n2);
}

}  // namespace

template <class T> Mat<T> loop_holonomy(const Geometry<T>& g, const PLPath<T>& p, const Mat<T>& h) {
  Mat<T> D = develop_path(p).endpoint;
  Mat<T> hol = D * h.inverse();
  const ModelSpec& s = g.model;
  if (g.kind == GeometryKind::KLEIN) {
    if (!group_equal(s, hol, Mat<T>::identity(s.n, s.ring))) throw Error("NotALoop", "gamma(1) h^{-1} differs from gamma(0)");
    return hol;
  }
  Mat<T> lam = p.start * hol * p.start.inverse();
  if (!in_lattice(g, lam)) throw Error("NotALoop", "endpoint is not a deck translate of the start");
  return hol;
}

template <class T> BacktrackCertificate certify_backtracking(const PLPath<T>& p) {
  BacktrackCertificate c;
  struct Item {
    Mat<T> X;
    T dt;
    std::string name;
  };
  std::vector<Item> stack;
  auto name_of = [&](size_t i) { return p.segs[i].label.empty() ? "s" + std::to_string(i) : p.segs[i].label; };
  for (size_t i = 0; i < p.segs.size(); ++i) {
    const auto& sg = p.segs[i];
    if (sg.X.is_zero() || Num<T>::zero(sg.dt)) {
      c.trace.push_back("drop constant " + name_of(i));
      continue;
    }
    Item it{sg.X, sg.dt, name_of(i)};
    for (;;) {
      if (stack.empty()) {
        stack.push_back(it);
        break;
      }
      Item& top = stack.back();
      if (top.X == it.X) {
        c.trace.push_back("merge " + top.name + " " + it.name);
        top.dt += it.dt;
        top.name += "+" + it.name;
        break;
      }
      if (top.X == -it.X) {
        c.cancellations++;
        if (top.dt == it.dt) {
          c.trace.push_back("cancel " + top.name + " " + it.name);
          stack.pop_back();
        } else if (top.dt > it.dt) {
          c.trace.push_back("cancel part of " + top.name + " with " + it.name);
          top.dt -= it.dt;
        } else {
          c.trace.push_back("cancel " + top.name + " with part of " + it.name);
          it.dt -= top.dt;
          stack.pop_back();
          continue;
        }
        break;
      }
      stack.push_back(it);
      break;
    }
  }
  c.certified = stack.empty();
  return c;
}

template <class T> std::string group_key(const ModelSpec& s, const Mat<T>& g) {
  Mat<T> c = group_canonical(s, g);
  std::ostringstream os;
  if constexpr (Num<T>::exact) {
    for (auto& q : c.e) os << to_string(q) << ',';
  } else {
    for (auto& q : c.e)
      for (double v : {q.w, q.x, q.y, q.z}) os << std::llround(v * 1e9) << ',';
  }
  return os.str();
}

template <class T>
SubgroupClosure<T> holonomy_closure(const ModelSpec& s, const std::vector<Mat<T>>& gens, const Mat<T>& a, int word_bound,
                                    long element_cap) {
  SubgroupClosure<T> r;
  r.generators = gens;
  r.a = a;
  r.word_bound = word_bound;
  struct Letter {
    Mat<T> m;
    int de;
  };
  std::vector<Letter> alpha;
  for (auto& g : gens) {
    alpha.push_back({g, 0});
    alpha.push_back({g.inverse(), 0});
  }
  alpha.push_back({a, 1});
  alpha.push_back({a.inverse(), -1});
  Mat<T> e = Mat<T>::identity(s.n, a.ring);
  std::set<std::string> seen_nodes, seen_elems;
  std::vector<std::pair<Mat<T>, int>> frontier{{e, 0}};
  seen_nodes.insert(group_key(s, e) + "|0");
  seen_elems.insert(group_key(s, e));
  r.elements.push_back(group_canonical(s, e));
  for (int level = 1; level <= word_bound && !r.cap_exceeded; ++level) {
    std::vector<std::pair<Mat<T>, int>> next;
    int fresh = 0;
    for (auto& [g, ex] : frontier) {
      for (auto& L : alpha) {
        int ne = ex + L.de;
        if (std::abs(ne) > word_bound - level) continue;
        Mat<T> h = g * L.m;
        std::string k = group_key(s, h);
        if (!seen_nodes.insert(k + "|" + std::to_string(ne)).second) continue;
        next.push_back({h, ne});
        if (ne == 0 && seen_elems.insert(k).second) {
          r.elements.push_back(group_canonical(s, h));
          fresh++;
        }
        if (long(seen_nodes.size()) > element_cap) {
          r.cap_exceeded = true;
          break;
        }
      }
      if (r.cap_exceeded) break;
    }
    r.new_per_level.push_back(fresh);
    frontier = std::move(next);
  }
  r.saturated = !r.cap_exceeded && !r.new_per_level.empty() && r.new_per_level.back() == 0;
  if (word_bound == 0) r.saturated = false;
  return r;
}

std::set<Rat> aff1_dyadic_oracle(int L) {
  // state (e, c) is the map x -> 2^{-e} x + c
  std::set<std::pair<int, Rat>> seen{{0, Rat(0)}};
  std::vector<std::pair<int, Rat>> frontier{{0, Rat(0)}};
  std::set<Rat> out{Rat(0)};
  for (int level = 1; level <= L; ++level) {
    std::vector<std::pair<int, Rat>> next;
    for (auto& [e, c] : frontier) {
      Rat step = 1;
      if (e >= 0) mpq_div_2exp(step.get_mpq_t(), step.get_mpq_t(), e);
      else mpq_mul_2exp(step.get_mpq_t(), step.get_mpq_t(), -e);
      std::pair<int, Rat> moves[4] = {{e, Rat(c + step)}, {e, Rat(c - step)}, {e + 1, c}, {e - 1, c}};
      for (auto& mv : moves) {
        if (std::abs(mv.first) > L - level) continue;
        if (!seen.insert(mv).second) continue;
        next.push_back(mv);
        if (mv.first == 0) out.insert(mv.second);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

#define CARTAN_HOL(T)                                                                                        \
  template PLPath<T> reverse<T>(const PLPath<T>&);                                                           \
  template PLPath<T> concat<T>(const PLPath<T>&, const PLPath<T>&);                                          \
  template Mat<T> segment_exp<T>(const Mat<T>&, const T&);                                                   \
  template DevelopmentResult<T> develop_path<T>(const PLPath<T>&);                                           \
  template Mat<T> euc_translation<T>(int, const std::vector<T>&);                                            \
  template Mat<T> translation_velocity<T>(int, const std::vector<T>&);                                       \
  template Mat<T> loop_holonomy<T>(const Geometry<T>&, const PLPath<T>&, const Mat<T>&);                     \
  template BacktrackCertificate certify_backtracking<T>(const PLPath<T>&);                                   \
  template std::string group_key<T>(const ModelSpec&, const Mat<T>&);                                        \
  template SubgroupClosure<T> holonomy_closure<T>(const ModelSpec&, const std::vector<Mat<T>>&, const Mat<T>&, int, long);

CARTAN_HOL(Rat)
CARTAN_HOL(double)

}  // namespace cartan
