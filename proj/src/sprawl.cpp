#include "cartan/sprawl.hpp"

#include "cartan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <unordered_map>

namespace cartan {

namespace {

Rat cross(const P2& a, const P2& b) { return a.x * b.y - a.y * b.x; }
Rat dot(const P2& a, const P2& b) { return a.x * b.x + a.y * b.y; }

Rat floor_rat(const Rat& v) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return Rat(q);
}
Rat ceil_rat(const Rat& v) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return Rat(q);
}
bool is_integer(const Rat& v) { return v.get_den() == 1; }

std::optional<Rat> exact_sqrt(const Rat& v) {
  if (sgn(v) < 0) return std::nullopt;
  if (!mpz_perfect_square_p(v.get_num_mpz_t()) || !mpz_perfect_square_p(v.get_den_mpz_t())) return std::nullopt;
  mpz_class n, d;
  mpz_sqrt(n.get_mpz_t(), v.get_num_mpz_t());
  mpz_sqrt(d.get_mpz_t(), v.get_den_mpz_t());
  Rat r(n, d);
  r.canonicalize();
  return r;
}

// outward rounding onto a 1/1024 grid
Rat down(double v) { return Rat(std::floor(v * 1024.0) - 1) / 1024; }
Rat up(double v) { return Rat(std::ceil(v * 1024.0) + 1) / 1024; }

Rat sqrt_up(const Rat& v) {
  if (auto r = exact_sqrt(v)) return *r;
  return up(std::sqrt(v.get_d()));
}

struct DSU {
  std::vector<int> p;
  explicit DSU(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

void check_budget(const SearchBudget& b) {
  if (b.max_depth < 0 || b.max_depth > 20) throw Error("ConfigInvalid", "max_depth must lie in [0,20]");
  if (b.bisect_depth < 0 || b.bisect_depth > 30) throw Error("ConfigInvalid", "bisect_depth must lie in [0,30]");
  if (b.search_res < 2) throw Error("ConfigInvalid", "search_res must be at least 2");
}

}  // namespace

std::string to_string(const P2& p) { return "(" + p.x.get_str() + "," + p.y.get_str() + ")"; }

Affine2 Affine2::operator*(const Affine2& o) const {
  Affine2 r;
  r.a = a * o.a + b * o.c;
  r.b = a * o.b + b * o.d;
  r.c = c * o.a + d * o.c;
  r.d = c * o.b + d * o.d;
  r.tx = a * o.tx + b * o.ty + tx;
  r.ty = c * o.tx + d * o.ty + ty;
  return r;
}

Affine2 Affine2::inverse() const {
  Rat det = a * d - b * c;
  if (sgn(det) == 0) throw Error("Singular", "affine map is not invertible");
  Affine2 r;
  r.a = d / det;
  r.b = -b / det;
  r.c = -c / det;
  r.d = a / det;
  r.tx = -(r.a * tx + r.b * ty);
  r.ty = -(r.c * tx + r.d * ty);
  return r;
}

Affine2 Affine2::pow(long k) const {
  if (k < 0) return inverse().pow(-k);
  Affine2 r, base = *this;
  while (k) {
    if (k & 1) r = base * r;
    base = base * base;
    k >>= 1;
  }
  return r;
}

bool Affine2::operator==(const Affine2& o) const {
  return a == o.a && b == o.b && c == o.c && d == o.d && tx == o.tx && ty == o.ty;
}

Affine2 Affine2::translation(Rat x, Rat y) {
  Affine2 r;
  r.tx = x;
  r.ty = y;
  return r;
}

Affine2 Affine2::rotation(Rat co, Rat si, P2 center) {
  if (co * co + si * si != 1) throw Error("ConfigInvalid", "rotation needs cos^2 + sin^2 = 1");
  Affine2 r;
  r.a = co;
  r.b = -si;
  r.c = si;
  r.d = co;
  r.tx = center.x - (co * center.x - si * center.y);
  r.ty = center.y - (si * center.x + co * center.y);
  return r;
}

Affine2 Affine2::scaling(Rat l, P2 center) {
  if (sgn(l) == 0) throw Error("ConfigInvalid", "scaling factor must be nonzero");
  Affine2 r;
  r.a = l;
  r.d = l;
  r.tx = center.x - l * center.x;
  r.ty = center.y - l * center.y;
  return r;
}

bool Primitive::contains(const P2& p) const {
  switch (kind) {
    case PrimKind::BALL: {
      P2 v = p - c;
      return dot(v, v) < r2;
    }
    case PrimKind::SECTOR: {
      P2 v = p - c;
      return sgn(cross(d1, v)) > 0 && sgn(cross(v, d2)) > 0 && dot(v, v) < r2;
    }
    case PrimKind::POLYGON:
      for (std::size_t i = 0; i < vs.size(); ++i) {
        const P2& a = vs[i];
        const P2& b = vs[(i + 1) % vs.size()];
        if (sgn(cross(b - a, p - a)) <= 0) return false;
      }
      return true;
    case PrimKind::QUADRIC: {
      P2 v = p - c;
      return qa * v.x * v.x + 2 * qb * v.x * v.y + qc * v.y * v.y < 1;
    }
  }
  return false;
}

P2 Primitive::lo() const {
  switch (kind) {
    case PrimKind::BALL: {
      Rat r = sqrt_up(r2);
      return {c.x - r, c.y - r};
    }
    case PrimKind::SECTOR: {
      double r = std::sqrt(r2.get_d());
      double ax = c.x.get_d(), ay = c.y.get_d();
      double mx = ax, my = ay;
      auto visit = [&](double ux, double uy) {
        mx = std::min(mx, ax + r * ux);
        my = std::min(my, ay + r * uy);
      };
      for (const P2* d : {&d1, &d2}) {
        double n = std::hypot(d->x.get_d(), d->y.get_d());
        visit(d->x.get_d() / n, d->y.get_d() / n);
      }
      for (P2 e : {P2(-1, 0), P2(0, -1)})
        if (sgn(cross(d1, e)) >= 0 && sgn(cross(e, d2)) >= 0) visit(e.x.get_d(), e.y.get_d());
      return {down(mx), down(my)};
    }
    case PrimKind::POLYGON: {
      P2 m = vs.at(0);
      for (auto& v : vs) {
        if (v.x < m.x) m.x = v.x;
        if (v.y < m.y) m.y = v.y;
      }
      return m;
    }
    case PrimKind::QUADRIC: {
      double det = Rat(qa * qc - qb * qb).get_d();
      return {down(c.x.get_d() - std::sqrt(qc.get_d() / det)), down(c.y.get_d() - std::sqrt(qa.get_d() / det))};
    }
  }
  return c;
}

P2 Primitive::hi() const {
  switch (kind) {
    case PrimKind::BALL: {
      Rat r = sqrt_up(r2);
      return {c.x + r, c.y + r};
    }
    case PrimKind::SECTOR: {
      double r = std::sqrt(r2.get_d());
      double ax = c.x.get_d(), ay = c.y.get_d();
      double mx = ax, my = ay;
      auto visit = [&](double ux, double uy) {
        mx = std::max(mx, ax + r * ux);
        my = std::max(my, ay + r * uy);
      };
      for (const P2* d : {&d1, &d2}) {
        double n = std::hypot(d->x.get_d(), d->y.get_d());
        visit(d->x.get_d() / n, d->y.get_d() / n);
      }
      for (P2 e : {P2(1, 0), P2(0, 1)})
        if (sgn(cross(d1, e)) >= 0 && sgn(cross(e, d2)) >= 0) visit(e.x.get_d(), e.y.get_d());
      return {up(mx), up(my)};
    }
    case PrimKind::POLYGON: {
      P2 m = vs.at(0);
      for (auto& v : vs) {
        if (v.x > m.x) m.x = v.x;
        if (v.y > m.y) m.y = v.y;
      }
      return m;
    }
    case PrimKind::QUADRIC: {
      double det = Rat(qa * qc - qb * qb).get_d();
      return {up(c.x.get_d() + std::sqrt(qc.get_d() / det)), up(c.y.get_d() + std::sqrt(qa.get_d() / det))};
    }
  }
  return c;
}

Primitive Primitive::ball(P2 c, Rat r2) {
  if (sgn(r2) <= 0) throw Error("ConfigInvalid", "ball radius must be positive");
  Primitive p;
  p.kind = PrimKind::BALL;
  p.c = c;
  p.r2 = r2;
  return p;
}

Primitive Primitive::sector(P2 apex, P2 d1, P2 d2, Rat r2) {
  if (sgn(cross(d1, d2)) <= 0) throw Error("ConfigInvalid", "sector must open counterclockwise by less than pi");
  if (sgn(r2) <= 0) throw Error("ConfigInvalid", "sector radius must be positive");
  Primitive p;
  p.kind = PrimKind::SECTOR;
  p.c = apex;
  p.d1 = d1;
  p.d2 = d2;
  p.r2 = r2;
  return p;
}

Primitive Primitive::polygon(std::vector<P2> vs) {
  if (vs.size() < 3) throw Error("ConfigInvalid", "polygon needs three vertices");
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const P2& a = vs[i];
    const P2& b = vs[(i + 1) % vs.size()];
    const P2& c = vs[(i + 2) % vs.size()];
    if (sgn(cross(b - a, c - b)) <= 0) throw Error("ConfigInvalid", "polygon must be strictly convex and counterclockwise");
  }
  Primitive p;
  p.kind = PrimKind::POLYGON;
  p.vs = std::move(vs);
  return p;
}

Primitive Primitive::quadric(P2 c, Rat qa, Rat qb, Rat qc) {
  if (sgn(qa) <= 0 || sgn(qa * qc - qb * qb) <= 0) throw Error("ConfigInvalid", "quadric must be positive definite");
  Primitive p;
  p.kind = PrimKind::QUADRIC;
  p.c = c;
  p.qa = qa;
  p.qb = qb;
  p.qc = qc;
  return p;
}

bool Region::contains(const P2& p) const {
  for (auto& q : parts)
    if (q.contains(p)) return true;
  return false;
}

P2 Region::lo() const {
  P2 m = parts.at(0).lo();
  for (auto& q : parts) {
    P2 l = q.lo();
    if (l.x < m.x) m.x = l.x;
    if (l.y < m.y) m.y = l.y;
  }
  return m;
}

P2 Region::hi() const {
  P2 m = parts.at(0).hi();
  for (auto& q : parts) {
    P2 h = q.hi();
    if (h.x > m.x) m.x = h.x;
    if (h.y > m.y) m.y = h.y;
  }
  return m;
}

std::string to_string(Carrier c) { return c == Carrier::PLANE ? "plane" : "torus"; }

std::string to_string(OracleKind o) {
  switch (o) {
    case OracleKind::NONE: return "none";
    case OracleKind::LIFT: return "lift";
    case OracleKind::FIXED_STAR: return "fixed-star";
    case OracleKind::AFFINE_SCALING: return "affine-scaling";
  }
  return "none";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::YES: return "YES";
    case Verdict::NO: return "NO";
    default: return "UNKNOWN";
  }
}

Scenario torus_translation_scenario() {
  Scenario s;
  s.name = "torus-translation";
  s.carrier = Carrier::TORUS;
  s.alpha = Affine2::translation(Rat(1, 4), Rat(1, 8));
  s.U.parts = {Primitive::ball({Rat(1, 2), Rat(1, 2)}, Rat(9, 100))};
  s.base = {Rat(1, 2), Rat(1, 2)};
  s.oracle = OracleKind::LIFT;
  s.window = 4;
  s.budget.search_res = 32;
  return s;
}

Scenario rotation_scenario() {
  Scenario s;
  s.name = "rotation";
  s.carrier = Carrier::PLANE;
  s.alpha = Affine2::rotation(Rat(3, 5), Rat(4, 5));
  s.U.parts = {Primitive::ball({0, 0}, 1), Primitive::sector({0, 0}, {1, 0}, {Rat(4, 5), Rat(3, 5)}, 9)};
  s.base = {0, 0};
  s.oracle = OracleKind::FIXED_STAR;
  s.window = 8;
  return s;
}

Scenario affine_scaling_scenario(Rat lambda) {
  Scenario s;
  s.name = "affine-scaling";
  s.carrier = Carrier::PLANE;
  s.alpha = Affine2::scaling(lambda);
  s.U.parts = {Primitive::ball({0, 0}, 1),
               Primitive::polygon({{0, Rat(-1, 4)}, {2, Rat(-1, 4)}, {2, Rat(1, 4)}, {0, Rat(1, 4)}})};
  s.base = {0, 0};
  s.oracle = OracleKind::AFFINE_SCALING;
  s.window = 8;
  return s;
}

Sprawl::Sprawl(Scenario s) : s_(std::move(s)) {
  if (s_.U.parts.empty()) throw Error("ConfigInvalid", "region needs at least one primitive");
  if (s_.mesh_res < 4) throw Error("ConfigInvalid", "mesh_res must be at least 4");
  check_budget(s_.budget);
  const Affine2& A = s_.alpha;
  if (sgn(A.a * A.d - A.b * A.c) == 0) throw Error("ConfigInvalid", "automorphism must be invertible");
  lo_ = s_.U.lo();
  hi_ = s_.U.hi();
  if (s_.carrier == Carrier::TORUS) {
    if (!is_integer(A.a) || !is_integer(A.b) || !is_integer(A.c) || !is_integer(A.d) || abs(A.a * A.d - A.b * A.c) != 1)
      throw Error("ConfigInvalid", "torus automorphism needs an integral unimodular linear part");
    if (hi_.x - lo_.x >= 1 || hi_.y - lo_.y >= 1) throw Error("ConfigInvalid", "torus region must fit in a unit box");
  }
  kcache_ = std::max<long>(64, 2 * s_.window + 4);
  pow_.resize(2 * kcache_ + 1);
  pow_[kcache_] = Affine2();
  Affine2 inv = A.inverse();
  for (long k = 1; k <= kcache_; ++k) {
    pow_[kcache_ + k] = A * pow_[kcache_ + k - 1];
    pow_[kcache_ - k] = inv * pow_[kcache_ - k + 1];
  }

  if (!in_U(s_.base) || !in_U(alpha_pow(1, s_.base)))
    throw Error("ConfigInvalid", "region must contain both the base point and its image under the automorphism");

  // convex pieces P cap alpha(Q) of U cap alpha(U), in chart coordinates
  const auto& parts = s_.U.parts;
  int np = int(parts.size());
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) {
      P2 ql = parts[q].lo(), qh = parts[q].hi();
      P2 corners[4] = {A(ql), A({qh.x, ql.y}), A(qh), A({ql.x, qh.y})};
      P2 l = corners[0], h = corners[0];
      for (auto& c : corners) {
        if (c.x < l.x) l.x = c.x;
        if (c.y < l.y) l.y = c.y;
        if (c.x > h.x) h.x = c.x;
        if (c.y > h.y) h.y = c.y;
      }
      P2 pl = parts[p].lo(), ph = parts[p].hi();
      if (s_.carrier == Carrier::PLANE) {
        if (h.x < pl.x || h.y < pl.y || l.x > ph.x || l.y > ph.y) continue;
        pieces_.push_back({p, q, {0, 0}});
      } else {
        for (Rat nx = floor_rat(pl.x - h.x); nx <= ceil_rat(ph.x - l.x); nx += 1)
          for (Rat ny = floor_rat(pl.y - h.y); ny <= ceil_rat(ph.y - l.y); ny += 1) pieces_.push_back({p, q, {nx, ny}});
      }
    }

  int nk = int(pieces_.size());
  DSU pd(std::max(nk, 1)), ud(np);
  std::vector<char> seen(nk, 0), useen(np, 0);
  Rat w = std::max(Rat(hi_.x - lo_.x), Rat(hi_.y - lo_.y));
  Rat h = w / s_.mesh_res;
  long nx = ceil_rat((hi_.x - lo_.x) / h).get_num().get_si(), ny = ceil_rat((hi_.y - lo_.y) / h).get_num().get_si();
  auto mark = [&](const P2& y) {
    int first = -1;
    for (int k = 0; k < nk; ++k)
      if (in_piece(pieces_[k], y)) {
        seen[k] = 1;
        if (first < 0) first = k;
        else pd.unite(k, first);
      }
    int ufirst = -1;
    for (int p = 0; p < np; ++p)
      if (parts[p].contains(y)) {
        useen[p] = 1;
        if (ufirst < 0) ufirst = p;
        else ud.unite(p, ufirst);
      }
  };
  for (long i = 0; i < nx; ++i)
    for (long j = 0; j < ny; ++j) mark({lo_.x + (Rat(i) + Rat(1, 2)) * h, lo_.y + (Rat(j) + Rat(1, 2)) * h});
  P2 seed = *lift(alpha_pow(1, s_.base));
  P2 b0 = *lift(s_.base);
  mark(seed);
  mark(b0);

  int root = -1;
  for (int k = 0; k < nk; ++k)
    if (in_piece(pieces_[k], seed)) root = pd.find(k);
  piece_in_C_.assign(nk, 0);
  std::set<int> roots;
  for (int k = 0; k < nk; ++k) {
    if (!seen[k]) continue;
    roots.insert(pd.find(k));
    if (pd.find(k) == root) piece_in_C_[k] = 1;
  }
  n_components_ = long(roots.size());

  std::set<int> uroots;
  for (int p = 0; p < np; ++p)
    if (useen[p]) uroots.insert(ud.find(p));
  connected_ = uroots.size() == 1;
  if (!connected_) throw Error("ConfigInvalid", "region is not connected at mesh resolution");
}

P2 Sprawl::alpha_pow(long k, const P2& p) const { return alpha_map(k)(p); }

Affine2 Sprawl::alpha_map(long k) const {
  if (k >= -kcache_ && k <= kcache_) return pow_[kcache_ + k];
  return s_.alpha.pow(k);
}

bool Sprawl::same_point(const P2& a, const P2& b) const {
  if (s_.carrier == Carrier::PLANE) return a == b;
  P2 d = a - b;
  return is_integer(d.x) && is_integer(d.y);
}

std::optional<P2> Sprawl::lift(const P2& p) const {
  if (s_.carrier == Carrier::PLANE) {
    if (s_.U.contains(p)) return p;
    return std::nullopt;
  }
  for (auto& P : s_.U.parts) {
    P2 l = P.lo(), h = P.hi();
    for (Rat nx = ceil_rat(l.x - p.x); nx <= floor_rat(h.x - p.x); nx += 1)
      for (Rat ny = ceil_rat(l.y - p.y); ny <= floor_rat(h.y - p.y); ny += 1) {
        P2 y{p.x + nx, p.y + ny};
        if (P.contains(y)) return y;
      }
  }
  return std::nullopt;
}

bool Sprawl::in_U(const P2& p) const { return lift(p).has_value(); }

bool Sprawl::in_iterate(long k, const P2& p) const { return in_U(alpha_pow(-k, p)); }

bool Sprawl::in_piece(const Piece& k, const P2& y) const {
  if (!s_.U.parts[k.p].contains(y)) return false;
  return s_.U.parts[k.q].contains(alpha_pow(-1, y - k.shift));
}

bool Sprawl::seg_prim(const Primitive& P, const P2& a, const P2& b) const {
  if (s_.carrier == Carrier::PLANE) return P.contains(a) && P.contains(b);
  P2 l = P.lo(), h = P.hi();
  for (Rat nx = ceil_rat(l.x - a.x); nx <= floor_rat(h.x - a.x); nx += 1)
    for (Rat ny = ceil_rat(l.y - a.y); ny <= floor_rat(h.y - a.y); ny += 1) {
      P2 n{nx, ny};
      if (P.contains(a + n) && P.contains(b + n)) return true;
    }
  return false;
}

bool Sprawl::seg_rec(const P2& a, const P2& b, int depth) const {
  for (auto& P : s_.U.parts)
    if (seg_prim(P, a, b)) return true;
  if (depth == 0 || !in_U(a) || !in_U(b)) return false;
  P2 m = (a + b).scaled(Rat(1, 2));
  if (!in_U(m)) return false;
  return seg_rec(a, m, depth - 1) && seg_rec(m, b, depth - 1);
}

bool Sprawl::segment_in_iterate(long k, const P2& a, const P2& b) const {
  Affine2 f = alpha_map(-k);
  return seg_rec(f(a), f(b), s_.budget.bisect_depth);
}

bool Sprawl::in_distinguished(const P2& p) const {
  auto y = lift(p);
  if (!y) return false;
  for (std::size_t k = 0; k < pieces_.size(); ++k)
    if (piece_in_C_[k] && in_piece(pieces_[k], *y)) return true;
  return false;
}

bool Sprawl::crossing_legal(long lo, const P2& p) const { return in_distinguished(alpha_pow(-lo, p)); }

std::vector<P2> Sprawl::sample_mesh(int n) const {
  if (n < 1) throw Error("ConfigInvalid", "mesh must be positive");
  std::vector<P2> out;
  Rat hx = (hi_.x - lo_.x) / n, hy = (hi_.y - lo_.y) / n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      P2 p{lo_.x + (Rat(i) + Rat(1, 2)) * hx, lo_.y + (Rat(j) + Rat(1, 2)) * hy};
      if (s_.U.contains(p)) out.push_back(p);
    }
  return out;
}

std::vector<P2> Sprawl::boundary_samples(int per_part) const {
  std::vector<P2> out;
  for (auto& P : s_.U.parts) {
    if (P.kind == PrimKind::BALL) {
      auto r = exact_sqrt(P.r2);
      if (!r) continue;
      for (int j = -per_part; j <= per_part; ++j) {
        Rat t = rat(j, per_part);
        Rat den = 1 + t * t;
        Rat cx = (1 - t * t) / den * *r, cy = 2 * t / den * *r;
        out.push_back({P.c.x + cx, P.c.y + cy});
        out.push_back({P.c.x - cx, P.c.y + cy});
      }
    } else if (P.kind == PrimKind::SECTOR) {
      for (const P2* d : {&P.d1, &P.d2})
        for (int j = 1; j <= per_part; ++j) {
          P2 v = d->scaled(rat(j, per_part));
          if (dot(v, v) < P.r2) out.push_back(P.c + v);
        }
    } else if (P.kind == PrimKind::POLYGON) {
      for (std::size_t i = 0; i < P.vs.size(); ++i)
        for (int j = 0; j < per_part; ++j)
          out.push_back(P.vs[i] + (P.vs[(i + 1) % P.vs.size()] - P.vs[i]).scaled(rat(j, per_part)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<P2> pl_vertices(const PLPath<Rat>& p) {
  if (p.model.kind != ModelKind::EUC || p.model.m != 2) throw Error("PreconditionFailed", "base paths live in EUC(2)");
  const Mat<Rat>& g = p.start;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      if (!g(i, j).is_real()) throw Error("PreconditionFailed", "start frame must be real");
  std::vector<P2> out{{g(0, 2).w, g(1, 2).w}};
  for (auto& s : p.segs) {
    const Mat<Rat>& X = s.X;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        bool ok = (j == 2 && i < 2) ? X(i, j).is_real() : X(i, j).is_zero();
        if (!ok) throw Error("PreconditionFailed", "base path velocities must be translations");
      }
    if (sgn(s.dt) < 0) throw Error("PreconditionFailed", "segment durations must be nonnegative");
    Rat vx = X(0, 2).w * s.dt, vy = X(1, 2).w * s.dt;
    P2 v{g(0, 0).w * vx + g(0, 1).w * vy, g(1, 0).w * vx + g(1, 1).w * vy};
    out.push_back(out.back() + v);
  }
  return out;
}

PLPath<Rat> pl_path(const std::vector<P2>& pts, const std::vector<Rat>& dts) {
  if (pts.empty()) throw Error("PreconditionFailed", "path needs a starting point");
  if (!dts.empty() && dts.size() + 1 != pts.size()) throw Error("DimensionMismatch", "one duration per segment");
  PLPath<Rat> p(ModelSpec::euc(2), euc_translation<Rat>(2, {pts[0].x, pts[0].y}));
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Rat dt = dts.empty() ? Rat(1) : dts[i];
    if (sgn(dt) <= 0) throw Error("PreconditionFailed", "segment durations must be positive");
    P2 v = (pts[i + 1] - pts[i]).scaled(1 / dt);
    p.then(translation_velocity<Rat>(2, {v.x, v.y}), dt, "s" + std::to_string(i));
  }
  return p;
}

PLPath<Rat> map_path(const Affine2& f, const PLPath<Rat>& p) {
  auto vs = pl_vertices(p);
  PLPath<Rat> out(ModelSpec::euc(2), euc_translation<Rat>(2, {f(vs[0]).x, f(vs[0]).y}));
  for (std::size_t i = 0; i < p.segs.size(); ++i) {
    P2 v = f.linear(vs[i + 1] - vs[i]).scaled(1 / p.segs[i].dt);
    out.then(translation_velocity<Rat>(2, {v.x, v.y}), p.segs[i].dt, p.segs[i].label);
  }
  return out;
}

namespace {

// position along a PL path at normalized time tau, plus cached vertex times
struct Timeline {
  std::vector<P2> v;
  std::vector<Rat> T;  // normalized cumulative times
  explicit Timeline(const PLPath<Rat>& p) : v(pl_vertices(p)) {
    Rat D = p.duration();
    T.push_back(0);
    Rat acc = 0;
    for (auto& s : p.segs) {
      acc += s.dt;
      T.push_back(sgn(D) == 0 ? Rat(0) : acc / D);
    }
  }
  P2 at(const Rat& tau) const {
    for (std::size_t s = 0; s + 1 < T.size(); ++s)
      if (tau <= T[s + 1] && T[s + 1] > T[s]) return v[s] + (v[s + 1] - v[s]).scaled((tau - T[s]) / (T[s + 1] - T[s]));
    return v.back();
  }
  // straight pieces covering [a, b]
  std::vector<P2> pieces(const Rat& a, const Rat& b) const {
    std::vector<P2> out{at(a)};
    for (std::size_t s = 1; s + 1 < T.size(); ++s)
      if (T[s] > a && T[s] < b) out.push_back(v[s]);
    out.push_back(at(b));
    return out;
  }
};

bool piece_inside(const Sprawl& sp, const Timeline& tl, long k, const Rat& a, const Rat& b) {
  auto pts = tl.pieces(a, b);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (!sp.segment_in_iterate(k, pts[i], pts[i + 1])) return false;
  return true;
}

}  // namespace

IncrementationCheck validate_incrementation(const Sprawl& sp, const PLPath<Rat>& g, const Incrementation& inc) {
  IncrementationCheck r;
  const auto& t = inc.t;
  const auto& k = inc.k;
  if (t.size() < 2 || k.size() + 1 != t.size() || t.front() != 0 || t.back() != 1) {
    r.index = 0;
    r.witness = "malformed partition";
    return r;
  }
  for (std::size_t j = 0; j + 1 < t.size(); ++j)
    if (!(t[j] < t[j + 1])) {
      r.index = int(j);
      r.witness = "partition not increasing at " + std::to_string(j);
      return r;
    }
  Timeline tl(g);
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (!piece_inside(sp, tl, k[j], t[j], t[j + 1])) {
      r.index = int(j);
      r.witness = "segment " + std::to_string(j) + " leaves alpha^" + std::to_string(k[j]) + "(U)";
      return r;
    }
    if (j + 1 < k.size()) {
      if (std::labs(k[j] - k[j + 1]) != 1) {
        r.index = int(j);
        r.witness = "labels (" + std::to_string(k[j]) + "," + std::to_string(k[j + 1]) + ") at " + std::to_string(j);
        return r;
      }
      if (!sp.crossing_legal(std::min(k[j], k[j + 1]), tl.at(t[j + 1]))) {
        r.index = int(j);
        r.witness = "crossing " + std::to_string(j) + " at " + to_string(tl.at(t[j + 1])) +
                    " outside the distinguished component";
        return r;
      }
    }
  }
  r.ok = true;
  return r;
}

IncrementationSearch find_incrementation(const Sprawl& sp, const PLPath<Rat>& g, long i1, long i2, const SearchBudget& b) {
  check_budget(b);
  IncrementationSearch out;
  Timeline tl(g);
  if (sgn(g.duration()) == 0) {
    if (i1 == i2 && sp.in_iterate(i1, tl.v.front())) {
      out.found = true;
      out.inc = {{0, 1}, {i1}};
      out.depth = 0;
    } else {
      out.report = "NOT_FOUND: a constant parameterization cannot change labels";
    }
    return out;
  }
  long lo = std::min(i1, i2) - b.label_slack, hi = std::max(i1, i2) + b.label_slack;
  long L = hi - lo + 1;
  for (int depth = 0; depth <= b.max_depth; ++depth) {
    long N = 1L << depth;
    std::vector<P2> pos(N + 1);
    for (long m = 0; m <= N; ++m) pos[m] = tl.at(rat(m, N));
    std::vector<signed char> inside(N * L, -1), legal(N * L, -1);
    auto idx = [&](long m, long k, int fresh) { return (m * L + (k - lo)) * 2 + fresh; };
    std::vector<long> parent((N + 1) * L * 2, -2);
    std::deque<long> q;
    long s0 = idx(0, i1, 1);
    parent[s0] = -1;
    q.push_back(s0);
    long goal = idx(N, i2, 0);
    while (!q.empty()) {
      long s = q.front();
      q.pop_front();
      ++out.states;
      if (s == goal) break;
      long fresh = s % 2, kk = (s / 2) % L + lo, m = s / 2 / L;
      if (m < N) {
        auto& c = inside[m * L + (kk - lo)];
        if (c < 0) c = piece_inside(sp, tl, kk, rat(m, N), rat(m + 1, N)) ? 1 : 0;
        long ns = idx(m + 1, kk, 0);
        if (c && parent[ns] == -2) {
          parent[ns] = s;
          q.push_back(ns);
        }
      }
      if (!fresh && m > 0 && m < N)
        for (long nk : {kk - 1, kk + 1}) {
          if (nk < lo || nk > hi) continue;
          long low = std::min(kk, nk);
          auto& c = legal[m * L + (low - lo)];
          if (c < 0) c = sp.crossing_legal(low, pos[m]) ? 1 : 0;
          long ns = idx(m, nk, 1);
          if (c && parent[ns] == -2) {
            parent[ns] = s;
            q.push_back(ns);
          }
        }
    }
    if (parent[goal] == -2) continue;
    std::vector<long> chain;
    for (long s = goal; s != -1; s = parent[s]) chain.push_back(s);
    std::reverse(chain.begin(), chain.end());
    Incrementation inc;
    inc.t.push_back(0);
    inc.k.push_back(i1);
    for (std::size_t c = 1; c < chain.size(); ++c) {
      long ma = chain[c - 1] / 2 / L, mb = chain[c] / 2 / L;
      if (ma == mb) {
        inc.t.push_back(rat(mb, N));
        inc.k.push_back((chain[c] / 2) % L + lo);
      }
    }
    inc.t.push_back(1);
    out.found = true;
    out.inc = inc;
    out.depth = depth;
    return out;
  }
  out.report = "NOT_FOUND within dyadic depth " + std::to_string(b.max_depth) + " (not a proof of nonexistence)";
  return out;
}

std::optional<Verdict> oracle_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2) {
  const Scenario& s = sp.scenario();
  switch (s.oracle) {
    case OracleKind::NONE: return std::nullopt;
    case OracleKind::LIFT: {
      auto l1 = sp.lift(p1), l2 = sp.lift(p2);
      if (!l1 || !l2) return Verdict::NO;
      return sp.alpha_pow(i1, *l1) == sp.alpha_pow(i2, *l2) ? Verdict::YES : Verdict::NO;
    }
    case OracleKind::FIXED_STAR:
    case OracleKind::AFFINE_SCALING:
      if (!sp.in_U(p1) || !sp.in_U(p2)) return Verdict::NO;
      return sp.same_point(sp.alpha_pow(i1, p1), sp.alpha_pow(i2, p2)) ? Verdict::YES : Verdict::NO;
  }
  return std::nullopt;
}

bool naive_identified(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2) {
  if (!sp.in_U(p1) || !sp.in_U(p2)) return false;
  P2 x = sp.alpha_pow(i1, p1);
  if (!sp.same_point(x, sp.alpha_pow(i2, p2))) return false;
  for (long j = std::min(i1, i2); j < std::max(i1, i2); ++j)
    if (!sp.crossing_legal(j, x)) return false;
  return true;
}

namespace {

bool hub_legal(const Sprawl& sp, const P2& h, long d) {
  for (long j = std::min(0L, d); j < std::max(0L, d); ++j)
    if (!sp.crossing_legal(j, h)) return false;
  return true;
}

bool route_edge(const Sprawl& sp, long d, const P2& a, const P2& b) {
  return sp.segment_in_iterate(0, a, b) && sp.segment_in_iterate(d, a, b);
}

// waypoints from p to a hub where every label step between 0 and d is legal
std::optional<std::vector<P2>> find_route(const Sprawl& sp, const P2& p, long d, const SearchBudget& b, std::string& hub) {
  std::vector<P2> hubs{p};
  const P2& base = sp.scenario().base;
  for (long j = std::min(0L, d); j <= std::max(0L, d); ++j) hubs.push_back(sp.alpha_pow(j, base));
  for (auto& h : hubs) {
    if (!hub_legal(sp, h, d)) continue;
    if (h == p) {
      hub = "start";
      return std::vector<P2>{p};
    }
    if (route_edge(sp, d, p, h)) {
      hub = "direct " + to_string(h);
      return std::vector<P2>{p, h};
    }
  }
  P2 lo = sp.lo(), hi = sp.hi();
  Rat w = std::max(Rat(hi.x - lo.x), Rat(hi.y - lo.y));
  Rat h = w / b.search_res;
  long nx = ceil_rat((hi.x - lo.x) / h).get_num().get_si(), ny = ceil_rat((hi.y - lo.y) / h).get_num().get_si();
  auto node = [&](long i, long j) { return P2{lo.x + (Rat(i) + Rat(1, 2)) * h, lo.y + (Rat(j) + Rat(1, 2)) * h}; };
  const Region& U = sp.scenario().U;
  std::vector<signed char> ok(nx * ny, -1);
  auto valid = [&](long i, long j) {
    auto& c = ok[i * ny + j];
    if (c < 0) {
      P2 y = node(i, j);
      c = (U.contains(y) && sp.in_iterate(d, y)) ? 1 : 0;
    }
    return c == 1;
  };
  std::vector<long> parent(nx * ny, -2);
  std::deque<long> q;
  long ci = floor_rat((p.x - lo.x) / h).get_num().get_si(), cj = floor_rat((p.y - lo.y) / h).get_num().get_si();
  for (long i = ci - 1; i <= ci + 1; ++i)
    for (long j = cj - 1; j <= cj + 1; ++j) {
      if (i < 0 || j < 0 || i >= nx || j >= ny || !valid(i, j)) continue;
      if (!route_edge(sp, d, p, node(i, j))) continue;
      parent[i * ny + j] = -1;
      q.push_back(i * ny + j);
    }
  long visited = 0;
  while (!q.empty() && visited < b.max_route_nodes) {
    long s = q.front();
    q.pop_front();
    ++visited;
    long i = s / ny, j = s % ny;
    P2 y = node(i, j);
    if (hub_legal(sp, y, d)) {
      std::vector<P2> route;
      for (long t = s; t != -1; t = parent[t]) route.push_back(node(t / ny, t % ny));
      route.push_back(p);
      std::reverse(route.begin(), route.end());
      hub = "mesh " + to_string(y);
      return route;
    }
    for (long di = -1; di <= 1; ++di)
      for (long dj = -1; dj <= 1; ++dj) {
        long a = i + di, c = j + dj;
        if ((!di && !dj) || a < 0 || c < 0 || a >= nx || c >= ny) continue;
        long t = a * ny + c;
        if (parent[t] != -2 || !valid(a, c)) continue;
        if (!route_edge(sp, d, y, node(a, c))) continue;
        parent[t] = s;
        q.push_back(t);
      }
  }
  return std::nullopt;
}

}  // namespace

Equivalence sprawl_equivalent_normalized(const Sprawl& sp, const P2& p, long d, const P2& q, const SearchBudget& b) {
  if (!sp.in_U(p) || !sp.in_U(q)) throw Error("PreconditionFailed", "points must lie in their charts");
  Equivalence e;
  e.oracle = oracle_equivalent(sp, 0, p, d, q);
  if (!sp.same_point(p, sp.alpha_pow(d, q))) {
    e.search = e.definitive = Verdict::NO;
    e.reason = "images under the sprawl map differ";
    return e;
  }
  std::string hub;
  auto route = find_route(sp, p, d, b, hub);
  if (!route) {
    e.search = Verdict::UNKNOWN;
    e.reason = "no backtracking loop found within budget";
    e.definitive = e.oracle.value_or(Verdict::UNKNOWN);
    return e;
  }
  std::vector<P2> pts = *route;
  std::vector<Rat> dts(pts.size() - 1, Rat(1));
  std::size_t r = dts.size();
  pts.push_back(pts.back());
  dts.push_back(r ? Rat(2 * long(r)) : Rat(1));
  for (std::size_t i = r; i-- > 0;) {
    pts.push_back((*route)[i]);
    dts.push_back(1);
  }
  Certificate c;
  c.loop = pl_path(pts, dts);
  c.hub = hub;
  c.thin = certify_backtracking(c.loop);
  auto inc = find_incrementation(sp, c.loop, 0, d, b);
  if (!c.thin.certified || !inc.found) {
    e.search = Verdict::UNKNOWN;
    e.reason = c.thin.certified ? inc.report : "loop failed thinness certification";
    e.definitive = e.oracle.value_or(Verdict::UNKNOWN);
    return e;
  }
  c.inc = inc.inc;
  c.check = validate_incrementation(sp, c.loop, c.inc);
  if (!c.check.ok) {
    e.search = Verdict::UNKNOWN;
    e.reason = "incrementation failed validation: " + c.check.witness;
    e.definitive = e.oracle.value_or(Verdict::UNKNOWN);
    return e;
  }
  e.search = e.definitive = Verdict::YES;
  e.cert = std::move(c);
  if (e.oracle && *e.oracle != Verdict::YES) e.reason = "certificate contradicts oracle";
  return e;
}

Equivalence sprawl_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2, const SearchBudget& b) {
  if (!sp.in_U(p1) || !sp.in_U(p2)) throw Error("PreconditionFailed", "points must lie in their charts");
  if (!sp.same_point(sp.alpha_pow(i1, p1), sp.alpha_pow(i2, p2))) {
    Equivalence e;
    e.oracle = oracle_equivalent(sp, i1, p1, i2, p2);
    e.search = e.definitive = Verdict::NO;
    e.reason = "images under the sprawl map differ";
    return e;
  }
  Equivalence e = sprawl_equivalent_normalized(sp, p1, i2 - i1, p2, b);
  e.oracle = oracle_equivalent(sp, i1, p1, i2, p2);
  if (e.cert) {
    Certificate& c = *e.cert;
    c.loop = map_path(sp.alpha_map(i1), c.loop);
    for (auto& k : c.inc.k) k += i1;
    c.thin = certify_backtracking(c.loop);
    c.check = validate_incrementation(sp, c.loop, c.inc);
    if (!c.thin.certified || !c.check.ok) {
      e.search = Verdict::UNKNOWN;
      e.definitive = e.oracle.value_or(Verdict::UNKNOWN);
      e.reason = "mapped certificate failed revalidation: " + c.check.witness;
      e.cert.reset();
    }
  }
  return e;
}

Equivalence sprawl_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2) {
  return sprawl_equivalent(sp, i1, p1, i2, p2, sp.scenario().budget);
}

std::vector<HausdorffWitness> naive_hausdorff_violation(const Sprawl& sp, long i, int mesh, int levels) {
  if (i == 0) return {};
  std::vector<P2> cand = sp.sample_mesh(mesh);
  auto bd = sp.boundary_samples(mesh);
  cand.insert(cand.end(), bd.begin(), bd.end());
  P2 lo = sp.lo(), hi = sp.hi();
  Rat h = std::max(Rat(hi.x - lo.x), Rat(hi.y - lo.y)) / mesh;
  static const std::vector<P2> dirs = {
      {1, 0}, {0, 1}, {-1, 0}, {0, -1},
      {Rat(3, 5), Rat(4, 5)}, {Rat(-3, 5), Rat(4, 5)}, {Rat(3, 5), Rat(-4, 5)}, {Rat(-3, 5), Rat(-4, 5)},
      {Rat(4, 5), Rat(3, 5)}, {Rat(-4, 5), Rat(3, 5)}, {Rat(4, 5), Rat(-3, 5)}, {Rat(-4, 5), Rat(-3, 5)},
      {Rat(5, 13), Rat(12, 13)}, {Rat(-5, 13), Rat(12, 13)}, {Rat(5, 13), Rat(-12, 13)}, {Rat(-5, 13), Rat(-12, 13)},
      {Rat(12, 13), Rat(5, 13)}, {Rat(-12, 13), Rat(5, 13)}, {Rat(12, 13), Rat(-5, 13)}, {Rat(-12, 13), Rat(-5, 13)}};
  std::vector<signed char> hit(cand.size(), 0);
  parallel_for(cand.size(), [&](std::size_t c) {
    const P2& x = cand[c];
    if (!sp.in_U(x) || !sp.in_iterate(i, x)) return;
    P2 xi = sp.alpha_pow(-i, x);
    if (naive_identified(sp, 0, x, i, xi)) return;
    Rat rho = h;
    for (int s = 0; s < levels; ++s, rho /= 2) {
      bool any = false;
      for (auto& u : dirs) {
        P2 y = x + u.scaled(rho);
        if (!sp.in_U(y) || !sp.in_iterate(i, y)) continue;
        if (naive_identified(sp, 0, y, i, sp.alpha_pow(-i, y))) {
          any = true;
          break;
        }
      }
      if (!any) return;
    }
    hit[c] = 1;
  });
  std::vector<HausdorffWitness> out;
  for (std::size_t c = 0; c < cand.size(); ++c)
    if (hit[c]) out.push_back({cand[c], i, levels});
  return out;
}

bool ChartComplex::identified(long i, std::size_t p, long j, const P2& q) const {
  for (auto& id : ids)
    if (id.i == i && id.p == p && id.j == j && id.q == q) return true;
  return false;
}

ChartComplex build_sprawl_atlas(const Sprawl& sp, long i_min, long i_max, int mesh, GluingMode mode) {
  if (i_min > i_max) throw Error("ConfigInvalid", "empty chart window");
  ChartComplex cx;
  cx.i_min = i_min;
  cx.i_max = i_max;
  cx.mode = mode;
  cx.mesh = mesh;
  cx.samples = sp.sample_mesh(mesh);
  long W = i_max - i_min;
  std::size_t ns = cx.samples.size();
  const SearchBudget& b = sp.scenario().budget;

  // one normalized query (0, p) vs (d, alpha^-d p) per sample and label difference
  struct Slot {
    bool comparable = false;
    P2 q;
    Verdict v = Verdict::UNKNOWN;
    std::optional<Verdict> oracle;
    std::optional<Certificate> cert;
    bool reverse_ok = true;
  };
  std::vector<long> ds;
  for (long d = -W; d <= W; ++d)
    if (d) ds.push_back(d);
  std::vector<Slot> slots(ns * ds.size());
  parallel_for(slots.size(), [&](std::size_t k) {
    std::size_t s = k / ds.size();
    long d = ds[k % ds.size()];
    const P2& p = cx.samples[s];
    Slot& sl = slots[k];
    auto q = sp.lift(sp.alpha_pow(-d, p));
    if (!q) return;
    sl.comparable = true;
    sl.q = *q;
    if (mode == GluingMode::NAIVE) {
      sl.v = naive_identified(sp, 0, p, d, *q) ? Verdict::YES : Verdict::UNKNOWN;
      sl.oracle = oracle_equivalent(sp, 0, p, d, *q);
      return;
    }
    Equivalence e = sprawl_equivalent_normalized(sp, p, d, *q, b);
    sl.v = e.search;
    sl.oracle = e.oracle;
    sl.cert = std::move(e.cert);
    if (sl.v == Verdict::YES) sl.reverse_ok = sprawl_equivalent_normalized(sp, *q, -d, p, b).search == Verdict::YES;
  });

  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t di = 0; di < ds.size(); ++di) {
      Slot& sl = slots[s * ds.size() + di];
      long d = ds[di];
      ++cx.queries;
      cx.slots.push_back({s, d, sl.comparable, sl.q, sl.v, sl.oracle});
      if (!sl.comparable) continue;
      ++cx.comparable;
      long cert = -1;
      if (sl.v == Verdict::YES) {
        if (!sl.reverse_ok) cx.symmetric = false;
        if (sl.cert) {
          cert = long(cx.certs.size());
          cx.certs.push_back(std::move(*sl.cert));
        }
        for (long i = i_min; i <= i_max; ++i) {
          long j = i + d;
          if (j < i_min || j > i_max) continue;
          if (!sp.same_point(sp.alpha_pow(i, cx.samples[s]), sp.alpha_pow(j, sl.q))) cx.sigma_respects = false;
          cx.ids.push_back({i, s, j, sl.q, mode, cert});
        }
      } else if (mode == GluingMode::SPRAWL && (!sl.oracle || *sl.oracle == Verdict::YES)) {
        cx.unresolved.push_back({0, d, s, sl.q, sl.oracle});
      }
    }

  // transitivity on a deterministic subset: partners of one sample must be mutually glued
  if (mode == GluingMode::SPRAWL && W > 0) {
    std::size_t stride = std::max<std::size_t>(1, ns / 64);
    std::vector<std::pair<std::size_t, std::pair<long, long>>> checks;
    for (std::size_t s = 0; s < ns; s += stride) {
      std::vector<long> part;
      for (std::size_t di = 0; di < ds.size(); ++di)
        if (slots[s * ds.size() + di].v == Verdict::YES) part.push_back(ds[di]);
      for (std::size_t a = 0; a < part.size(); ++a)
        for (std::size_t c = a + 1; c < part.size(); ++c)
          if (std::labs(part[c] - part[a]) <= W) checks.push_back({s, {part[a], part[c]}});
    }
    std::vector<char> ok(checks.size(), 1);
    parallel_for(checks.size(), [&](std::size_t k) {
      const P2& p = cx.samples[checks[k].first];
      long d1 = checks[k].second.first, d2 = checks[k].second.second;
      auto q1 = sp.lift(sp.alpha_pow(-d1, p));
      auto q2 = sp.lift(sp.alpha_pow(-d2, p));
      ok[k] = q1 && q2 && sprawl_equivalent_normalized(sp, *q1, d2 - d1, *q2, b).search == Verdict::YES;
    });
    cx.transitivity_checks = long(checks.size());
    for (char c : ok)
      if (!c) cx.transitive = false;
  }
  return cx;
}

P2 sprawl_map(const Sprawl& sp, long i, const P2& p) { return sp.alpha_pow(i, p); }

double coverage_fraction(const Sprawl& sp, long i_min, long i_max, const P2& lo, const P2& hi, int n) {
  long hit = 0;
  Rat hx = (hi.x - lo.x) / n, hy = (hi.y - lo.y) / n;
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      P2 y{lo.x + (Rat(a) + Rat(1, 2)) * hx, lo.y + (Rat(c) + Rat(1, 2)) * hy};
      for (long i = i_min; i <= i_max; ++i)
        if (sp.in_iterate(i, y)) {
          ++hit;
          break;
        }
    }
  return double(hit) / double(long(n) * n);
}

SubgroupClosure<Rat> sprawl_holonomy(const ModelSpec& s, const std::vector<Mat<Rat>>& hol_U, const Mat<Rat>& a,
                                     int word_bound, long element_cap) {
  return holonomy_closure<Rat>(s, hol_U, a, word_bound, element_cap);
}

}  // namespace cartan
