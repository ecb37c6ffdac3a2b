#pragma once

#include "cartan/holonomy.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cartan {

struct P2 {
  Rat x, y;
  P2() = default;
  P2(Rat a, Rat b) : x(std::move(a)), y(std::move(b)) {}
  P2 operator+(const P2& o) const { return {x + o.x, y + o.y}; }
  P2 operator-(const P2& o) const { return {x - o.x, y - o.y}; }
  P2 scaled(const Rat& s) const { return {x * s, y * s}; }
  bool operator==(const P2& o) const { return x == o.x && y == o.y; }
  bool operator!=(const P2& o) const { return !(*this == o); }
  bool operator<(const P2& o) const { return x < o.x || (x == o.x && y < o.y); }
};

std::string to_string(const P2& p);

// p -> A p + t
struct Affine2 {
  Rat a = 1, b = 0, c = 0, d = 1;
  Rat tx = 0, ty = 0;

  P2 operator()(const P2& p) const { return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty}; }
  P2 linear(const P2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Affine2 operator*(const Affine2& o) const;
  Affine2 inverse() const;
  Affine2 pow(long k) const;
  bool operator==(const Affine2& o) const;

  static Affine2 translation(Rat x, Rat y);
  static Affine2 rotation(Rat cos_t, Rat sin_t, P2 center = {});
  static Affine2 scaling(Rat lambda, P2 center = {});
};

enum class PrimKind { BALL, SECTOR, POLYGON, QUADRIC };

// every primitive is an open convex set
struct Primitive {
  PrimKind kind = PrimKind::BALL;
  P2 c;                 // ball / quadric center, sector apex
  Rat r2 = 1;           // ball radius^2, sector bound radius^2
  P2 d1, d2;            // sector boundary directions, counterclockwise from d1 to d2, angle < pi
  std::vector<P2> vs;   // polygon vertices, counterclockwise
  Rat qa = 1, qb = 0, qc = 1;  // quadric qa x^2 + 2 qb x y + qc y^2 < 1 relative to c

  bool contains(const P2& p) const;
  P2 lo() const;
  P2 hi() const;

  static Primitive ball(P2 c, Rat r2);
  static Primitive sector(P2 apex, P2 d1, P2 d2, Rat r2);
  static Primitive polygon(std::vector<P2> vs);
  static Primitive quadric(P2 c, Rat qa, Rat qb, Rat qc);
};

struct Region {
  std::vector<Primitive> parts;
  bool contains(const P2& p) const;
  P2 lo() const;
  P2 hi() const;
};

enum class Carrier { PLANE, TORUS };  // TORUS is R^2 / Z^2
enum class OracleKind { NONE, LIFT, FIXED_STAR, AFFINE_SCALING };

std::string to_string(Carrier c);
std::string to_string(OracleKind o);

struct SearchBudget {
  int max_depth = 12;      // dyadic partition depth
  int bisect_depth = 12;   // segment certification
  int search_res = 64;     // route mesh cells per region diameter
  long max_route_nodes = 50000;
  int label_slack = 1;
};

struct Scenario {
  std::string name;
  Carrier carrier = Carrier::PLANE;
  Affine2 alpha;
  Region U;
  P2 base;
  OracleKind oracle = OracleKind::NONE;
  int mesh_res = 256;  // flood-fill cells per region diameter
  long window = 8;
  SearchBudget budget;
};

Scenario torus_translation_scenario();
Scenario rotation_scenario();
Scenario affine_scaling_scenario(Rat lambda = Rat(1, 2));

// a scenario with its distinguished component of U cap alpha(U) computed
class Sprawl {
 public:
  explicit Sprawl(Scenario s);

  const Scenario& scenario() const { return s_; }

  P2 alpha_pow(long k, const P2& p) const;
  Affine2 alpha_map(long k) const;
  bool same_point(const P2& a, const P2& b) const;

  // lift into the chart copy of U (identity on the plane)
  std::optional<P2> lift(const P2& p) const;
  bool in_U(const P2& p) const;
  bool in_iterate(long k, const P2& p) const;
  // [a,b] inside alpha^k(U), certified by bisection onto convex primitives
  bool segment_in_iterate(long k, const P2& a, const P2& b) const;
  // p in alpha^lo of the distinguished component, i.e. a legal crossing between lo and lo + 1
  bool crossing_legal(long lo, const P2& p) const;
  bool in_distinguished(const P2& p) const;

  bool U_connected() const { return connected_; }
  int mesh_res() const { return s_.mesh_res; }
  long components() const { return n_components_; }
  P2 lo() const { return lo_; }
  P2 hi() const { return hi_; }

  // grid points of the bounding box of U lying in U, cell-centred
  std::vector<P2> sample_mesh(int n) const;
  // rational points on ball/sector boundaries
  std::vector<P2> boundary_samples(int per_part) const;

 private:
  struct Piece {
    int p, q;
    P2 shift;  // torus lattice offset for the alpha(q) factor
  };
  bool in_piece(const Piece& k, const P2& y) const;
  bool seg_prim(const Primitive& P, const P2& a, const P2& b) const;
  bool seg_rec(const P2& a, const P2& b, int depth) const;

  Scenario s_;
  std::vector<Affine2> pow_;  // alpha^k for |k| <= kcache_
  long kcache_ = 0;
  P2 lo_, hi_;
  std::vector<Piece> pieces_;
  std::vector<char> piece_in_C_;
  bool connected_ = false;
  long n_components_ = 0;
};

struct Incrementation {
  std::vector<Rat> t;    // 0 = t_0 < ... < t_l = 1
  std::vector<long> k;   // k_0 .. k_{l-1}
};

struct IncrementationCheck {
  bool ok = false;
  int index = -1;
  std::string witness;
};

// paths are PL in the base plane: EUC(2) paths whose velocities are pure translations
std::vector<P2> pl_vertices(const PLPath<Rat>& p);
PLPath<Rat> pl_path(const std::vector<P2>& pts, const std::vector<Rat>& dts = {});
PLPath<Rat> map_path(const Affine2& f, const PLPath<Rat>& p);

IncrementationCheck validate_incrementation(const Sprawl& sp, const PLPath<Rat>& g, const Incrementation& inc);

struct IncrementationSearch {
  bool found = false;
  Incrementation inc;
  int depth = -1;
  long states = 0;
  std::string report;  // NOT_FOUND is a semi-decision within the budget
};

IncrementationSearch find_incrementation(const Sprawl& sp, const PLPath<Rat>& g, long i1, long i2,
                                         const SearchBudget& b = {});

enum class Verdict { YES, NO, UNKNOWN };
std::string to_string(Verdict v);

struct Certificate {
  PLPath<Rat> loop;
  Incrementation inc;
  BacktrackCertificate thin;
  IncrementationCheck check;
  std::string hub;
};

struct Equivalence {
  Verdict search = Verdict::UNKNOWN;
  std::optional<Verdict> oracle;
  Verdict definitive = Verdict::UNKNOWN;
  std::optional<Certificate> cert;
  std::string reason;
};

std::optional<Verdict> oracle_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2);

// search in the normalized frame (0, p) vs (d, q), alpha^d(q) = p; certificate in chart-0 coordinates
Equivalence sprawl_equivalent_normalized(const Sprawl& sp, const P2& p, long d, const P2& q, const SearchBudget& b);
// full query; the certificate is mapped into the base by alpha^{i1} and revalidated there
Equivalence sprawl_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2, const SearchBudget& b);
Equivalence sprawl_equivalent(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2);

bool naive_identified(const Sprawl& sp, long i1, const P2& p1, long i2, const P2& p2);

struct HausdorffWitness {
  P2 x;
  long i = 0;
  int levels = 0;  // neighborhood radii checked
};

// points x (in U cap alpha^i(U)) where (0,x) and (i, alpha^-i x) are not naively identified
// although every sampled neighborhood contains naively identified points
std::vector<HausdorffWitness> naive_hausdorff_violation(const Sprawl& sp, long i, int mesh, int levels = 4);

enum class GluingMode { NAIVE, SPRAWL };

struct Identification {
  long i = 0;
  std::size_t p = 0;  // sample index
  long j = 0;
  P2 q;
  GluingMode kind = GluingMode::SPRAWL;
  long cert = -1;
};

struct UnresolvedPair {
  long i, j;
  std::size_t p;
  P2 q;
  std::optional<Verdict> oracle;
};

// one normalized query (0, samples[p]) vs (d, q)
struct AtlasQuery {
  std::size_t p = 0;
  long d = 0;
  bool comparable = false;
  P2 q;
  Verdict search = Verdict::UNKNOWN;
  std::optional<Verdict> oracle;
};

struct ChartComplex {
  long i_min = 0, i_max = 0;
  GluingMode mode = GluingMode::SPRAWL;
  int mesh = 0;
  std::vector<P2> samples;
  std::vector<Identification> ids;
  std::vector<Certificate> certs;
  std::vector<UnresolvedPair> unresolved;
  std::vector<AtlasQuery> slots;
  long queries = 0;
  long comparable = 0;
  bool symmetric = true;
  bool sigma_respects = true;
  bool transitive = true;
  long transitivity_checks = 0;

  bool identified(long i, std::size_t p, long j, const P2& q) const;
};

ChartComplex build_sprawl_atlas(const Sprawl& sp, long i_min, long i_max, int mesh, GluingMode mode = GluingMode::SPRAWL);

P2 sprawl_map(const Sprawl& sp, long i, const P2& p);

// fraction of the cell-centred n x n grid of [lo, hi] covered by the union of alpha^i(U), i_min <= i <= i_max
double coverage_fraction(const Sprawl& sp, long i_min, long i_max, const P2& lo, const P2& hi, int n);

SubgroupClosure<Rat> sprawl_holonomy(const ModelSpec& s, const std::vector<Mat<Rat>>& hol_U, const Mat<Rat>& a,
                                     int word_bound, long element_cap = 1000000);

}  // namespace cartan
