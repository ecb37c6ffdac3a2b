#pragma once

#include "cartan/models.hpp"
#include "cartan/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cartan {

template <class T> ProjPoint<T> base_point(const ModelSpec& s) {
  Vec<T> v(s.n);
  v[0] = Quat<T>(1);
  return ProjPoint<T>(s.tag(), v);
}

// left action followed by canonical normalisation
template <class T> ProjPoint<T> act_on_flag(const ModelSpec& s, const Mat<T>& g, const ProjPoint<T>& p) {
  if (int(p.v.size()) != s.n || g.n != s.n) throw Error("DimensionMismatch", "flag point");
  if (s.kind == ModelKind::CR && !nullcone_contains(s, p.v)) throw Error("NotOnNullCone", "CR point off the null cone");
  return act(g, p).canonical();
}

template <class T> bool is_fixed(const ModelSpec& s, const Mat<T>& a, const ProjPoint<T>& p, double tol = 1e-9) {
  ProjPoint<T> ap = act(a, p);
  (void)s;
  return proj_equal(ap, p, tol);
}

// the unipotent a^k, exact for rational k
Mat<Rat> unipotent_power(const Mat<Rat>& a, const Rat& k);
Mat<double> unipotent_power(const Mat<double>& a, double k);

struct OrbitIterate {
  long k = 0;
  Vec<double> coords;  // canonical representative
  double distance = 0;
};

struct OrbitReport {
  ProjPoint<double> point;
  std::vector<OrbitIterate> iterates;
  bool converged = false;
  bool is_fixed = false;
  long first_below = -1;
  double final_distance = 0;
};

std::vector<long> orbit_schedule(long k_max);
OrbitReport orbit_converges(const ModelSpec& s, const Mat<Rat>& a, const ProjPoint<Rat>& p, long k_max, double tol);

// number of real conditions cutting out Fix(a) near a generic fixed point
int expected_codimension(const ModelSpec& s, const Mat<Rat>& a);

struct CodimDirection {
  int basis_index = 0;
  double derivative_norm = 0;
  bool leaves = false;   // derivative of the defining map is nonzero
  bool linear = false;   // numerical growth ratio converges to the derivative
  std::vector<double> ratios;
};

struct CodimPoint {
  ProjPoint<Rat> point;
  int rank = 0;
  std::vector<CodimDirection> directions;  // leaving directions forming a basis of the normal space
  int tangent_count = 0;
};

struct CodimReport {
  int expected = 0;
  std::vector<CodimPoint> points;
  bool ok = false;
};

CodimReport fixed_set_codimension_probe(const ModelSpec& s, const Mat<Rat>& a, const std::vector<ProjPoint<Rat>>& samples);

// projective ballast sequence b_k for X with entries x, y
Mat<Rat> ballast_projective(const ModelSpec& s, const QR& x, const Vec<Rat>& y, const Rat& k);
// true when x is a negative real, where the k -> -infinity direction is the useful one
bool ballast_sign_advisory(const QR& x);

struct FactorizationCheck {
  bool equal = false;
  Mat<Rat> lhs, rhs;
};

// a^k exp(tX) versus exp(X s) B with s = t (1 + k t x)^{-1} acting on the right
FactorizationCheck verify_factorization_identity(const ModelSpec& s, const QR& x, const Vec<Rat>& y, const Rat& t, const Rat& k);

struct EigenFamilyParams {
  Vec<Rat> beta;  // row, length m-1
  Vec<Rat> v;     // column, length m-1
  QR r1, r2;
  Mat<Rat> R;  // (m-1)x(m-1), stored in an (m-1)-sized Mat
};

struct EigenFamilyResult {
  std::string family;
  std::string eigenvalue;
  bool ok = false;
  double residual = 0;
  std::string detail;
};

// checks Ad_{b_k} V = lambda V in pgl for each listed family; corrected = true uses
// the repaired lower-left entry of the eigenvalue-1 family
std::vector<EigenFamilyResult> verify_eigenstructure_projective(int m, const QR& x, const Vec<Rat>& y, const Rat& k,
                                                                const EigenFamilyParams& prm, bool corrected = false);

enum class DivergenceVerdict { DIVERGES, EXEMPT, INCONCLUSIVE, ZERO };
std::string to_string(DivergenceVerdict v);

struct DivergenceReport {
  std::vector<long> ks;
  std::vector<double> norms;
  double initial_norm = 0;
  DivergenceVerdict verdict = DivergenceVerdict::INCONCLUSIVE;
};

constexpr double kDivergenceFactor = 1e6;
constexpr long kDivergenceKMax = 1000;

template <class T>
DivergenceReport divergence_test(const ModelSpec& s, const std::function<Mat<T>(long)>& ballast, const CurvatureTensor<T>& w,
                                 const std::vector<long>& k_list);

// --- CR non-central timelike setup ---

struct CrParams {
  int p = 1, q = 0;
  QR x;
  Vec<Rat> y;  // length p+q-1
  Rat tau = 1;
  Rat k = 1;
  Rat t = 1;
};

Mat<Rat> cr_timelike_a(int p, int q);
template <class T> Mat<T> cr_minus_element(int p, int q, const Quat<T>& x, const Vec<T>& y, const T& tau);

struct CrShrink {
  QR z;
  Mat<Rat> a, X;
  Mat<Rat> beta0, beta_plus, beta_plus_displayed, beta;
  Mat<Rat> trapped;            // a^k exp(tX) beta^{-1}
  bool in_G_minus = false;
  bool in_G_minus_displayed = false;  // same with the printed beta_+
  Mat<Rat> Y;                  // g_- projection of Ad_beta X
  Mat<Rat> Y_displayed, Y_corrected;
};

CrShrink cr_shrinking_paths(const CrParams& prm);

// G_- . P split of g (block LU over the grading blocks)
template <class T> std::pair<Mat<T>, Mat<T>> gminus_p_split(const ModelSpec& s, const Mat<T>& g);

struct ShrinkBound {
  double f_k = 0, c_k = 0, I0 = 0, I2 = 0, bound = 0;
  bool valid = false;
};

ShrinkBound shrink_bound(const QD& x, const Vec<double>& y, int p, int q, double tau, double k);

struct ShrinkReport {
  std::vector<double> ks;
  std::vector<double> arclengths;
  std::vector<ShrinkBound> bounds;
  std::vector<bool> below_bound;
  std::string verdict;  // SHRINKS | NOT_SHRINKING
  int panels = 0;
};

// sqrt g(Y,Y) from the derived closed form of the projection
double cr_speed(const QD& x, const Vec<double>& y, int p, int q, double tau, double k, double t);

// composite Simpson on a geometric panel set refined toward t = 0
double graded_simpson(const std::function<double(double)>& f, double layer, int n0, double rel_tol, int* panels = nullptr);

ShrinkReport shrinking_arclength(int p, int q, const QD& x, const Vec<double>& y, double tau, const std::vector<double>& k_list,
                                 int quadrature_n = 2048, double tol_final = 1e-2, double bound_rel_tol = 1e-8);

// same through the numerical G_- . P split, for any non-null a (used for the spacelike case)
ShrinkReport shrinking_arclength_split(const ModelSpec& s, const Mat<double>& a, const Vec<double>& v, double tau,
                                       const std::vector<double>& k_list, int quadrature_n = 2048, double tol_final = 1e-2);

struct CharPolyCheck {
  Rat lambda;
  QR lhs, rhs;
  bool equal = false;
};

template <class T> Quat<T> det_commutative(Mat<T> M);
std::vector<CharPolyCheck> verify_characteristic_polynomial(const CrParams& prm, const std::vector<Rat>& lambdas);

// --- flamboyance ---

struct LineFamilyElement {
  std::string family;  // complex_line, quaternionic_line, cr_ell_xy, cr_ell_y
  Vec<Rat> dir;        // tail direction, (x,y), or y
};

bool family_condition(const ModelSpec& s, const Mat<Rat>& a, const LineFamilyElement& e);
bool family_contains(const ModelSpec& s, const LineFamilyElement& e, const ProjPoint<Rat>& p);
ProjPoint<Rat> family_sample(const ModelSpec& s, const LineFamilyElement& e, Rng& r);
// the element through a non-fixed point, if the family has one
std::optional<LineFamilyElement> family_through(const ModelSpec& s, const Mat<Rat>& a, const std::string& family, const ProjPoint<Rat>& p);
std::string family_for(const ModelSpec& s, const Mat<Rat>& a);

ProjPoint<Rat> sample_flag_point(const ModelSpec& s, Rng& r, long num = 5, long den = 4);
ProjPoint<Rat> sample_fixed_point(const ModelSpec& s, const Mat<Rat>& a, Rng& r);
ProjPoint<Rat> sample_nonfixed_point(const ModelSpec& s, const Mat<Rat>& a, Rng& r);

struct FlamboyanceReport {
  bool invariance = true, fix_meets_base_only = true, intersections = true, coverage = true;
  long invariance_checks = 0, fix_checks = 0, intersection_checks = 0, coverage_checks = 0;
  std::vector<std::string> witnesses;
  bool ok() const { return invariance && fix_meets_base_only && intersections && coverage; }
};

FlamboyanceReport flamboyance_check(const ModelSpec& s, const Mat<Rat>& a, const std::vector<LineFamilyElement>& family,
                                    long sample_budget, std::uint64_t seed);
// throws FamilyConditionViolated with a witness for a degenerate element
void require_family_condition(const ModelSpec& s, const Mat<Rat>& a, const LineFamilyElement& e);

// explicit path inside a pairwise intersection locus, from the base point to p
std::vector<ProjPoint<double>> intersection_path(const ModelSpec& s, const ProjPoint<Rat>& p, int steps);

struct EmbeddingReport {
  std::vector<long> windows;
  std::vector<double> nonfixed_coverage;  // fraction entering within each window
  long nonfixed = 0, fixed = 0;
  bool fixed_never_enter = true;
  bool monotone = true;
  bool complement_fixed = true;  // every sample outside the largest window is fixed
  double radius = 0;
};

EmbeddingReport klein_embedding_image(const ModelSpec& s, const Mat<Rat>& a, const std::vector<ProjPoint<Rat>>& samples,
                                      double radius, const std::vector<long>& windows);

}  // namespace cartan
