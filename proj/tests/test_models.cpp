#include "doctest.h"

#include "cartan/models.hpp"
#include "cartan/random.hpp"

using namespace cartan;

static const std::vector<std::string> kTags = {"cproj:1", "cproj:2", "cproj:3", "hproj:1", "hproj:2", "cr:1,0", "cr:1,1", "cr:2,1", "aff:1", "aff:2", "euc:2"};

TEST_CASE("registry round trip") {
  for (auto& t : kTags) CHECK(ModelSpec::parse(t).tag() == t);
  CHECK(ModelSpec::parse("CR: 2,1").tag() == "cr:2,1");
  CHECK_THROWS_AS(ModelSpec::parse("proj:2"), Error);
  CHECK_THROWS_AS(ModelSpec::parse("cr:0,0"), Error);
  CHECK(ModelSpec::parse("cr:2,1").flag_dim() == 7);
  CHECK(ModelSpec::parse("hproj:2").flag_dim() == 8);
}

TEST_CASE("grading projectors resolve the identity and are idempotent") {
  for (auto& t : kTags) {
    ModelSpec s = ModelSpec::parse(t);
    for (auto& X : algebra_basis<Rat>(s)) {
      REQUIRE(in_algebra(s, X));
      Mat<Rat> sum(s.n, X.ring);
      for (int i = s.min_grade(); i <= s.max_grade(); ++i) {
        Mat<Rat> Xi = grading_project(s, X, i);
        CHECK(in_algebra(s, Xi));
        CHECK(grading_project(s, Xi, i) == Xi);
        for (int j = s.min_grade(); j <= s.max_grade(); ++j)
          if (j != i) CHECK(grading_project(s, Xi, j).is_zero());
        sum += Xi;
      }
      CHECK(sum == X);
    }
  }
}

TEST_CASE("brackets respect the grading") {
  for (auto& t : kTags) {
    ModelSpec s = ModelSpec::parse(t);
    for (int i = s.min_grade(); i <= s.max_grade(); ++i)
      for (int j = s.min_grade(); j <= s.max_grade(); ++j) {
        auto Bi = graded_basis<Rat>(s, i), Bj = graded_basis<Rat>(s, j);
        for (auto& X : Bi)
          for (auto& Y : Bj) {
            Mat<Rat> Z = commutator(X, Y);
            if (i + j < s.min_grade() || i + j > s.max_grade()) CHECK(Z.is_zero());
            else CHECK(grading_project(s, Z, i + j) == Z);
          }
      }
  }
}

TEST_CASE("graded dimensions") {
  ModelSpec c = ModelSpec::parse("cr:2,1");
  CHECK(graded_basis<Rat>(c, -2).size() == 1);
  CHECK(graded_basis<Rat>(c, -1).size() == 6);
  CHECK(graded_basis<Rat>(c, 1).size() == 6);
  CHECK(graded_basis<Rat>(c, 2).size() == 1);
  ModelSpec h = ModelSpec::parse("hproj:2");
  CHECK(graded_basis<Rat>(h, -1).size() == 8);
  ModelSpec a = ModelSpec::parse("aff:2");
  CHECK(graded_basis<Rat>(a, -1).size() == 2);
  CHECK(graded_basis<Rat>(a, 0).size() == 4);
}

TEST_CASE("grading projection examples") {
  ModelSpec s = ModelSpec::parse("cproj:2");
  Mat<Rat> E21 = Mat<Rat>::unit(3, 1, 0);
  CHECK(grading_project(s, E21, -1) == E21);
  ModelSpec c = ModelSpec::parse("cr:1,0");
  Mat<Rat> G = Mat<Rat>::unit(3, 2, 0, QR::I());
  CHECK(grading_project(c, G, -2) == G);
  Mat<Rat> notin = Mat<Rat>::unit(3, 2, 0, QR(1));
  CHECK_THROWS_AS(grading_project(c, notin, -2), Error);
}

TEST_CASE("isotropy elements") {
  ModelSpec s = ModelSpec::parse("cproj:2");
  IsotropyParams p;
  p.row = {QR(1), QR(0)};
  auto r = build_isotropy(s, p);
  Mat<Rat> a = Mat<Rat>::identity(3);
  a(0, 1) = QR(1);
  CHECK(r.b == a);
  CHECK(in_P(s, r.b));

  ModelSpec c = ModelSpec::parse("cr:1,0");
  IsotropyParams pc;
  pc.row = {QR(0)};
  pc.s = 1;
  auto rc = build_isotropy(c, pc);
  Mat<Rat> ac = Mat<Rat>::identity(3);
  ac(0, 2) = QR::I();
  CHECK(rc.b == ac);
  CHECK(rc.non_null);
  CHECK(rc.cls == "central");

  ModelSpec c11 = ModelSpec::parse("cr:1,1");
  IsotropyParams pt;
  pt.row = {QR(1), QR(0)};
  auto rt = build_isotropy(c11, pt);
  CHECK(rt.non_null);
  CHECK(rt.cls == "timelike");
  CHECK(rt.b(0, 3) == QR(rat(-1, 2)));
  pt.row = {QR(0), QR(1)};
  CHECK(build_isotropy(c11, pt).cls == "spacelike");
  pt.row = {QR(1), QR(1)};
  auto rn = build_isotropy(c11, pt);
  CHECK(rn.cls == "null-direction");
  CHECK_FALSE(rn.non_null);
  pt.row = {QR(1)};
  CHECK_THROWS_AS(build_isotropy(c11, pt), Error);
}

TEST_CASE("CR isotropy is unitary, closes under products, and logs back into p_+") {
  Rng r(31);
  for (auto t : {"cr:1,0", "cr:1,1", "cr:2,1"}) {
    ModelSpec s = ModelSpec::parse(t);
    Mat<Rat> H = hermitian_matrix<Rat>(s);
    for (int k = 0; k < 10; ++k) {
      IsotropyParams a, b;
      for (int j = 0; j < s.p + s.q; ++j) {
        a.row.push_back(r.complex_rational(4, 3));
        b.row.push_back(r.complex_rational(4, 3));
      }
      a.s = r.rational(4, 3);
      b.s = r.rational(4, 3);
      Mat<Rat> A = build_isotropy(s, a).b, B = build_isotropy(s, b).b;
      CHECK(A.conj_transpose() * H * A == H);
      // product has the P_+ pattern with beta_a + beta_b
      Mat<Rat> AB = A * B;
      IsotropyParams c;
      for (int j = 0; j < s.p + s.q; ++j) c.row.push_back(a.row[j] + b.row[j]);
      c.s = (AB(0, s.n - 1) - build_isotropy(s, IsotropyParams{c.row, 0, {}}).b(0, s.n - 1)).x;
      CHECK(build_isotropy(s, c).b == AB);
      // logarithm lies in g_1 + g_2 and its g_1 part carries beta
      Mat<Rat> L = mat_log_unipotent(A, 4);
      CHECK(in_algebra(s, L));
      Mat<Rat> L1 = grading_project(s, L, 1);
      for (int j = 0; j < s.p + s.q; ++j) CHECK(L1(0, j + 1) == a.row[j]);
      CHECK(grading_project(s, L, 2)(0, s.n - 1) == QR(0, a.s));
      CHECK(mat_exp_nilpotent(L, 4) == A);
    }
  }
}

TEST_CASE("projective isotropy log round trip") {
  Rng r(37);
  ModelSpec s = ModelSpec::parse("hproj:2");
  for (int k = 0; k < 10; ++k) {
    IsotropyParams a;
    a.row = {r.quat_rational(3, 2), r.quat_rational(3, 2)};
    Mat<Rat> A = build_isotropy(s, a).b;
    Mat<Rat> L = mat_log_unipotent(A, 3);
    CHECK(grading_project(s, L, 1) == L);
    CHECK(L(0, 1) == a.row[0]);
    CHECK(L(0, 2) == a.row[1]);
  }
}

TEST_CASE("hermitian form") {
  ModelSpec s = ModelSpec::parse("cr:1,0");
  CHECK(hermitian_form_eval<Rat>(s, {QR(1), QR(0), QR(0)}).is_zero());
  CHECK(nullcone_contains<Rat>(s, {QR(rat(-1, 2)), QR(1), QR(1)}));
  CHECK(hermitian_form_eval<Rat>(s, {QR(1), QR(1), QR(1)}) == QR(3));
  CHECK_FALSE(nullcone_contains<Rat>(s, {QR(1), QR(1), QR(1)}));
  CHECK_THROWS_AS(hermitian_form_eval<Rat>(s, {QR(1), QR(1)}), Error);
}

TEST_CASE("group equality conventions") {
  ModelSpec c = ModelSpec::parse("cproj:1"), h = ModelSpec::parse("hproj:1"), cr = ModelSpec::parse("cr:1,0");
  Mat<Rat> A = Mat<Rat>::identity(2);
  A(0, 1) = QR(2, 1);
  CHECK(group_equal(c, A, A.lscale(QR(3, -1))));
  Mat<Rat> Ah = Mat<Rat>::identity(2, Ring::H);
  Ah(0, 1) = QR(0, 0, 1);
  CHECK(group_equal(h, Ah, Ah.scaled(rat(-5, 2))));
  CHECK_FALSE(group_equal(h, Ah, Ah.lscale(QR::I())));
  Mat<Rat> U = Mat<Rat>::identity(3);
  CHECK(group_equal(cr, U, U.lscale(QR(rat(3, 5), rat(4, 5)))));
  CHECK_FALSE(group_equal(cr, U, U.scaled(2)));
}

TEST_CASE("algebra canonicalisation") {
  ModelSpec s = ModelSpec::parse("cr:1,1");
  Mat<Rat> X = graded_basis<Rat>(s, 1)[0];
  Mat<Rat> Y = X + Mat<Rat>::identity(4).lscale(QR(0, 3));
  CHECK(alg_equal(s, X, Y));
  CHECK_FALSE(alg_equal(s, X, Mat<Rat>(X + graded_basis<Rat>(s, 2)[0])));
}

static CurvatureTensor<Rat> random_tensor(const ModelSpec& s, Rng& r, int terms) {
  auto sb = slot_basis<Rat>(s);
  auto B = algebra_basis<Rat>(s);
  CurvatureTensor<Rat> w(s.n);
  for (int t = 0; t < terms; ++t) {
    int a = int(r.range(0, long(sb.elems.size()) - 1)), b = int(r.range(0, long(sb.elems.size()) - 1));
    w.add(a, b, alg_canonical(s, B[r.range(0, long(B.size()) - 1)].scaled(r.nonzero_rational(3, 2))));
  }
  w.prune();
  return w;
}

TEST_CASE("curvature action is a group action") {
  Rng r(41);
  for (auto t : {"cproj:2", "cr:1,0", "cr:1,1", "aff:2"}) {
    ModelSpec s = ModelSpec::parse(t);
    for (int k = 0; k < 5; ++k) {
      Mat<Rat> b1, b2;
      if (s.affine()) {
        b1 = Mat<Rat>::identity(s.n, Ring::R);
        b2 = b1;
        for (int i = 0; i < s.m; ++i)
          for (int j = 0; j < s.m; ++j) {
            b1(i, j) = QR(r.rational(3, 2) + (i == j ? 3 : 0));
            b2(i, j) = QR(r.rational(3, 2) + (i == j ? 3 : 0));
          }
      } else {
        IsotropyParams p1, p2;
        int len = s.kind == ModelKind::CR ? s.p + s.q : s.m;
        for (int j = 0; j < len; ++j) {
          p1.row.push_back(r.complex_rational(2, 2));
          p2.row.push_back(r.complex_rational(2, 2));
        }
        p1.s = r.rational(2, 2);
        p2.s = r.rational(2, 2);
        b1 = build_isotropy(s, p1).b;
        b2 = build_isotropy(s, p2).b;
        Mat<Rat> d = Mat<Rat>::identity(s.n);
        d(0, 0) = QR(2, 1);
        d(s.n - 1, s.n - 1) = s.kind == ModelKind::CR ? QR(2, 1).conj().inv() : QR(1);
        b2 = d * b2;
      }
      auto w = random_tensor(s, r, 3);
      auto lhs = curvature_rep_action(s, Mat<Rat>(b1 * b2), w);
      auto rhs = curvature_rep_action(s, b1, curvature_rep_action(s, b2, w));
      CHECK(lhs.terms == rhs.terms);
      auto id = curvature_rep_action(s, Mat<Rat>::identity(s.n, s.ring), w);
      CHECK(id.terms == w.terms);
    }
  }
}

TEST_CASE("curvature action rejects elements outside P") {
  ModelSpec s = ModelSpec::parse("cproj:2");
  CurvatureTensor<Rat> w(3);
  w.add(0, 1, Mat<Rat>::unit(3, 0, 1));
  CHECK_THROWS_AS(curvature_rep_action(s, Mat<Rat>(Mat<Rat>::identity(3) + Mat<Rat>::unit(3, 1, 0)), w), Error);
}

TEST_CASE("canonical wedge ordering flips sign") {
  CurvatureTensor<Rat> w(3);
  Mat<Rat> E = Mat<Rat>::unit(3, 0, 1);
  w.add(2, 1, E);
  CHECK(w.terms.at({1, 2}) == -E);
  w.add(1, 2, E);
  w.prune();
  CHECK(w.terms.empty());
  w.add(1, 1, E);
  CHECK(w.terms.empty());
}

TEST_CASE("regularity") {
  ModelSpec s = ModelSpec::parse("cr:1,0");
  auto sb = slot_basis<Rat>(s);
  int g1a = -1, g1b = -1;
  for (size_t i = 0; i < sb.elems.size(); ++i)
    if (sb.grades[i] == 1) (g1a < 0 ? g1a : g1b) = int(i);
  REQUIRE(g1b >= 0);
  CurvatureTensor<Rat> zero(3);
  CHECK(regularity_check(s, zero));
  CurvatureTensor<Rat> bad(3);
  bad.add(g1a, g1b, Mat<Rat>::unit(3, 2, 0, QR::I()));
  CHECK_FALSE(regularity_check(s, bad));
  CHECK(only_excluded_slots(s, bad));
  CurvatureTensor<Rat> good(3);
  for (int j = 0; j <= 2; ++j)
    for (auto& W : graded_basis<Rat>(s, j)) good.add(g1a, g1b, W);
  CHECK(regularity_check(s, good));
  CHECK_FALSE(only_excluded_slots(s, good));
  // g_{-1} target from two g_1 slots has homogeneity 1: allowed
  CurvatureTensor<Rat> m1(3);
  m1.add(g1a, g1b, graded_basis<Rat>(s, -1)[0]);
  CHECK(regularity_check(s, m1));
  // projective models are automatically regular
  ModelSpec c = ModelSpec::parse("cproj:2");
  Rng r(2);
  CHECK(regularity_check(c, random_tensor(c, r, 6)));
}

TEST_CASE("unipotent action on the top slot only adds lower filtration terms") {
  ModelSpec s = ModelSpec::parse("cproj:2");
  auto sb = slot_basis<Rat>(s);
  CurvatureTensor<Rat> w(3);
  // slots of p_+ have grade 1; a g_1-valued top term stays in grade >= 1 plus lower corrections
  w.add(0, 2, graded_basis<Rat>(s, 1)[0]);
  IsotropyParams p;
  p.row = {QR(1), QR(rat(1, 2))};
  Mat<Rat> b = build_isotropy(s, p).b;
  auto bw = curvature_rep_action(s, b, w);
  // unipotent elements fix p_+ pointwise (it is abelian), so only W moves, by Ad_b
  CHECK(bw.terms.size() == 1);
  Mat<Rat> W = bw.terms.begin()->second;
  CHECK(alg_equal(s, W, Ad(b, graded_basis<Rat>(s, 1)[0])));
  CHECK(grading_project(s, W, 1) == graded_basis<Rat>(s, 1)[0]);
}
