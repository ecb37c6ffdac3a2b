#include "doctest.h"

#include "cartan/mat.hpp"
#include "cartan/proj.hpp"
#include "cartan/random.hpp"

using namespace cartan;

TEST_CASE("quaternion multiplication table") {
  QR i = QR::I(), j = QR::J(), k = QR::K();
  CHECK(i * j == k);
  CHECK(j * i == -k);
  CHECK(j * k == i);
  CHECK(k * j == -i);
  CHECK(k * i == j);
  CHECK(i * k == -j);
  CHECK(i * i == QR(-1));
  CHECK(i * j * k == QR(-1));
}

TEST_CASE("scalar identities on random exact quaternions") {
  Rng r(7);
  for (int t = 0; t < 200; ++t) {
    QR a = r.quat_rational(9, 5), b = r.quat_rational(9, 5), c = r.quat_rational(9, 5);
    CHECK((a * b) * c == a * (b * c));
    CHECK((a * b).conj() == b.conj() * a.conj());
    CHECK((a * b).norm2() == a.norm2() * b.norm2());
    if (!b.is_zero()) {
      CHECK(rdiv(a, b) * b == a);
      CHECK(b * ldiv(b, a) == a);
    }
  }
}

TEST_CASE("quaternions are not commutative") {
  QR a(1, 2, 3, 4), b(2, -1, 0, 5);
  CHECK(a * b != b * a);
}

static Mat<Rat> random_invertible(Rng& r, int n, Ring ring) {
  for (;;) {
    Mat<Rat> A(n, ring);
    for (auto& q : A.e) q = ring == Ring::H ? r.quat_rational(5, 3) : ring == Ring::C ? r.complex_rational(5, 3) : QR(r.rational(5, 3));
    try {
      A.inverse();
      return A;
    } catch (const Error&) {
    }
  }
}

TEST_CASE("exact inverses over R, C and H") {
  Rng r(11);
  for (Ring ring : {Ring::R, Ring::C, Ring::H})
    for (int n = 1; n <= 4; ++n)
      for (int t = 0; t < 5; ++t) {
        Mat<Rat> A = random_invertible(r, n, ring), B = random_invertible(r, n, ring);
        Mat<Rat> I = Mat<Rat>::identity(n, ring);
        CHECK(A * A.inverse() == I);
        CHECK(A.inverse() * A == I);
        CHECK((A * B).inverse() == B.inverse() * A.inverse());
        CHECK((A * B) * A == A * (B * A));
      }
}

TEST_CASE("singular matrix rejected") {
  Mat<Rat> A(2);
  A(0, 0) = QR(1);
  A(0, 1) = QR(2);
  A(1, 0) = QR(2);
  A(1, 1) = QR(4);
  CHECK_THROWS_AS(A.inverse(), Error);
}

TEST_CASE("nilpotent exponential") {
  Mat<Rat> E21 = Mat<Rat>::unit(3, 1, 0);
  CHECK(mat_exp_nilpotent(E21, 3) == Mat<Rat>::identity(3) + E21);
  CHECK(mat_exp_nilpotent(Mat<Rat>(3), 3) == Mat<Rat>::identity(3));

  // strictly lower 4x4 with x=0, tau=1: X = tau i E_{30}
  Mat<Rat> X(4);
  X(3, 0) = QR(0, 1);
  CHECK(mat_exp_nilpotent(X, 3) == Mat<Rat>::identity(4) + X);

  // a full Jordan block needs all terms
  Mat<Rat> N(4);
  N(1, 0) = QR(1);
  N(2, 1) = QR(1);
  N(3, 2) = QR(1);
  Mat<Rat> e = mat_exp_nilpotent(N, 4);
  CHECK(e(3, 0) == QR(rat(1, 6)));
  CHECK(e(2, 0) == QR(rat(1, 2)));
  CHECK_THROWS_AS(mat_exp_nilpotent(N, 3), Error);
}

TEST_CASE("exp of commuting nilpotents is multiplicative") {
  Rng r(3);
  for (int t = 0; t < 20; ++t) {
    Mat<Rat> X(4), Y(4);
    // strictly lower triangular polynomials in one shift commute
    Mat<Rat> S(4);
    for (int i = 1; i < 4; ++i) S(i, i - 1) = QR(1);
    Rat a = r.rational(5, 4), b = r.rational(5, 4), c = r.rational(5, 4), d = r.rational(5, 4);
    X = S.scaled(a) + (S * S).scaled(b);
    Y = S.scaled(c) + (S * S * S).scaled(d);
    REQUIRE(X * Y == Y * X);
    CHECK(mat_exp_nilpotent(Mat<Rat>(X + Y), 4) == mat_exp_nilpotent(X, 4) * mat_exp_nilpotent(Y, 4));
  }
}

TEST_CASE("general exponential") {
  CHECK(approx_equal(mat_exp_general(Mat<double>(3)), Mat<double>::identity(3), 1e-14));
  Mat<double> J(3, Ring::R);
  J(0, 1) = QD(-M_PI);
  J(1, 0) = QD(M_PI);
  Mat<double> R = mat_exp_general(J);
  CHECK(R(0, 0).w == doctest::Approx(-1).epsilon(1e-12));
  CHECK(R(1, 1).w == doctest::Approx(-1).epsilon(1e-12));
  CHECK(std::abs(R(0, 1).w) < 1e-12);
  CHECK(R(2, 2).w == doctest::Approx(1));

  Mat<double> N(3);
  N(1, 0) = QD(2, 1);
  N(2, 1) = QD(-1, 0.5);
  CHECK(approx_equal(mat_exp_general(N), mat_exp_nilpotent(N, 3), 1e-12));

  Rng r(5);
  for (int t = 0; t < 10; ++t) {
    Mat<double> X(3, Ring::H);
    for (auto& q : X.e) q = QD(r.normal(), r.normal(), r.normal(), r.normal());
    Mat<double> E = mat_exp_general(X);
    CHECK(approx_equal(Mat<double>(E * mat_exp_general(-X)), Mat<double>::identity(3), 1e-9));
  }
}

TEST_CASE("unipotent logarithm inverts the exponential") {
  Mat<Rat> N(3);
  N(1, 0) = QR(rat(1, 2), 1);
  N(2, 0) = QR(3);
  N(2, 1) = QR(0, -2);
  CHECK(mat_log_unipotent(mat_exp_nilpotent(N, 3), 3) == N);
}

TEST_CASE("projective equality") {
  ProjPoint<Rat> a("cproj:2", {QR(2), QR(0), QR(0)}), b("cproj:2", {QR(1), QR(0), QR(0)});
  CHECK(proj_equal(a, b));
  ProjPoint<Rat> c("cproj:2", {QR(1), QR(1), QR(0)});
  CHECK_FALSE(proj_equal(c, b));

  // right multiplication by a quaternion: [j;j] ~ [1;1]
  ProjPoint<Rat> h1("hproj:1", {QR::J(), QR::J()}), h2("hproj:1", {QR(1), QR(1)});
  CHECK(proj_equal(h1, h2));
  // left multiplication is not the equivalence: [i; j] vs i*[1; -k] = [i; j]... while [1; k] differs
  ProjPoint<Rat> h3("hproj:1", {QR::I(), QR::J()}), h4("hproj:1", {QR(1), QR::K()});
  CHECK(proj_equal(h3, ProjPoint<Rat>("hproj:1", {QR(1), QR::I().inv() * QR::J()})) == false);
  CHECK(proj_equal(h3, ProjPoint<Rat>("hproj:1", {QR(1), QR::J() * QR::I().inv()})));
  (void)h4;

  ProjPoint<Rat> bad("cproj:3", {QR(1), QR(0), QR(0), QR(0)});
  CHECK_THROWS_AS(proj_equal(a, bad), Error);
}

TEST_CASE("proj_equal is an equivalence on sampled points") {
  Rng r(19);
  std::vector<ProjPoint<Rat>> pts;
  for (int t = 0; t < 12; ++t) {
    Vec<Rat> v = {r.quat_rational(2, 2), r.quat_rational(2, 2)};
    if (v[0].is_zero() && v[1].is_zero()) v[0] = QR(1);
    pts.emplace_back("hproj:1", v);
    QR s = r.quat_rational(3, 2);
    if (s.is_zero()) s = QR(1);
    pts.emplace_back("hproj:1", Vec<Rat>{v[0] * s, v[1] * s});
  }
  for (auto& a : pts) {
    CHECK(proj_equal(a, a));
    for (auto& b : pts) {
      CHECK(proj_equal(a, b) == proj_equal(b, a));
      for (auto& c : pts)
        if (proj_equal(a, b) && proj_equal(b, c)) CHECK(proj_equal(a, c));
    }
  }
}

TEST_CASE("chordal distance is invariant under the scalar action") {
  Rng r(23);
  for (int t = 0; t < 20; ++t) {
    ProjPoint<double> p("hproj:2", {QD(r.normal(), r.normal(), r.normal(), r.normal()), QD(r.normal()), QD(r.normal(), 0, 1)});
    ProjPoint<double> q = p;
    QD u(r.normal(), r.normal(), r.normal(), r.normal());
    for (auto& c : q.v) c = c * u;
    CHECK(chordal_distance(p, q) < 1e-7);
    CHECK(proj_equal(p, q));
  }
}
