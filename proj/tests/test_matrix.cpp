#include "folmi/matrix.hpp"

#include <catch_amalgamated.hpp>
#include <complex>

#include "folmi/rng.hpp"

using namespace folmi;

namespace {

Mat random_mat(Rng& rng, int r, int c, double scale = 1.0) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("sym basics") {
  CHECK((sym(Mat(Mat::Identity(2, 2))) - 2.0 * Mat::Identity(2, 2)).norm() == 0.0);

  Mat n(2, 2);
  n << 0, 1, 0, 0;
  Mat expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((sym(n) - expect).norm() == 0.0);

  // J = I2 from the first worked example: Sym(J) = 2 I.
  CHECK((sym(Mat(Mat::Identity(2, 2))) - 2.0 * Mat::Identity(2, 2)).norm() == 0.0);

  CHECK_THROWS_AS(sym(Mat(Mat::Zero(2, 3))), DimensionError);

  CMat h(1, 1);
  h(0, 0) = std::complex<double>(1.0, 2.0);
  CHECK(sym(h)(0, 0).real() == Catch::Approx(2.0));
  CHECK(sym(h)(0, 0).imag() == Catch::Approx(0.0));
}

TEST_CASE("sym is exactly symmetric and transpose-invariant") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    Mat m = random_mat(rng, n, n, 2.0);
    Mat s = sym(m);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sym(m) - sym(Mat(m.transpose()))).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("eigenvalues against quadratic-formula oracle") {
  // trace -6, det -2: lambda = -3 +- sqrt(11)
  Mat a(2, 2);
  a << 0, 1, 2, -6;
  auto s = eigenvalues(a).eigenvalues;
  std::sort(s.begin(), s.end(), [](auto l, auto r) { return l.real() < r.real(); });
  const double root = std::sqrt(11.0);
  CHECK(s[0].real() == Catch::Approx(-3.0 - root).epsilon(1e-8));
  CHECK(s[1].real() == Catch::Approx(-3.0 + root).epsilon(1e-8));
  CHECK(std::abs(s[0].imag()) < 1e-10);

  // trace -8.4, det 11.6
  Mat b(2, 2);
  b << -1.6, -0.6, 1.2, -6.8;
  auto sb = eigenvalues(b).eigenvalues;
  std::sort(sb.begin(), sb.end(), [](auto l, auto r) { return l.real() < r.real(); });
  const double disc = std::sqrt(8.4 * 8.4 - 4.0 * 11.6);
  CHECK(sb[1].real() == Catch::Approx((-8.4 + disc) / 2.0).epsilon(1e-8));
  CHECK(sb[0].real() == Catch::Approx((-8.4 - disc) / 2.0).epsilon(1e-8));

  auto si = eigenvalues(Mat(Mat::Identity(3, 3))).eigenvalues;
  for (auto v : si) CHECK(std::abs(v - 1.0) < 1e-12);
}

TEST_CASE("eigenvalue invariants: trace, det, conjugate pairs") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 5);
    Mat a = random_mat(rng, n, n, 3.0);
    auto ev = eigenvalues(a).eigenvalues;
    REQUIRE(static_cast<int>(ev.size()) == n);
    std::complex<double> sum = 0.0, prod = 1.0;
    for (auto v : ev) {
      sum += v;
      prod *= v;
    }
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    CHECK(std::abs(sum.real() - a.trace()) < 1e-6 * scale * n);
    CHECK(std::abs(sum.imag()) < 1e-8 * scale * n);
    CHECK(std::abs(prod.real() - a.determinant()) <
          1e-6 * std::max(1.0, std::abs(a.determinant())));
    // non-real eigenvalues pair up
    for (auto v : ev) {
      if (std::abs(v.imag()) < 1e-9) continue;
      bool paired = false;
      for (auto w : ev)
        if (std::abs(w - std::conj(v)) < 1e-6 * scale) paired = true;
      CHECK(paired);
    }
  }
}

TEST_CASE("pinv examples") {
  Mat a(2, 2);
  a << 1, 2, 3, 4;
  CHECK((pinv(a) - a.inverse()).cwiseAbs().maxCoeff() < 1e-12);

  Mat row(1, 2);
  row << 1, 1;
  Mat expect(2, 1);
  expect << 0.5, 0.5;
  CHECK((pinv(row) - expect).cwiseAbs().maxCoeff() < 1e-14);

  Mat z = Mat::Zero(2, 3);
  Mat pz = pinv(z);
  CHECK(pz.rows() == 3);
  CHECK(pz.cols() == 2);
  CHECK(pz.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pinv satisfies the Penrose identities on random inputs") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 + static_cast<int>(rng.next_u64() % 8);
    const int c = 1 + static_cast<int>(rng.next_u64() % 8);
    Mat a = random_mat(rng, r, c);
    if (trial % 3 == 0 && r > 1) a.row(r - 1) = a.row(0);  // force rank deficiency sometimes
    Mat ap = pinv(a);
    CHECK((a * ap * a - a).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a * ap - (a * ap).transpose()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ap * a - (ap * a).transpose()).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("is_posdef") {
  CHECK(is_posdef(Mat(Mat::Identity(2, 2)), 0.0));
  Mat m(2, 2);
  m << 1, 2, 2, 1;  // eigenvalues {3, -1}
  CHECK_FALSE(is_posdef(m, 0.0));
  CHECK(is_posdef(Mat(2.0 * Mat::Identity(2, 2)), 0.0));  // Sym(J) for J = I2
  Mat asym(2, 2);
  asym << 1, 1, 0, 1;
  CHECK_THROWS_AS(is_posdef(asym, 0.0), DimensionError);
  // margin is strict
  CHECK_FALSE(is_posdef(Mat(Mat::Identity(2, 2)), 1.0));
}

TEST_CASE("is_posdef agrees with the eigenvalue sign test") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 6);
    Mat m = sym(random_mat(rng, n, n));
    auto ev = eigenvalues(m).eigenvalues;
    bool all_pos = true;
    for (auto v : ev) all_pos = all_pos && v.real() > 0.0;
    CHECK(is_posdef(m, 0.0) == all_pos);
  }
}

TEST_CASE("hermitian posdef overload") {
  CMat h(2, 2);
  h << std::complex<double>(2, 0), std::complex<double>(0, 1), std::complex<double>(0, -1),
      std::complex<double>(2, 0);
  CHECK(is_posdef(h, 0.0));  // eigenvalues {1, 3}
  CHECK_FALSE(is_posdef(h, 1.5));
}

TEST_CASE("rowspace split") {
  Mat c(2, 2);
  c << 1, 2, 0.5, 1;  // rank 1
  Mat u, v;
  rowspace_split(c, u, v);
  CHECK(u.cols() == 1);
  CHECK(v.cols() == 1);
  CHECK((u.transpose() * v).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c * v).cwiseAbs().maxCoeff() < 1e-12);
}
