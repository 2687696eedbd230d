#include "folmi/lmi.hpp"

#include <catch_amalgamated.hpp>
#include <sstream>

#include "folmi/rng.hpp"

using namespace folmi;

TEST_CASE("var space packing") {
  VarSpace vs;
  vs.add_symmetric("Pu", 2);
  CHECK(vs.size() == 3);  // triangular count
  vs.add_symmetric("Pd", 1);
  vs.add_full("A", 1, 1);
  vs.add_full("B", 1, 2);
  vs.add_full("C", 1, 1);
  vs.add_full("D", 1, 2);
  vs.add_scalar("tau");
  vs.add_scalar("mu");
  CHECK(vs.size() == 3 + 1 + 1 + 2 + 1 + 2 + 1 + 1);
  CHECK(vs.block("tau").offset == 10);
  CHECK_THROWS_AS(vs.add_scalar("tau"), Error);
  CHECK_THROWS_AS(vs.block("nope"), Error);
}

TEST_CASE("symmetric block round-trips through basis matrices") {
  VarSpace vs;
  vs.add_symmetric("S", 3);
  Vec x(vs.size());
  x << 1, 2, 3, 4, 5, 6;  // upper triangle rows: (0,0),(0,1),(0,2),(1,1),(1,2),(2,2)
  Mat s = vs.matrix_value("S", x);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == 2.0);
  CHECK(s(1, 0) == 2.0);
  CHECK(s(2, 1) == 5.0);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("skew block structure") {
  VarSpace vs;
  vs.add_skew("K", 3);
  CHECK(vs.size() == 3);
  vs.add_skew("K1", 1);
  CHECK(vs.size() == 3);  // 1x1 skew contributes nothing
  Vec x = Vec::Zero(3);
  x(0) = 2.0;  // entry (0,1)
  Mat k = vs.matrix_value("K", x);
  CHECK(k(0, 1) == 2.0);
  CHECK(k(1, 0) == -2.0);
  CHECK((k + k.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("affine expression arithmetic and evaluation") {
  VarSpace vs;
  vs.add_symmetric("P", 2);
  vs.add_scalar("t");
  Mat a(2, 2);
  a << 0, 1, 2, -6;

  AffineExpr p = AffineExpr::variable(vs, "P");
  AffineExpr e = symmetrize(a * p) + AffineExpr::scalar_identity(vs, "t", 2, 0.5);

  Vec x(vs.size());
  x << 1, 0.25, 2, 3;  // P = [[1, .25],[.25, 2]], t = 3
  Mat pval(2, 2);
  pval << 1, 0.25, 0.25, 2;
  Mat expect = a * pval + pval * a.transpose() + 1.5 * Mat::Identity(2, 2);
  CHECK((e.eval(x) - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(e.symmetric_structure());

  AffineExpr diff = e - e;
  CHECK(diff.eval(x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_block sizes, star mirroring, and errors") {
  VarSpace vs;
  vs.add_scalar("mu");
  Mat j = Mat::Identity(2, 2);

  AffineExpr mu_i = AffineExpr::scalar_identity(vs, "mu", 2);
  AffineExpr grid = assemble_block(
      {{(-1.0) * mu_i, mu_i},
       {star(), (-1.0) * mu_i - AffineExpr::constant(sym(j))}});
  CHECK(grid.rows() == 4);
  CHECK(grid.symmetric_structure());
  Vec x(1);
  x << 0.7;
  Mat v = grid.eval(x);
  CHECK(v(0, 0) == -0.7);
  CHECK(v(0, 2) == 0.7);
  CHECK(v(2, 0) == 0.7);
  CHECK(v(2, 2) == -0.7 - 2.0);

  // 1x1 grid of a constant
  Mat c(2, 2);
  c << 1, 2, 2, 1;
  AffineExpr single = assemble_block({{AffineExpr::constant(c)}});
  CHECK((single.eval(Vec(1)).array() == c.array()).all());

  // zero marker cells inherit their size from the rest of the grid
  Mat two = 2.0 * Mat::Identity(2, 2);
  AffineExpr padded = assemble_block({{AffineExpr::constant(two), zero_cell()},
                                      {star(), AffineExpr::constant(Mat(-two))}});
  Mat pv = padded.eval(Vec(1));
  CHECK(pv.rows() == 4);
  CHECK(pv.topRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(pv(0, 0) == 2.0);
  CHECK(pv(3, 3) == -2.0);

  // inconsistent sizes rejected
  CHECK_THROWS_AS(assemble_block({{AffineExpr::zero(2, 2), AffineExpr::zero(3, 1)},
                                  {star(), AffineExpr::zero(1, 1)}}),
                  DimensionError);
}

TEST_CASE("assemble_block matches the synthesis outer structure size") {
  // 2n + nc + 2 m0 for n = 2, nc = 2, m0 = 2 gives 10.
  const int n = 2, nc = 2, m0 = 2;
  VarSpace vs;
  vs.add_scalar("s");
  AffineExpr lam = AffineExpr::zero(2 * n + nc, 2 * n + nc);
  AffineExpr z1 = AffineExpr::zero(2 * n + nc, m0);
  AffineExpr mu_i = AffineExpr::scalar_identity(vs, "s", m0);
  AffineExpr full = assemble_block({{lam, z1, z1},
                                    {star(), mu_i, mu_i},
                                    {star(), star(), mu_i}});
  CHECK(full.rows() == 10);
}

TEST_CASE("hermitian embedding") {
  VarSpace vs;
  vs.add_hermitian("X", 2);
  CHECK(vs.size() == 4);

  HermitianAffineExpr x = HermitianAffineExpr::variable(vs, "X");
  AffineExpr emb = hermitian_to_real(x);
  CHECK(emb.rows() == 4);

  // H = [[2, i], [-i, 2]] has eigenvalues {1, 3}; embedding doubles them.
  Vec v(4);
  v << 2, 0, 2, 1;  // re(0,0), re(0,1), re(1,1), im(0,1)
  CMat h = vs.hermitian_value("X", v);
  CHECK(h(0, 1) == std::complex<double>(0, 1));
  CHECK(h(1, 0) == std::complex<double>(0, -1));

  Mat e = emb.eval(v);
  auto ev = eigenvalues(e).eigenvalues;
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return a.real() < b.real(); });
  CHECK(ev[0].real() == Catch::Approx(1.0));
  CHECK(ev[1].real() == Catch::Approx(1.0));
  CHECK(ev[2].real() == Catch::Approx(3.0));
  CHECK(ev[3].real() == Catch::Approx(3.0));

  // real H embeds as block-diag(H, H)
  Vec vr(4);
  vr << 1.5, 0.25, -2, 0;
  Mat er = emb.eval(vr);
  CHECK(er.topRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((er.topLeftCorner(2, 2) - er.bottomRightCorner(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // 1x1 H = [c] embeds as c I2
  VarSpace vs1;
  vs1.add_hermitian("Y", 1);
  AffineExpr emb1 = hermitian_to_real(HermitianAffineExpr::variable(vs1, "Y"));
  Vec one(1);
  one << 1.0;
  CHECK((emb1.eval(one) - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // constant Hermitian payloads embed the same way
  CMat hc(2, 2);
  hc << std::complex<double>(2, 0), std::complex<double>(0, 1), std::complex<double>(0, -1),
      std::complex<double>(2, 0);
  Mat ec = hermitian_to_real(HermitianAffineExpr::constant(hc)).eval(Vec(0));
  CHECK(min_eig_sym(ec) == Catch::Approx(1.0));
  CMat not_herm(2, 2);
  not_herm << 1.0, std::complex<double>(0, 1), std::complex<double>(0, 1), 1.0;
  CHECK_THROWS_AS(HermitianAffineExpr::constant(not_herm), DimensionError);
}

TEST_CASE("hermitian embedding preserves definiteness on random instances") {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 4);
    VarSpace vs;
    vs.add_hermitian("X", n);
    Vec x(vs.size());
    for (int i = 0; i < x.size(); ++i) x(i) = rng.normal();
    CMat h = vs.hermitian_value("X", x);
    AffineExpr emb = hermitian_to_real(HermitianAffineExpr::variable(vs, "X"));
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    const double target = es.eigenvalues()(0);
    CHECK(min_eig_sym(emb.eval(x)) == Catch::Approx(target).margin(1e-9));
  }
}

TEST_CASE("real rotation of a hermitian expression") {
  VarSpace vs;
  vs.add_hermitian("X", 2);
  HermitianAffineExpr x = HermitianAffineExpr::variable(vs, "X");
  const std::complex<double> r = std::polar(1.0, 0.3);
  AffineExpr k = real_rotation(r, x);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vec v(vs.size());
    for (int i = 0; i < v.size(); ++i) v(i) = rng.normal();
    CMat h = vs.hermitian_value("X", v);
    CMat expect = r * h + std::conj(r) * h.conjugate();
    CHECK(expect.imag().cwiseAbs().maxCoeff() < 1e-14);
    CHECK((k.eval(v) - expect.real()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("problem validation and dump") {
  VarSpace vs;
  vs.add_scalar("p");
  LmiProblem prob(vs);
  CHECK_THROWS_AS(prob.require_wellformed(), Error);  // empty spec

  AffineExpr nonsym = AffineExpr::constant((Mat(2, 2) << 0, 1, 0, 0).finished());
  CHECK_THROWS_AS(prob.add_negdef(nonsym, 0.0, "bad"), DimensionError);

  prob.add_negdef(AffineExpr::scalar_identity(vs, "p", 1, -2.0), 1e-6, "decay");
  prob.add_lower_bound("p", 1e-6);
  std::ostringstream os;
  dump_problem(prob, os);
  const std::string dump = os.str();
  CHECK(dump.find("folmi-lmi-dump 1") == 0);
  CHECK(dump.find("nvars 1") != std::string::npos);
  CHECK(dump.find("sense negdef") != std::string::npos);
  CHECK(dump.find("bound 0 9.9999999999999995e-07") != std::string::npos);
}
