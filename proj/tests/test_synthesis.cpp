#include "folmi/synthesis.hpp"

#include <catch_amalgamated.hpp>
#include <cmath>

#include "folmi/rng.hpp"
#include "test_helpers.hpp"

using namespace folmi;
using namespace folmi_test;

namespace {

SynthesisResult synthesize(const Plant& plant, int n_c, SynthMode mode = SynthMode::Theorem2,
                           BuildOptions opts = {}) {
  SynthProblem sp = mode == SynthMode::Theorem2 ? build_theorem2(plant, n_c, opts)
                    : mode == SynthMode::Certain ? build_certain(plant, n_c, opts)
                                                 : build_corollary1(plant, n_c, opts);
  Feasibility fe = solve_feasibility(sp.lmi);
  REQUIRE(fe.verdict == Verdict::Feasible);
  for (double m : recheck(sp.lmi, fe.assignment)) REQUIRE(m > 0.0);
  return recover_controller(sp, fe.assignment, plant);
}

}  // namespace

TEST_CASE("arg condition on the worked closed loops") {
  Mat a(2, 2);
  a << 0, 1, 2, -6;
  StabilityVerdict sv = check_arg_condition(a, 0.9);
  CHECK_FALSE(sv.stable);  // eigenvalue -3 + sqrt(11) > 0 sits at arg 0
  CHECK(sv.min_arg == Catch::Approx(0.0).margin(1e-12));
  CHECK(sv.threshold == Catch::Approx(0.45 * M_PI));

  CHECK(check_arg_condition(Mat(-Mat::Identity(3, 3)), 0.5).stable);

  Mat a0(2, 2);
  a0 << -1.6, -0.6, 1.2, -6.8;  // Table-1 static closed loop
  CHECK(check_arg_condition(a0, 0.9).stable);
  CHECK_THROWS_AS(check_arg_condition(a0, 1.0), DimensionError);
}

TEST_CASE("theorem-2 synthesis is feasible and certifiable on example 1") {
  Plant plant = example1_plant();
  for (int nc : {0, 1, 2}) {
    SynthesisResult res = synthesize(plant, nc);
    CAPTURE(nc);
    CHECK(res.controller.nc() == nc);
    CHECK(res.nominal_arg_check);
    CHECK(res.residual_B < 1e-6);
    CHECK(res.residual_D < 1e-6);
    CHECK(res.tau > 0.0);
    CHECK(res.mu > 0.0);
    Feasibility th1 = verify_theorem1(plant, res.controller);
    CHECK(th1.verdict == Verdict::Feasible);
  }
}

TEST_CASE("theorem-2 synthesis handles the rank-deficient output map") {
  Plant plant = example2_plant();
  SynthesisResult res = synthesize(plant, 1);
  CHECK(res.nominal_arg_check);
  CHECK(res.residual_B < 1e-6);
  CHECK(res.residual_D < 1e-6);
  CHECK(verify_theorem1(plant, res.controller).verdict == Verdict::Feasible);
}

TEST_CASE("problem dimensions follow the block layout") {
  Plant plant = example1_plant();
  // outer dimension 2n + nc + 2 m0
  CHECK(build_theorem2(plant, 2).lmi.constraints()[0].expr.rows() == 10);
  CHECK(build_theorem2(plant, 0).lmi.constraints()[0].expr.rows() == 8);
  CHECK(build_theorem2(plant, 1).lmi.constraints()[0].expr.rows() == 9);
  CHECK_THROWS_AS(build_theorem2(plant, -1), DimensionError);
  Plant certain = plant;
  certain.unc.reset();
  CHECK_THROWS_AS(build_theorem2(certain, 1), DimensionError);
}

TEST_CASE("certain-case synthesis") {
  // scalar plant: A = 1, B = 1, C = 1, xi = 0 is stabilizable statically
  Plant scalar;
  scalar.A = Mat::Constant(1, 1, 1.0);
  scalar.B = Mat::Constant(1, 1, 1.0);
  scalar.C = Mat::Constant(1, 1, 1.0);
  scalar.q = 0.5;
  scalar.xi = 0.0;
  scalar.phi = PhiFunction::parse("0", 1, 1);
  SynthesisResult res = synthesize(scalar, 0, SynthMode::Certain);
  CHECK(res.nominal_arg_check);
  CHECK(res.controller.Dc(0, 0) < -1.0);  // must push the pole negative

  // Example 1 without the uncertainty channel
  Plant nominal = example1_plant();
  nominal.unc.reset();
  SynthesisResult r1 = synthesize(nominal, 1, SynthMode::Certain);
  CHECK(r1.nominal_arg_check);

  // B = 0, C = 0 with unstable A has nothing to stabilize with
  Plant hopeless;
  hopeless.A = Mat::Constant(1, 1, 1.0);
  hopeless.B = Mat::Zero(1, 1);
  hopeless.C = Mat::Zero(1, 1);
  hopeless.q = 0.5;
  hopeless.xi = 0.0;
  hopeless.phi = PhiFunction::parse("0", 1, 1);
  SynthProblem sp = build_certain(hopeless, 0);
  Feasibility fe = solve_feasibility(sp.lmi);
  CHECK(fe.verdict == Verdict::Infeasible);
}

TEST_CASE("uncertain feasibility implies certain feasibility") {
  Plant plant = example1_plant();
  for (int nc : {0, 1}) {
    Feasibility unc = solve_feasibility(build_theorem2(plant, nc).lmi);
    Feasibility cert = solve_feasibility(build_certain(plant, nc).lmi);
    CAPTURE(nc);
    CHECK(unc.verdict == Verdict::Feasible);
    CHECK(cert.verdict == Verdict::Feasible);
  }
}

TEST_CASE("recovery is invariant under assignment scaling") {
  Plant plant = example1_plant();
  SynthProblem sp = build_theorem2(plant, 1);
  Feasibility fe = solve_feasibility(sp.lmi);
  REQUIRE(fe.verdict == Verdict::Feasible);
  SynthesisResult base = recover_controller(sp, fe.assignment, plant);
  SynthesisResult scaled = recover_controller(sp, Vec(2.5 * fe.assignment), plant);
  CHECK((base.controller.Ac - scaled.controller.Ac).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((base.controller.Bc - scaled.controller.Bc).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((base.controller.Cc - scaled.controller.Cc).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((base.controller.Dc - scaled.controller.Dc).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("recovery with synthetic fixtures") {
  // square invertible C: pseudo-inverse recovery is the exact inverse path
  Plant plant = example1_plant();
  plant.C = (Mat(2, 2) << 1, 0, 0, 1).finished();
  plant.unc->N2 = (Mat(2, 1) << 1, -0.5).finished();
  Plant p2 = plant;
  p2.phi = PhiFunction::parse("sin(x2); -sin(x1)+0.5*sin(x2*u1)", 2, 1);
  SynthesisResult res = synthesize(p2, 1);
  CHECK(res.residual_B < 1e-8);
  CHECK(res.residual_D < 1e-8);

  // Afrak = -Pd forces Ac = -I
  SynthProblem sp = build_theorem2(p2, 1);
  Feasibility fe = solve_feasibility(sp.lmi);
  REQUIRE(fe.verdict == Verdict::Feasible);
  Vec forced = fe.assignment;
  const VarBlock& pd = sp.lmi.vars().block("Pd");
  const VarBlock& af = sp.lmi.vars().block("Afrak");
  forced(af.offset) = -forced(pd.offset);
  SynthesisResult r = recover_controller(sp, forced, p2);
  CHECK(r.controller.Ac(0, 0) == Catch::Approx(-1.0));
}

TEST_CASE("theorem-1 analysis: tabulated controller passes, open loop fails") {
  Plant plant = example1_plant();
  CHECK(verify_theorem1(plant, table1(1)).verdict == Verdict::Feasible);
  CHECK(verify_theorem1(plant, Controller::zero_static(1, 1)).verdict == Verdict::Infeasible);
}

TEST_CASE("theorem-1 reduces to robust Lyapunov at xi = 0") {
  Plant plant = example1_plant(0.0);
  CHECK(verify_theorem1(plant, table1(1)).verdict == Verdict::Feasible);
}

TEST_CASE("lemma-3 LMI examples") {
  CHECK(check_lemma3_lmi(Mat(-Mat::Identity(1, 1)), 0.5));
  CHECK_FALSE(check_lemma3_lmi(Mat(Mat::Identity(1, 1)), 0.5));
  // complex pair inside the stability sector but in the right half plane:
  // eigenvalues exp(+-i 0.3 pi), stable for q = 0.5 (threshold 0.25 pi)
  const double phi = 0.3 * M_PI;
  Mat rot(2, 2);
  rot << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  CHECK(check_lemma3_lmi(rot, 0.5));
  CHECK_FALSE(check_lemma3_lmi(rot, 0.9));  // threshold 0.45 pi now exceeds 0.3 pi
}

TEST_CASE("lemma-3 LMI agrees with the spectral test on random matrices") {
  Rng rng(2024);
  int tested = 0;
  while (tested < 40) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 3);
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = 2.0 * rng.normal();
    for (double q : {0.3, 0.9}) {
      const StabilityVerdict sv = check_arg_condition(a, q);
      if (std::abs(sv.min_arg - sv.threshold) < 1e-3) continue;  // boundary band
      CAPTURE(a, q, sv.min_arg, sv.threshold);
      REQUIRE(check_lemma3_lmi(a, q) == sv.stable);
      ++tested;
    }
  }
}

TEST_CASE("corollary-1 experimental synthesis") {
  // already-stable scalar plant, no uncertainty: T4 = 0 admissible
  Plant scalar;
  scalar.A = Mat::Constant(1, 1, -1.0);
  scalar.B = Mat::Constant(1, 1, 1.0);
  scalar.C = Mat::Constant(1, 1, 1.0);
  scalar.q = 0.5;
  scalar.xi = 0.0;
  scalar.phi = PhiFunction::parse("0", 1, 1);
  SynthesisResult res = synthesize(scalar, 0, SynthMode::Corollary1);
  CHECK(res.nominal_arg_check);

  // Example-1 matrices with the nonlinearity removed
  Plant linear = example1_plant();
  linear.phi = PhiFunction::parse("0; 0", 2, 1);
  linear.xi = 0.0;
  SynthesisResult r1 = synthesize(linear, 1, SynthMode::Corollary1);
  CHECK(r1.nominal_arg_check);
  CHECK(r1.residual_D < 1e-6);

  // preconditions: nonzero phi rejected, q outside (0,1) rejected
  CHECK_THROWS_AS(build_corollary1(example1_plant(), 1), DimensionError);
  Plant bad_q = linear;
  bad_q.q = 1.0;
  CHECK_THROWS_AS(build_corollary1(bad_q, 1), DimensionError);
}

TEST_CASE("plain xi convention builds and stays feasible on the fixture") {
  Plant plant = example1_plant();
  BuildOptions opts;
  opts.xi_convention = XiConvention::Plain;
  SynthesisResult res = synthesize(plant, 1, SynthMode::Theorem2, opts);
  CHECK(res.nominal_arg_check);
  CHECK(verify_theorem1(plant, res.controller, opts).verdict == Verdict::Feasible);
  // the two conventions differ in the relaxation block scaling
  CHECK(xi_term(0.1, XiConvention::Plain) == 0.1);
  CHECK(xi_term(0.1, XiConvention::Squared) == Catch::Approx(0.01));
}

TEST_CASE("feasible synthesis points always satisfy recheck") {
  // solver soundness across the synthesis fixtures
  for (const Plant& plant : {example1_plant(), example2_plant()}) {
    for (int nc : {0, 1, 2}) {
      SynthProblem sp = build_theorem2(plant, nc);
      Feasibility fe = solve_feasibility(sp.lmi);
      REQUIRE(fe.verdict == Verdict::Feasible);
      for (double m : recheck(sp.lmi, fe.assignment)) {
        CHECK(m > 0.0);
        CHECK(m >= 0.5 * fe.achieved_margin);
      }
    }
  }
}
