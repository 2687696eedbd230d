#include "folmi/model.hpp"

#include <catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace folmi;
using namespace folmi_test;

TEST_CASE("validate passes the worked examples") {
  for (Plant plant : {example1_plant(), example2_plant()}) {
    const ValidationReport rep = validate(plant);
    CAPTURE(plant.C);
    for (const auto& c : rep.checks) {
      CAPTURE(c.name, c.detail);
      CHECK(c.passed);
    }
    CHECK(rep.all_passed());
  }
}

TEST_CASE("validate catches broken models") {
  Plant p = example1_plant();
  p.A.setZero();
  p.B.setZero();
  const ValidationReport rep = validate(p);
  bool ctrb = true, obsv = true;
  for (const auto& c : rep.checks) {
    if (c.name == "controllable") ctrb = c.passed;
    if (c.name == "observable") obsv = c.passed;
  }
  CHECK_FALSE(ctrb);
  CHECK_FALSE(obsv);
  CHECK_FALSE(rep.all_passed());

  Plant bad_phi = example1_plant();
  bad_phi.phi = PhiFunction::parse("sin(x2)+1; 0", 2, 1);
  bool origin = true;
  for (const auto& c : validate(bad_phi).checks)
    if (c.name == "phi_vanishes_at_origin") origin = c.passed;
  CHECK_FALSE(origin);

  Plant bad_j = example1_plant();
  bad_j.unc->J = (Mat(2, 2) << 0, 1, -1, 0).finished();  // Sym(J) = 0
  bool jpd = true;
  for (const auto& c : validate(bad_j).checks)
    if (c.name == "sym_J_posdef") jpd = c.passed;
  CHECK_FALSE(jpd);
}

TEST_CASE("example 2 stays observable despite singular C") {
  Plant p = example2_plant();
  CHECK(std::abs(p.C.determinant()) < 1e-12);
  bool obsv = false;
  for (const auto& c : validate(p).checks)
    if (c.name == "observable") obsv = c.passed;
  CHECK(obsv);
}

TEST_CASE("closed-loop assembly matches the hand-computed blocks") {
  Plant plant = example1_plant();

  // static gain -1.6: A_psi = [[-1.6, -0.6], [1.2, -6.8]]
  {
    const ClosedLoop cl = assemble_closed_loop(plant, table1(0));
    Mat expect(2, 2);
    expect << -1.6, -0.6, 1.2, -6.8;
    CHECK((cl.A_psi - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  // zero static controller leaves A untouched
  {
    const ClosedLoop cl = assemble_closed_loop(plant, Controller::zero_static(1, 1));
    CHECK((cl.A_psi - plant.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((cl.Ntilde - plant.unc->N1).cwiseAbs().maxCoeff() == 0.0);
  }
  // first-order controller: full 3x3 block form
  {
    const ClosedLoop cl = assemble_closed_loop(plant, table1(1));
    Mat expect(3, 3);
    expect << -2.3, -1.3, 0.6, 0.85, -7.15, 0.3, -2.8, -2.8, -1.3;
    CHECK((cl.A_psi - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(cl.Mtilde.rows() == 3);
    CHECK(cl.Mtilde.bottomRows(1).cwiseAbs().maxCoeff() == 0.0);
    // Ntilde = [N1 + N2 Dc C, N2 Cc]
    Mat nt(2, 3);
    nt.leftCols(2) = plant.unc->N1 + plant.unc->N2 * table1(1).Dc * plant.C;
    nt.rightCols(1) = plant.unc->N2 * table1(1).Cc;
    CHECK((cl.Ntilde - nt).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("delta_from_z worked value") {
  // Z = I, J = I gives Delta = 0.5 I.
  const Mat d = delta_from_z(Mat::Identity(2, 2), Mat::Identity(2, 2));
  CHECK((d - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sampled uncertainties satisfy the admissibility predicate") {
  const UncertaintyModel unc = *example1_plant().unc;
  // scale 0 collapses to zero
  CHECK(sample_uncertainty(unc, 1, 0.0).cwiseAbs().maxCoeff() == 0.0);
  // determinism
  CHECK((sample_uncertainty(unc, 42, 1.0) - sample_uncertainty(unc, 42, 1.0))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((sample_uncertainty(unc, 42, 1.0) - sample_uncertainty(unc, 43, 1.0))
            .cwiseAbs()
            .maxCoeff() > 1e-8);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Mat delta = sample_uncertainty(unc, seed, 1.0);
    REQUIRE(uncertainty_admissible(delta, unc.J));
  }
}

TEST_CASE("realize_plant applies the structured perturbation") {
  Plant plant = example1_plant();

  // Delta = 0: nominal matrices unchanged, uncertainty cleared
  {
    const Plant r = realize_plant(plant, Mat::Zero(2, 2));
    CHECK((r.A - plant.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.B - plant.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK_FALSE(r.unc.has_value());
  }
  // Delta = 0.5 I: M Delta N1 = [[0.125, 0.625], [-0.1, -0.25]]
  {
    const Plant r = realize_plant(plant, Mat(0.5 * Mat::Identity(2, 2)));
    Mat expect_a(2, 2);
    expect_a << 0.125, 1.625, 1.9, -6.25;
    CHECK((r.A - expect_a).cwiseAbs().maxCoeff() < 1e-14);
    const Mat expect_b = plant.B + 0.5 * plant.unc->M * plant.unc->N2;
    CHECK((r.B - expect_b).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK_THROWS_AS(realize_plant(plant, Mat::Zero(3, 3)), DimensionError);
}

TEST_CASE("realize_plant is affine in Delta") {
  Plant plant = example1_plant();
  const Mat delta = sample_uncertainty(*plant.unc, 9, 1.0);
  for (double alpha : {0.25, 0.5, 2.0}) {
    const Plant r1 = realize_plant(plant, delta);
    const Plant ra = realize_plant(plant, Mat(alpha * delta));
    const Mat lhs = ra.A - plant.A;
    const Mat rhs = alpha * (r1.A - plant.A);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("dimension guards") {
  Plant plant = example1_plant();
  Controller bad = table1(1);
  bad.Bc = Mat::Zero(1, 2);  // p = 1 expected
  CHECK_THROWS_AS(assemble_closed_loop(plant, bad), DimensionError);

  Plant broken = plant;
  broken.B = Mat::Zero(3, 1);
  CHECK_THROWS_AS(broken.require_consistent(), DimensionError);
}
