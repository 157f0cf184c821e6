#include "doctest.h"

#include "skewlab/transfer.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace skewlab;

namespace {

const Observable one = [](const AttractorPoint&) { return 1.0; };

ConeParams doubling_params()
{
    ConeInputs in;
    in.lambda_s = 0.1;
    return choose_cone_params(in);
}

} // namespace

TEST_CASE("Lambda1 closed form")
{
    CHECK(Lambda1_of(0.5) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(Lambda1_of(0.0) == 0.0);
}

TEST_CASE("choose_cone_params")
{
    ConeParams p = doubling_params();
    CHECK(cone_param_violations(p).empty());
    CHECK(p.Lambda1 == doctest::Approx(Lambda1_of(p.lambda)));
    CHECK(p.sigma < 1.0);
    CHECK(std::isfinite(p.delta_bound));

    ConeInputs hot;
    hot.lambda_s = 0.999;
    hot.epsilon = 0.05;
    CHECK_THROWS_AS(choose_cone_params(hot), std::domain_error);

    ConeParams small_b = with_b_c(p, 0.5 * p.b_min, p.c);
    CHECK_FALSE(cone_param_violations(small_b).empty());
}

TEST_CASE("transfer of constants")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    Potential zero = Potential::constant_potential();
    std::vector<int> it(8, 1);
    ItineraryPoint x = reconstruct_point(s, 0.37, it, 8);
    CHECK(apply_transfer(s, one, x, zero) == 1.0);
    CHECK(apply_transfer_n(s, one, x, 5, zero) == 1.0);
}

TEST_CASE("L^2 is the composition")
{
    SkewProduct s = make_doubling_solenoid(0.25);
    Potential pot;
    pot.value = [](const AttractorPoint& x) { return 0.1 * std::sin(2 * std::numbers::pi * x.base) + 0.05 * x.fiber.y(); };
    pot.constant = false;
    Observable phi = [](const AttractorPoint& x) { return 2.0 + std::cos(2 * std::numbers::pi * x.base) * x.fiber.x(); };
    std::vector<int> it = {0, 1, 1, 0, 1, 0, 0, 1};
    ItineraryPoint x = reconstruct_point(s, 0.81, it, 8);
    ItineraryPoint x1 = backward_shift(s, x, 1), x2 = backward_shift(s, x, 2);
    double expected = phi(x2.point()) * std::exp(pot(x1.point()) + pot(x2.point()));
    CHECK(apply_transfer_n(s, phi, x, 2, pot) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("push_density and the transfer identity")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    Potential zero = Potential::constant_potential();
    LeafQuadrature q = build_quadrature(s, 0.45, 6);
    LeafDensity ones = LeafDensity::Ones(static_cast<Eigen::Index>(q.size()));
    for (int j = 0; j < 2; ++j) {
        LeafDensity r = push_density(q, ones, j, zero);
        CHECK(r.size() == 32);
        CHECK((r.array() == 0.5).all());
    }
    TransferIdentity t1 = transfer_leaf_integral(s, one, ones, q, zero);
    CHECK(t1.direct == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t1.residual() < 1e-15);

    ConeParams p = doubling_params();
    ConeSpec cone = density_cone(q, p.kappa, p.alpha);
    SplitMix64 rng(4);
    for (int k = 0; k < 20; ++k) {
        LeafDensity rho = random_cone_density(q, cone, rng, 0.9);
        CHECK(in_cone(rho, cone));
        Observable phi = random_bump(rng);
        CHECK(transfer_leaf_integral(s, phi, rho, q, zero).residual() < 1e-12);
        Observable positive = [&](const AttractorPoint& x) { return 2.0 + phi(x); };
        CHECK(transfer_leaf_integral(s, positive, rho, q, zero).direct > 0.0);
    }
}

TEST_CASE("density contraction lemma")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    ConeParams p = doubling_params();
    auto trials = density_contraction_trials(s, p, 5, 100, 3);
    REQUIRE(trials.size() == 100);
    for (const auto& t : trials) {
        CHECK(t.pushed_in_cone);
        CHECK(t.theta_j <= p.Lambda1 * t.theta * (1 + 1e-9) + 1e-12);
    }
}

TEST_CASE("conditions B and C")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    ConeParams p = doubling_params();
    SamplingPlan plan;
    plan.leaves = 4;
    plan.depth = 5;
    auto leaves = sample_leaves(s, p, plan);
    auto pairs = sample_leaf_pairs(s, plan);

    MarginReport B = check_condition_B(values_of(one), leaves, p.b);
    CHECK(B.max_ratio < 1e-12);
    CHECK(B.holds());

    // a base-only Lipschitz observable: C ratio bounded by Lip / inf
    Observable base_only = [](const AttractorPoint& x) { return 2.0 + std::sin(2 * std::numbers::pi * x.base); };
    MarginReport C = check_condition_C(s, values_of(base_only), pairs, leaves, 1.0, 1e9);
    CHECK(C.max_ratio <= 2 * std::numbers::pi / 1.0 + 1e-9);

    // diagonal pairs have zero numerator
    std::vector<std::pair<LeafQuadrature, LeafQuadrature>> same = {{leaves[0].quad, leaves[0].quad}};
    MarginReport C0 = check_condition_C(s, values_of(base_only), same, leaves, 1.0, p.c);
    CHECK(C0.max_ratio == 0.0);
}

TEST_CASE("lift_to_cone and diameter")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    ConeParams p = doubling_params();
    SamplingPlan plan;
    plan.leaves = 4;
    plan.depth = 5;
    Lift c = lift_to_cone(s, [](const AttractorPoint&) { return 3.0; }, p, plan);
    CHECK(c.K_leaf == doctest::Approx(-3.0));

    Observable base_only = [](const AttractorPoint& x) { return std::cos(2 * std::numbers::pi * x.base); };
    Lift l = lift_to_cone(s, base_only, p, plan);
    CHECK(l.K_leaf == doctest::Approx(1.0).epsilon(0.05));
    auto leaves = sample_leaves(s, p, plan);
    auto pairs = sample_leaf_pairs(s, plan);
    CHECK(check_condition_A(values_of(l.observable), leaves).positive);
    CHECK(check_condition_B(values_of(l.observable), leaves, p.b).holds());
    CHECK(check_condition_C(s, values_of(l.observable), pairs, leaves, p.alpha, p.c).holds());

    LeafValues img = transfer_values(s, l.observable, 1, Potential::constant_potential());
    CHECK(theta_plus(img, img, leaves) == 0.0);
    DiameterReport d = estimate_diameter(s, p, {l.observable, lift_to_cone(s, [](const AttractorPoint& x) {
                                                     return x.fiber.x();
                                                 }, p, plan).observable},
                                         leaves, Potential::constant_potential());
    CHECK(d.theta_plus_max <= d.theta_plus_bound);
    CHECK(d.tau_est < 1.0);
}
