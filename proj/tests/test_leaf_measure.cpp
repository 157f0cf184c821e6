#include "doctest.h"

#include "skewlab/leaf_measure.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/transfer.hpp"

#include <cmath>
#include <numbers>

using namespace skewlab;

TEST_CASE("uniform weights")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    LeafQuadrature q0 = build_quadrature(s, 0.2, 0);
    REQUIRE(q0.size() == 1);
    CHECK(q0.weights[0] == 1.0);

    LeafQuadrature q3 = build_quadrature(s, 0.2, 3);
    REQUIRE(q3.size() == 8);
    for (double w : q3.weights)
        CHECK(w == 0.125);
    for (int n = 0; n <= 12; ++n)
        CHECK(std::abs(weight_sum(build_quadrature(s, 0.7, n)) - 1.0) <= 1e-15);
}

TEST_CASE("refinement consistency is exact")
{
    SkewProduct s = make_mp_solenoid(0.5, 0.25);
    for (int n = 0; n < 8; ++n) {
        LeafQuadrature fine = build_quadrature(s, 0.4, n + 1), coarse = build_quadrature(s, 0.4, n);
        std::vector<double> agg = aggregate_to_parent(fine);
        REQUIRE(agg.size() == coarse.size());
        for (std::size_t i = 0; i < agg.size(); ++i)
            CHECK(agg[i] == coarse.weights[i]);
    }
}

TEST_CASE("leaf integrals")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    LeafQuadrature q = build_quadrature(s, 0.3, 5);
    CHECK(integrate_leaf([](const AttractorPoint&) { return 2.5; }, q) == doctest::Approx(2.5).epsilon(1e-15));

    // indicator of the cell of node 7: the fibers of different cells are disjoint
    const ItineraryPoint& target = q.nodes[7];
    Observable ind = [&](const AttractorPoint& x) { return (x.fiber - target.fiber).norm() < 1e-9 ? 1.0 : 0.0; };
    CHECK(integrate_leaf(ind, q) == 1.0 / 32.0);

    Observable c = [](const AttractorPoint& x) { return std::cos(2 * std::numbers::pi * x.base) + x.fiber.x(); };
    for (int n = 2; n < 10; ++n) {
        double a = integrate_leaf(c, build_quadrature(s, 0.3, n));
        double b = integrate_leaf(c, build_quadrature(s, 0.3, n + 2));
        CHECK(std::abs(a - b) <= std::pow(0.1, n) * s.diameter());
    }
}

TEST_CASE("change of variables")
{
    SkewProduct s = make_doubling_solenoid(0.25);
    CHECK(change_of_variables_check(s, [](const AttractorPoint&) { return 1.0; }, 0.6, 1, 6) < 1e-15);
    SplitMix64 rng(21);
    for (int k = 0; k < 30; ++k) {
        Observable phi = random_bump(rng);
        CHECK(change_of_variables_check(s, phi, rng.uniform(), k % 2, 6) < 1e-12);
    }
}

TEST_CASE("node budget")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    CHECK_THROWS_AS(build_quadrature(s, 0.1, 12, 0, 1000), std::length_error);
}
