#include "doctest.h"

#include "skewlab/numeric.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/systems.hpp"

#include <cmath>
#include <stdexcept>

using namespace skewlab;

TEST_CASE("doubling solenoid semiconjugacy and contraction")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    CHECK(s.degree() == 2);
    CHECK(s.base().cover_count() == 0);
    CHECK(s.base().omega().empty());
    SplitMix64 rng(3);
    double worst = 0.0, ratio = 0.0;
    for (int k = 0; k < 10000; ++k) {
        AttractorPoint x{rng.uniform(), Fiber(rng.uniform() - 0.5, rng.uniform() - 0.5), 0};
        AttractorPoint y = x;
        y.fiber = Fiber(rng.uniform() - 0.5, rng.uniform() - 0.5);
        AttractorPoint fx = s.apply(x), fy = s.apply(y);
        worst = std::max(worst, circle_distance(s.project(fx), s.base()(s.project(x))));
        ratio = std::max(ratio, (fx.fiber - fy.fiber).norm() / (x.fiber - y.fiber).norm());
    }
    CHECK(worst < 1e-12);
    CHECK(ratio <= 0.1 + 1e-12);
}

TEST_CASE("inverse branches invert the base map")
{
    for (const BaseMap& g : {doubling_map(), manneville_pomeau_map(0.5), perturbed_doubling_map(0.3)}) {
        SplitMix64 rng(5);
        for (int k = 0; k < 2000; ++k) {
            double y = rng.uniform();
            for (int j = 0; j < g.degree(); ++j) {
                double x = g.inverse_branch(j, y);
                CHECK(circle_distance(g(x), y) < 1e-10);
                CHECK(g.branch_of(x) == j);
            }
        }
    }
}

TEST_CASE("Manneville-Pomeau map at the neutral point")
{
    BaseMap g = manneville_pomeau_map(0.5);
    CHECK(g(0.0) == 0.0);
    double h = 1e-8;
    CHECK((g.lift(h) - g.lift(0.0)) / h == doctest::Approx(1.0).epsilon(1e-3));
    // both branch formulas meet at 1/2
    CHECK(std::abs(g.lift(0.5) - 1.0) < 1e-12);
    CHECK(std::abs(g.lift(std::nextafter(0.5, 1.0)) - 1.0) < 1e-12);
    CHECK_THROWS_AS(manneville_pomeau_map(1.5), std::invalid_argument);
}

TEST_CASE("MP expansion constants hold off omega")
{
    BaseMap g = manneville_pomeau_map(0.5);
    for (int k = 0; k <= 10000; ++k) {
        double x = k / 10001.0;
        double lip = g.lipschitz_profile(x);
        if (g.in_omega(x))
            CHECK(lip <= g.L() + 1e-12);
        else
            CHECK(lip <= g.lambda_u());
    }
}

TEST_CASE("perturbed family")
{
    BaseMap g0 = perturbed_doubling_map(0.0), d = doubling_map();
    SplitMix64 rng(9);
    for (int k = 0; k < 1000; ++k) {
        double x = rng.uniform();
        CHECK(g0(x) == d(x));
    }
    double prev = 0.0;
    for (double t : {0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.45}) {
        BaseMap g = perturbed_doubling_map(t);
        double sup = 0.0;
        for (int k = 0; k <= 10000; ++k) {
            double x = k / 10000.0;
            sup = std::max(sup, std::abs(g.lift(x) - d.lift(x)));
            double lip = g.lipschitz_profile(x);
            if (g.in_omega(x))
                CHECK(lip <= g.L() + 1e-12);
            else
                CHECK(lip <= g.lambda_u());
        }
        CHECK(sup > prev);
        prev = sup;
    }
    CHECK_THROWS_AS(perturbed_doubling_map(0.5), std::invalid_argument);
}

TEST_CASE("reconstruct_point")
{
    SkewProduct s = make_doubling_solenoid(0.25);
    std::vector<int> it = {1, 0, 0, 1, 1, 0, 1, 0, 1, 1};
    ItineraryPoint p0 = reconstruct_point(s, 0.3, it, 0);
    CHECK(p0.base == 0.3);
    CHECK(p0.fiber == Fiber::Zero());

    const int n = 10;
    ItineraryPoint a = reconstruct_point(s, 0, 0.3, it, n, Fiber(1, 0));
    ItineraryPoint b = reconstruct_point(s, 0, 0.3, it, n, Fiber(-1, 0));
    CHECK((a.fiber - b.fiber).norm() <= std::pow(0.25, n) * s.diameter());

    // forward image shifts the itinerary
    ItineraryPoint x = reconstruct_point(s, 0.3, it, n);
    AttractorPoint fx = s.apply(x.point());
    std::vector<int> shifted = {s.base().branch_of(0.3)};
    shifted.insert(shifted.end(), it.begin(), it.end() - 1);
    ItineraryPoint y = reconstruct_point(s, s.base()(0.3), shifted, n);
    CHECK(std::abs(fx.base - y.base) < 1e-15);
    CHECK((fx.fiber - y.fiber).norm() <= std::pow(0.25, n) * s.diameter());

    // backward shift is f^{-1}
    ItineraryPoint back = backward_shift(s, x, 1);
    AttractorPoint again = s.apply(back.point());
    CHECK(std::abs(again.base - x.base) < 1e-12);
    CHECK((again.fiber - x.fiber).norm() <= std::pow(0.25, n - 1) * s.diameter());

    CHECK_THROWS_AS(reconstruct_point(s, 0.3, it, 11), std::invalid_argument);
    std::vector<int> bad = {2};
    CHECK_THROWS_AS(reconstruct_point(s, 0.3, bad, 1), std::out_of_range);
}
