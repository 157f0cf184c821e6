#include "doctest.h"

#include "skewlab/observables.hpp"
#include "skewlab/statistics.hpp"

#include <cmath>

using namespace skewlab;

TEST_CASE("fit_decay on exact data")
{
    Correlations c;
    for (int n = 0; n <= 10; ++n)
        c.lags.push_back({n, 0.3 * std::pow(0.5, n), 1e-9});
    DecayReport r = fit_decay(c);
    CHECK(r.conclusive);
    CHECK(std::abs(r.tau - 0.5) < 1e-6);
    CHECK(r.K == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(r.r2 > 0.999999);

    Correlations noise;
    for (int n = 0; n <= 10; ++n)
        noise.lags.push_back({n, n == 0 ? 1.0 : 1e-4 * ((n % 2) ? 1 : -1), 1e-3});
    DecayReport z = fit_decay(noise);
    CHECK_FALSE(z.conclusive);
    CHECK(z.used.empty());
}

TEST_CASE("psi constant gives zero correlations")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    OrbitSampler sampler(s, 30, 1);
    Observable one = [](const AttractorPoint&) { return 1.0; };
    Correlations c = correlations(sampler, observable_by_name("fiber_x").phi, one, {0, 1, 2, 3}, 20000);
    for (const auto& e : c.lags)
        CHECK(std::abs(e.value) < 1e-12);
}

TEST_CASE("forward and duality estimates agree")
{
    SkewProduct s = make_doubling_solenoid(0.25);
    OrbitSampler sampler(s, 30, 2);
    NamedObservable phi = observable_by_name("mixed"), psi = observable_by_name("tent");
    std::vector<int> lags = {0, 1, 2, 3};
    Correlations f = correlations(sampler, phi.phi, psi.phi, lags, 100000);
    Correlations d = correlations_duality(sampler, phi.phi, psi.phi, lags, 100000);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        double se = std::hypot(f.lags[i].se, d.lags[i].se);
        CHECK(std::abs(f.lags[i].value - d.lags[i].value) < 3 * se + 1e-12);
    }
}

TEST_CASE("Fourier oracle for the 10-mode observable")
{
    CHECK(fourier10_correlation(0) == doctest::Approx(0.5 * (1 - std::pow(0.25, 10)) / 3).epsilon(1e-14));
    CHECK(fourier10_correlation(10) == 0.0);
    SkewProduct s = make_doubling_solenoid(0.1);
    OrbitSampler sampler(s, 30, 4);
    Observable f = observable_by_name("fourier10").phi;
    Correlations c = correlations(sampler, f, f, {0, 1, 2, 3, 4}, 100000);
    for (const auto& e : c.lags)
        CHECK(std::abs(e.value - fourier10_correlation(e.lag)) < 4 * e.se);
}

TEST_CASE("Green-Kubo")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    OrbitSampler sampler(s, 30, 8);
    Observable c = [](const AttractorPoint&) { return 4.0; };
    GreenKuboReport z = green_kubo_sigma(sampler, c, 0, 2000, 64, 10);
    CHECK(z.sigma2 == 0.0);
    CHECK(z.degenerate);

    Observable cos1 = observable_by_name("cos1").phi;
    GreenKuboReport g = green_kubo_sigma(sampler, cos1, 0, 4000, 256, 10);
    CHECK(std::abs(g.sigma2 - 0.5) < 0.025);
    Observable shifted = [&](const AttractorPoint& x) { return cos1(x) + 3.0; };
    GreenKuboReport h = green_kubo_sigma(sampler, shifted, g.J, 4000, 256, 10);
    CHECK(h.sigma2 == doctest::Approx(g.sigma2).epsilon(1e-9));

    GreenKuboReport cob = green_kubo_sigma(sampler, observable_by_name("coboundary").phi, 0, 4000, 256, 10);
    CHECK(std::abs(cob.sigma2_raw) < 3 * cob.se + 1e-12);
    CHECK(cob.degenerate);
}

TEST_CASE("CLT variance is stable in n")
{
    SkewProduct s = make_doubling_solenoid(0.1);
    OrbitSampler sampler(s, 30, 6);
    Observable cos1 = observable_by_name("cos1").phi;
    CltReport a = clt_test(sampler, cos1, 250, 4000);
    CltReport b = clt_test(sampler, cos1, 1000, 4000);
    double ratio = b.sigma2_emp / a.sigma2_emp;
    CHECK(ratio > 0.9);
    CHECK(ratio < 1.1);
    CHECK(a.ks_pvalue > 0.001);

    CltReport k = clt_test(sampler, [](const AttractorPoint&) { return 1.0; }, 100, 500);
    CHECK(k.degenerate);
}

TEST_CASE("stability sweep, t = 0 row")
{
    FamilyBuilder fam = [](double t) { return make_perturbed_family(t, 0.25); };
    NamedObservable tent = observable_by_name("tent");
    StabilityReport r = stability_sweep(fam, tent.phi, {0.0, 0.05, 0.1, 0.2}, 20000, 30, 3, tent.base, 1 << 12);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].diff == 0.0);
    for (const auto& row : r.rows) {
        CHECK(row.ok);
        CHECK(std::abs(row.integral - row.base_integral) < 3 * row.se + 1e-4);
    }
    CHECK_THROWS_AS(stability_sweep(fam, tent.phi, {0.1, 0.2}, 100, 30, 3), std::invalid_argument);
}
