#include "skewlab/statistics.hpp"
#include "skewlab/numeric.hpp"
#include "skewlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace skewlab {

namespace {

struct GroupSums {
    std::vector<double> prod, a, b; // per lag: sum of products, sum of the lagged factor, sum of the other
    double count = 0.0;
};

double jackknife_se(const std::vector<double>& loo)
{
    const double G = static_cast<double>(loo.size());
    if (loo.size() < 2)
        return 0.0;
    double mean = 0.0;
    for (double v : loo)
        mean += v;
    mean /= G;
    double ss = 0.0;
    for (double v : loo)
        ss += (v - mean) * (v - mean);
    return std::sqrt((G - 1.0) / G * ss);
}

// values(i, orbit, out_a, out_b): out_a[l], out_b[l] are the two factors for lag l
template <class Fill>
Correlations grouped_correlations(const std::vector<int>& lags, std::size_t n_samples, int groups, Fill&& fill)
{
    if (lags.empty())
        throw std::invalid_argument("correlations: no lags requested");
    for (int l : lags)
        if (l < 0)
            throw std::invalid_argument("correlations: negative lag");
    if (n_samples < 2)
        throw std::invalid_argument("correlations: need at least two samples");
    const std::size_t G = std::min<std::size_t>(std::max(groups, 2), n_samples);
    const std::size_t L = lags.size();
    std::vector<GroupSums> sums(G);
    parallel_for(G, [&](std::size_t g) {
        GroupSums& s = sums[g];
        s.prod.assign(L, 0.0);
        s.a.assign(L, 0.0);
        s.b.assign(L, 0.0);
        std::vector<CompensatedSum> cp(L), ca(L), cb(L);
        std::vector<double> va(L), vb(L);
        std::size_t begin = n_samples * g / G, end = n_samples * (g + 1) / G;
        for (std::size_t i = begin; i < end; ++i) {
            fill(i, va, vb);
            for (std::size_t l = 0; l < L; ++l) {
                cp[l].add(va[l] * vb[l]);
                ca[l].add(va[l]);
                cb[l].add(vb[l]);
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            s.prod[l] = cp[l].value();
            s.a[l] = ca[l].value();
            s.b[l] = cb[l].value();
        }
        s.count = static_cast<double>(end - begin);
    });

    Correlations out;
    out.samples = n_samples;
    for (std::size_t l = 0; l < L; ++l) {
        CompensatedSum tp, ta, tb;
        for (const auto& s : sums) {
            tp.add(s.prod[l]);
            ta.add(s.a[l]);
            tb.add(s.b[l]);
        }
        const double N = static_cast<double>(n_samples);
        auto cov = [](double p, double a, double b, double n) { return p / n - (a / n) * (b / n); };
        CorrelationEstimate e;
        e.lag = lags[l];
        e.value = cov(tp.value(), ta.value(), tb.value(), N);
        std::vector<double> loo(G);
        for (std::size_t g = 0; g < G; ++g)
            loo[g] = cov(tp.value() - sums[g].prod[l], ta.value() - sums[g].a[l], tb.value() - sums[g].b[l],
                         N - sums[g].count);
        e.se = jackknife_se(loo);
        out.lags.push_back(e);
    }
    return out;
}

} // namespace

Correlations correlations(const OrbitSampler& sampler, const Observable& phi, const Observable& psi,
                          const std::vector<int>& lags, std::size_t n_samples, int groups)
{
    const int n_max = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
    return grouped_correlations(lags, n_samples, groups, [&](std::size_t i, std::vector<double>& a, std::vector<double>& b) {
        thread_local std::vector<AttractorPoint> orbit;
        sampler.orbit(i, n_max, 0, orbit);
        double p0 = psi(orbit[0]);
        for (std::size_t l = 0; l < lags.size(); ++l) {
            a[l] = phi(orbit[lags[l]]);
            b[l] = p0;
        }
    });
}

CorrelationEstimate correlation(const OrbitSampler& sampler, const Observable& phi, const Observable& psi, int lag,
                                std::size_t n_samples)
{
    return correlations(sampler, phi, psi, {lag}, n_samples).lags.front();
}

Correlations correlations_duality(const OrbitSampler& sampler, const Observable& phi, const Observable& psi,
                                  const std::vector<int>& lags, std::size_t n_samples, int groups)
{
    const int n_max = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
    return grouped_correlations(lags, n_samples, groups, [&](std::size_t i, std::vector<double>& a, std::vector<double>& b) {
        thread_local std::vector<AttractorPoint> orbit;
        sampler.orbit(i, 0, n_max, orbit);
        double p0 = phi(orbit[n_max]);
        for (std::size_t l = 0; l < lags.size(); ++l) {
            a[l] = p0;
            b[l] = psi(orbit[n_max - lags[l]]);
        }
    });
}

DecayReport fit_decay(const Correlations& c, double noise_factor)
{
    DecayReport rep;
    rep.lags = c.lags;
    bool all_se = true;
    std::vector<double> x, y, w;
    for (const auto& e : c.lags) {
        if (e.lag < 1)
            continue;
        double a = std::abs(e.value);
        if (a > noise_factor * e.se && a > 0.0) {
            rep.used.push_back(e.lag);
            x.push_back(e.lag);
            y.push_back(std::log(a));
            w.push_back(e.se > 0.0 ? (a / e.se) * (a / e.se) : 1.0);
            all_se = all_se && e.se > 0.0;
        } else {
            rep.excluded.push_back(e.lag);
        }
    }
    if (rep.used.size() < 4)
        return rep;
    LineFit fit = all_se ? fit_line(x, y, w) : fit_line(x, y);
    rep.tau = std::exp(fit.slope);
    rep.K = std::exp(fit.intercept);
    rep.r2 = fit.r2;
    rep.conclusive = rep.tau > 0.0 && rep.tau < 1.0;
    return rep;
}

namespace {

// Raw sums of one group of orbits for the time-averaged autocovariances.
struct AutoSums {
    double count = 0.0;     // number of phi values
    double total = 0.0;     // sum of phi
    std::vector<double> s;  // sum phi_t phi_{t+j}
    std::vector<double> a;  // sum phi_t over t < T - j
    std::vector<double> b;  // sum phi_t over t >= j
    std::vector<double> n;  // number of pairs at lag j
};

struct AutoEstimate {
    double mean = 0.0;
    std::vector<double> gamma;
};

AutoEstimate autocov_from(const AutoSums& s)
{
    AutoEstimate e;
    e.mean = s.total / s.count;
    const double m = e.mean;
    e.gamma.resize(s.s.size());
    for (std::size_t j = 0; j < s.s.size(); ++j)
        e.gamma[j] = (s.s[j] - m * (s.a[j] + s.b[j])) / s.n[j] + m * m;
    return e;
}

// t + sign * g
AutoSums combine(const AutoSums& t, const AutoSums& g, double sign)
{
    AutoSums r = t;
    r.count += sign * g.count;
    r.total += sign * g.total;
    for (std::size_t j = 0; j < r.s.size(); ++j) {
        r.s[j] += sign * g.s[j];
        r.a[j] += sign * g.a[j];
        r.b[j] += sign * g.b[j];
        r.n[j] += sign * g.n[j];
    }
    return r;
}

double truncated_sigma2(const AutoEstimate& e, int J)
{
    double s = e.gamma[0];
    for (int j = 1; j <= J; ++j)
        s += 2.0 * e.gamma[j];
    return s;
}

struct OrbitRun {
    std::vector<AutoSums> groups;
    AutoSums total;
    std::vector<double> birkhoff; // raw sum of phi over each orbit
};

OrbitRun run_orbits(const OrbitSampler& sampler, const Observable& phi, int T, std::size_t N, int max_lag)
{
    if (T < 1 || N < 2)
        throw std::invalid_argument("green_kubo: need orbit length >= 1 and at least two samples");
    max_lag = std::min(max_lag, T - 1);
    const std::size_t G = std::min<std::size_t>(kJackknifeGroups, N);
    const std::size_t L = static_cast<std::size_t>(max_lag) + 1;
    OrbitRun run;
    run.groups.resize(G);
    run.birkhoff.resize(N);
    parallel_for(G, [&](std::size_t g) {
        AutoSums& s = run.groups[g];
        s.s.assign(L, 0.0);
        s.a.assign(L, 0.0);
        s.b.assign(L, 0.0);
        s.n.assign(L, 0.0);
        std::vector<AttractorPoint> orbit;
        std::vector<double> v(T);
        std::vector<double> prefix(T + 1);
        for (std::size_t i = N * g / G; i < N * (g + 1) / G; ++i) {
            sampler.orbit(i, T - 1, 0, orbit);
            CompensatedSum tot;
            prefix[0] = 0.0;
            for (int t = 0; t < T; ++t) {
                v[t] = phi(orbit[t]);
                tot.add(v[t]);
                prefix[t + 1] = prefix[t] + v[t];
            }
            run.birkhoff[i] = tot.value();
            s.total += tot.value();
            s.count += T;
            for (std::size_t j = 0; j < L; ++j) {
                double acc = 0.0;
                for (int t = 0; t + static_cast<int>(j) < T; ++t)
                    acc += v[t] * v[t + j];
                s.s[j] += acc;
                s.a[j] += prefix[T - j];
                s.b[j] += prefix[T] - prefix[j];
                s.n[j] += T - static_cast<double>(j);
            }
        }
    });
    run.total = run.groups[0];
    for (std::size_t g = 1; g < G; ++g)
        run.total = combine(run.total, run.groups[g], 1.0);
    return run;
}

GreenKuboReport green_kubo_from(const OrbitRun& run, int J, std::size_t N, int T)
{
    GreenKuboReport rep;
    rep.samples = N;
    rep.orbit_length = T;
    const std::size_t G = run.groups.size();
    AutoEstimate full = autocov_from(run.total);
    std::vector<AutoEstimate> loo(G);
    for (std::size_t g = 0; g < G; ++g)
        loo[g] = autocov_from(combine(run.total, run.groups[g], -1.0));
    rep.mean = full.mean;
    const int L = static_cast<int>(full.gamma.size());
    Correlations lagc;
    for (int j = 0; j < L; ++j) {
        std::vector<double> v(G);
        for (std::size_t g = 0; g < G; ++g)
            v[g] = loo[g].gamma[j];
        CorrelationEstimate e{j, full.gamma[j], jackknife_se(v)};
        rep.autocov.push_back(e);
        lagc.lags.push_back(e);
    }
    rep.envelope = fit_decay(lagc);

    if (J <= 0) {
        rep.auto_J = true;
        J = L - 1;
        if (rep.envelope.conclusive) {
            for (int j = 1; j < L; ++j)
                if (rep.envelope.K * std::pow(rep.envelope.tau, j) < rep.autocov[j].se) {
                    J = j;
                    break;
                }
        } else {
            for (int j = 1; j < L; ++j)
                if (std::abs(rep.autocov[j].value) < 3.0 * rep.autocov[j].se) {
                    J = j;
                    break;
                }
        }
        J = std::max(J, 1);
    }
    if (J >= L)
        throw std::invalid_argument("green_kubo_sigma: J exceeds the computed lags");
    rep.J = J;
    rep.sigma2_raw = truncated_sigma2(full, J);
    std::vector<double> v(G);
    for (std::size_t g = 0; g < G; ++g)
        v[g] = truncated_sigma2(loo[g], J);
    rep.se = jackknife_se(v);
    rep.sigma2 = std::max(0.0, rep.sigma2_raw);
    if (rep.envelope.conclusive)
        rep.tail_bound = rep.envelope.K * std::pow(rep.envelope.tau, J + 1) / (1.0 - rep.envelope.tau);
    rep.degenerate = rep.sigma2_raw <= std::max(3.0 * rep.se, 1e-12);
    return rep;
}

} // namespace

GreenKuboReport green_kubo_sigma(const OrbitSampler& sampler, const Observable& phi, int J, std::size_t n_samples,
                                 int orbit_length, int max_lag)
{
    if (J < 0)
        throw std::invalid_argument("green_kubo_sigma: J must be >= 1 (or 0 for automatic)");
    max_lag = std::max(max_lag, J);
    OrbitRun run = run_orbits(sampler, phi, orbit_length, n_samples, max_lag);
    return green_kubo_from(run, J, n_samples, orbit_length);
}

CltReport clt_test(const OrbitSampler& sampler, const Observable& phi, int n, std::size_t n_samples, int max_lag)
{
    if (n < 1)
        throw std::invalid_argument("clt_test: n must be positive");
    OrbitRun run = run_orbits(sampler, phi, n, n_samples, max_lag);
    CltReport rep;
    rep.n = n;
    rep.samples = n_samples;
    rep.green_kubo = green_kubo_from(run, 0, n_samples, n);
    const double m = rep.green_kubo.mean;
    const double rn = std::sqrt(static_cast<double>(n));
    std::vector<double> s(n_samples);
    double mean = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        s[i] = (run.birkhoff[i] - n * m) / rn;
        mean += s[i];
    }
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : s)
        var += (v - mean) * (v - mean);
    rep.sigma2_emp = var / static_cast<double>(n_samples - 1);

    rep.degenerate = rep.green_kubo.degenerate;
    if (rep.degenerate)
        return rep;
    std::sort(s.begin(), s.end());
    const double sd = std::sqrt(rep.green_kubo.sigma2);
    const double N = static_cast<double>(n_samples);
    double d = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double F = normal_cdf(s[i], 0.0, sd);
        d = std::max({d, (i + 1) / N - F, F - i / N});
    }
    rep.ks_statistic = d;
    rep.ks_pvalue = kolmogorov_pvalue(d, n_samples);
    rep.ks_run = true;
    return rep;
}

StabilityReport stability_sweep(const FamilyBuilder& family, const Observable& phi, const std::vector<double>& t_grid,
                                std::size_t n_samples, int depth, std::uint64_t seed,
                                const std::function<double(double)>& base_phi, int quotient_grid)
{
    if (std::find(t_grid.begin(), t_grid.end(), 0.0) == t_grid.end())
        throw std::invalid_argument("stability_sweep: the t grid must contain 0");
    if (n_samples < 2)
        throw std::invalid_argument("stability_sweep: need at least two samples");
    const SkewProduct reference = family(0.0);
    OrbitSampler ref_sampler(reference, depth, seed);
    std::vector<double> ref_values(n_samples);
    parallel_for(n_samples, [&](std::size_t i) { ref_values[i] = phi(ref_sampler.point(i).point()); });

    StabilityReport rep;
    const double N = static_cast<double>(n_samples);
    for (double t : t_grid) {
        StabilityRow row;
        row.t = t;
        try {
            const SkewProduct sys = family(t);
            OrbitSampler sampler(sys, depth, seed);
            std::vector<double> vals(n_samples);
            parallel_for(n_samples, [&](std::size_t i) { vals[i] = phi(sampler.point(i).point()); });
            CompensatedSum s, d;
            for (std::size_t i = 0; i < n_samples; ++i) {
                s.add(vals[i]);
                d.add(vals[i] - ref_values[i]);
            }
            row.integral = s.value() / N;
            row.diff = d.value() / N;
            double vs = 0.0, vd = 0.0;
            for (std::size_t i = 0; i < n_samples; ++i) {
                vs += (vals[i] - row.integral) * (vals[i] - row.integral);
                double di = vals[i] - ref_values[i] - row.diff;
                vd += di * di;
            }
            row.se = std::sqrt(vs / (N - 1.0) / N);
            row.diff_se = std::sqrt(vd / (N - 1.0) / N);
            if (base_phi) {
                QuotientMeasure q = quotient_mem(sys.base(), quotient_grid);
                row.base_integral = q.integrate(base_phi);
                row.has_base = true;
            }
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        rep.rows.push_back(row);
    }

    // weighted fit of diff = k1 t + k2 t^2 through the origin
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    std::vector<const StabilityRow*> positive;
    for (const auto& r : rep.rows) {
        if (!r.ok || r.t <= 0.0)
            continue;
        positive.push_back(&r);
        double w = r.diff_se > 0.0 ? 1.0 / (r.diff_se * r.diff_se) : 1.0;
        Eigen::Vector2d phi_t(r.t, r.t * r.t);
        A += w * phi_t * phi_t.transpose();
        rhs += w * r.diff * phi_t;
    }
    if (positive.size() < 3)
        return rep;
    Eigen::Vector2d k = A.ldlt().solve(rhs);
    rep.k1 = k(0);
    rep.k2 = k(1);
    for (auto& r : rep.rows)
        r.profile = rep.k1 * r.t + rep.k2 * r.t * r.t;

    std::sort(positive.begin(), positive.end(), [](auto* a, auto* b) { return a->t < b->t; });
    rep.small_t_within = true;
    for (std::size_t i = 0; i < 3; ++i) {
        const StabilityRow* r = positive[i];
        double prof = rep.k1 * r->t + rep.k2 * r->t * r->t;
        if (std::abs(r->diff - prof) > 3.0 * r->diff_se)
            rep.small_t_within = false;
    }
    rep.profile_monotone = true;
    double prev = 0.0;
    for (const auto* r : positive) {
        double a = std::abs(rep.k1 * r->t + rep.k2 * r->t * r->t);
        if (a < prev)
            rep.profile_monotone = false;
        prev = a;
    }
    return rep;
}

} // namespace skewlab
