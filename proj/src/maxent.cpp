#include "skewlab/maxent.hpp"
#include "skewlab/numeric.hpp"
#include "skewlab/parallel.hpp"
#include "skewlab/rng.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace skewlab {

namespace {

bool affine_full_branch(const BaseMap& g)
{
    for (int i = 0; i < 257; ++i) {
        double x = (i + 0.5) / 257.0;
        if (std::abs(g.derivative(x) - g.degree()) > 1e-14 * g.degree())
            return false;
    }
    return true;
}

} // namespace

double QuotientMeasure::cdf(double x) const
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    double s = x * grid;
    int cell = std::min(static_cast<int>(s), grid - 1);
    CompensatedSum acc;
    for (int i = 0; i < cell; ++i)
        acc.add(mass[i]);
    acc.add(mass[cell] * (s - cell));
    return acc.value();
}

double QuotientMeasure::inverse_cdf(double u) const
{
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        double m = mass[i];
        if (acc + m >= u && m > 0.0)
            return (i + std::clamp((u - acc) / m, 0.0, 1.0)) / grid;
        acc += m;
    }
    return std::nextafter(1.0, 0.0);
}

double QuotientMeasure::integrate(const std::function<double(double)>& f) const
{
    CompensatedSum acc;
    for (int i = 0; i < grid; ++i)
        acc.add(mass[i] * f((i + 0.5) / grid));
    return acc.value();
}

QuotientMeasure quotient_mem(const BaseMap& base, int grid, int max_iterations, double tol)
{
    if (grid < 2)
        throw std::invalid_argument("quotient_mem: grid must have at least two cells");
    const int p = base.degree();
    QuotientMeasure q;
    q.grid = grid;
    q.mass = Eigen::VectorXd::Constant(grid, 1.0 / grid);

    if (affine_full_branch(base)) {
        q.representation = QuotientMeasure::Representation::Exact;
        q.r = p;
        return q;
    }
    q.representation = QuotientMeasure::Representation::Ulam;

    // Unnormalized dual operator: each cell pushed through every inverse
    // branch, mass spread over target cells in proportion to overlap.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(grid) * p * 3);
    for (int j = 0; j < p; ++j) {
        std::vector<double> edge(grid + 1);
        for (int i = 0; i <= grid; ++i)
            edge[i] = base.inverse_branch(j, static_cast<double>(i) / grid);
        for (int i = 0; i < grid; ++i) {
            double a = edge[i], b = edge[i + 1];
            double len = b - a;
            if (!(len > 0.0))
                continue;
            int c0 = std::clamp(static_cast<int>(std::floor(a * grid)), 0, grid - 1);
            int c1 = std::clamp(static_cast<int>(std::floor(b * grid)), 0, grid - 1);
            for (int c = c0; c <= c1; ++c) {
                double lo = std::max(a, static_cast<double>(c) / grid);
                double hi = std::min(b, static_cast<double>(c + 1) / grid);
                if (hi > lo)
                    trip.emplace_back(c, i, (hi - lo) / len);
            }
        }
    }
    Eigen::SparseMatrix<double> T(grid, grid);
    T.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd nu = q.mass;
    for (int it = 1; it <= max_iterations; ++it) {
        Eigen::VectorXd image = T * nu;
        double r = image.sum() / nu.sum();
        Eigen::VectorXd next = image / image.sum();
        double res = (next - nu).lpNorm<1>();
        nu = std::move(next);
        q.r = r;
        q.residual = res;
        q.iterations = it;
        if (res < tol) {
            q.mass = nu;
            return q;
        }
    }
    throw std::runtime_error("quotient_mem: power iteration did not converge, residual " +
                             std::to_string(q.residual));
}

double coding_cdf(const BaseMap& base, double x, int digits)
{
    const int p = base.degree();
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    std::vector<int> word;
    auto through_word = [&](double y) {
        for (auto it = word.rbegin(); it != word.rend(); ++it)
            y = base.inverse_branch(*it, y);
        return y;
    };
    double cdf = 0.0;
    double scale = 1.0;
    for (int k = 0; k < digits; ++k) {
        scale /= p;
        int d = 0;
        for (int j = p - 1; j >= 1; --j) {
            // left end of child j of the current cylinder
            double left = through_word(base.inverse_branch(j, 0.0));
            if (x >= left) {
                d = j;
                break;
            }
        }
        cdf += d * scale;
        word.push_back(d);
        if (through_word(1.0) - through_word(0.0) < 1e-16)
            break;
    }
    return cdf;
}

OrbitSampler::OrbitSampler(const LeafModel& model, int depth, std::uint64_t seed, int code_length)
    : model_(&model), depth_(depth), seed_(seed), code_length_(code_length)
{
    if (depth < 0 || code_length < 0)
        throw std::invalid_argument("OrbitSampler: negative depth or code length");
}

void OrbitSampler::use_inverse_cdf(const SkewProduct& system, const QuotientMeasure& quotient)
{
    model_ = &system;
    system_ = &system;
    quotient_ = &quotient;
}

void OrbitSampler::orbit(std::uint64_t index, int forward, int back, std::vector<AttractorPoint>& out) const
{
    if (forward < 0 || back < 0)
        throw std::invalid_argument("OrbitSampler: negative orbit length");
    const LeafModel& m = *model_;
    SplitMix64 rng = stream(seed_, index);
    out.resize(static_cast<std::size_t>(back + forward + 1));

    thread_local std::vector<double> theta;
    thread_local std::vector<int> rects, pidx;

    // forward base orbit theta_0 .. theta_forward, rectangles r_0 .. r_forward
    if (quotient_) {
        theta.resize(forward + 1);
        rects.assign(forward + 1, 0);
        pidx.resize(forward + 1);
        theta[0] = quotient_->inverse_cdf(rng.uniform());
        for (int j = 1; j <= forward; ++j) {
            pidx[j] = system_->base().branch_of(theta[j - 1]);
            theta[j] = system_->base()(theta[j - 1]);
        }
    } else {
        const int K = forward + code_length_;
        theta.resize(K + 1);
        rects.resize(K + 1);
        pidx.resize(K + 1);
        rects[0] = m.rect_count() == 1 ? 0 : rng.below(m.rect_count());
        for (int k = 1; k <= K; ++k)
            m.out_edge(rects[k - 1], rng.below(m.out_degree(rects[k - 1])), rects[k], pidx[k]);
        Interval last = m.rect_interval(rects[K]);
        theta[K] = last.lo + (last.hi - last.lo) * rng.uniform();
        for (int k = K; k >= 1; --k)
            theta[k - 1] = m.preimage_base(rects[k], pidx[k], theta[k]);
    }

    // backward itinerary, uniform over preimage leaves, then the fiber
    const int B = back + depth_;
    thread_local std::vector<double> yb;
    thread_local std::vector<int> rb, ib;
    yb.resize(B + 1);
    rb.resize(B + 1);
    ib.resize(B + 1);
    yb[0] = theta[0];
    rb[0] = rects[0];
    for (int k = 1; k <= B; ++k) {
        ib[k] = rng.below(m.preimage_count(rb[k - 1]));
        yb[k] = m.preimage_base(rb[k - 1], ib[k], yb[k - 1]);
        rb[k] = m.preimage_rect(rb[k - 1], ib[k]);
    }
    Fiber z = Fiber::Zero();
    for (int k = B; k >= 1; --k) {
        z = m.push_fiber(rb[k - 1], ib[k], yb[k], z);
        if (k - 1 <= back)
            out[back - (k - 1)] = AttractorPoint{yb[k - 1], z, rb[k - 1]};
    }
    if (B == 0)
        out[back] = AttractorPoint{yb[0], z, rb[0]};

    for (int j = 1; j <= forward; ++j) {
        z = m.push_fiber(rects[j], pidx[j], theta[j - 1], z);
        out[back + j] = AttractorPoint{theta[j], z, rects[j]};
    }
}

ItineraryPoint OrbitSampler::point(std::uint64_t index) const
{
    // same stream layout as orbit(index, 0, 0, ...) so x_0 agrees
    const LeafModel& m = *model_;
    SplitMix64 rng = stream(seed_, index);
    double y;
    int rect;
    if (quotient_) {
        y = quotient_->inverse_cdf(rng.uniform());
        rect = 0;
    } else {
        const int K = code_length_;
        std::vector<int> rects(K + 1), pidx(K + 1);
        rects[0] = m.rect_count() == 1 ? 0 : rng.below(m.rect_count());
        for (int k = 1; k <= K; ++k)
            m.out_edge(rects[k - 1], rng.below(m.out_degree(rects[k - 1])), rects[k], pidx[k]);
        Interval last = m.rect_interval(rects[K]);
        y = last.lo + (last.hi - last.lo) * rng.uniform();
        for (int k = K; k >= 1; --k)
            y = m.preimage_base(rects[k], pidx[k], y);
        rect = rects[0];
    }
    std::vector<int> itin(depth_);
    int r = rect;
    for (int k = 0; k < depth_; ++k) {
        itin[k] = rng.below(m.preimage_count(r));
        r = m.preimage_rect(r, itin[k]);
    }
    return reconstruct_point(m, y, rect, itin, depth_);
}

void EmpiricalMeasure::write_csv(std::ostream& os) const
{
    os << "base,rect,itinerary,fiber_x,fiber_y\n";
    char buf[128];
    for (const auto& s : samples) {
        std::string itin;
        for (std::size_t k = 0; k < s.itinerary.size(); ++k) {
            if (k)
                itin += ' ';
            itin += std::to_string(s.itinerary[k]);
        }
        std::snprintf(buf, sizeof buf, "%.17g,%d,", s.base, s.rect);
        os << buf << itin;
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", s.fiber.x(), s.fiber.y());
        os << buf;
    }
}

EmpiricalMeasure sample_mu(const LeafModel& model, std::size_t n, int depth, std::uint64_t seed)
{
    if (n < 1)
        throw std::invalid_argument("sample_mu: need at least one sample");
    OrbitSampler sampler(model, depth, seed);
    EmpiricalMeasure em;
    em.seed = seed;
    em.depth = depth;
    em.samples.resize(n);
    parallel_for(n, [&](std::size_t i) { em.samples[i] = sampler.point(i); });
    return em;
}

EmpiricalMeasure sample_mu(const SkewProduct& system, const QuotientMeasure& quotient, std::size_t n, int depth,
                           std::uint64_t seed)
{
    if (quotient.representation == QuotientMeasure::Representation::Exact)
        return sample_mu(static_cast<const LeafModel&>(system), n, depth, seed);
    if (n < 1)
        throw std::invalid_argument("sample_mu: need at least one sample");
    OrbitSampler sampler(system, depth, seed);
    sampler.use_inverse_cdf(system, quotient);
    EmpiricalMeasure em;
    em.seed = seed;
    em.depth = depth;
    em.samples.resize(n);
    parallel_for(n, [&](std::size_t i) { em.samples[i] = sampler.point(i); });
    return em;
}

OrbitBank collect_orbits(const OrbitSampler& sampler, std::size_t n, int length)
{
    if (length < 1)
        throw std::invalid_argument("collect_orbits: orbit length must be positive");
    OrbitBank bank;
    bank.length = length;
    bank.points.resize(n * length);
    parallel_for(n, [&](std::size_t i) {
        thread_local std::vector<AttractorPoint> buf;
        sampler.orbit(i, length - 1, 0, buf);
        std::copy(buf.begin(), buf.end(), bank.points.begin() + i * length);
    });
    return bank;
}

namespace {

// Base window outside which two points cannot stay within eps for n steps.
// On the circle, an arc of length d <= eps goes to an arc of length between
// m d and M d; while M eps < 1 - eps that image length is also the circle
// distance, so closeness for n steps forces d <= eps / m^{n-1}.
double base_window(const LeafModel& model, int n, double eps)
{
    double m = model.min_expansion();
    if (model.rect_count() == 1 && m > 1.0 && eps * (1.0 + model.max_expansion()) < 1.0)
        return eps / std::pow(m, n - 1);
    return eps;
}

bool bowen_close(const LeafModel& model, const AttractorPoint* a, const AttractorPoint* b, int n, double eps)
{
    for (int j = 0; j < n; ++j)
        if (model.distance(a[j], b[j]) > eps)
            return false;
    return true;
}

template <class Visit>
void for_window(const std::multimap<double, std::size_t>& index, double b, double w, Visit&& visit)
{
    auto scan = [&](double lo, double hi) {
        for (auto it = index.lower_bound(lo); it != index.end() && it->first <= hi; ++it)
            if (!visit(it->second))
                return false;
        return true;
    };
    if (!scan(b - w, b + w))
        return;
    if (b - w < 0.0 && !scan(b - w + 1.0, 1.0))
        return;
    if (b + w >= 1.0)
        scan(0.0, b + w - 1.0);
}

std::size_t greedy_once(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::uint64_t seed)
{
    std::vector<std::size_t> order(bank.count());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(mix64(seed));
    std::shuffle(order.begin(), order.end(), rng);

    const double w = base_window(model, n, eps);
    std::multimap<double, std::size_t> accepted;
    for (std::size_t i : order) {
        const AttractorPoint* x = bank.orbit(i);
        bool separated = true;
        for_window(accepted, x->base, w, [&](std::size_t k) {
            if (bowen_close(model, x, bank.orbit(k), n, eps)) {
                separated = false;
                return false;
            }
            return true;
        });
        if (separated)
            accepted.emplace(x->base, i);
    }
    return accepted.size();
}

} // namespace

std::size_t separated_set_size(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::uint64_t seed,
                               int restarts)
{
    if (n < 1 || n > bank.length)
        throw std::invalid_argument("separated_set_size: n must lie in [1, orbit length]");
    if (!(eps > 0.0))
        throw std::invalid_argument("separated_set_size: eps must be positive");
    std::vector<std::size_t> sizes(std::max(restarts, 1));
    parallel_for(sizes.size(), [&](std::size_t r) { sizes[r] = greedy_once(model, bank, n, eps, seed + 7919 * r); });
    return *std::max_element(sizes.begin(), sizes.end());
}

double entropy_separated(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::uint64_t seed)
{
    return std::log(static_cast<double>(separated_set_size(model, bank, n, eps, seed))) / n;
}

EntropyReport entropy_separated_report(const LeafModel& model, const OrbitBank& bank, int n_min, int n_max,
                                       const std::vector<double>& eps_grid, std::uint64_t seed)
{
    EntropyReport rep;
    rep.eps_grid = eps_grid;
    for (double eps : eps_grid) {
        std::vector<double> ns, logs;
        for (int n = n_min; n <= n_max; ++n) {
            EntropyCell c;
            c.n = n;
            c.eps = eps;
            std::size_t size = separated_set_size(model, bank, n, eps, seed);
            c.value = static_cast<double>(size);
            c.h = std::log(c.value) / n;
            c.saturated = 2 * size > bank.count();
            rep.budget_exhausted = rep.budget_exhausted || c.saturated;
            rep.cells.push_back(c);
            ns.push_back(n);
            logs.push_back(std::log(c.value));
        }
        rep.slopes.push_back(ns.size() >= 2 ? fit_line(ns, logs).slope : logs.back() / ns.back());
    }
    rep.h_est = std::accumulate(rep.slopes.begin(), rep.slopes.end(), 0.0) / rep.slopes.size();
    return rep;
}

namespace {

// mean of -log(mass) over references with nonzero mass
double mean_neg_log_mass(const LeafModel& model, const OrbitBank& bank, const std::multimap<double, std::size_t>& index,
                         int n, double eps, std::size_t references, std::size_t& excluded)
{
    const std::size_t N = bank.count();
    const std::size_t R = std::min(references, N);
    const double w = base_window(model, n, eps);
    std::vector<double> mass(R);
    parallel_for(R, [&](std::size_t r) {
        const AttractorPoint* x = bank.orbit(r);
        std::size_t hits = 0;
        for_window(index, x->base, w, [&](std::size_t k) {
            if (k != r && bowen_close(model, x, bank.orbit(k), n, eps))
                ++hits;
            return true;
        });
        mass[r] = static_cast<double>(hits) / static_cast<double>(N - 1);
    });
    CompensatedSum acc;
    std::size_t used = 0;
    excluded = 0;
    for (double m : mass) {
        if (m > 0.0) {
            acc.add(-std::log(m));
            ++used;
        } else {
            ++excluded;
        }
    }
    if (used == 0)
        throw std::runtime_error("entropy_brin_katok: every dynamical ball has zero empirical mass");
    return acc.value() / used;
}

std::multimap<double, std::size_t> base_index(const OrbitBank& bank)
{
    std::multimap<double, std::size_t> index;
    for (std::size_t i = 0; i < bank.count(); ++i)
        index.emplace_hint(index.end(), bank.orbit(i)->base, i);
    return index;
}

} // namespace

double entropy_brin_katok(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::size_t references,
                          std::size_t* excluded)
{
    if (n == 0)
        return 0.0;
    if (n < 0 || n > bank.length)
        throw std::invalid_argument("entropy_brin_katok: n must lie in [0, orbit length]");
    if (bank.count() < 2)
        throw std::invalid_argument("entropy_brin_katok: need at least two samples");
    std::size_t ex = 0;
    double v = mean_neg_log_mass(model, bank, base_index(bank), n, eps, references, ex);
    if (excluded)
        *excluded = ex;
    return v / n;
}

EntropyReport entropy_brin_katok_report(const LeafModel& model, const OrbitBank& bank, int n_min, int n_max,
                                        const std::vector<double>& eps_grid, std::size_t references)
{
    if (bank.count() < 2)
        throw std::invalid_argument("entropy_brin_katok: need at least two samples");
    auto index = base_index(bank);
    EntropyReport rep;
    rep.eps_grid = eps_grid;
    for (double eps : eps_grid) {
        std::vector<double> ns, vals;
        for (int n = n_min; n <= n_max; ++n) {
            EntropyCell c;
            c.n = n;
            c.eps = eps;
            double v = mean_neg_log_mass(model, bank, index, n, eps, references, c.excluded);
            c.value = std::exp(-v);
            c.h = v / n;
            rep.cells.push_back(c);
            ns.push_back(n);
            vals.push_back(v);
        }
        rep.slopes.push_back(ns.size() >= 2 ? fit_line(ns, vals).slope : vals.back() / ns.back());
    }
    rep.h_est = std::accumulate(rep.slopes.begin(), rep.slopes.end(), 0.0) / rep.slopes.size();
    return rep;
}

} // namespace skewlab
