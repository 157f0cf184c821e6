#include "skewlab/transfer.hpp"
#include "skewlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace skewlab {

Potential Potential::constant_potential(double c)
{
    Potential p;
    p.value = [c](const AttractorPoint&) { return c; };
    p.variation = 0.0;
    p.hoelder = 0.0;
    p.constant = true;
    return p;
}

double Lambda1_of(double lambda)
{
    double r = (1.0 - lambda) / (1.0 + lambda);
    return 1.0 - r * r;
}

namespace {

double main_cone_factor(double lambda)
{
    double lg = std::log((1.0 + lambda) / (1.0 - lambda));
    return Lambda1_of(lambda) + 2.0 * lg * lg;
}

void finish_params(ConeParams& p)
{
    const ConeInputs& in = p.inputs;
    const double dpow = std::pow(in.diam, in.alpha);
    p.sigma1 = p.sigma1_tilde + 2.0 * p.M / p.b;
    double lt = std::max(in.L_tilde - 1.0, 0.0);
    p.sigma2 = (std::pow(in.lambda_u_tilde, in.alpha) + (in.p - 1) * (1.0 + std::pow(lt, in.alpha)) * std::pow(in.L_tilde, in.alpha)) /
               in.p;
    p.sigma = std::max(p.sigma1, p.sigma2);
    double lg = std::log((1.0 + p.lambda) / (1.0 - p.lambda));
    double top = std::max({p.kappa, p.c, in.epsilon});
    p.log_B = 2.0 * std::log1p(p.b * lg) + 4.0 * std::log1p(top * dpow);
    if (p.sigma < 1.0)
        p.delta_bound = 2.0 * p.log_B + 2.0 * std::log((1.0 + p.sigma) / (1.0 - p.sigma));
    else
        p.delta_bound = std::numeric_limits<double>::infinity();
}

} // namespace

ConeParams choose_cone_params(const ConeInputs& in)
{
    if (!(in.lambda_s > 0.0 && in.lambda_s < 1.0) || !(in.alpha > 0.0 && in.alpha <= 1.0) || !(in.epsilon >= 0.0) ||
        !(in.diam > 0.0) || in.p < 2)
        throw std::invalid_argument("choose_cone_params: inputs out of range");
    const double dpow = std::pow(in.diam, in.alpha);
    const double a0 = std::pow(in.lambda_s, in.alpha) * std::exp(in.epsilon) + dpow * in.epsilon;
    if (!(a0 < 1.0))
        throw std::domain_error("choose_cone_params: infeasible, PrimeiraCond denominator 1 - (lambda_s^alpha e^eps + diam^alpha eps) <= 0");
    const double kappa_first = in.epsilon / (1.0 - a0);

    ConeParams p;
    p.inputs = in;
    p.alpha = in.alpha;
    bool found = false;
    std::string reason = "no grid lambda in (" + std::to_string(a0) + ", 1)";
    for (double lambda = a0 + in.lambda_step; lambda < 1.0; lambda += in.lambda_step) {
        double f = main_cone_factor(lambda);
        if (f >= 1.0) {
            reason = "main-cone factor Lambda1 + 2 log((1+lambda)/(1-lambda))^2 >= 1 for every admissible lambda";
            break;
        }
        double hi = std::min(lambda / dpow, (1.0 / std::sqrt(f) - 1.0) / dpow);
        double lo = std::max(kappa_first, in.epsilon / (lambda - a0));
        if (lo < hi) {
            p.lambda = lambda;
            p.kappa = in.epsilon > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
            found = true;
            break;
        }
        reason = "no kappa with PrimeiraCond, lemma item (1), kappa diam^alpha < lambda and the main-cone condition";
    }
    if (!found)
        throw std::domain_error("choose_cone_params: infeasible, " + reason);

    p.Lambda1 = Lambda1_of(p.lambda);
    p.M = std::pow(1.0 + p.kappa * dpow, 2.0);
    p.sigma1_tilde = main_cone_factor(p.lambda) * p.M;
    p.b_min = 2.0 * p.M / (1.0 - p.sigma1_tilde);
    p.b = 10.0 * p.b_min;
    p.c = p.b_min;
    finish_params(p);
    if (!(p.sigma2 < 1.0))
        throw std::domain_error("choose_cone_params: infeasible, C-invariance factor sigma2 >= 1");
    return p;
}

ConeParams with_b_c(const ConeParams& params, double b, double c)
{
    if (!(b > 0.0) || !(c > 0.0))
        throw std::invalid_argument("with_b_c: b and c must be positive");
    ConeParams p = params;
    p.b = b;
    p.c = c;
    finish_params(p);
    return p;
}

std::vector<std::string> cone_param_violations(const ConeParams& p)
{
    std::vector<std::string> out;
    const ConeInputs& in = p.inputs;
    const double dpow = std::pow(in.diam, p.alpha);
    const double a0 = std::pow(in.lambda_s, p.alpha) * std::exp(in.epsilon) + dpow * in.epsilon;
    if (!(a0 < 1.0 && p.kappa > in.epsilon / (1.0 - a0)))
        out.push_back("PrimeiraCond: kappa > eps / (1 - (lambda_s^alpha e^eps + diam^alpha eps))");
    if (!(p.lambda > a0 + in.epsilon / p.kappa))
        out.push_back("lemma item (1): lambda > lambda_s^alpha e^eps + diam^alpha eps + eps/kappa");
    if (!(p.kappa * dpow < p.lambda))
        out.push_back("lemma item (2): kappa diam^alpha < lambda");
    if (!(p.sigma1_tilde < 1.0))
        out.push_back("main cone: (Lambda1 + 2 log((1+lambda)/(1-lambda))^2)(1 + kappa diam^alpha)^2 < 1");
    if (!(p.sigma1 < 1.0)) {
        std::ostringstream s;
        s << "condition (B) invariance: sigma1 = sigma1_tilde + 2M/b = " << p.sigma1 << " >= 1 (b = " << p.b
          << " below threshold " << p.b_min << ")";
        out.push_back(s.str());
    }
    if (!(p.sigma2 < 1.0))
        out.push_back("condition (C) invariance: sigma2 < 1");
    return out;
}

double apply_transfer(const LeafModel& model, const Observable& phi, const ItineraryPoint& x, const Potential& pot)
{
    if (x.depth < 1)
        throw std::invalid_argument("apply_transfer: itinerary depth must be at least 1");
    ItineraryPoint pre = backward_shift(model, x, 1);
    AttractorPoint q = pre.point();
    return phi(q) * std::exp(pot(q));
}

double apply_transfer_n(const LeafModel& model, const Observable& phi, const ItineraryPoint& x, int n,
                        const Potential& pot)
{
    if (n < 0 || x.depth < n)
        throw std::invalid_argument("apply_transfer_n: itinerary depth must be at least n");
    double birkhoff = 0.0;
    ItineraryPoint cur = x;
    for (int k = 0; k < n; ++k) {
        cur = backward_shift(model, cur, 1);
        birkhoff += pot(cur.point());
    }
    return phi(cur.point()) * std::exp(birkhoff);
}

LeafDensity push_density(const LeafQuadrature& gamma, const LeafDensity& rho, int j, const Potential& pot)
{
    if (static_cast<std::size_t>(rho.size()) != gamma.size())
        throw std::invalid_argument("push_density: density does not match the quadrature nodes");
    if (gamma.depth < 1 || j < 0 || j >= gamma.branches())
        throw std::invalid_argument("push_density: invalid branch or depth");
    const std::size_t first = gamma.block_start[j];
    const std::size_t count = gamma.block_start[j + 1] - first;
    const double inv_p = 1.0 / gamma.branches();
    LeafDensity out(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k)
        out(static_cast<Eigen::Index>(k)) =
            inv_p * rho(static_cast<Eigen::Index>(first + k)) * std::exp(pot(gamma.preimages[first + k]));
    return out;
}

TransferIdentity transfer_leaf_integral(const LeafModel& model, const Observable& phi, const LeafDensity& rho,
                                        const LeafQuadrature& gamma, const Potential& pot)
{
    if (gamma.depth < 1)
        throw std::invalid_argument("transfer_leaf_integral: depth must be at least 1");
    if (static_cast<std::size_t>(rho.size()) != gamma.size())
        throw std::invalid_argument("transfer_leaf_integral: density does not match the quadrature nodes");
    TransferIdentity out;
    CompensatedSum direct;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        const AttractorPoint& q = gamma.preimages[k];
        direct.add(gamma.weights[k] * phi(q) * std::exp(pot(q)) * rho(static_cast<Eigen::Index>(k)));
    }
    out.direct = direct.value();
    CompensatedSum sum;
    for (int j = 0; j < gamma.branches(); ++j) {
        LeafQuadrature gj = build_quadrature(model, gamma.child_base[j], gamma.depth - 1, gamma.child_rect[j]);
        LeafDensity rj = push_density(gamma, rho, j, pot);
        sum.add(integrate_values(gj.values(phi).cwiseProduct(rj), gj));
    }
    out.branch_sum = sum.value();
    return out;
}

LeafValues values_of(const Observable& phi)
{
    return [phi](const LeafQuadrature& q) { return q.values(phi); };
}

LeafValues transfer_values(const LeafModel& model, const Observable& phi, int n, const Potential& pot)
{
    if (n < 0)
        throw std::invalid_argument("transfer_values: n must be nonnegative");
    return [&model, phi, n, pot](const LeafQuadrature& q) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(q.size()));
        for (std::size_t k = 0; k < q.size(); ++k) {
            if (n == 1) {
                const AttractorPoint& pre = q.preimages[k];
                v(static_cast<Eigen::Index>(k)) = phi(pre) * std::exp(pot(pre));
            } else {
                v(static_cast<Eigen::Index>(k)) = apply_transfer_n(model, phi, q.nodes[k], n, pot);
            }
        }
        return v;
    };
}

ConeSpec density_cone(const LeafQuadrature& quad, double kappa, double alpha)
{
    if (quad.size() < 2)
        return ConeSpec::positivity(static_cast<int>(quad.size()));
    return ConeSpec::hoelder(kappa, alpha, quad.fiber_metric());
}

LeafDensity random_cone_density(const LeafQuadrature& quad, const ConeSpec& cone, SplitMix64& rng, double fill)
{
    if (!(fill > 0.0 && fill < 1.0))
        throw std::invalid_argument("random_cone_density: fill must lie in (0,1)");
    const auto n = static_cast<Eigen::Index>(quad.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < 3; ++k) {
        double amp = 2.0 * rng.uniform() - 1.0;
        double wx = 8.0 * rng.uniform() - 4.0;
        double wy = 8.0 * rng.uniform() - 4.0;
        double ph = 2.0 * std::numbers::pi * rng.uniform();
        for (Eigen::Index i = 0; i < n; ++i) {
            const Fiber& z = quad.nodes[static_cast<std::size_t>(i)].fiber;
            v(i) += amp * std::cos(wx * z.x() + wy * z.y() + ph);
        }
    }
    LeafDensity rho;
    if (cone.kind() == ConeSpec::Kind::Positivity || n < 2) {
        rho = (v.array() - v.minCoeff() + fill).matrix();
    } else {
        double s = hoelder_seminorm(v, cone);
        if (s == 0.0)
            rho = Eigen::VectorXd::Ones(n);
        else
            rho = (v.array() - v.minCoeff() + s / (cone.kappa() * fill)).matrix();
    }
    return rho / integrate_values(rho, quad);
}

namespace {

struct LeafLocation {
    int rect = 0;
    double base = 0.0;
};

LeafLocation random_leaf(const LeafModel& model, SplitMix64& rng)
{
    LeafLocation loc;
    loc.rect = model.rect_count() > 1 ? rng.below(model.rect_count()) : 0;
    Interval iv = model.rect_interval(loc.rect);
    loc.base = iv.lo + (iv.hi - iv.lo) * rng.uniform();
    return loc;
}

double pow_alpha(double d, double alpha) { return alpha == 1.0 ? d : std::pow(d, alpha); }

} // namespace

std::vector<LeafSample> sample_leaves(const LeafModel& model, const ConeParams& params, const SamplingPlan& plan)
{
    SplitMix64 rng = stream(plan.seed, 0x1eaf);
    std::vector<LeafSample> out;
    out.reserve(plan.leaves);
    for (int l = 0; l < plan.leaves; ++l) {
        LeafLocation loc = random_leaf(model, rng);
        LeafSample s;
        s.quad = build_quadrature(model, loc.base, plan.depth, loc.rect);
        s.cone = density_cone(s.quad, params.kappa, params.alpha);
        const auto n = static_cast<Eigen::Index>(s.quad.size());
        s.densities.push_back(Eigen::VectorXd::Ones(n));
        for (int k = 1; k < plan.densities; ++k)
            s.densities.push_back(random_cone_density(s.quad, s.cone, rng, 0.1 + 0.85 * rng.uniform()));
        const auto m = static_cast<Eigen::Index>(s.densities.size());
        s.theta = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = i + 1; j < m; ++j) {
                double t = theta(s.densities[i], s.densities[j], s.cone);
                s.theta(i, j) = t;
                s.theta(j, i) = t;
            }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::pair<LeafQuadrature, LeafQuadrature>> sample_leaf_pairs(const LeafModel& model,
                                                                         const SamplingPlan& plan)
{
    SplitMix64 rng = stream(plan.seed, 0xba1f);
    std::vector<std::pair<LeafQuadrature, LeafQuadrature>> out;
    for (int k = 0; k < plan.leaf_pairs; ++k) {
        LeafLocation loc = random_leaf(model, rng);
        Interval iv = model.rect_interval(loc.rect);
        // separations log-uniform in [1e-3, 0.25] of the rectangle width
        double width = iv.hi - iv.lo;
        double sep = width * std::exp(std::log(1e-3) + (std::log(0.25) - std::log(1e-3)) * rng.uniform());
        double other = loc.base + (rng.uniform() < 0.5 ? -sep : sep);
        if (model.rect_count() > 1) {
            // second setting: both leaves in the same rectangle
            if (other < iv.lo || other >= iv.hi)
                other = loc.base + (other < iv.lo ? sep : -sep);
            other = std::clamp(other, iv.lo, std::nextafter(iv.hi, iv.lo));
        } else {
            other = wrap01(other);
        }
        out.emplace_back(build_quadrature(model, loc.base, plan.depth, loc.rect),
                         build_quadrature(model, other, plan.depth, loc.rect));
    }
    return out;
}

MarginReport check_condition_A(const LeafValues& phi, const std::vector<LeafSample>& leaves)
{
    MarginReport r;
    r.inf_estimate = std::numeric_limits<double>::infinity();
    for (const LeafSample& s : leaves) {
        Eigen::VectorXd v = phi(s.quad);
        for (const LeafDensity& rho : s.densities) {
            double i = integrate_values(v.cwiseProduct(rho), s.quad);
            r.inf_estimate = std::min(r.inf_estimate, i);
            ++r.evaluated;
        }
    }
    r.positive = r.inf_estimate > 0.0;
    r.threshold = std::numeric_limits<double>::infinity();
    return r;
}

MarginReport check_condition_B(const LeafValues& phi, const std::vector<LeafSample>& leaves, double b)
{
    MarginReport r;
    r.threshold = b;
    r.inf_estimate = std::numeric_limits<double>::infinity();
    for (const LeafSample& s : leaves) {
        Eigen::VectorXd v = phi(s.quad);
        std::vector<double> ints;
        for (const LeafDensity& rho : s.densities)
            ints.push_back(integrate_values(v.cwiseProduct(rho), s.quad));
        double inf = *std::min_element(ints.begin(), ints.end());
        r.inf_estimate = std::min(r.inf_estimate, inf);
        if (!(inf > 0.0)) {
            r.positive = false;
            continue;
        }
        for (std::size_t i = 0; i < ints.size(); ++i)
            for (std::size_t j = i + 1; j < ints.size(); ++j) {
                double t = s.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (!(t > 0.0) || std::isinf(t)) {
                    ++r.skipped;
                    continue;
                }
                r.max_ratio = std::max(r.max_ratio, std::abs(ints[i] - ints[j]) / (t * inf));
                ++r.evaluated;
            }
    }
    return r;
}

MarginReport check_condition_C(const LeafModel& model, const LeafValues& phi,
                               const std::vector<std::pair<LeafQuadrature, LeafQuadrature>>& pairs,
                               const std::vector<LeafSample>& leaves, double alpha, double c)
{
    MarginReport r;
    r.threshold = c;
    double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> diffs;
    for (const auto& [g, h] : pairs) {
        double a = integrate_values(phi(g), g);
        double b = integrate_values(phi(h), h);
        inf = std::min({inf, a, b});
        double d = model.base_distance(g.base, h.base);
        if (d == 0.0) {
            ++r.skipped;
            continue;
        }
        diffs.emplace_back(std::abs(a - b), pow_alpha(d, alpha));
    }
    for (const LeafSample& s : leaves)
        inf = std::min(inf, integrate_values(phi(s.quad), s.quad));
    r.inf_estimate = inf;
    r.positive = inf > 0.0;
    if (!r.positive)
        return r;
    for (const auto& [num, dpow] : diffs) {
        r.max_ratio = std::max(r.max_ratio, num / (dpow * inf));
        ++r.evaluated;
    }
    return r;
}

Observable random_bump(SplitMix64& rng, double amplitude)
{
    double a[3], ph[3];
    for (int k = 0; k < 3; ++k) {
        a[k] = (2.0 * rng.uniform() - 1.0) / (k + 1);
        ph[k] = 2.0 * std::numbers::pi * rng.uniform();
    }
    double bx = 2.0 * rng.uniform() - 1.0;
    double by = 2.0 * rng.uniform() - 1.0;
    return [=](const AttractorPoint& x) {
        double v = bx * x.fiber.x() + by * x.fiber.y();
        for (int k = 0; k < 3; ++k)
            v += a[k] * std::cos(2.0 * std::numbers::pi * (k + 1) * x.base + ph[k]);
        return amplitude * v;
    };
}

Lift lift_to_cone(const LeafModel& model, const Observable& phi, const ConeParams& params, const SamplingPlan& plan)
{
    SplitMix64 rng = stream(plan.seed, 0x11f7);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double leaf_semi = 0.0;
    for (int l = 0; l < plan.leaves; ++l) {
        LeafLocation loc = random_leaf(model, rng);
        LeafQuadrature q = build_quadrature(model, loc.base, plan.depth, loc.rect);
        Eigen::VectorXd v = q.values(phi);
        lo = std::min(lo, v.minCoeff());
        hi = std::max(hi, v.maxCoeff());
        if (q.size() >= 2)
            leaf_semi = std::max(leaf_semi, hoelder_seminorm(v, density_cone(q, 1.0, params.alpha)));
    }
    double holonomy = 0.0;
    SamplingPlan pair_plan = plan;
    pair_plan.seed = plan.seed ^ 0x5eed;
    for (const auto& [g, h] : sample_leaf_pairs(model, pair_plan)) {
        Eigen::VectorXd vg = g.values(phi), vh = h.values(phi);
        lo = std::min({lo, vg.minCoeff(), vh.minCoeff()});
        hi = std::max({hi, vg.maxCoeff(), vh.maxCoeff()});
        double d = model.base_distance(g.base, h.base);
        if (d > 0.0)
            holonomy = std::max(holonomy, std::abs(integrate_values(vg, g) - integrate_values(vh, h)) / pow_alpha(d, params.alpha));
    }
    const double osc = hi - lo;
    Lift out;
    out.K_A = -lo;
    out.K_B = osc / params.b - lo;
    out.K_C = 2.0 * holonomy / params.c - lo;
    out.K_leaf = leaf_semi / params.kappa - lo;
    double k = std::max({out.K_A, out.K_B, out.K_C}) + 0.05 * std::max(osc, std::abs(lo)) + 1e-12;
    out.K = std::max(0.0, k);
    const double K = out.K;
    out.observable = [phi, K](const AttractorPoint& x) { return phi(x) + K; };
    return out;
}

double theta_plus(const LeafValues& phi, const LeafValues& psi, const std::vector<LeafSample>& leaves)
{
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (const LeafSample& s : leaves) {
        Eigen::VectorXd a = phi(s.quad), b = psi(s.quad);
        for (const LeafDensity& rho : s.densities) {
            double r = integrate_values(a.cwiseProduct(rho), s.quad) / integrate_values(b.cwiseProduct(rho), s.quad);
            if (!(r > 0.0))
                return std::numeric_limits<double>::infinity();
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
    }
    return std::log(rmax / rmin);
}

DiameterReport estimate_diameter(const LeafModel& model, const ConeParams& params, const std::vector<Observable>& cone_elements,
                                 const std::vector<LeafSample>& leaves, const Potential& pot)
{
    if (!pot.constant)
        throw std::invalid_argument("estimate_diameter: quantitative bounds need a constant potential");
    // integrals of L(phi_i) over every sampled (leaf, density)
    std::vector<std::vector<double>> ints(cone_elements.size());
    for (std::size_t i = 0; i < cone_elements.size(); ++i) {
        LeafValues lv = transfer_values(model, cone_elements[i], 1, pot);
        for (const LeafSample& s : leaves) {
            Eigen::VectorXd v = lv(s.quad);
            for (const LeafDensity& rho : s.densities)
                ints[i].push_back(integrate_values(v.cwiseProduct(rho), s.quad));
        }
    }
    DiameterReport r;
    for (std::size_t i = 0; i < ints.size(); ++i)
        for (std::size_t j = i + 1; j < ints.size(); ++j) {
            double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
            for (std::size_t k = 0; k < ints[i].size(); ++k) {
                double q = ints[i][k] / ints[j][k];
                rmin = std::min(rmin, q);
                rmax = std::max(rmax, q);
            }
            double tp = rmin > 0.0 ? std::log(rmax / rmin) : std::numeric_limits<double>::infinity();
            r.theta_plus_max = std::max(r.theta_plus_max, tp);
            ++r.pairs;
        }
    const double corr = params.sigma < 1.0 ? 2.0 * std::log((1.0 + params.sigma) / (1.0 - params.sigma))
                                           : std::numeric_limits<double>::infinity();
    r.theta_plus_bound = 2.0 * params.log_B;
    r.delta_est = r.theta_plus_max + corr;
    r.delta_bound = params.delta_bound;
    r.tau_est = birkhoff_bound(r.delta_est);
    r.tau_bound = birkhoff_bound(r.delta_bound);
    r.log_one_minus_tau_bound = -r.delta_bound;
    return r;
}

std::vector<ContractionTrial> density_contraction_trials(const LeafModel& model, const ConeParams& params, int depth,
                                                         int trials, std::uint64_t seed)
{
    if (depth < 1)
        throw std::invalid_argument("density_contraction_trials: depth must be at least 1");
    const Potential pot = Potential::constant_potential(0.0);
    SplitMix64 rng = stream(seed, 0xc0ce);
    std::vector<ContractionTrial> out;
    const int per_leaf = 10;
    while (static_cast<int>(out.size()) < trials) {
        LeafLocation loc = random_leaf(model, rng);
        LeafQuadrature g = build_quadrature(model, loc.base, depth, loc.rect);
        ConeSpec cone = density_cone(g, params.kappa, params.alpha);
        std::vector<LeafQuadrature> kids;
        std::vector<ConeSpec> kid_cones;
        for (int j = 0; j < g.branches(); ++j) {
            kids.push_back(build_quadrature(model, g.child_base[j], depth - 1, g.child_rect[j]));
            kid_cones.push_back(density_cone(kids.back(), params.kappa, params.alpha));
        }
        for (int t = 0; t < per_leaf && static_cast<int>(out.size()) < trials; ++t) {
            LeafDensity r1 = random_cone_density(g, cone, rng, 0.05 + 0.9 * rng.uniform());
            LeafDensity r2 = random_cone_density(g, cone, rng, 0.05 + 0.9 * rng.uniform());
            ContractionTrial tr;
            tr.theta = theta(r1, r2, cone);
            for (int j = 0; j < g.branches(); ++j) {
                LeafDensity a = push_density(g, r1, j, pot);
                LeafDensity b = push_density(g, r2, j, pot);
                if (kids[j].size() >= 2) {
                    ConeSpec tight = kid_cones[j].with_kappa(params.lambda * params.kappa);
                    tr.pushed_in_cone = tr.pushed_in_cone && in_cone(a, tight) && in_cone(b, tight);
                }
                tr.theta_j = std::max(tr.theta_j, theta(a, b, kid_cones[j]));
            }
            out.push_back(tr);
        }
    }
    return out;
}

} // namespace skewlab
