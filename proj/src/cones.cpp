#include "skewlab/cones.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skewlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sizes(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    if (v.size() != w.size() || v.size() != spec.nodes())
        throw std::invalid_argument("cone: density size does not match the node set");
}

void require_members(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    check_sizes(v, w, spec);
    if (!in_cone(v, spec) || !in_cone(w, spec))
        throw std::domain_error("cone: arguments must be cone members");
}

// w == r*v up to rounding; theta is then exactly zero
bool proportional(const LeafDensity& v, const LeafDensity& w, double& ratio)
{
    Eigen::ArrayXd q = w.array() / v.array();
    double lo = q.minCoeff(), hi = q.maxCoeff();
    ratio = lo;
    return hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi;
}

} // namespace

ConeSpec ConeSpec::positivity(int nodes)
{
    ConeSpec s;
    s.kind_ = Kind::Positivity;
    s.nodes_ = nodes;
    return s;
}

ConeSpec ConeSpec::hoelder(double kappa, double alpha, const Eigen::MatrixXd& metric)
{
    if (!(kappa > 0.0))
        throw std::invalid_argument("ConeSpec: kappa must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("ConeSpec: alpha must lie in (0,1]");
    if (metric.rows() != metric.cols())
        throw std::invalid_argument("ConeSpec: metric must be square");
    for (Eigen::Index i = 0; i < metric.rows(); ++i) {
        if (metric(i, i) != 0.0)
            throw std::invalid_argument("ConeSpec: metric diagonal must vanish");
        for (Eigen::Index j = 0; j < i; ++j)
            if (metric(i, j) != metric(j, i) || metric(i, j) < 0.0)
                throw std::invalid_argument("ConeSpec: metric must be symmetric and nonnegative");
    }
    ConeSpec s;
    s.kind_ = Kind::Hoelder;
    s.kappa_ = kappa;
    s.alpha_ = alpha;
    s.nodes_ = static_cast<int>(metric.rows());
    s.metric_ = metric;
    s.metric_pow_ = alpha == 1.0 ? metric : Eigen::MatrixXd(metric.array().pow(alpha));
    return s;
}

ConeSpec ConeSpec::with_kappa(double kappa) const
{
    if (!(kappa > 0.0))
        throw std::invalid_argument("ConeSpec: kappa must be positive");
    ConeSpec s = *this;
    s.kappa_ = kappa;
    return s;
}

double hoelder_seminorm(const LeafDensity& rho, const ConeSpec& spec)
{
    const Eigen::Index n = rho.size();
    if (n < 2)
        throw std::invalid_argument("hoelder_seminorm: need at least two nodes");
    if (spec.kind() != ConeSpec::Kind::Hoelder || n != spec.nodes())
        throw std::invalid_argument("hoelder_seminorm: needs a Hoelder cone over the same nodes");
    const Eigen::MatrixXd& d = spec.metric_pow();
    double best = 0.0;
    for (Eigen::Index j = 1; j < n; ++j) {
        const double rj = rho(j);
        const double* col = d.col(j).data();
        for (Eigen::Index i = 0; i < j; ++i) {
            if (col[i] <= 0.0)
                throw std::invalid_argument("hoelder_seminorm: distinct nodes at distance zero");
            double q = std::abs(rho(i) - rj) / col[i];
            if (q > best)
                best = q;
        }
    }
    return best;
}

bool in_cone(const LeafDensity& v, const ConeSpec& spec)
{
    if (v.size() == 0 || v.size() != spec.nodes())
        return false;
    double m = v.minCoeff();
    if (!(m > 0.0))
        return false;
    if (spec.kind() == ConeSpec::Kind::Positivity || v.size() < 2)
        return true;
    return hoelder_seminorm(v, spec) < spec.kappa() * m;
}

namespace detail {

bool feasible(const LeafDensity& u, const ConeSpec& spec)
{
    double m = u.minCoeff();
    if (!(m > kConeTolerance * u.cwiseAbs().maxCoeff()))
        return false;
    if (spec.kind() == ConeSpec::Kind::Positivity || u.size() < 2)
        return true;
    return hoelder_seminorm(u, spec) < spec.kappa() * m * (1.0 - kConeTolerance);
}

double alpha_bisect(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    double lo = 0.0;
    double hi = (w.array() / v.array()).minCoeff();
    if (!feasible(w, spec))
        return 0.0;
    const double tol = 1e-13 * std::max(1.0, hi);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (feasible(w - mid * v, spec))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double beta_bisect(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    double lo = (w.array() / v.array()).maxCoeff();
    double hi = std::max(2.0 * lo, 1e-300);
    while (!feasible(hi * v - w, spec)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300)
            return kInf;
    }
    const double tol = 1e-13 * std::max(1.0, hi);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (feasible(mid * v - w, spec))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double alpha_grid_scan(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec, int points, int levels)
{
    // Nested uniform scan: every level rescans the last feasible cell.
    double lo = 0.0;
    double width = (w.array() / v.array()).minCoeff();
    for (int level = 0; level < levels; ++level) {
        double step = width / points;
        double best = lo;
        for (int k = 1; k < points; ++k) {
            double t = lo + step * k;
            if (feasible(w - t * v, spec))
                best = t;
            else
                break; // the feasible set is an interval starting at 0
        }
        lo = best;
        width = step;
    }
    return lo;
}

} // namespace detail

double alpha_coeff(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    require_members(v, w, spec);
    double r;
    if (proportional(v, w, r))
        return r;
    if (spec.kind() == ConeSpec::Kind::Positivity)
        return (w.array() / v.array()).minCoeff();
    return detail::alpha_bisect(v, w, spec);
}

double beta_coeff(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    require_members(v, w, spec);
    double r;
    if (proportional(v, w, r))
        return r;
    if (spec.kind() == ConeSpec::Kind::Positivity)
        return (w.array() / v.array()).maxCoeff();
    return detail::beta_bisect(v, w, spec);
}

double theta(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec)
{
    double a = alpha_coeff(v, w, spec);
    double b = beta_coeff(v, w, spec);
    if (a == b)
        return 0.0;
    if (!(a > 0.0) || std::isinf(b))
        return kInf;
    return std::log(b / a);
}

double birkhoff_bound(double diameter)
{
    if (!(diameter >= 0.0))
        throw std::invalid_argument("birkhoff_bound: diameter must be nonnegative");
    return -std::expm1(-diameter);
}

} // namespace skewlab
