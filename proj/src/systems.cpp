#include "skewlab/systems.hpp"
#include "skewlab/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace skewlab {

namespace {

// Solve lift(theta) = target on [0,1] for an increasing lift: Newton steps kept
// inside the current bracket, bisection otherwise.
double invert_lift(const BaseMap& g, double target)
{
    double lo = 0.0, hi = 1.0;
    double x = std::clamp(target / g.degree(), 0.0, 1.0);
    for (int it = 0; it < 200; ++it) {
        double f = g.lift(x) - target;
        if (f == 0.0)
            return x;
        if (f > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo <= 1e-15)
            break;
        double d = g.derivative(x);
        double next = x - f / d;
        if (!(next > lo && next < hi) || !std::isfinite(next))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

} // namespace

BaseMap::BaseMap(Definition def) : def_(std::move(def))
{
    if (def_.degree < 2)
        throw std::invalid_argument("BaseMap: degree must be at least 2");
    if (!def_.lift || !def_.lift_derivative)
        throw std::invalid_argument("BaseMap: lift and derivative are required");
    if (def_.cover_count >= def_.degree)
        throw std::invalid_argument("BaseMap: H2 violated, omega needs q >= p branch domains");
    if (!(def_.lambda_u < 1.0))
        throw std::invalid_argument("BaseMap: lambda_u must be < 1");
}

double BaseMap::operator()(double theta) const { return wrap01(def_.lift(theta)); }

double BaseMap::inverse_branch(int j, double y) const
{
    if (j < 0 || j >= def_.degree)
        throw std::out_of_range("BaseMap: invalid branch index");
    if (def_.closed_inverse)
        return def_.closed_inverse(j, y);
    return invert_lift(*this, y + j);
}

int BaseMap::branch_of(double theta) const
{
    int j = static_cast<int>(std::floor(def_.lift(theta)));
    return std::clamp(j, 0, def_.degree - 1);
}

bool BaseMap::in_omega(double x) const
{
    return std::any_of(def_.omega.begin(), def_.omega.end(), [x](const Interval& i) { return i.contains(x); });
}

BaseMap doubling_map()
{
    BaseMap::Definition d;
    d.name = "doubling";
    d.degree = 2;
    d.lift = [](double t) { return 2.0 * t; };
    d.lift_derivative = [](double) { return 2.0; };
    d.closed_inverse = [](int j, double y) { return 0.5 * (y + j); };
    d.cover_count = 0;
    d.lambda_u = 0.5 + 1e-9;
    d.L = 0.5;
    d.min_expansion = 2.0;
    d.lambda_u_tilde = 0.5;
    d.L_tilde = 0.5;
    return BaseMap(std::move(d));
}

BaseMap manneville_pomeau_map(double a)
{
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("manneville_pomeau_map: mp_alpha must lie in (0,1)");
    const double c = std::pow(2.0, a);
    BaseMap::Definition d;
    d.name = "manneville_pomeau";
    d.degree = 2;
    d.lift = [a, c](double t) {
        if (t <= 0.5)
            return t * (1.0 + c * std::pow(t, a));
        return 2.0 + (t - 1.0) * (1.0 + c * std::pow(1.0 - t, a));
    };
    d.lift_derivative = [a, c](double t) {
        double s = t <= 0.5 ? t : 1.0 - t;
        return 1.0 + (1.0 + a) * c * std::pow(s, a);
    };
    const double delta = 0.1;
    const double l_off = 1.0 / (1.0 + (1.0 + a) * c * std::pow(delta, a));
    d.omega = {{0.0, delta}, {1.0 - delta, 1.0}};
    d.cover_count = 1; // the arc (1-delta, delta) lies in one injectivity domain
    d.lambda_u = l_off + 0.05 * (1.0 - l_off);
    d.L = 1.0;
    d.min_expansion = 1.0;
    d.lambda_u_tilde = d.lambda_u;
    d.L_tilde = 1.0;
    return BaseMap(std::move(d));
}

BaseMap perturbed_doubling_map(double t, double a, double w)
{
    if (!(t >= 0.0 && t <= kPerturbationMax))
        throw std::invalid_argument("perturbed_doubling_map: t outside [0, 0.45]");
    if (!(a >= 0.0 && w > 0.0 && a + w <= 0.5))
        throw std::invalid_argument("perturbed_doubling_map: H2 violated, deformation window must lie in one branch domain");
    if (t == 0.0) {
        BaseMap g = doubling_map();
        return g;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    auto eta = [=](double x) {
        if (x <= a || x >= a + w)
            return 0.0;
        double s = (x - a) / w;
        return w / two_pi * (std::sin(two_pi * s) - 0.5 * std::sin(2.0 * two_pi * s));
    };
    auto deta = [=](double x) {
        if (x <= a || x >= a + w)
            return 0.0;
        double s = (x - a) / w;
        return std::cos(two_pi * s) - std::cos(2.0 * two_pi * s);
    };
    BaseMap::Definition d;
    d.name = "perturbed_doubling";
    d.degree = 2;
    d.lift = [=](double x) { return 2.0 * x + t * eta(x); };
    d.lift_derivative = [=](double x) { return 2.0 + t * deta(x); };
    d.omega = {{a, a + w}};
    d.cover_count = 1;
    d.lambda_u = 0.5 + 1e-9;
    d.L = 1.0 / (2.0 - 2.0 * t);
    d.min_expansion = 2.0 - 2.0 * t;
    d.lambda_u_tilde = 0.5;
    d.L_tilde = d.L;
    return BaseMap(std::move(d));
}

Fiber default_offset(double theta)
{
    const double u = 2.0 * std::numbers::pi * theta;
    return Fiber(0.5 * std::cos(u), 0.5 * std::sin(u));
}

FiberContraction::FiberContraction(OffsetFn offset, double lambda_s) : offset_(std::move(offset)), lambda_s_(lambda_s)
{
    if (!(lambda_s > 0.0 && lambda_s < 1.0))
        throw std::invalid_argument("FiberContraction: lambda_s must lie in (0,1)");
}

SkewProduct::SkewProduct(BaseMap base, FiberContraction fiber) : base_(std::move(base)), fiber_(std::move(fiber))
{
    for (int i = 0; i <= 4096; ++i)
        max_expansion_ = std::max(max_expansion_, base_.derivative(i / 4096.0));
    max_expansion_ *= 1.0 + 1e-9;
}

AttractorPoint SkewProduct::forward(const AttractorPoint& x) const
{
    return {base_(x.base), fiber_(x.base, x.fiber), 0};
}

double SkewProduct::base_distance(double a, double b) const { return circle_distance(a, b); }

namespace {
void check_lambda(double lambda_s)
{
    if (!(lambda_s > 0.0 && lambda_s <= 0.5))
        throw std::invalid_argument("solenoid: lambda_s must lie in (0, 1/2] for f to be injective");
}
} // namespace

SkewProduct make_doubling_solenoid(double lambda_s, OffsetFn offset)
{
    check_lambda(lambda_s);
    return SkewProduct(doubling_map(), FiberContraction(std::move(offset), lambda_s));
}

SkewProduct make_mp_solenoid(double mp_alpha, double lambda_s)
{
    check_lambda(lambda_s);
    return SkewProduct(manneville_pomeau_map(mp_alpha), FiberContraction(default_offset, lambda_s));
}

SkewProduct make_perturbed_family(double t, double lambda_s)
{
    check_lambda(lambda_s);
    return SkewProduct(perturbed_doubling_map(t), FiberContraction(default_offset, lambda_s));
}

ItineraryPoint reconstruct_point(const LeafModel& model, double y, int rect, const std::vector<int>& itinerary,
                                 int depth, const Fiber& anchor)
{
    if (depth < 0 || static_cast<int>(itinerary.size()) < depth)
        throw std::invalid_argument("reconstruct_point: itinerary shorter than depth");
    std::vector<double> bases(depth + 1);
    std::vector<int> rects(depth + 1);
    bases[0] = y;
    rects[0] = rect;
    for (int k = 1; k <= depth; ++k) {
        int j = itinerary[k - 1];
        if (j < 0 || j >= model.preimage_count(rects[k - 1]))
            throw std::out_of_range("reconstruct_point: invalid branch index");
        bases[k] = model.preimage_base(rects[k - 1], j, bases[k - 1]);
        rects[k] = model.preimage_rect(rects[k - 1], j);
    }
    Fiber z = anchor;
    for (int k = depth; k >= 1; --k)
        z = model.push_fiber(rects[k - 1], itinerary[k - 1], bases[k], z);

    ItineraryPoint p;
    p.base = y;
    p.rect = rect;
    p.itinerary.assign(itinerary.begin(), itinerary.begin() + depth);
    p.fiber = z;
    p.depth = depth;
    return p;
}

ItineraryPoint backward_shift(const LeafModel& model, const ItineraryPoint& x, int k)
{
    if (k < 0 || k > x.depth)
        throw std::invalid_argument("backward_shift: itinerary depth too small");
    double y = x.base;
    int rect = x.rect;
    for (int i = 0; i < k; ++i) {
        int j = x.itinerary[i];
        y = model.preimage_base(rect, j, y);
        rect = model.preimage_rect(rect, j);
    }
    std::vector<int> rest(x.itinerary.begin() + k, x.itinerary.end());
    return reconstruct_point(model, y, rect, rest, x.depth - k);
}

} // namespace skewlab
