#include "skewlab/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace skewlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double fourier10(double t)
{
    double s = 0.0, amp = 0.5, freq = 2.0;
    for (int k = 1; k <= 10; ++k, amp *= 0.5, freq *= 2.0)
        s += amp * std::cos(kTwoPi * freq * t);
    return s;
}

NamedObservable base_only(const std::string& name, std::function<double(double)> f)
{
    return {name, [f](const AttractorPoint& x) { return f(x.base); }, f};
}

} // namespace

NamedObservable observable_by_name(const std::string& name)
{
    if (name == "cos1")
        return base_only(name, [](double t) { return std::cos(kTwoPi * t); });
    if (name == "fourier10")
        return base_only(name, fourier10);
    // u o g - u for u = cos(2 pi t) and the doubling map
    if (name == "coboundary")
        return base_only(name, [](double t) { return std::cos(2.0 * kTwoPi * t) - std::cos(kTwoPi * t); });
    if (name == "base")
        return base_only(name, [](double t) { return t; });
    if (name == "tent")
        return base_only(name, [](double t) { return t * (1.0 - t); });
    // Hoelder-1/2 with its steepest part at the neutral fixed point of the MP map
    if (name == "mp_test")
        return base_only(name, [](double t) { return std::sqrt(std::min(t, 1.0 - t)); });
    if (name == "constant")
        return base_only(name, [](double) { return 1.0; });
    if (name == "fiber_x")
        return {name, [](const AttractorPoint& x) { return x.fiber.x(); }, {}};
    if (name == "mixed")
        return {name, [](const AttractorPoint& x) { return std::sin(kTwoPi * x.base) + 0.5 * x.fiber.y(); }, {}};
    if (name == "rect0")
        return {name, [](const AttractorPoint& x) { return x.rect == 0 ? 1.0 : 0.0; }, {}};
    throw std::invalid_argument("unknown observable '" + name + "'");
}

std::vector<std::string> observable_names()
{
    return {"cos1", "fourier10", "coboundary", "base", "tent", "mp_test", "fiber_x", "mixed", "rect0", "constant"};
}

double fourier10_correlation(int n)
{
    if (n < 0)
        throw std::invalid_argument("fourier10_correlation: negative lag");
    double s = 0.0;
    for (int k = 1; k <= 10 - n; ++k)
        s += std::pow(4.0, -k);
    return 0.5 * std::pow(2.0, -n) * s;
}

} // namespace skewlab
