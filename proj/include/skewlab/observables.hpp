#pragma once

#include "skewlab/systems.hpp"

#include <functional>
#include <string>
#include <vector>

namespace skewlab {

struct NamedObservable {
    std::string name;
    Observable phi;
    std::function<double(double)> base; // set when phi depends on the base coordinate only
};

// cos1, fourier10, coboundary, base, tent, mp_test, fiber_x, mixed, rect0, constant
NamedObservable observable_by_name(const std::string& name);
std::vector<std::string> observable_names();

// Correlations of fourier10 under the doubling map:
// (1/2) 2^{-n} sum_{k=1}^{10-n} 4^{-k}
double fourier10_correlation(int n);

} // namespace skewlab
