#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace skewlab {

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double wrap01(double x)
{
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

inline double circle_distance(double a, double b)
{
    double d = std::abs(wrap01(a) - wrap01(b));
    return d > 0.5 ? 1.0 - d : d;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Weighted least squares y ~ intercept + slope*x. Empty weights means unit weights.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& weights = {});

// Kolmogorov distribution tail P(K > t) for the one-sample KS statistic with n points.
double kolmogorov_pvalue(double d, std::size_t n);

double normal_cdf(double x, double mean, double sd);

} // namespace skewlab
