#include "skewlab/numeric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace skewlab {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& weights)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 2 || y.size() != x.size())
        throw std::invalid_argument("fit_line: need at least two points of matching length");
    Eigen::MatrixXd a(n, 2);
    Eigen::VectorXd b(n);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    if (!weights.empty())
        for (Eigen::Index i = 0; i < n; ++i)
            w(i) = weights[i];
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = std::sqrt(w(i));
        a(i, 0) = s;
        a(i, 1) = s * x[i];
        b(i) = s * y[i];
    }
    Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);

    LineFit fit;
    fit.intercept = coef(0);
    fit.slope = coef(1);
    double wsum = w.sum();
    double mean = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        mean += w(i) * y[i];
    mean /= wsum;
    double ss_tot = 0.0, ss_res = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = y[i] - fit.intercept - fit.slope * x[i];
        ss_res += w(i) * r * r;
        ss_tot += w(i) * (y[i] - mean) * (y[i] - mean);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

double kolmogorov_pvalue(double d, std::size_t n)
{
    double sn = std::sqrt(static_cast<double>(n));
    double t = (sn + 0.12 + 0.11 / sn) * d;
    if (t < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * t * t);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double normal_cdf(double x, double mean, double sd)
{
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

} // namespace skewlab
