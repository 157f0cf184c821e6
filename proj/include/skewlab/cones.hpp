#pragma once

#include <Eigen/Dense>

namespace skewlab {

// Projective cone on a finite node set. Hoelder cones are D(kappa): rho > 0 and
// sampled seminorm |rho|_alpha < kappa * min(rho).
class ConeSpec {
public:
    enum class Kind { Positivity, Hoelder };

    static ConeSpec positivity(int nodes);
    static ConeSpec hoelder(double kappa, double alpha, const Eigen::MatrixXd& metric);

    ConeSpec with_kappa(double kappa) const;

    Kind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    double alpha() const { return alpha_; }
    int nodes() const { return nodes_; }
    const Eigen::MatrixXd& metric() const { return metric_; }
    // metric raised to alpha, cached
    const Eigen::MatrixXd& metric_pow() const { return metric_pow_; }

private:
    Kind kind_ = Kind::Positivity;
    double kappa_ = 0.0;
    double alpha_ = 1.0;
    int nodes_ = 0;
    Eigen::MatrixXd metric_;
    Eigen::MatrixXd metric_pow_;
};

// A positive density sampled at the nodes of a leaf quadrature.
using LeafDensity = Eigen::VectorXd;

inline constexpr double kConeTolerance = 1e-12;

double hoelder_seminorm(const LeafDensity& rho, const ConeSpec& spec);
bool in_cone(const LeafDensity& v, const ConeSpec& spec);

// Values may be +infinity (beta, theta) following sup(empty)=0, inf(empty)=inf.
double alpha_coeff(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec);
double beta_coeff(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec);
double theta(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec);

double birkhoff_bound(double diameter);

namespace detail {
// Generic bisection versions; used for Hoelder cones and as a cross-check for
// the closed forms of the positivity cone.
double alpha_bisect(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec);
double beta_bisect(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec);
double alpha_grid_scan(const LeafDensity& v, const LeafDensity& w, const ConeSpec& spec, int points,
                       int levels = 1);
bool feasible(const LeafDensity& u, const ConeSpec& spec);
} // namespace detail

} // namespace skewlab
