#pragma once

#include "skewlab/cones.hpp"
#include "skewlab/leaf_measure.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/systems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skewlab {

struct Potential {
    Observable value;
    double variation = 0.0; // epsilon: sup - inf
    double hoelder = 0.0;   // |e^phi|_alpha
    bool constant = true;

    static Potential constant_potential(double c = 0.0);
    double operator()(const AttractorPoint& x) const { return value(x); }
};

struct ConeInputs {
    double lambda_s = 0.1;
    double alpha = 1.0;
    double epsilon = 0.0;
    double diam = 2.5;
    int p = 2; // p_max in the second setting
    double lambda_u_tilde = 0.5;
    double L_tilde = 0.5;
    double lambda_step = 1e-3;
};

struct ConeParams {
    double alpha = 1.0;
    double kappa = 0.0;
    double lambda = 0.0;
    double b = 0.0;
    double c = 0.0;
    double sigma = 0.0;
    double sigma1 = 0.0;
    double sigma1_tilde = 0.0; // main-cone factor
    double sigma2 = 0.0;
    double Lambda1 = 0.0;
    double M = 0.0;     // (1 + kappa diam^alpha)^2
    double b_min = 0.0; // 2M / (1 - sigma1_tilde)
    double log_B = 0.0; // log of the diameter-proposition ratio bound
    double delta_bound = 0.0;
    ConeInputs inputs;
};

double Lambda1_of(double lambda);
ConeParams choose_cone_params(const ConeInputs& in);
// Recomputes sigma, log_B and delta_bound after b or c were overridden.
ConeParams with_b_c(const ConeParams& params, double b, double c);
// Names of the admissibility inequalities that fail (empty when admissible).
std::vector<std::string> cone_param_violations(const ConeParams& params);

double apply_transfer(const LeafModel& model, const Observable& phi, const ItineraryPoint& x, const Potential& pot);
double apply_transfer_n(const LeafModel& model, const Observable& phi, const ItineraryPoint& x, int n,
                        const Potential& pot);

// rho_j = (1/p_gamma) rho o f e^{pot} on the nodes of gamma_j (depth n-1)
LeafDensity push_density(const LeafQuadrature& gamma, const LeafDensity& rho, int j, const Potential& pot);

struct TransferIdentity {
    double direct = 0.0;     // int_gamma L(phi) rho
    double branch_sum = 0.0; // sum_j int_{gamma_j} phi rho_j
    double residual() const { return std::abs(direct - branch_sum); }
};
TransferIdentity transfer_leaf_integral(const LeafModel& model, const Observable& phi, const LeafDensity& rho,
                                        const LeafQuadrature& gamma, const Potential& pot);

// Node values of an observable (or of its transfer image) on a quadrature.
using LeafValues = std::function<Eigen::VectorXd(const LeafQuadrature&)>;
LeafValues values_of(const Observable& phi);
LeafValues transfer_values(const LeafModel& model, const Observable& phi, int n, const Potential& pot);

ConeSpec density_cone(const LeafQuadrature& quad, double kappa, double alpha);

// Random element of D(gamma, kappa) with seminorm/(kappa min) equal to `fill` in (0,1).
LeafDensity random_cone_density(const LeafQuadrature& quad, const ConeSpec& cone, SplitMix64& rng, double fill);

struct LeafSample {
    LeafQuadrature quad;
    ConeSpec cone = ConeSpec::positivity(0);
    std::vector<LeafDensity> densities; // normalized, densities[0] is the constant 1
    Eigen::MatrixXd theta;              // pairwise projective distances
};

struct SamplingPlan {
    int leaves = 8;
    int depth = 6;
    int densities = 6;
    int leaf_pairs = 24;
    std::uint64_t seed = 1;
};

std::vector<LeafSample> sample_leaves(const LeafModel& model, const ConeParams& params, const SamplingPlan& plan);
std::vector<std::pair<LeafQuadrature, LeafQuadrature>> sample_leaf_pairs(const LeafModel& model,
                                                                         const SamplingPlan& plan);

struct MarginReport {
    double max_ratio = 0.0;
    double inf_estimate = 0.0;
    double threshold = 0.0;
    int evaluated = 0;
    int skipped = 0;
    bool positive = true; // sampled condition (A)
    bool holds() const { return positive && max_ratio < threshold; }
};

MarginReport check_condition_A(const LeafValues& phi, const std::vector<LeafSample>& leaves);
MarginReport check_condition_B(const LeafValues& phi, const std::vector<LeafSample>& leaves, double b);
MarginReport check_condition_C(const LeafModel& model, const LeafValues& phi,
                               const std::vector<std::pair<LeafQuadrature, LeafQuadrature>>& pairs,
                               const std::vector<LeafSample>& leaves, double alpha, double c);

struct Lift {
    Observable observable;
    double K = 0.0;
    double K_A = 0.0;
    double K_B = 0.0;
    double K_C = 0.0;
    double K_leaf = 0.0; // sup_gamma |phi|_gamma|_alpha / kappa - inf phi
};
Lift lift_to_cone(const LeafModel& model, const Observable& phi, const ConeParams& params, const SamplingPlan& plan);

// Smooth test observable on (base, fiber); used by the cone-element generator.
Observable random_bump(SplitMix64& rng, double amplitude = 1.0);

struct DiameterReport {
    double theta_plus_max = 0.0; // sampled Theta_+(L phi, L psi)
    double theta_plus_bound = 0.0;
    double delta_est = 0.0;
    double delta_bound = 0.0;
    double tau_est = 0.0;
    double tau_bound = 0.0;
    double log_one_minus_tau_bound = 0.0;
    int pairs = 0;
};

// Theta_+ between two observables from their leaf integrals over all sampled (leaf, density).
double theta_plus(const LeafValues& phi, const LeafValues& psi, const std::vector<LeafSample>& leaves);
DiameterReport estimate_diameter(const LeafModel& model, const ConeParams& params, const std::vector<Observable>& cone_elements,
                                 const std::vector<LeafSample>& leaves, const Potential& pot);

struct ContractionTrial {
    double theta = 0.0;
    double theta_j = 0.0; // max over branches
    bool pushed_in_cone = true;
};
// Lemma check: rho in D(gamma,kappa) implies rho_j in D(gamma_j, lambda kappa) and
// theta_j(rho'_j, rho''_j) <= Lambda1 theta(rho', rho'').
std::vector<ContractionTrial> density_contraction_trials(const LeafModel& model, const ConeParams& params, int depth,
                                                         int trials, std::uint64_t seed);

} // namespace skewlab
