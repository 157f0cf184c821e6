#pragma once

#include "skewlab/leaf_measure.hpp"
#include "skewlab/statistics.hpp"
#include "skewlab/systems.hpp"
#include "skewlab/transfer.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace skewlab {

// Second setting, symbolically. Rectangle R_i is the interval I_i of the base
// coordinate; M(j, i) counts the affine branches of R_j onto R_i, so a leaf in
// R_i has p_i = sum_j M(j, i) preimage leaves.
class MarkovSystem : public LeafModel {
public:
    struct Config {
        Eigen::MatrixXi transitions;
        std::vector<double> lengths; // empty: Perron eigenvector of M
        double lambda_s = 0.25;
        double zeta = 0.5; // good rectangles: inverse slope <= zeta
        double L = 1.1;    // bad rectangles: inverse slope <= L
    };

    struct Edge {
        int source = 0;
        int target = 0;
        int index = 0;        // global edge number
        int preimage = 0;     // position among the preimages of a target leaf
        double lo = 0.0;      // sub-interval of I_source
        double length = 0.0;
    };

    explicit MarkovSystem(Config config);

    const Config& config() const { return cfg_; }
    const Eigen::MatrixXi& transitions() const { return cfg_.transitions; }
    int branch_count(int rect) const { return static_cast<int>(in_[rect].size()); }
    int p_max() const;
    bool is_good(int rect) const { return good_[rect]; }
    double inverse_slope(int rect) const { return inv_slope_[rect]; }
    int mixing_exponent() const { return n0_; }
    const std::vector<Edge>& edges() const { return edges_; }
    // row-stochastic chain of the equal out-edge splitting
    Eigen::MatrixXd splitting_chain() const;

    int rect_count() const override { return static_cast<int>(cfg_.transitions.rows()); }
    int preimage_count(int rect) const override { return branch_count(rect); }
    int preimage_rect(int rect, int j) const override { return edges_[in_[rect].at(j)].source; }
    double preimage_base(int rect, int j, double y) const override;
    Fiber push_fiber(int rect, int j, double pre_base, const Fiber& z) const override;
    AttractorPoint forward(const AttractorPoint& x) const override;
    int out_degree(int rect) const override { return static_cast<int>(out_[rect].size()); }
    void out_edge(int rect, int k, int& target, int& preimage_index) const override;
    int out_edge_index(int rect, int k) const { return out_[rect].at(k); }
    Interval rect_interval(int rect) const override { return {start_[rect], start_[rect] + cfg_.lengths[rect]}; }
    double base_distance(double a, double b) const override { return std::abs(a - b); }
    double fiber_contraction() const override { return cfg_.lambda_s; }
    double diameter() const override { return 3.0; } // unit interval plus fiber disk of diameter 2
    double min_expansion() const override;

private:
    Fiber offset(const Edge& e, double theta) const;

    Config cfg_;
    std::vector<double> start_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> in_, out_;
    std::vector<double> inv_slope_;
    std::vector<bool> good_;
    int n0_ = 0;
};

MarkovSystem make_markov_system(const Eigen::MatrixXi& transitions, double lambda_s = 0.25);

// Cone inputs for the second setting: p = p_max, diam = 3, expansion constants
// from the rectangles.
ConeInputs dfa_cone_inputs(const MarkovSystem& ms, double alpha = 1.0);

LeafQuadrature build_variable_quadrature(const MarkovSystem& ms, double y, int rect, int depth,
                                         std::size_t node_budget = kDefaultNodeBudget);

TransferIdentity transfer_leaf_integral_dfa(const MarkovSystem& ms, const Observable& phi, const LeafDensity& rho,
                                            const LeafQuadrature& leaf, const Potential& pot = Potential::constant_potential());

struct DfaDiameter {
    double C_tilde = 0.0;
    double bound = 0.0; // 2 (p_max + 1) C_tilde
    double theta_plus_max = 0.0;
    int pairs = 0;
};

double diameter_bound_dfa(const ConeParams& params, const MarkovSystem& ms);
DfaDiameter sampled_diameter_dfa(const MarkovSystem& ms, const ConeParams& params, int elements, const SamplingPlan& plan);

struct CylinderMasses {
    int depth = 0;
    std::vector<std::vector<int>> words; // rectangle, then edge numbers
    std::vector<double> mass;
    double shrink = 0.0; // largest child / parent ratio
};

CylinderMasses quotient_mass_distribution(const MarkovSystem& ms, int depth);

// Exact correlations of rectangle-symbol observables under the splitting chain
// started from the uniform law: pi0 (psi . P^n phi) - (pi0 P^n phi)(pi0 psi).
std::vector<double> markov_chain_correlations(const MarkovSystem& ms, const Eigen::VectorXd& phi,
                                              const Eigen::VectorXd& psi, const std::vector<int>& lags);

struct DfaDecay {
    Correlations correlations;
    DecayReport fit;
};

DfaDecay dfa_decay_experiment(const MarkovSystem& ms, const Observable& phi, const Observable& psi,
                              const std::vector<int>& lags, std::size_t n_samples, int depth, std::uint64_t seed);

} // namespace skewlab
