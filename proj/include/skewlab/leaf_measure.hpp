#pragma once

#include "skewlab/systems.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace skewlab {

inline constexpr std::size_t kDefaultNodeBudget = std::size_t(1) << 22;

// Mass-distribution measure on the stable leaf over (rect, base). Nodes are in
// lexicographic order of the backward itinerary, so the nodes whose first
// symbol is j form a contiguous block that matches, node for node, the
// depth-(n-1) quadrature of the preimage leaf gamma_j.
struct LeafQuadrature {
    double base = 0.0;
    int rect = 0;
    int depth = 0;
    std::vector<ItineraryPoint> nodes;
    std::vector<double> weights;
    std::vector<std::uint64_t> denominators; // weight = 1 / denominator, exactly
    std::vector<AttractorPoint> preimages;   // f^{-1}(node), depth >= 1
    std::vector<std::size_t> block_start;    // size p_gamma + 1
    std::vector<double> child_base;
    std::vector<int> child_rect;

    std::size_t size() const { return nodes.size(); }
    int branches() const { return static_cast<int>(child_base.size()); }
    Eigen::VectorXd values(const Observable& phi) const;
    Eigen::VectorXd preimage_values(const Observable& phi) const;
    Eigen::MatrixXd fiber_metric() const;
};

LeafQuadrature build_quadrature(const LeafModel& model, double y, int depth, int rect = 0,
                                std::size_t node_budget = kDefaultNodeBudget);

double integrate_values(const Eigen::VectorXd& values, const LeafQuadrature& quad);
double integrate_leaf(const Observable& phi, const LeafQuadrature& quad);
double weight_sum(const LeafQuadrature& quad);

// Sums the weights of the children of each depth-(n-1) cell.
std::vector<double> aggregate_to_parent(const LeafQuadrature& quad);

// |int_{f(gamma_j)} phi dmu_gamma - (1/p_gamma) int_{gamma_j} phi o f dmu_{gamma_j}|
double change_of_variables_check(const LeafModel& model, const Observable& phi, double y, int j, int depth,
                                 int rect = 0);

} // namespace skewlab
