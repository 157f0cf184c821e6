#include "skewlab/leaf_measure.hpp"
#include "skewlab/numeric.hpp"

#include <stdexcept>
#include <string>

namespace skewlab {

namespace {

std::size_t count_nodes(const LeafModel& model, int rect, int depth, std::size_t cap)
{
    if (depth == 0)
        return 1;
    std::size_t total = 0;
    for (int j = 0; j < model.preimage_count(rect); ++j) {
        total += count_nodes(model, model.preimage_rect(rect, j), depth - 1, cap);
        if (total > cap)
            return total;
    }
    return total;
}

} // namespace

LeafQuadrature build_quadrature(const LeafModel& model, double y, int depth, int rect, std::size_t node_budget)
{
    if (depth < 0)
        throw std::invalid_argument("build_quadrature: depth must be nonnegative");
    std::size_t needed = count_nodes(model, rect, depth, node_budget);
    if (needed > node_budget)
        throw std::length_error("build_quadrature: depth " + std::to_string(depth) + " needs more than " +
                                std::to_string(node_budget) + " nodes; raise the node budget");

    LeafQuadrature q;
    q.base = y;
    q.rect = rect;
    q.depth = depth;
    if (depth == 0) {
        ItineraryPoint p;
        p.base = y;
        p.rect = rect;
        q.nodes.push_back(p);
        q.weights.push_back(1.0);
        q.denominators.push_back(1);
        q.block_start = {0, 1};
        return q;
    }

    const int pg = model.preimage_count(rect);
    q.nodes.reserve(needed);
    q.block_start.push_back(0);
    for (int j = 0; j < pg; ++j) {
        const double cy = model.preimage_base(rect, j, y);
        const int cr = model.preimage_rect(rect, j);
        LeafQuadrature child = build_quadrature(model, cy, depth - 1, cr, node_budget);
        q.child_base.push_back(cy);
        q.child_rect.push_back(cr);
        for (std::size_t k = 0; k < child.size(); ++k) {
            const ItineraryPoint& c = child.nodes[k];
            ItineraryPoint p;
            p.base = y;
            p.rect = rect;
            p.depth = depth;
            p.itinerary.reserve(depth);
            p.itinerary.push_back(j);
            p.itinerary.insert(p.itinerary.end(), c.itinerary.begin(), c.itinerary.end());
            p.fiber = model.push_fiber(rect, j, cy, c.fiber);
            q.preimages.push_back(c.point());
            q.nodes.push_back(std::move(p));
            std::uint64_t den = child.denominators[k] * static_cast<std::uint64_t>(pg);
            q.denominators.push_back(den);
            q.weights.push_back(1.0 / static_cast<double>(den));
        }
        q.block_start.push_back(q.nodes.size());
    }
    return q;
}

Eigen::VectorXd LeafQuadrature::values(const Observable& phi) const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = phi(nodes[i].point());
    return v;
}

Eigen::VectorXd LeafQuadrature::preimage_values(const Observable& phi) const
{
    if (preimages.size() != nodes.size())
        throw std::invalid_argument("LeafQuadrature: preimages need depth >= 1");
    Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = phi(preimages[i]);
    return v;
}

Eigen::MatrixXd LeafQuadrature::fiber_metric() const
{
    const auto n = static_cast<Eigen::Index>(nodes.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 1; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            double v = (nodes[i].fiber - nodes[j].fiber).norm();
            d(i, j) = v;
            d(j, i) = v;
        }
    return d;
}

double integrate_values(const Eigen::VectorXd& values, const LeafQuadrature& quad)
{
    if (static_cast<std::size_t>(values.size()) != quad.size())
        throw std::invalid_argument("integrate_values: size mismatch");
    CompensatedSum s;
    for (std::size_t i = 0; i < quad.size(); ++i)
        s.add(quad.weights[i] * values(static_cast<Eigen::Index>(i)));
    return s.value();
}

double integrate_leaf(const Observable& phi, const LeafQuadrature& quad)
{
    CompensatedSum s;
    for (std::size_t i = 0; i < quad.size(); ++i)
        s.add(quad.weights[i] * phi(quad.nodes[i].point()));
    return s.value();
}

double weight_sum(const LeafQuadrature& quad)
{
    CompensatedSum s;
    for (double w : quad.weights)
        s.add(w);
    return s.value();
}

std::vector<double> aggregate_to_parent(const LeafQuadrature& quad)
{
    if (quad.depth == 0)
        throw std::invalid_argument("aggregate_to_parent: depth must be at least 1");
    std::vector<double> parents;
    std::size_t i = 0;
    while (i < quad.size()) {
        std::size_t j = i;
        CompensatedSum s;
        // children of a cell share every symbol except the last one
        while (j < quad.size() && std::equal(quad.nodes[j].itinerary.begin(), quad.nodes[j].itinerary.end() - 1,
                                             quad.nodes[i].itinerary.begin())) {
            s.add(quad.weights[j]);
            ++j;
        }
        parents.push_back(s.value());
        i = j;
    }
    return parents;
}

double change_of_variables_check(const LeafModel& model, const Observable& phi, double y, int j, int depth, int rect)
{
    if (depth < 1)
        throw std::invalid_argument("change_of_variables_check: depth must be at least 1");
    if (j < 0 || j >= model.preimage_count(rect))
        throw std::out_of_range("change_of_variables_check: invalid branch");
    LeafQuadrature gamma = build_quadrature(model, y, depth, rect);
    LeafQuadrature gj = build_quadrature(model, gamma.child_base[j], depth - 1, gamma.child_rect[j]);

    CompensatedSum lhs;
    for (std::size_t k = gamma.block_start[j]; k < gamma.block_start[j + 1]; ++k)
        lhs.add(gamma.weights[k] * phi(gamma.nodes[k].point()));
    CompensatedSum rhs;
    for (std::size_t k = 0; k < gj.size(); ++k) {
        AttractorPoint image = model.forward(gj.nodes[k].point());
        rhs.add(gj.weights[k] * phi(image));
    }
    return std::abs(lhs.value() - rhs.value() / model.preimage_count(rect));
}

} // namespace skewlab
