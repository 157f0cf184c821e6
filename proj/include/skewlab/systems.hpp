#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace skewlab {

using Fiber = Eigen::Vector2d;

struct AttractorPoint {
    double base = 0.0;
    Fiber fiber = Fiber::Zero();
    int rect = 0; // Markov rectangle; always 0 in the skew-product setting
};

using Observable = std::function<double(const AttractorPoint&)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x < hi; }
};

// Degree-p circle map given by a continuous increasing lift G: [0,1] -> [0,p],
// G(0) = 0, G(1) = p. Then g = G mod 1 and the inverse branches are
// h_j(y) = G^{-1}(y + j).
class BaseMap {
public:
    struct Definition {
        std::string name;
        int degree = 2;
        std::function<double(double)> lift;
        std::function<double(double)> lift_derivative;
        std::function<double(int, double)> closed_inverse; // optional
        std::vector<Interval> omega;                        // H1 region, on [0,1)
        int cover_count = 0;                                // q
        double lambda_u = 0.5;                              // bound of L(x) off omega
        double L = 1.0;                                     // bound of L(x) on omega
        double min_expansion = 1.0;                         // inf of G'
        double lambda_u_tilde = 0.5;                        // constants of the C-invariance display
        double L_tilde = 0.5;
    };

    explicit BaseMap(Definition def);

    const std::string& name() const { return def_.name; }
    int degree() const { return def_.degree; }
    double operator()(double theta) const;
    double lift(double theta) const { return def_.lift(theta); }
    double derivative(double theta) const { return def_.lift_derivative(theta); }
    double inverse_branch(int j, double y) const;
    int branch_of(double theta) const;
    // inverse-branch Lipschitz bound at the preimage point x
    double lipschitz_profile(double x) const { return 1.0 / derivative(x); }
    bool in_omega(double x) const;
    const std::vector<Interval>& omega() const { return def_.omega; }
    int cover_count() const { return def_.cover_count; }
    double lambda_u() const { return def_.lambda_u; }
    double L() const { return def_.L; }
    double min_expansion() const { return def_.min_expansion; }
    double lambda_u_tilde() const { return def_.lambda_u_tilde; }
    double L_tilde() const { return def_.L_tilde; }

private:
    Definition def_;
};

BaseMap doubling_map();
BaseMap manneville_pomeau_map(double mp_alpha);
// Doubling map deformed inside [a, a+w] by a C^1 bump with amplitude t.
BaseMap perturbed_doubling_map(double t, double a = 0.1, double w = 0.2);

using OffsetFn = std::function<Fiber(double)>;
Fiber default_offset(double theta);

class FiberContraction {
public:
    FiberContraction(OffsetFn offset, double lambda_s);
    Fiber operator()(double theta, const Fiber& z) const { return offset_(theta) + lambda_s_ * z; }
    double lambda_s() const { return lambda_s_; }

private:
    OffsetFn offset_;
    double lambda_s_;
};

// What the leaf-measure, transfer and sampling code needs from a system whose
// stable leaves are indexed by (rectangle, base coordinate). Leaves in the
// first setting all live in rectangle 0.
class LeafModel {
public:
    virtual ~LeafModel() = default;

    virtual int rect_count() const { return 1; }
    virtual int preimage_count(int rect) const = 0;
    virtual int preimage_rect(int rect, int j) const = 0;
    virtual double preimage_base(int rect, int j, double y) const = 0;
    // f restricted to the j-th preimage leaf, in fiber coordinates
    virtual Fiber push_fiber(int rect, int j, double pre_base, const Fiber& z) const = 0;
    virtual AttractorPoint forward(const AttractorPoint& x) const = 0;

    virtual int out_degree(int rect) const = 0;
    // k-th forward transition out of rect: the target rectangle and the index
    // of the source among the preimages of a target leaf
    virtual void out_edge(int rect, int k, int& target, int& preimage_index) const = 0;
    virtual Interval rect_interval(int rect) const = 0;

    virtual double base_distance(double a, double b) const = 0;
    virtual double fiber_contraction() const = 0;
    virtual double diameter() const = 0;
    virtual double holonomy_constant() const { return 1.0; }
    virtual double min_expansion() const = 0;
    virtual double max_expansion() const { return std::numeric_limits<double>::infinity(); }

    double distance(const AttractorPoint& a, const AttractorPoint& b) const
    {
        return base_distance(a.base, b.base) + (a.fiber - b.fiber).norm();
    }
};

class SkewProduct : public LeafModel {
public:
    SkewProduct(BaseMap base, FiberContraction fiber);

    const BaseMap& base() const { return base_; }
    const FiberContraction& fiber() const { return fiber_; }
    int degree() const { return base_.degree(); }
    AttractorPoint apply(const AttractorPoint& x) const { return forward(x); }
    double project(const AttractorPoint& x) const { return x.base; }

    int preimage_count(int) const override { return base_.degree(); }
    int preimage_rect(int, int) const override { return 0; }
    double preimage_base(int, int j, double y) const override { return base_.inverse_branch(j, y); }
    Fiber push_fiber(int, int, double pre_base, const Fiber& z) const override { return fiber_(pre_base, z); }
    AttractorPoint forward(const AttractorPoint& x) const override;
    int out_degree(int) const override { return base_.degree(); }
    void out_edge(int, int k, int& target, int& preimage_index) const override
    {
        target = 0;
        preimage_index = k;
    }
    Interval rect_interval(int) const override { return {0.0, 1.0}; }
    double base_distance(double a, double b) const override;
    double fiber_contraction() const override { return fiber_.lambda_s(); }
    double diameter() const override { return 2.5; } // circle 0.5 + unit fiber disk 2
    double min_expansion() const override { return base_.min_expansion(); }
    double max_expansion() const override { return max_expansion_; }

private:
    BaseMap base_;
    FiberContraction fiber_;
    double max_expansion_ = 0.0; // sup of the lift derivative on a fine grid
};

SkewProduct make_doubling_solenoid(double lambda_s, OffsetFn offset = default_offset);
SkewProduct make_mp_solenoid(double mp_alpha, double lambda_s);
SkewProduct make_perturbed_family(double t, double lambda_s = 0.25);
inline constexpr double kPerturbationMax = 0.45;

struct ItineraryPoint {
    double base = 0.0;
    int rect = 0;
    std::vector<int> itinerary; // backward choices i_1 ... i_n
    Fiber fiber = Fiber::Zero();
    int depth = 0;

    AttractorPoint point() const { return {base, fiber, rect}; }
};

ItineraryPoint reconstruct_point(const LeafModel& model, double y, int rect, const std::vector<int>& itinerary,
                                 int depth, const Fiber& anchor = Fiber::Zero());
inline ItineraryPoint reconstruct_point(const SkewProduct& sys, double y, const std::vector<int>& itinerary, int depth)
{
    return reconstruct_point(sys, y, 0, itinerary, depth);
}

// f^{-k}(x): drops k backward symbols
ItineraryPoint backward_shift(const LeafModel& model, const ItineraryPoint& x, int k);

} // namespace skewlab
