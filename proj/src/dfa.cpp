#include "skewlab/dfa.hpp"
#include "skewlab/maxent.hpp"
#include "skewlab/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace skewlab {

namespace {

std::vector<double> perron_lengths(const Eigen::MatrixXi& M)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(M.cast<double>());
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k).real() > es.eigenvalues()(best).real())
            best = k;
    Eigen::VectorXd v = es.eigenvectors().col(best).real().cwiseAbs();
    v /= v.sum();
    return {v.data(), v.data() + v.size()};
}

} // namespace

MarkovSystem::MarkovSystem(Config config) : cfg_(std::move(config))
{
    const Eigen::MatrixXi& M = cfg_.transitions;
    const int p = static_cast<int>(M.rows());
    if (p < 2 || M.cols() != p)
        throw std::invalid_argument("MarkovSystem: need a square transition matrix with at least two rectangles");
    if ((M.array() < 0).any())
        throw std::invalid_argument("MarkovSystem: negative transition multiplicity");
    if (!(cfg_.lambda_s > 0.0 && cfg_.lambda_s <= 0.5))
        throw std::invalid_argument("MarkovSystem: lambda_s must lie in (0, 1/2]");
    if (!(cfg_.zeta > 0.0 && cfg_.zeta < 1.0 && cfg_.L >= 1.0))
        throw std::invalid_argument("MarkovSystem: need 0 < zeta < 1 <= L");

    // mild mixing: some power of the 0/1 pattern is positive (Wielandt bound)
    Eigen::MatrixXd A = (M.array() > 0).cast<double>().matrix();
    Eigen::MatrixXd P = A;
    const int wielandt = (p - 1) * (p - 1) + 1;
    for (int n = 1; n <= wielandt; ++n) {
        if ((P.array() > 0.0).all()) {
            n0_ = n;
            break;
        }
        P = ((P * A).array() > 0.0).cast<double>().matrix();
    }
    if (n0_ == 0)
        throw std::invalid_argument("MarkovSystem: transition matrix is not primitive (no positive power)");

    if (cfg_.lengths.empty())
        cfg_.lengths = perron_lengths(M);
    if (static_cast<int>(cfg_.lengths.size()) != p)
        throw std::invalid_argument("MarkovSystem: one length per rectangle required");
    double total = 0.0;
    for (double l : cfg_.lengths) {
        if (!(l > 0.0))
            throw std::invalid_argument("MarkovSystem: rectangle lengths must be positive");
        total += l;
    }
    for (double& l : cfg_.lengths)
        l /= total;
    start_.resize(p);
    for (int i = 0; i < p; ++i)
        start_[i] = i == 0 ? 0.0 : start_[i - 1] + cfg_.lengths[i - 1];

    in_.assign(p, {});
    out_.assign(p, {});
    inv_slope_.resize(p);
    good_.resize(p);
    for (int j = 0; j < p; ++j) {
        double image = 0.0;
        for (int i = 0; i < p; ++i)
            image += M(j, i) * cfg_.lengths[i];
        const double scale = cfg_.lengths[j] / image; // inverse slope on R_j
        inv_slope_[j] = scale;
        double lo = start_[j];
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < M(j, i); ++k) {
                Edge e;
                e.source = j;
                e.target = i;
                e.index = static_cast<int>(edges_.size());
                e.lo = lo;
                e.length = cfg_.lengths[i] * scale;
                lo += e.length;
                out_[j].push_back(e.index);
                edges_.push_back(e);
            }
        if (scale <= cfg_.zeta)
            good_[j] = true;
        else if (scale <= cfg_.L)
            good_[j] = false;
        else
            throw std::invalid_argument("MarkovSystem: rectangle " + std::to_string(j) +
                                        " has inverse slope above L");
    }
    // preimages of a leaf in R_i, ordered by source rectangle then copy
    for (const Edge& e : edges_)
        in_[e.target].push_back(e.index);
    for (int i = 0; i < p; ++i) {
        if (in_[i].empty())
            throw std::invalid_argument("MarkovSystem: rectangle without preimages");
        for (std::size_t k = 0; k < in_[i].size(); ++k)
            edges_[in_[i][k]].preimage = static_cast<int>(k);
    }
    if (std::none_of(good_.begin(), good_.end(), [](bool g) { return g; }))
        throw std::invalid_argument("MarkovSystem: at least one good rectangle is required");
}

int MarkovSystem::p_max() const
{
    int m = 0;
    for (const auto& v : in_)
        m = std::max(m, static_cast<int>(v.size()));
    return m;
}

double MarkovSystem::min_expansion() const
{
    return 1.0 / *std::max_element(inv_slope_.begin(), inv_slope_.end());
}

Eigen::MatrixXd MarkovSystem::splitting_chain() const
{
    Eigen::MatrixXd P = cfg_.transitions.cast<double>();
    for (Eigen::Index j = 0; j < P.rows(); ++j)
        P.row(j) /= P.row(j).sum();
    return P;
}

Fiber MarkovSystem::offset(const Edge& e, double theta) const
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double a = two_pi * e.index / static_cast<double>(edges_.size());
    return Fiber(0.45 * std::cos(a) + 0.05 * std::cos(two_pi * theta),
                 0.45 * std::sin(a) + 0.05 * std::sin(two_pi * theta));
}

double MarkovSystem::preimage_base(int rect, int j, double y) const
{
    const Edge& e = edges_[in_[rect].at(j)];
    return e.lo + (y - start_[rect]) / cfg_.lengths[rect] * e.length;
}

Fiber MarkovSystem::push_fiber(int rect, int j, double pre_base, const Fiber& z) const
{
    return offset(edges_[in_[rect].at(j)], pre_base) + cfg_.lambda_s * z;
}

AttractorPoint MarkovSystem::forward(const AttractorPoint& x) const
{
    const auto& out = out_.at(x.rect);
    std::size_t k = 0;
    while (k + 1 < out.size() && x.base >= edges_[out[k + 1]].lo)
        ++k;
    const Edge& e = edges_[out[k]];
    AttractorPoint y;
    y.rect = e.target;
    y.base = start_[e.target] + (x.base - e.lo) / e.length * cfg_.lengths[e.target];
    y.base = std::clamp(y.base, start_[e.target], std::nextafter(start_[e.target] + cfg_.lengths[e.target], 0.0));
    y.fiber = offset(e, x.base) + cfg_.lambda_s * x.fiber;
    return y;
}

void MarkovSystem::out_edge(int rect, int k, int& target, int& preimage_index) const
{
    const Edge& e = edges_[out_[rect].at(k)];
    target = e.target;
    preimage_index = e.preimage;
}

MarkovSystem make_markov_system(const Eigen::MatrixXi& transitions, double lambda_s)
{
    MarkovSystem::Config c;
    c.transitions = transitions;
    c.lambda_s = lambda_s;
    return MarkovSystem(c);
}

ConeInputs dfa_cone_inputs(const MarkovSystem& ms, double alpha)
{
    ConeInputs in;
    in.lambda_s = ms.fiber_contraction();
    in.alpha = alpha;
    in.diam = ms.diameter();
    in.p = ms.p_max();
    double good = 0.0, any = 0.0;
    for (int r = 0; r < ms.rect_count(); ++r) {
        any = std::max(any, ms.inverse_slope(r));
        if (ms.is_good(r))
            good = std::max(good, ms.inverse_slope(r));
    }
    in.lambda_u_tilde = good;
    in.L_tilde = any;
    return in;
}

LeafQuadrature build_variable_quadrature(const MarkovSystem& ms, double y, int rect, int depth, std::size_t node_budget)
{
    if (!ms.rect_interval(rect).contains(y))
        throw std::invalid_argument("build_variable_quadrature: base point outside its rectangle");
    return build_quadrature(ms, y, depth, rect, node_budget);
}

TransferIdentity transfer_leaf_integral_dfa(const MarkovSystem& ms, const Observable& phi, const LeafDensity& rho,
                                            const LeafQuadrature& leaf, const Potential& pot)
{
    return transfer_leaf_integral(ms, phi, rho, leaf, pot);
}

double diameter_bound_dfa(const ConeParams& params, const MarkovSystem& ms)
{
    const double pm = ms.p_max();
    const double lam = params.lambda;
    const double da = std::pow(ms.diameter(), params.alpha);
    const double a = 1.0 + params.b * std::log((1.0 + lam) / (1.0 - lam));
    const double c = 1.0 + std::max(params.kappa, params.c) * da;
    const double C_tilde = pm * a * a * c * c;
    return 2.0 * (pm + 1.0) * C_tilde;
}

DfaDiameter sampled_diameter_dfa(const MarkovSystem& ms, const ConeParams& params, int elements, const SamplingPlan& plan)
{
    DfaDiameter out;
    out.bound = diameter_bound_dfa(params, ms);
    out.C_tilde = out.bound / (2.0 * (ms.p_max() + 1.0));
    SplitMix64 rng = stream(plan.seed, 0xdfa);
    std::vector<Observable> cone;
    for (int k = 0; k < elements; ++k)
        cone.push_back(lift_to_cone(ms, random_bump(rng), params, plan).observable);
    auto leaves = sample_leaves(ms, params, plan);
    DiameterReport r = estimate_diameter(ms, params, cone, leaves, Potential::constant_potential());
    out.theta_plus_max = r.theta_plus_max;
    out.pairs = r.pairs;
    return out;
}

CylinderMasses quotient_mass_distribution(const MarkovSystem& ms, int depth)
{
    if (depth < 0)
        throw std::invalid_argument("quotient_mass_distribution: negative depth");
    CylinderMasses cm;
    cm.depth = depth;
    const int p = ms.rect_count();
    std::vector<int> last;
    for (int r = 0; r < p; ++r) {
        cm.words.push_back({r});
        cm.mass.push_back(1.0 / p);
        last.push_back(r);
    }
    for (int d = 0; d < depth; ++d) {
        std::vector<std::vector<int>> words;
        std::vector<double> mass;
        std::vector<int> next_last;
        for (std::size_t w = 0; w < cm.words.size(); ++w) {
            const int r = last[w];
            const int deg = ms.out_degree(r);
            for (int k = 0; k < deg; ++k) {
                int target = 0, pre = 0;
                ms.out_edge(r, k, target, pre);
                std::vector<int> word = cm.words[w];
                word.push_back(ms.out_edge_index(r, k));
                words.push_back(std::move(word));
                mass.push_back(cm.mass[w] / deg);
                next_last.push_back(target);
                cm.shrink = std::max(cm.shrink, 1.0 / deg);
            }
        }
        cm.words = std::move(words);
        cm.mass = std::move(mass);
        last = std::move(next_last);
    }
    return cm;
}

std::vector<double> markov_chain_correlations(const MarkovSystem& ms, const Eigen::VectorXd& phi,
                                              const Eigen::VectorXd& psi, const std::vector<int>& lags)
{
    const int p = ms.rect_count();
    if (phi.size() != p || psi.size() != p)
        throw std::invalid_argument("markov_chain_correlations: one value per rectangle required");
    const Eigen::MatrixXd P = ms.splitting_chain();
    const Eigen::RowVectorXd pi0 = Eigen::RowVectorXd::Constant(p, 1.0 / p);
    std::vector<double> out;
    for (int n : lags) {
        if (n < 0)
            throw std::invalid_argument("markov_chain_correlations: negative lag");
        Eigen::MatrixXd Pn = Eigen::MatrixXd::Identity(p, p);
        for (int k = 0; k < n; ++k)
            Pn = Pn * P;
        Eigen::VectorXd Pnphi = Pn * phi;
        double joint = pi0.dot(psi.cwiseProduct(Pnphi));
        out.push_back(joint - pi0.dot(Pnphi) * pi0.dot(psi));
    }
    return out;
}

DfaDecay dfa_decay_experiment(const MarkovSystem& ms, const Observable& phi, const Observable& psi,
                              const std::vector<int>& lags, std::size_t n_samples, int depth, std::uint64_t seed)
{
    OrbitSampler sampler(ms, depth, seed);
    DfaDecay out;
    out.correlations = correlations(sampler, phi, psi, lags, n_samples);
    out.fit = fit_decay(out.correlations);
    return out;
}

} // namespace skewlab
