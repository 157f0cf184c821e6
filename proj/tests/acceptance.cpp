// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.
#include "skewlab/cli.hpp"
#include "skewlab/cones.hpp"
#include "skewlab/dfa.hpp"
#include "skewlab/leaf_measure.hpp"
#include "skewlab/maxent.hpp"
#include "skewlab/parallel.hpp"
#include "skewlab/rng.hpp"
#include "skewlab/transfer.hpp"

#include <bit>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace skewlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s; // 0: no runtime limit
    std::function<Outcome()> run;
};

std::string num(double x, int digits = 4)
{
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

CommandResult run_config(const std::string& command, const std::string& text, const std::string& out)
{
    ExperimentConfig cfg = parse_config(text);
    cfg.out_dir = (std::filesystem::path("acceptance_out") / out).string();
    return run_command(command, cfg);
}

Eigen::MatrixXi markov_example()
{
    Eigen::MatrixXi m(2, 2);
    m << 1, 2, 1, 1;
    return m;
}

// Product weights checked against branch counts multiplied along each path.
// Refinement is checked on the integer denominators: the children of a cell
// are one block per parent, p of them, each with denominator p times the
// parent's. With p = 3 the floating-point sum of three copies of 1/(3P) need
// not round to 1/P, so the double aggregate is compared only when p is a
// power of two.
struct WeightCheck {
    double worst_sum = 0.0;
    int bad_weights = 0;
    int bad_refinement = 0;
};

void check_weights(const LeafModel& model, double y, int rect, int max_depth, WeightCheck& out)
{
    LeafQuadrature prev;
    std::vector<int> prev_last;
    for (int n = 0; n <= max_depth; ++n) {
        LeafQuadrature q = build_quadrature(model, y, n, rect);
        out.worst_sum = std::max(out.worst_sum, std::abs(weight_sum(q) - 1.0));
        std::vector<int> last_rect(q.size());
        for (std::size_t k = 0; k < q.size(); ++k) {
            std::uint64_t prod = 1;
            int r = rect;
            for (int j : q.nodes[k].itinerary) {
                prod *= static_cast<std::uint64_t>(model.preimage_count(r));
                r = model.preimage_rect(r, j);
            }
            last_rect[k] = r;
            if (q.denominators[k] != prod || q.weights[k] != 1.0 / static_cast<double>(prod))
                ++out.bad_weights;
        }
        if (n >= 1) {
            // children of parent i form the next contiguous block
            std::size_t k = 0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                std::size_t first = k;
                while (k < q.size() && std::equal(q.nodes[k].itinerary.begin(), q.nodes[k].itinerary.end() - 1,
                                                  prev.nodes[i].itinerary.begin()))
                    ++k;
                const std::uint64_t p = k - first;
                if (p != static_cast<std::uint64_t>(model.preimage_count(prev_last[i])))
                    ++out.bad_refinement;
                for (std::size_t c = first; c < k; ++c)
                    if (q.denominators[c] != prev.denominators[i] * p)
                        ++out.bad_refinement;
            }
            if (k != q.size())
                ++out.bad_refinement;
            bool dyadic = true;
            for (int r = 0; r < model.rect_count(); ++r)
                dyadic = dyadic && std::has_single_bit(static_cast<unsigned>(model.preimage_count(r)));
            if (dyadic) {
                std::vector<double> agg = aggregate_to_parent(q);
                for (std::size_t i = 0; i < agg.size(); ++i)
                    if (agg[i] != prev.weights[i])
                        ++out.bad_refinement;
            }
        }
        prev = std::move(q);
        prev_last = std::move(last_rect);
    }
}

Outcome leaf_measure_exactness()
{
    WeightCheck w;
    SkewProduct doubling = make_doubling_solenoid(0.1);
    SkewProduct mp = make_mp_solenoid(0.5, 0.25);
    MarkovSystem ms = make_markov_system(markov_example(), 0.1);
    check_weights(doubling, 0.3, 0, 14, w);
    check_weights(ms, 0.2, 0, 14, w);
    check_weights(ms, ms.rect_interval(1).lo + 0.05, 1, 14, w);

    double worst_cov = 0.0;
    SplitMix64 rng(2024);
    for (int k = 0; k < 100; ++k) {
        const LeafModel& model = k % 2 ? static_cast<const LeafModel&>(mp) : doubling;
        Observable phi = random_bump(rng);
        worst_cov = std::max(worst_cov, change_of_variables_check(model, phi, rng.uniform(), rng.below(2), 8));
    }
    Outcome o;
    o.pass = w.worst_sum <= 1e-15 && w.bad_weights == 0 && w.bad_refinement == 0 && worst_cov < 1e-10;
    o.detail = "max|sum-1|=" + num(w.worst_sum) + " bad_weights=" + std::to_string(w.bad_weights) +
               " refinement_mismatches=" + std::to_string(w.bad_refinement) + " max_cov_residual=" + num(worst_cov);
    return o;
}

Outcome projective_metric()
{
    SplitMix64 rng(99);
    int sym = 0, tri = 0, scale = 0, closed = 0, grid = 0;
    double worst_grid = 0.0;
    auto member = [&](const ConeSpec& s) {
        for (;;) {
            Eigen::VectorXd x(s.nodes());
            for (int i = 0; i < x.size(); ++i)
                x(i) = 1.0 + 0.4 * rng.uniform();
            if (in_cone(x, s))
                return x;
        }
    };
    for (int k = 0; k < 1000; ++k) {
        int n = 2 + rng.below(5);
        Eigen::MatrixXd pts(n, 2);
        for (int i = 0; i < n; ++i)
            pts.row(i) << rng.uniform(), rng.uniform();
        Eigen::MatrixXd d(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d(i, j) = (pts.row(i) - pts.row(j)).norm();
        ConeSpec h = ConeSpec::hoelder(1.0 + 4.0 * rng.uniform(), 0.2 + 0.8 * rng.uniform(), d);
        Eigen::VectorXd u = member(h), v = member(h), w = member(h);

        double vw = theta(v, w, h), wv = theta(w, v, h);
        if (std::abs(vw - wv) > 1e-9 * std::max(1.0, vw))
            ++sym;
        if (theta(u, w, h) > theta(u, v, h) + vw + 1e-9)
            ++tri;
        if (theta(v, (0.1 + 10.0 * rng.uniform()) * v, h) != 0.0)
            ++scale;

        double a = detail::alpha_bisect(v, w, h);
        double g = detail::alpha_grid_scan(v, w, h, 200, 3);
        worst_grid = std::max(worst_grid, std::abs(a - g));
        if (std::abs(a - g) > 1e-6)
            ++grid;

        ConeSpec pos = ConeSpec::positivity(n);
        double cf = std::log((w.array() / v.array()).maxCoeff() * (v.array() / w.array()).maxCoeff());
        double bis = std::log(detail::beta_bisect(v, w, pos) / detail::alpha_bisect(v, w, pos));
        if (std::abs(theta(v, w, pos) - cf) > 1e-8 || std::abs(bis - cf) > 1e-8)
            ++closed;
    }
    Outcome o;
    o.pass = sym + tri + scale + closed + grid == 0;
    o.detail = "1000 instances; violations symmetry=" + std::to_string(sym) + " triangle=" + std::to_string(tri) +
               " scaling=" + std::to_string(scale) + " closed_form=" + std::to_string(closed) +
               " grid=" + std::to_string(grid) + " (max |bisect-grid|=" + num(worst_grid) + ")";
    return o;
}

Outcome density_contraction()
{
    SkewProduct s = make_doubling_solenoid(0.1);
    ConeInputs in;
    in.lambda_s = 0.1;
    ConeParams p = choose_cone_params(in);
    int bad = 0;
    double worst = 0.0;
    for (const auto& t : density_contraction_trials(s, p, 6, 100, 7)) {
        if (!t.pushed_in_cone || t.theta_j > p.Lambda1 * t.theta * (1.0 + 1e-9) + 1e-12)
            ++bad;
        if (t.theta > 0.0)
            worst = std::max(worst, t.theta_j / t.theta);
    }
    return {bad == 0, "100 pairs, violations=" + std::to_string(bad) + " max theta_j/theta=" + num(worst) +
                          " Lambda1=" + num(p.Lambda1)};
}

Outcome cone_invariance()
{
    CommandResult r = run_config("cone-check", "[cone_check]\nelements = 50\n", "c4");
    const auto& s = r.summary;
    if (s.contains("infeasible"))
        return {false, "infeasible: " + s["infeasible"].get<std::string>()};
    const auto& d = s["diameter"];
    Outcome o;
    o.pass = r.pass;
    o.detail = "50 elements, failures=" + std::to_string(s["invariance"]["failures"].get<int>()) +
               " Theta+max=" + num(d["theta_plus_max"].get<double>()) +
               " bound=" + num(d["theta_plus_bound"].get<double>()) + " Delta_bound=" +
               num(d["delta_bound"].get<double>()) + " tau=1-exp(-Delta)=" + num(d["tau_bound"].get<double>(), 17);
    return o;
}

Outcome entropy()
{
    CommandResult r = run_config("entropy", "", "c5");
    const auto& s = r.summary;
    double h = s["h_expected"].get<double>();
    return {r.pass, "h_sep/log2=" + num(s["h_separated"].get<double>() / h) +
                        " h_bk/log2=" + num(s["h_brin_katok"].get<double>() / h) +
                        " disagreement=" + num(s["disagreement"].get<double>())};
}

Outcome decay()
{
    CommandResult f = run_config("decay", "[decay]\noracle = fourier10\ntau_min = 0.45\ntau_max = 0.55\n", "c6a");
    CommandResult z = run_config("decay", "[decay]\nobservable = cos1\noracle = zero\n", "c6b");
    const auto& fit = f.summary["fit"];
    return {f.pass && z.pass, "fourier10 oracle_ok=" + std::string(f.summary["oracle_ok"].get<bool>() ? "1" : "0") +
                                  " tau=" + num(fit["tau_emp"].get<double>()) + " r2=" + num(fit["r2"].get<double>()) +
                                  "; cos1 zero-oracle " + (z.pass ? "ok" : "failed")};
}

Outcome clt()
{
    CommandResult c = run_config("clt", "[clt]\nexpected_sigma2 = 0.5\n", "c7a");
    CommandResult k = run_config("clt", "[clt]\nobservable = coboundary\nexpected_sigma2 = 0\n", "c7b");
    bool degenerate = k.summary["degenerate"].get<bool>();
    const auto& s = c.summary;
    return {c.pass && k.pass && degenerate,
            "sigma2_gk=" + num(s["sigma2_gk"].get<double>()) + " sigma2_emp=" + num(s["sigma2_emp"].get<double>()) +
                " ks_p=" + num(s.value("ks_pvalue", 0.0)) + "; coboundary raw=" +
                num(k.summary["sigma2_gk_raw"].get<double>()) + " se=" +
                num(k.summary["sigma2_gk_stderr"].get<double>()) + " degenerate=" + (degenerate ? "1" : "0")};
}

Outcome stability()
{
    CommandResult r = run_config("stability", "", "c8");
    std::string detail;
    for (const auto& [name, o] : r.summary["observables"].items())
        detail += name + ": monotone=" + (o["profile_monotone"].get<bool>() ? "1" : "0") +
                  " within3se=" + (o["small_t_within_3se"].get<bool>() ? "1" : "0") + " ";
    return {r.pass, detail};
}

Outcome second_setting()
{
    MarkovSystem ms = make_markov_system(markov_example(), 0.1);
    WeightCheck w;
    check_weights(ms, 0.15, 0, 10, w);

    ConeParams p = choose_cone_params(dfa_cone_inputs(ms));
    Potential zero = Potential::constant_potential();
    SplitMix64 rng(5);
    double worst_identity = 0.0;
    for (int k = 0; k < 20; ++k) {
        int rect = k % 2;
        Interval I = ms.rect_interval(rect);
        LeafQuadrature q = build_variable_quadrature(ms, I.lo + rng.uniform() * (I.hi - I.lo), rect, 6);
        LeafDensity rho = random_cone_density(q, density_cone(q, p.kappa, p.alpha), rng, 0.9);
        worst_identity = std::max(worst_identity, transfer_leaf_integral_dfa(ms, random_bump(rng), rho, q, zero).residual());
    }
    SamplingPlan plan;
    DfaDiameter d = sampled_diameter_dfa(ms, p, 50, plan);

    CommandResult oracle = run_config("dfa-decay", "[system]\nkind = dfa\n[dfa_decay]\nobservable = rect0\n", "c9a");
    CommandResult fit = run_config("dfa-decay", "[system]\nkind = dfa\n[dfa_decay]\nobservable = base\n", "c9b");
    const auto& f = fit.summary["fit"];
    Outcome o;
    o.pass = w.worst_sum <= 1e-15 && w.bad_weights == 0 && w.bad_refinement == 0 && worst_identity < 1e-12 &&
             d.theta_plus_max <= d.bound && oracle.pass && fit.pass;
    o.detail = "bad_weights=" + std::to_string(w.bad_weights) + " identity_residual=" + num(worst_identity) +
               " Theta+max=" + num(d.theta_plus_max) + " <= " + num(d.bound) + " chain_oracle=" +
               (oracle.pass ? "ok" : "failed") + " tau=" + num(f["tau_emp"].get<double>()) +
               " r2=" + num(f["r2"].get<double>());
    return o;
}

Outcome mp_base()
{
    QuotientMeasure q = quotient_mem(manneville_pomeau_map(0.5));
    CommandResult r = run_config(
        "decay", "[system]\nkind = mp\n[decay]\nobservable = mp_test\nsamples = 400000\nr2_min = 0.85\n", "c10");
    const auto& f = r.summary["fit"];
    bool ok = q.residual < 1e-8 && r.pass && f["tau_emp"].get<double>() < 1.0;
    return {ok, "ulam residual=" + num(q.residual) + " r=" + num(q.r, 7) + " tau=" + num(f["tau_emp"].get<double>()) +
                    " r2=" + num(f["r2"].get<double>()) + " lags_used=" + std::to_string(f["used_lags"].size())};
}

} // namespace

int main()
{
    set_thread_count(std::max(1u, std::thread::hardware_concurrency()));
    std::filesystem::create_directories("acceptance_out");
    const std::vector<Criterion> criteria = {
        {1, "leaf-measure exactness", 10, leaf_measure_exactness},
        {2, "projective metric", 30, projective_metric},
        {3, "density-cone contraction", 60, density_contraction},
        {4, "cone invariance and diameter", 300, cone_invariance},
        {5, "entropy", 120, entropy},
        {6, "decay of correlations", 300, decay},
        {7, "central limit theorem", 300, clt},
        {8, "statistical stability", 300, stability},
        {9, "second setting", 300, second_setting},
        {10, "Manneville-Pomeau base", 0, mp_base},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = c.budget_s == 0 || secs < c.budget_s;
        bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("criterion %d (%s): %s  %s [%.1f s%s]\n", c.id, c.name.c_str(), pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, in_time ? "" : ", over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
