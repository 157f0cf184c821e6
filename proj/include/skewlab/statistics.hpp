#pragma once

#include "skewlab/maxent.hpp"
#include "skewlab/systems.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace skewlab {

inline constexpr int kJackknifeGroups = 64;

struct CorrelationEstimate {
    int lag = 0;
    double value = 0.0;
    double se = 0.0; // jackknife standard error
};

struct Correlations {
    std::vector<CorrelationEstimate> lags;
    std::size_t samples = 0;
};

// C_n = int (phi o f^n) psi dmu - int phi dmu int psi dmu, forward composition
Correlations correlations(const OrbitSampler& sampler, const Observable& phi, const Observable& psi,
                          const std::vector<int>& lags, std::size_t n_samples, int groups = kJackknifeGroups);
CorrelationEstimate correlation(const OrbitSampler& sampler, const Observable& phi, const Observable& psi, int lag,
                                std::size_t n_samples);
// Same quantity through invariance: int phi (psi o f^{-n}) dmu, evaluated on
// backward orbits of the sampled points.
Correlations correlations_duality(const OrbitSampler& sampler, const Observable& phi, const Observable& psi,
                                  const std::vector<int>& lags, std::size_t n_samples, int groups = kJackknifeGroups);

struct DecayReport {
    std::vector<CorrelationEstimate> lags;
    std::vector<int> used;     // lags in the fit
    std::vector<int> excluded; // lags below the noise floor
    double tau = 0.0;
    double K = 0.0;
    double r2 = 0.0;
    bool conclusive = false;
};

DecayReport fit_decay(const Correlations& c, double noise_factor = 3.0);

struct GreenKuboReport {
    double sigma2 = 0.0;     // truncated sum, clamped at 0
    double sigma2_raw = 0.0; // before clamping
    double se = 0.0;
    double mean = 0.0;
    int J = 0;
    bool auto_J = false;
    std::vector<CorrelationEstimate> autocov; // gamma_0 .. gamma_max
    DecayReport envelope;
    double tail_bound = 0.0; // K tau^{J+1} / (1 - tau) when the envelope fit is conclusive
    bool degenerate = false;
    std::size_t samples = 0;
    int orbit_length = 0;
};

// Autocovariances from time averages along N sampled orbits. J = 0 selects the
// truncation automatically.
GreenKuboReport green_kubo_sigma(const OrbitSampler& sampler, const Observable& phi, int J, std::size_t n_samples,
                                 int orbit_length = 256, int max_lag = 20);

struct CltReport {
    GreenKuboReport green_kubo;
    double sigma2_emp = 0.0;
    double ks_statistic = 0.0;
    double ks_pvalue = 0.0;
    bool ks_run = false;
    bool degenerate = false;
    int n = 0;
    std::size_t samples = 0;
};

// S_n / sqrt(n) of the centered observable along N independent orbits,
// compared with Normal(0, sigma2_gk) by a Kolmogorov-Smirnov test.
CltReport clt_test(const OrbitSampler& sampler, const Observable& phi, int n, std::size_t n_samples, int max_lag = 20);

struct StabilityRow {
    double t = 0.0;
    double integral = 0.0;
    double se = 0.0;
    double diff = 0.0; // int phi dmu_t - int phi dmu_0 from paired samples
    double diff_se = 0.0;
    double profile = 0.0;
    double base_integral = 0.0; // int phi dnu_t on the Ulam grid, when phi is base-only
    bool has_base = false;
    bool ok = true;
    std::string error;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double k1 = 0.0;
    double k2 = 0.0;
    bool profile_monotone = false;
    bool small_t_within = false; // three smallest t > 0 within 3 stderr of the profile
};

using FamilyBuilder = std::function<SkewProduct(double)>;

// Common random numbers: every t uses the same seed, so sample i of each row
// shares its symbolic code and differences have small variance.
StabilityReport stability_sweep(const FamilyBuilder& family, const Observable& phi, const std::vector<double>& t_grid,
                                std::size_t n_samples, int depth, std::uint64_t seed,
                                const std::function<double(double)>& base_phi = {}, int quotient_grid = 1 << 14);

} // namespace skewlab
