#pragma once

#include "skewlab/systems.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace skewlab {

// Base maximal-entropy measure nu, stored as cell masses on a uniform grid.
struct QuotientMeasure {
    enum class Representation { Exact, Ulam };

    Representation representation = Representation::Exact;
    int grid = 0;
    Eigen::VectorXd mass; // per cell, sums to 1
    double r = 0.0;       // eigenvalue of the unnormalized dual operator
    double residual = 0.0;
    int iterations = 0;

    double cdf(double x) const;
    double inverse_cdf(double u) const;
    // cell-midpoint rule
    double integrate(const std::function<double(double)>& f) const;
};

QuotientMeasure quotient_mem(const BaseMap& base, int grid = 1 << 14, int max_iterations = 20000, double tol = 1e-8);

// nu([0,x]) for the coded measure: the base-p number formed by the itinerary
// digits of x, computed with nested inverse branches. Independent of Ulam.
double coding_cdf(const BaseMap& base, double x, int digits);

// Draws orbits of mu = mu_gamma x nu. The forward code is a random admissible
// symbol sequence (uniform splitting, i.e. mu-hat), realized through inverse
// branches; the backward itinerary has uniform symbols over the preimage
// leaves (the mu_gamma cell weights). Streams are indexed by sample number.
class OrbitSampler {
public:
    OrbitSampler(const LeafModel& model, int depth, std::uint64_t seed, int code_length = 60);

    // Base points from the inverse CDF of a quotient measure, forward orbit by
    // iterating g. Only for skew products.
    void use_inverse_cdf(const SkewProduct& system, const QuotientMeasure& quotient);

    // out[back + j] = f^j(x), j = -back .. forward
    void orbit(std::uint64_t index, int forward, int back, std::vector<AttractorPoint>& out) const;
    ItineraryPoint point(std::uint64_t index) const;

    const LeafModel& model() const { return *model_; }
    int depth() const { return depth_; }
    std::uint64_t seed() const { return seed_; }

private:
    const LeafModel* model_;
    int depth_;
    std::uint64_t seed_;
    int code_length_;
    const SkewProduct* system_ = nullptr;
    const QuotientMeasure* quotient_ = nullptr;
};

struct EmpiricalMeasure {
    std::vector<ItineraryPoint> samples;
    std::uint64_t seed = 0;
    int depth = 0;

    void write_csv(std::ostream& os) const;
};

EmpiricalMeasure sample_mu(const LeafModel& model, std::size_t n, int depth, std::uint64_t seed);
// Exact quotient: symbolic sampling. Ulam quotient: base drawn by inverse CDF.
EmpiricalMeasure sample_mu(const SkewProduct& system, const QuotientMeasure& quotient, std::size_t n, int depth,
                           std::uint64_t seed);

// N orbits of a fixed length stored contiguously
struct OrbitBank {
    int length = 0;
    std::vector<AttractorPoint> points;
    std::size_t count() const { return length ? points.size() / length : 0; }
    const AttractorPoint* orbit(std::size_t i) const { return points.data() + i * length; }
};

OrbitBank collect_orbits(const OrbitSampler& sampler, std::size_t n, int length);

struct EntropyCell {
    int n = 0;
    double eps = 0.0;
    double value = 0.0;      // cardinality, or mean ball mass
    double h = 0.0;          // (1/n) log(cardinality) or mean of -(1/n) log(mass)
    std::size_t excluded = 0; // Brin-Katok references with zero mass
    bool saturated = false;   // separated set uses more than half of the sample
};

struct EntropyReport {
    std::vector<EntropyCell> cells;
    std::vector<double> eps_grid;
    std::vector<double> slopes; // per eps, least-squares slope over the n range
    double h_est = 0.0;         // mean of the slopes
    bool budget_exhausted = false;
};

std::size_t separated_set_size(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::uint64_t seed,
                               int restarts = 5);
double entropy_separated(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::uint64_t seed);
EntropyReport entropy_separated_report(const LeafModel& model, const OrbitBank& bank, int n_min, int n_max,
                                       const std::vector<double>& eps_grid, std::uint64_t seed);

// mean over reference orbits of -(1/n) log of the empirical Bowen-ball mass
double entropy_brin_katok(const LeafModel& model, const OrbitBank& bank, int n, double eps, std::size_t references,
                          std::size_t* excluded = nullptr);
EntropyReport entropy_brin_katok_report(const LeafModel& model, const OrbitBank& bank, int n_min, int n_max,
                                        const std::vector<double>& eps_grid, std::size_t references);

} // namespace skewlab
