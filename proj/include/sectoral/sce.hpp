#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sectoral::sce {

/// Open box lower < x < upper in every dimension.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dims() const noexcept { return lower.size(); }
    bool contains(std::span<const double> x) const noexcept;
    /// Throws InvalidConfigError unless lower < upper element-wise with matching sizes.
    void validate() const;
};

struct OptimizerConfig {
    std::size_t n_complexes = 4;
    std::size_t points_per_complex = 0;      ///< 0 = 2n+1
    std::size_t subcomplex_size = 0;         ///< 0 = n+1
    std::size_t evolutions_per_complex = 0;  ///< 0 = points per complex
    std::size_t max_evaluations = 50'000;
    double convergence_tol = 1e-8;           ///< relative improvement of the best value
    std::size_t convergence_window = 10;     ///< shuffles
    std::uint64_t seed = 42;

    /// Copy with zero-valued geometry filled in for n dimensions.
    OptimizerConfig resolved(std::size_t n) const;
    /// Throws InvalidConfigError on violated geometry.
    void validate() const;
};

struct OptResult {
    std::vector<double> best_point;
    double best_value = 0.0;
    std::size_t evaluations_used = 0;
    bool converged = false;
    /// Best value after the initial sample and after every shuffle.
    std::vector<double> history;
};

/// Returns a finite value or +infinity for infeasible points.
using Objective = std::function<double(std::span<const double>)>;

/// Shuffled Complex Evolution (SCE-UA) minimization inside an open box.
///
/// The population is sampled uniformly, except that any `initial_points` replace
/// the first samples. Points are sorted and dealt by stride into complexes; each
/// complex evolves by triangular-weighted subcomplex selection followed by
/// reflection of the worst point, contraction if the reflection leaves the box or
/// does not improve, and uniform resampling if the contraction also fails. The
/// complexes are then merged and reshuffled until the best value stalls for
/// `convergence_window` shuffles or the evaluation budget runs out.
///
/// Every evaluated point lies strictly inside the box. Deterministic for a given seed.
OptResult minimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config,
                   std::span<const std::vector<double>> initial_points = {});

} // namespace sectoral::sce
