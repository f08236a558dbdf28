#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sectoral/model.hpp"
#include "sectoral/sce.hpp"

namespace sectoral {

struct Observation {
    int year = 0;
    double g = 0.0;  ///< natural log of GDP per capita
    SectorShares shares;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Cleaned observations of one country, years strictly increasing.
struct CountrySeries {
    std::string code;
    std::string name;
    std::vector<Observation> observations;
};

/// Search box for (k2, alpha, g0); k1 is fixed by the log-linear first step.
struct FitBounds {
    double k2_lower = -5.0, k2_upper = 5.0;
    double alpha_lower = 0.0, alpha_upper = 5.0;
    double g0_lower = 1.0, g0_upper = 15.0;

    sce::Bounds as_box() const;
};

struct FitConfig {
    double threshold = 0.1;  ///< accept when mse_sum < threshold
    std::size_t min_years = 4;
    FitBounds bounds;
    sce::OptimizerConfig optimizer;  ///< optimizer.seed is the global seed
    std::size_t jobs = 1;            ///< worker threads for fit_all
};

struct FitResult {
    std::string code;
    ModelParams params;
    double mse_a = 0.0;
    double mse_i = 0.0;
    double mse_s = 0.0;
    double mse_sum = 0.0;
    bool accepted = false;
    std::optional<int> transfer_type;  ///< empty when the fit is unclassifiable
    std::optional<double> g_max_i;
    std::size_t n_obs = 0;
    std::size_t evaluations_used = 0;
};

struct FitFailure {
    std::string code;
    std::string reason;
};

struct FitSummary {
    std::size_t countries = 0;
    std::size_t eligible = 0;
    std::size_t fitted = 0;
    std::size_t accepted = 0;
    std::size_t unclassified = 0;           ///< accepted fits on a type boundary
    std::map<int, std::size_t> type_counts; ///< over accepted fits
};

struct FitReport {
    std::vector<FitResult> results;    ///< ordered by country code
    std::vector<FitFailure> failures;  ///< ordered by country code
    FitSummary summary;
};

struct Step1Estimate {
    double k1 = 0.0;
    double g0_init = 0.0;
};

/// Log-linear regression ln a = -k1 g + k1 g0 over observations with a > 0.
/// Throws InsufficientDataError with fewer than two such observations and
/// DegenerateError when k1 vanishes.
Step1Estimate step1_fit(const CountrySeries& series);

struct SectorErrors {
    double mse_a = 0.0;
    double mse_i = 0.0;
    double mse_s = 0.0;
    double sum() const noexcept { return mse_a + mse_i + mse_s; }
};

/// Per-sector mean squared error between model and observations. Non-finite
/// model values propagate as non-finite errors.
SectorErrors sector_errors(const CountrySeries& series, const ModelParams& params);

/// Sum of the per-sector MSEs, or +infinity when any model value is non-finite.
double fit_objective(const CountrySeries& series, const ModelParams& params);

struct Step2Result {
    ModelParams params;
    std::size_t evaluations_used = 0;
    bool converged = false;
};

/// Optimizes (k2, alpha, g0) with k1 held fixed. One member of the initial
/// population is (0.5, 0.5, g0_init), clamped 1e-6 inside the box.
Step2Result step2_fit(const CountrySeries& series, double k1, double g0_init, const FitBounds& bounds,
                      const sce::OptimizerConfig& optimizer);

/// Optimizer seed for one country: the global seed mixed with a stable hash of the code.
std::uint64_t country_seed(std::uint64_t global_seed, const std::string& code) noexcept;

/// Full two-step fit with acceptance, classification and industrial maximum.
/// Throws IneligibleSeriesError below config.min_years observations.
FitResult fit_country(const CountrySeries& series, const FitConfig& config);

/// Fits every series independently (config.jobs threads); failures are recorded, not thrown.
FitReport fit_all(std::span<const CountrySeries> dataset, const FitConfig& config);

/// Synthetic series from the closed forms. Gaussian noise of std noise_sigma
/// perturbs a and i, s takes the remainder, then every share is clamped to [0, 1]
/// and the triple renormalized. Years count up from first_year.
CountrySeries synth_generate(const ModelParams& params, std::span<const double> g_grid, double noise_sigma,
                             std::uint64_t seed, std::string code = "SYN", int first_year = 1980);

} // namespace sectoral
