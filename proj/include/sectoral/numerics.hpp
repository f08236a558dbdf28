#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sectoral/model.hpp"

namespace sectoral {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_sum = 0.0;  ///< sum of squared residuals
};

/// Ordinary least squares y = slope * x + intercept.
/// Throws DegenerateError for fewer than two points or constant x.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Pearson product-moment correlation. Throws DegenerateError on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct Trajectory {
    std::vector<double> g_values;
    std::vector<SectorShares> shares;
};

/// Classical fourth-order Runge-Kutta on the transfer ODE from g_start to g_end.
/// The last step is shortened to land exactly on g_end. A zero-length interval
/// yields the start point alone. Throws InvalidConfigError for step <= 0 or g_end < g_start.
Trajectory rk4_integrate(const ModelParams& params, double g_start, const SectorShares& start,
                         double g_end, double step);

/// Bisection root of f on [lo, hi]; stops once the bracket is narrower than tol.
/// Throws NoBracketError unless f(lo) and f(hi) have opposite signs.
double find_crossing(const std::function<double(double)>& f, double lo, double hi, double tol);

struct QuartileGroup {
    std::size_t size = 0;
    double key_min = 0.0;
    double key_max = 0.0;
    double mean_u = 0.0;
    double std_u = 0.0;
    double mean_v = 0.0;
    double std_v = 0.0;
    std::vector<std::size_t> members;  ///< indices into the input, sorted by key
};

struct QuartileStats {
    std::array<QuartileGroup, 4> groups;
};

/// Splits the sample into four key-ordered groups whose sizes differ by at most one
/// (earlier groups take the remainder), then reports population mean and standard
/// deviation of u and v per group. Ties in key keep input order.
QuartileStats quartile_stats(std::span<const double> key, std::span<const std::pair<double, double>> paired);

struct Histogram {
    std::vector<std::size_t> counts;  ///< one per bin [edge_j, edge_{j+1})
    std::size_t underflow = 0;
    std::size_t overflow = 0;
};

/// Half-open binning; values at or past the last edge count as overflow.
Histogram histogram(std::span<const double> values, std::span<const double> edges);

} // namespace sectoral
