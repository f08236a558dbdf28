#include "sectoral/sce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "sectoral/errors.hpp"

namespace sectoral::sce {

bool Bounds::contains(std::span<const double> x) const noexcept
{
    if (x.size() != dims())
        return false;
    for (std::size_t d = 0; d < x.size(); ++d)
        if (!(x[d] > lower[d] && x[d] < upper[d]))
            return false;
    return true;
}

void Bounds::validate() const
{
    if (lower.empty() || lower.size() != upper.size())
        throw InvalidConfigError("bounds: lower and upper must be non-empty and of equal size");
    for (std::size_t d = 0; d < lower.size(); ++d)
        if (!(lower[d] < upper[d]) || !std::isfinite(lower[d]) || !std::isfinite(upper[d]))
            throw InvalidConfigError("bounds: dimension " + std::to_string(d) + " needs finite lower < upper");
}

OptimizerConfig OptimizerConfig::resolved(std::size_t n) const
{
    OptimizerConfig c = *this;
    if (c.points_per_complex == 0)
        c.points_per_complex = 2 * n + 1;
    if (c.subcomplex_size == 0)
        c.subcomplex_size = n + 1;
    if (c.evolutions_per_complex == 0)
        c.evolutions_per_complex = c.points_per_complex;
    return c;
}

void OptimizerConfig::validate() const
{
    if (n_complexes < 1)
        throw InvalidConfigError("optimizer: n_complexes must be at least 1");
    if (subcomplex_size < 2)
        throw InvalidConfigError("optimizer: subcomplex_size must be at least 2");
    if (points_per_complex < subcomplex_size)
        throw InvalidConfigError("optimizer: points_per_complex must be >= subcomplex_size");
    if (evolutions_per_complex < 1)
        throw InvalidConfigError("optimizer: evolutions_per_complex must be at least 1");
    if (max_evaluations < n_complexes * points_per_complex)
        throw InvalidConfigError("optimizer: max_evaluations is smaller than the initial population");
    if (!(convergence_tol >= 0.0) || convergence_window < 1)
        throw InvalidConfigError("optimizer: convergence settings must be non-negative with a window >= 1");
}

namespace {

struct Point {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
};

bool better(const Point& l, const Point& r) { return l.f < r.f; }

class Search {
public:
    Search(const Objective& objective, const Bounds& bounds, const OptimizerConfig& cfg)
        : objective_(objective), bounds_(bounds), cfg_(cfg), rng_(cfg.seed)
    {
    }

    bool budget_left() const { return evaluations_ < cfg_.max_evaluations; }
    std::size_t evaluations() const { return evaluations_; }

    double evaluate(std::span<const double> x)
    {
        ++evaluations_;
        const double f = objective_(x);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    }

    std::vector<double> uniform_point()
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> x(bounds_.dims());
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double lo = bounds_.lower[d];
            const double hi = bounds_.upper[d];
            do {
                x[d] = lo + unit(rng_) * (hi - lo);
            } while (!(x[d] > lo && x[d] < hi));
        }
        return x;
    }

    // Triangular distribution over ranks 0..m-1, rank 0 most likely.
    std::vector<std::size_t> pick_subcomplex(std::size_t m, std::size_t q)
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double md = static_cast<double>(m);
        std::vector<std::size_t> picked;
        picked.reserve(q);
        while (picked.size() < q) {
            const double u = unit(rng_);
            auto rank = static_cast<std::size_t>(
                std::floor(md + 0.5 - std::sqrt((md + 0.5) * (md + 0.5) - md * (md + 1.0) * u)));
            rank = std::min(rank, m - 1);
            if (std::find(picked.begin(), picked.end(), rank) == picked.end())
                picked.push_back(rank);
        }
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    // One competitive evolution step on a sorted complex. Returns false once the budget is spent.
    bool evolve(std::vector<Point>& complex)
    {
        const auto sub = pick_subcomplex(complex.size(), cfg_.subcomplex_size);
        Point& worst = complex[sub.back()];
        const std::size_t n = bounds_.dims();

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k + 1 < sub.size(); ++k)
            for (std::size_t d = 0; d < n; ++d)
                centroid[d] += complex[sub[k]].x[d];
        for (auto& c : centroid)
            c /= static_cast<double>(sub.size() - 1);

        std::vector<double> trial(n);
        for (std::size_t d = 0; d < n; ++d)
            trial[d] = 2.0 * centroid[d] - worst.x[d];
        if (bounds_.contains(trial)) {
            if (!budget_left())
                return false;
            const double f = evaluate(trial);
            if (f < worst.f) {
                worst = {std::move(trial), f};
                return true;
            }
        }

        for (std::size_t d = 0; d < n; ++d)
            trial[d] = 0.5 * (centroid[d] + worst.x[d]);
        if (bounds_.contains(trial)) {
            if (!budget_left())
                return false;
            const double f = evaluate(trial);
            if (f < worst.f) {
                worst = {std::move(trial), f};
                return true;
            }
        }

        if (!budget_left())
            return false;
        auto fresh = uniform_point();
        const double f = evaluate(fresh);
        worst = {std::move(fresh), f};
        return true;
    }

private:
    const Objective& objective_;
    const Bounds& bounds_;
    const OptimizerConfig& cfg_;
    std::mt19937_64 rng_;
    std::size_t evaluations_ = 0;
};

bool stalled(const std::vector<double>& history, const OptimizerConfig& cfg)
{
    if (history.size() <= cfg.convergence_window)
        return false;
    const double old = history[history.size() - 1 - cfg.convergence_window];
    const double now = history.back();
    if (!std::isfinite(old))
        return false;
    return old - now <= cfg.convergence_tol * std::abs(old);
}

} // namespace

OptResult minimize(const Objective& objective, const Bounds& bounds, const OptimizerConfig& config,
                   std::span<const std::vector<double>> initial_points)
{
    bounds.validate();
    const OptimizerConfig cfg = config.resolved(bounds.dims());
    cfg.validate();

    const std::size_t p = cfg.n_complexes;
    const std::size_t m = cfg.points_per_complex;
    if (initial_points.size() > p * m)
        throw InvalidConfigError("optimizer: more initial points than population slots");
    for (const auto& x : initial_points)
        if (!bounds.contains(x))
            throw InvalidConfigError("optimizer: initial point outside the open box");

    Search search(objective, bounds, cfg);
    std::vector<Point> population(p * m);
    for (std::size_t k = 0; k < population.size(); ++k) {
        auto x = k < initial_points.size() ? initial_points[k] : search.uniform_point();
        const double f = search.evaluate(x);
        population[k] = {std::move(x), f};
    }
    std::stable_sort(population.begin(), population.end(), better);

    OptResult result;
    result.history.push_back(population.front().f);

    std::vector<std::vector<Point>> complexes(p, std::vector<Point>(m));
    bool budget_spent = !search.budget_left();
    while (!budget_spent) {
        for (std::size_t c = 0; c < p; ++c)
            for (std::size_t j = 0; j < m; ++j)
                complexes[c][j] = std::move(population[c + p * j]);

        for (auto& complex : complexes) {
            for (std::size_t e = 0; e < cfg.evolutions_per_complex && !budget_spent; ++e) {
                budget_spent = !search.evolve(complex);
                std::stable_sort(complex.begin(), complex.end(), better);
            }
        }

        for (std::size_t c = 0; c < p; ++c)
            for (std::size_t j = 0; j < m; ++j)
                population[c + p * j] = std::move(complexes[c][j]);
        std::stable_sort(population.begin(), population.end(), better);
        result.history.push_back(population.front().f);

        if (stalled(result.history, cfg)) {
            result.converged = true;
            break;
        }
        budget_spent = budget_spent || !search.budget_left();
    }

    result.best_point = population.front().x;
    result.best_value = population.front().f;
    result.evaluations_used = search.evaluations();
    return result;
}

} // namespace sectoral::sce
