#include "sectoral/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "sectoral/errors.hpp"
#include "sectoral/numerics.hpp"

namespace sectoral {

sce::Bounds FitBounds::as_box() const
{
    return {{k2_lower, alpha_lower, g0_lower}, {k2_upper, alpha_upper, g0_upper}};
}

Step1Estimate step1_fit(const CountrySeries& series)
{
    std::vector<double> g;
    std::vector<double> log_a;
    for (const auto& obs : series.observations) {
        if (obs.shares.a > 0.0) {
            g.push_back(obs.g);
            log_a.push_back(std::log(obs.shares.a));
        }
    }
    if (g.size() < 2)
        throw InsufficientDataError(series.code + ": fewer than two observations with a > 0");

    LinearFit line;
    try {
        line = ols_fit(g, log_a);
    } catch (const DegenerateError&) {
        throw DegenerateError(series.code + ": g is constant, k1 cannot be identified");
    }
    const double k1 = -line.slope;
    if (!(std::abs(k1) >= kDegeneracyEps))
        throw DegenerateError(series.code + ": k1 estimate is zero, g0 undefined");
    return {k1, line.intercept / k1};
}

SectorErrors sector_errors(const CountrySeries& series, const ModelParams& params)
{
    SectorErrors e;
    if (series.observations.empty())
        return e;
    for (const auto& obs : series.observations) {
        const SectorShares m = shares_at(params, obs.g);
        e.mse_a += (m.a - obs.shares.a) * (m.a - obs.shares.a);
        e.mse_i += (m.i - obs.shares.i) * (m.i - obs.shares.i);
        e.mse_s += (m.s - obs.shares.s) * (m.s - obs.shares.s);
    }
    const auto n = static_cast<double>(series.observations.size());
    e.mse_a /= n;
    e.mse_i /= n;
    e.mse_s /= n;
    return e;
}

double fit_objective(const CountrySeries& series, const ModelParams& params)
{
    const double total = sector_errors(series, params).sum();
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
}

Step2Result step2_fit(const CountrySeries& series, double k1, double g0_init, const FitBounds& bounds,
                      const sce::OptimizerConfig& optimizer)
{
    const sce::Bounds box = bounds.as_box();
    box.validate();

    constexpr double inset = 1e-6;
    auto clamp_inside = [&](double v, std::size_t d) {
        const double lo = box.lower[d];
        const double hi = box.upper[d];
        if (hi - lo <= 2.0 * inset)
            return lo + 0.5 * (hi - lo);
        if (!std::isfinite(v))
            v = lo + 0.5 * (hi - lo);
        return std::clamp(v, lo + inset, hi - inset);
    };
    const std::vector<std::vector<double>> seed_point{
        {clamp_inside(0.5, 0), clamp_inside(0.5, 1), clamp_inside(g0_init, 2)}};

    auto objective = [&](std::span<const double> x) {
        return fit_objective(series, {k1, x[0], x[1], x[2]});
    };
    const sce::OptResult opt = sce::minimize(objective, box, optimizer, seed_point);
    return {{k1, opt.best_point[0], opt.best_point[1], opt.best_point[2]}, opt.evaluations_used, opt.converged};
}

std::uint64_t country_seed(std::uint64_t global_seed, const std::string& code) noexcept
{
    // FNV-1a over the code, then a splitmix64 finalizer over the combination.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : code) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = global_seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

FitResult fit_country(const CountrySeries& series, const FitConfig& config)
{
    if (series.observations.size() < config.min_years)
        throw IneligibleSeriesError(series.code + ": " + std::to_string(series.observations.size()) +
                                    " observations, need at least " + std::to_string(config.min_years));

    const Step1Estimate first = step1_fit(series);
    sce::OptimizerConfig opt = config.optimizer;
    opt.seed = country_seed(config.optimizer.seed, series.code);
    const Step2Result second = step2_fit(series, first.k1, first.g0_init, config.bounds, opt);

    FitResult r;
    r.code = series.code;
    r.params = second.params;
    const SectorErrors e = sector_errors(series, r.params);
    r.mse_a = e.mse_a;
    r.mse_i = e.mse_i;
    r.mse_s = e.mse_s;
    r.mse_sum = e.sum();
    r.accepted = r.mse_sum < config.threshold;
    try {
        r.transfer_type = classify(r.params).id;
    } catch (const BoundaryError&) {
        r.transfer_type.reset();
    }
    r.g_max_i = g_max_industry(r.params);
    r.n_obs = series.observations.size();
    r.evaluations_used = second.evaluations_used;
    return r;
}

FitReport fit_all(std::span<const CountrySeries> dataset, const FitConfig& config)
{
    struct Slot {
        std::optional<FitResult> result;
        std::optional<FitFailure> failure;
        bool eligible = false;
    };
    std::vector<Slot> slots(dataset.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t k = next++; k < dataset.size(); k = next++) {
            const CountrySeries& s = dataset[k];
            Slot& slot = slots[k];
            slot.eligible = s.observations.size() >= config.min_years;
            try {
                slot.result = fit_country(s, config);
            } catch (const std::exception& ex) {
                slot.failure = FitFailure{s.code, ex.what()};
            }
        }
    };

    const std::size_t jobs = std::clamp<std::size_t>(config.jobs, 1, std::max<std::size_t>(dataset.size(), 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
    }

    FitReport report;
    report.summary.countries = dataset.size();
    for (auto& slot : slots) {
        report.summary.eligible += slot.eligible ? 1 : 0;
        if (slot.result)
            report.results.push_back(std::move(*slot.result));
        if (slot.failure)
            report.failures.push_back(std::move(*slot.failure));
    }
    std::stable_sort(report.results.begin(), report.results.end(),
                     [](const FitResult& l, const FitResult& r) { return l.code < r.code; });
    std::stable_sort(report.failures.begin(), report.failures.end(),
                     [](const FitFailure& l, const FitFailure& r) { return l.code < r.code; });

    report.summary.fitted = report.results.size();
    for (const auto& r : report.results) {
        if (!r.accepted)
            continue;
        ++report.summary.accepted;
        if (r.transfer_type)
            ++report.summary.type_counts[*r.transfer_type];
        else
            ++report.summary.unclassified;
    }
    return report;
}

CountrySeries synth_generate(const ModelParams& params, std::span<const double> g_grid, double noise_sigma,
                             std::uint64_t seed, std::string code, int first_year)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);

    CountrySeries out;
    out.code = code;
    out.name = std::move(code);
    out.observations.reserve(g_grid.size());
    int year = first_year;
    for (double g : g_grid) {
        double a = share_a(params, g);
        double i = share_i(params, g);
        if (noise_sigma > 0.0) {
            a += noise(rng);
            i += noise(rng);
        }
        double s = 1.0 - a - i;

        const SectorShares raw{a, i, s};
        a = std::clamp(a, 0.0, 1.0);
        i = std::clamp(i, 0.0, 1.0);
        s = std::clamp(s, 0.0, 1.0);
        if (noise_sigma > 0.0 || !(SectorShares{a, i, s} == raw)) {
            const double total = a + i + s;
            a /= total;
            i /= total;
            s /= total;
        }
        out.observations.push_back({year++, g, {a, i, s}});
    }
    return out;
}

} // namespace sectoral
