#include "sectoral/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sectoral/errors.hpp"

namespace sectoral {

namespace {

double mean(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_same_length(std::span<const double> x, std::span<const double> y, const char* what)
{
    if (x.size() != y.size())
        throw DegenerateError(std::string(what) + ": x and y differ in length");
    if (x.size() < 2)
        throw DegenerateError(std::string(what) + ": need at least two points");
}

} // namespace

LinearFit ols_fit(std::span<const double> x, std::span<const double> y)
{
    require_same_length(x, y, "ols_fit");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        sxx += dx * dx;
        sxy += dx * (y[k] - my);
    }
    if (sxx == 0.0)
        throw DegenerateError("ols_fit: x has zero variance");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double r = y[k] - (fit.slope * x[k] + fit.intercept);
        fit.residual_sum += r * r;
    }
    return fit;
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    require_same_length(x, y, "pearson");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double dx = x[k] - mx;
        const double dy = y[k] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateError("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Trajectory rk4_integrate(const ModelParams& params, double g_start, const SectorShares& start,
                         double g_end, double step)
{
    if (!(step > 0.0) || !std::isfinite(step))
        throw InvalidConfigError("rk4_integrate: step must be positive");
    if (!(g_end >= g_start))
        throw InvalidConfigError("rk4_integrate: g_end must not precede g_start");

    const auto n_steps = static_cast<std::size_t>(std::ceil((g_end - g_start) / step - 1e-9));
    Trajectory traj;
    traj.g_values.reserve(n_steps + 1);
    traj.shares.reserve(n_steps + 1);
    traj.g_values.push_back(g_start);
    traj.shares.push_back(start);

    auto axpy = [](const SectorShares& x, double h, const ShareRates& d) {
        return SectorShares{x.a + h * d.da, x.i + h * d.di, x.s + h * d.ds};
    };

    SectorShares y = start;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        const double g_prev = traj.g_values.back();
        const double g_next = k == n_steps ? g_end : g_start + static_cast<double>(k) * step;
        const double h = g_next - g_prev;
        const ShareRates k1 = rhs(params, y);
        const ShareRates k2 = rhs(params, axpy(y, 0.5 * h, k1));
        const ShareRates k3 = rhs(params, axpy(y, 0.5 * h, k2));
        const ShareRates k4 = rhs(params, axpy(y, h, k3));
        y.a += h / 6.0 * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
        y.i += h / 6.0 * (k1.di + 2.0 * k2.di + 2.0 * k3.di + k4.di);
        y.s += h / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
        traj.g_values.push_back(g_next);
        traj.shares.push_back(y);
    }
    return traj;
}

double find_crossing(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    if (!(tol > 0.0))
        throw InvalidConfigError("find_crossing: tol must be positive");
    if (lo > hi)
        std::swap(lo, hi);
    double f_lo = f(lo);
    const double f_hi = f(hi);
    if (f_lo == 0.0)
        return lo;
    if (f_hi == 0.0)
        return hi;
    if ((f_lo < 0.0) == (f_hi < 0.0) || std::isnan(f_lo) || std::isnan(f_hi))
        throw NoBracketError("find_crossing: f has the same sign at both ends");

    while (hi - lo > tol) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi)
            break;
        const double f_mid = f(mid);
        if (f_mid == 0.0)
            return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return lo + 0.5 * (hi - lo);
}

QuartileStats quartile_stats(std::span<const double> key, std::span<const std::pair<double, double>> paired)
{
    if (key.size() != paired.size())
        throw DegenerateError("quartile_stats: key and paired differ in length");
    if (key.size() < 4)
        throw DegenerateError("quartile_stats: need at least four samples");

    std::vector<std::size_t> order(key.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return key[l] < key[r]; });

    QuartileStats out;
    const std::size_t base = key.size() / 4;
    const std::size_t extra = key.size() % 4;
    std::size_t pos = 0;
    for (std::size_t q = 0; q < 4; ++q) {
        QuartileGroup& grp = out.groups[q];
        grp.size = base + (q < extra ? 1 : 0);
        grp.members.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                           order.begin() + static_cast<std::ptrdiff_t>(pos + grp.size));
        pos += grp.size;

        grp.key_min = key[grp.members.front()];
        grp.key_max = key[grp.members.back()];
        double su = 0.0, sv = 0.0;
        for (auto m : grp.members) {
            su += paired[m].first;
            sv += paired[m].second;
        }
        const auto n = static_cast<double>(grp.size);
        grp.mean_u = su / n;
        grp.mean_v = sv / n;
        double vu = 0.0, vv = 0.0;
        for (auto m : grp.members) {
            vu += (paired[m].first - grp.mean_u) * (paired[m].first - grp.mean_u);
            vv += (paired[m].second - grp.mean_v) * (paired[m].second - grp.mean_v);
        }
        grp.std_u = std::sqrt(vu / n);
        grp.std_v = std::sqrt(vv / n);
    }
    return out;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges)
{
    if (edges.size() < 2)
        throw InvalidConfigError("histogram: need at least two edges");
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (!(edges[k] > edges[k - 1]))
            throw InvalidConfigError("histogram: edges must be strictly increasing");

    Histogram h;
    h.counts.assign(edges.size() - 1, 0);
    for (double v : values) {
        if (v < edges.front()) {
            ++h.underflow;
        } else if (!(v < edges.back())) {
            // also catches NaN
            ++h.overflow;
        } else {
            const auto it = std::upper_bound(edges.begin(), edges.end(), v);
            ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
        }
    }
    return h;
}

} // namespace sectoral
