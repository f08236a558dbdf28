#include "sectoral/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sectoral/errors.hpp"

namespace sectoral {

namespace {

bool rates_coincide(double k1, double k2) noexcept
{
    return std::abs(k2 - k1) < kDegeneracyEps * std::max(std::abs(k1), std::abs(k2));
}

const char* arrow(Flow f, char from, char to, std::string& buf)
{
    buf.clear();
    buf += from;
    switch (f) {
    case Flow::Forward: buf += "->"; break;
    case Flow::Backward: buf += "<-"; break;
    case Flow::Reversible: buf += "<=>"; break;
    case Flow::Indirect: buf += "--"; break;
    }
    buf += to;
    return buf.c_str();
}

using F = Flow;

// Rows in table order: (sign k1, sign k2, alpha < 1 / alpha > 1).
const std::array<TransferType, 8> kTypes{{
    {1, F::Forward, F::Forward, F::Forward, true},
    {2, F::Forward, F::Reversible, F::Indirect, true},
    {3, F::Forward, F::Backward, F::Forward, false},
    {4, F::Forward, F::Backward, F::Indirect, false},
    {5, F::Backward, F::Forward, F::Backward, false},
    {6, F::Backward, F::Forward, F::Indirect, false},
    {7, F::Backward, F::Backward, F::Backward, false},
    {8, F::Backward, F::Reversible, F::Indirect, false},
}};

} // namespace

std::string TransferType::describe() const
{
    std::string buf;
    std::string out = arrow(agr_ind, 'a', 'i', buf);
    out += ", ";
    out += arrow(ind_srv, 'i', 's', buf);
    out += ", ";
    out += arrow(agr_srv, 'a', 's', buf);
    return out;
}

ShareRates rhs(const ModelParams& p, const SectorShares& x) noexcept
{
    const double from_a = p.k1 * x.a;
    const double from_i = p.k2 * x.i;
    return {-from_a, p.alpha * from_a - from_i, (1.0 - p.alpha) * from_a + from_i};
}

double share_a(const ModelParams& p, double g) noexcept
{
    return std::exp(-p.k1 * (g - p.g0));
}

double share_i(const ModelParams& p, double g) noexcept
{
    const double dg = g - p.g0;
    const double ea = std::exp(-p.k1 * dg);
    if (rates_coincide(p.k1, p.k2))
        return p.alpha * p.k1 * dg * ea;
    // e^{-k1 dg} - e^{-k2 dg}, factored around the larger term so expm1 sees a
    // non-positive argument: no cancellation and no 0 * inf far from g0.
    const double dk = p.k2 - p.k1;
    const double diff = -dk * dg <= 0.0 ? -ea * std::expm1(-dk * dg) : std::exp(-p.k2 * dg) * std::expm1(dk * dg);
    return p.alpha * p.k1 * diff / dk;
}

double share_s(const ModelParams& p, double g) noexcept
{
    return 1.0 - share_a(p, g) - share_i(p, g);
}

SectorShares shares_at(const ModelParams& p, double g) noexcept
{
    const double a = share_a(p, g);
    const double i = share_i(p, g);
    return {a, i, 1.0 - a - i};
}

std::optional<double> g_max_industry(const ModelParams& p) noexcept
{
    if (std::abs(p.k1) < kDegeneracyEps || std::abs(p.k2) < kDegeneracyEps || !(p.alpha > 0.0))
        return std::nullopt;
    if ((p.k1 > 0.0) != (p.k2 > 0.0))
        return std::nullopt;
    if (rates_coincide(p.k1, p.k2))
        return 1.0 / p.k1 + p.g0;
    return std::log(p.k1 / p.k2) / (p.k1 - p.k2) + p.g0;
}

TransferType classify(const ModelParams& p)
{
    if (!std::isfinite(p.k1) || !std::isfinite(p.k2) || !std::isfinite(p.alpha))
        throw BoundaryError("non-finite parameters cannot be classified");
    if (std::abs(p.k1) < kDegeneracyEps)
        throw BoundaryError("k1 = 0 is a boundary case");
    if (std::abs(p.k2) < kDegeneracyEps)
        throw BoundaryError("k2 = 0 is a boundary case");
    if (p.alpha <= 0.0)
        throw BoundaryError("alpha must be positive");
    if (std::abs(p.alpha - 1.0) < kDegeneracyEps)
        throw BoundaryError("alpha = 1 is a boundary case");

    const int row = (p.k1 < 0.0 ? 4 : 0) + (p.k2 < 0.0 ? 2 : 0) + (p.alpha > 1.0 ? 1 : 0);
    return kTypes[row];
}

const TransferType& transfer_type(int id)
{
    if (id < 1 || id > 8)
        throw std::out_of_range("transfer type id must be in 1..8");
    return kTypes[id - 1];
}

CollapsePoint collapse_transform(const ModelParams& p, double a_obs, double i_obs)
{
    if (!(a_obs > 0.0))
        throw DomainError("collapse transform requires a positive agrarian share");
    if (std::abs(p.k1) < kDegeneracyEps || p.alpha == 0.0)
        throw DomainError("collapse transform undefined for k1 = 0 or alpha = 0");
    const double x = a_obs - std::pow(a_obs, p.k2 / p.k1);
    const double y = (p.k2 - p.k1) / (p.alpha * p.k1) * i_obs;
    return {x, y};
}

CollapsePoint collapse_display(int type_id, const CollapsePoint& pt)
{
    if (type_id != 3)
        return pt;
    if (!(pt.x < 0.0) || !(pt.y < 0.0))
        throw DomainError("type-3 display requires negative collapse coordinates");
    return {std::log(-pt.x), std::log(-pt.y)};
}

AltParams to_alt_params(const ModelParams& p) noexcept
{
    return {p.alpha * p.k1, p.k2, (1.0 - p.alpha) * p.k1, p.g0};
}

ModelParams from_alt_params(const AltParams& alt)
{
    const double k1 = alt.k_ai + alt.k_as;
    if (k1 == 0.0)
        throw DegenerateError("k_ai + k_as = 0 leaves alpha undefined");
    return {k1, alt.k_is, alt.k_ai / k1, alt.g0};
}

} // namespace sectoral
