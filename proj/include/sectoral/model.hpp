#pragma once

#include <array>
#include <optional>
#include <string>

namespace sectoral {

/// Tolerance for the k1 = k2, k = 0 and alpha = 1 degeneracies.
inline constexpr double kDegeneracyEps = 1e-9;

/// GDP fractions of the agrarian, industrial and service sectors at one value of g.
struct SectorShares {
    double a = 0.0;
    double i = 0.0;
    double s = 0.0;

    double sum() const noexcept { return a + i + s; }
    friend bool operator==(const SectorShares&, const SectorShares&) = default;
};

/// Derivatives of the three shares with respect to g.
struct ShareRates {
    double da = 0.0;
    double di = 0.0;
    double ds = 0.0;
};

/// Country-specific transfer parameters. g0 is the log-GDP/cap where a = 1.
struct ModelParams {
    double k1 = 0.0;
    double k2 = 0.0;
    double alpha = 0.0;
    double g0 = 0.0;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Pairwise-rate parameterization: a->i at k_ai, i->s at k_is, a->s at k_as.
struct AltParams {
    double k_ai = 0.0;
    double k_is = 0.0;
    double k_as = 0.0;
    double g0 = 0.0;
};

/// Direction of net transfer between two sectors, listed as (first, second).
enum class Flow {
    Forward,     ///< first -> second
    Backward,    ///< first <- second
    Reversible,  ///< direction depends on the current shares
    Indirect,    ///< no direct transfer; coupled through the third sector
};

struct TransferType {
    int id = 0;
    Flow agr_ind = Flow::Forward;
    Flow ind_srv = Flow::Forward;
    Flow agr_srv = Flow::Forward;
    /// a -> 0, i -> 0, s -> 1 as g -> infinity.
    bool convergent = false;

    /// Human-readable flow descriptor such as "a->i, i->s, a->s".
    std::string describe() const;

    friend bool operator==(const TransferType&, const TransferType&) = default;
};

/// Right-hand side of the transfer ODE system. The components sum to zero.
ShareRates rhs(const ModelParams& params, const SectorShares& shares) noexcept;

/// Closed-form agrarian share exp(-k1 (g - g0)).
double share_a(const ModelParams& params, double g) noexcept;

/// Closed-form industrial share. Falls back to the analytic limit
/// alpha k1 (g - g0) exp(-k1 (g - g0)) when k1 and k2 coincide.
double share_i(const ModelParams& params, double g) noexcept;

/// 1 - share_a - share_i.
double share_s(const ModelParams& params, double g) noexcept;

SectorShares shares_at(const ModelParams& params, double g) noexcept;

/// Location of the industrial maximum, present only when k1 and k2 share a sign.
std::optional<double> g_max_industry(const ModelParams& params) noexcept;

/// Transfer type 1..8 from the signs of k1, k2 and whether alpha is below or above 1.
/// Throws BoundaryError when a parameter is within kDegeneracyEps of a boundary.
TransferType classify(const ModelParams& params);

/// Table entry for a type id in 1..8. Throws std::out_of_range otherwise.
const TransferType& transfer_type(int id);

struct CollapsePoint {
    double x = 0.0;
    double y = 0.0;
};

/// Maps an observation onto the universal diagonal:
/// x = a - a^(k2/k1), y = (k2 - k1) / (alpha k1) * i. Requires a > 0.
CollapsePoint collapse_transform(const ModelParams& params, double a_obs, double i_obs);

/// Display coordinates for collapse plots. Type 3 points are sign-flipped and
/// log-transformed; every other type is returned unchanged.
CollapsePoint collapse_display(int type_id, const CollapsePoint& point);

AltParams to_alt_params(const ModelParams& params) noexcept;

/// Throws DegenerateError when k_ai + k_as == 0 (alpha undefined).
ModelParams from_alt_params(const AltParams& alt);

} // namespace sectoral
