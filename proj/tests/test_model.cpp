#include <doctest.h>

#include <cmath>
#include <random>

#include "sectoral/errors.hpp"
#include "sectoral/model.hpp"

using namespace sectoral;

namespace {

const ModelParams kPakistan{0.56, -0.01, 0.32, 8.12};
const ModelParams kFinland{2.29, 0.35, 0.50, 8.74};
const ModelParams kUsa{1.76, 0.94, 1.27, 5.02};

// Parameters for property checks, kept in a region where shares stay O(1).
ModelParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> k1(0.1, 3.0), k2(-1.0, 3.0), alpha(0.05, 2.0), g0(1.0, 15.0);
    return {k1(rng), k2(rng), alpha(rng), g0(rng)};
}

} // namespace

TEST_SUITE("model.rhs") {

TEST_CASE("finland at the boundary state")
{
    const ShareRates d = rhs(kFinland, {1.0, 0.0, 0.0});
    CHECK(d.da == doctest::Approx(-2.29).epsilon(1e-15));
    CHECK(d.di == doctest::Approx(1.145).epsilon(1e-15));
    CHECK(d.ds == doctest::Approx(1.145).epsilon(1e-15));
}

TEST_CASE("service-only state is absorbing")
{
    for (const auto& p : {kPakistan, kFinland, kUsa}) {
        const ShareRates d = rhs(p, {0.0, 0.0, 1.0});
        CHECK(d.da == 0.0);
        CHECK(d.di == 0.0);
        CHECK(d.ds == 0.0);
    }
}

TEST_CASE("hand substitution")
{
    const ShareRates d = rhs({1.0, 0.5, 1.0, 0.0}, {0.5, 0.3, 0.2});
    CHECK(d.da == doctest::Approx(-0.5));
    CHECK(d.di == doctest::Approx(0.35));
    CHECK(d.ds == doctest::Approx(0.15));
}

TEST_CASE("components sum to zero")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        const ModelParams p = random_params(rng);
        const double a = u(rng), i = (1.0 - a) * u(rng);
        const ShareRates d = rhs(p, {a, i, 1.0 - a - i});
        CHECK(std::abs(d.da + d.di + d.ds) < 1e-14);
    }
}

}

TEST_SUITE("model.closed_form") {

TEST_CASE("boundary condition at g0")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        const ModelParams p = random_params(rng);
        CHECK(share_a(p, p.g0) == 1.0);
        CHECK(share_i(p, p.g0) == 0.0);
        CHECK(share_s(p, p.g0) == 0.0);
    }
    CHECK(share_a(kPakistan, 8.12) == 1.0);
}

TEST_CASE("finland at g = 9")
{
    CHECK(share_a(kFinland, 9.0) == doctest::Approx(0.551342).epsilon(1e-5));
    CHECK(std::abs(share_i(kFinland, 9.0) - 0.2135) < 1e-4);
    CHECK(std::abs(share_s(kFinland, 9.0) - 0.2352) < 2e-4);
    CHECK(share_s(kFinland, 9.0) == 1.0 - share_a(kFinland, 9.0) - share_i(kFinland, 9.0));
}

TEST_CASE("coincident rates use the analytic limit")
{
    const ModelParams p{1.0, 1.0, 1.0, 0.0};
    CHECK(share_i(p, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // Neighbouring non-degenerate evaluations agree with the limit branch.
    for (double dk : {1e-7, -1e-7}) {
        const ModelParams q{1.0, 1.0 + dk, 1.0, 0.0};
        CHECK(std::abs(share_i(q, 1.0) - 0.36788) < 1e-5);
    }
}

TEST_CASE("degenerate continuity")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int t = 0; t < 200; ++t) {
        ModelParams p = random_params(rng);
        p.k2 = p.k1;
        const double g = p.g0 + u(rng);
        const double limit = share_i(p, g);
        for (double dk : {1e-7, -1e-7}) {
            ModelParams q = p;
            q.k2 = p.k1 + dk;
            CHECK(std::abs(share_i(q, g) - limit) < 1e-5);
        }
    }
}

TEST_CASE("closed form satisfies the ODE (centered differences)")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const double h = 1e-5;
    for (int t = 0; t < 300; ++t) {
        const ModelParams p = random_params(rng);
        const double g = p.g0 + u(rng);
        const ShareRates d = rhs(p, shares_at(p, g));
        CHECK(std::abs((share_a(p, g + h) - share_a(p, g - h)) / (2 * h) - d.da) < 1e-6);
        CHECK(std::abs((share_i(p, g + h) - share_i(p, g - h)) / (2 * h) - d.di) < 1e-6);
        CHECK(std::abs((share_s(p, g + h) - share_s(p, g - h)) / (2 * h) - d.ds) < 1e-6);
    }
}

TEST_CASE("types 1 and 2 converge to services")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> k(0.05, 3.0), a_lo(0.05, 0.95), a_hi(1.05, 3.0);
    for (int t = 0; t < 200; ++t) {
        const ModelParams p{k(rng), k(rng), t % 2 ? a_lo(rng) : a_hi(rng), 5.0};
        REQUIRE(classify(p).convergent);
        CHECK(share_s(p, p.g0 + 50.0 / std::min(p.k1, p.k2)) > 1.0 - 1e-6);
    }
}

TEST_CASE("model may leave [0,1] outside its valid range")
{
    // alpha > 1 drives s negative just above g0.
    CHECK(share_s(kUsa, kUsa.g0 + 0.25) < 0.0);
    CHECK(share_a(kFinland, kFinland.g0 - 1.0) > 1.0);
}

}

TEST_SUITE("model.g_max_industry") {

TEST_CASE("finland maximum")
{
    const auto g = g_max_industry(kFinland);
    REQUIRE(g.has_value());
    CHECK(std::abs(*g - 9.71) < 0.02);
}

TEST_CASE("coincident rates")
{
    const auto g = g_max_industry({2.0, 2.0, 0.5, 5.0});
    REQUIRE(g.has_value());
    CHECK(*g == doctest::Approx(5.5));
}

TEST_CASE("absent for opposite-sign rates")
{
    CHECK_FALSE(g_max_industry(kPakistan).has_value());
    CHECK_FALSE(g_max_industry({-1.0, 0.5, 0.5, 5.0}).has_value());
}

TEST_CASE("is a local maximum wherever present")
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> mag(0.1, 3.0), alpha(0.05, 3.0), g0(1.0, 15.0);
    int seen = 0;
    for (int t = 0; t < 400; ++t) {
        const double sign1 = t % 2 ? 1.0 : -1.0;
        const double sign2 = (t / 2) % 2 ? 1.0 : -1.0;
        const ModelParams p{sign1 * mag(rng), sign2 * mag(rng), alpha(rng), g0(rng)};
        const auto gm = g_max_industry(p);
        CHECK(gm.has_value() == (sign1 == sign2));
        if (!gm)
            continue;
        ++seen;
        const double peak = share_i(p, *gm);
        CHECK(share_i(p, *gm + 1e-4) < peak);
        CHECK(share_i(p, *gm - 1e-4) < peak);
    }
    CHECK(seen > 150);
}

}

TEST_SUITE("model.classify") {

TEST_CASE("reported countries")
{
    CHECK(classify(kPakistan).id == 3);
    CHECK(classify(kFinland).id == 1);
    CHECK(classify(kUsa).id == 2);
}

TEST_CASE("all eight rows")
{
    const double a_lo = 0.5, a_hi = 1.5;
    CHECK(classify({1, 1, a_lo, 0}).id == 1);
    CHECK(classify({1, 1, a_hi, 0}).id == 2);
    CHECK(classify({1, -1, a_lo, 0}).id == 3);
    CHECK(classify({1, -1, a_hi, 0}).id == 4);
    CHECK(classify({-1, 1, a_lo, 0}).id == 5);
    CHECK(classify({-1, 1, a_hi, 0}).id == 6);
    CHECK(classify({-1, -1, a_lo, 0}).id == 7);
    CHECK(classify({-1, -1, a_hi, 0}).id == 8);
}

TEST_CASE("flow descriptors")
{
    CHECK(transfer_type(1).describe() == "a->i, i->s, a->s");
    CHECK(transfer_type(2).describe() == "a->i, i<=>s, a--s");
    CHECK(transfer_type(3).describe() == "a->i, i<-s, a->s");
    CHECK(transfer_type(5).describe() == "a<-i, i->s, a<-s");
    CHECK(transfer_type(7).describe() == "a<-i, i<-s, a<-s");
    CHECK(transfer_type(8).describe() == "a<-i, i<=>s, a--s");
    for (int id = 1; id <= 8; ++id)
        CHECK(transfer_type(id).convergent == (id <= 2));
    CHECK_THROWS_AS(transfer_type(9), std::out_of_range);
}

TEST_CASE("boundary cases are unclassifiable")
{
    CHECK_THROWS_AS(classify({0.0, 1.0, 0.5, 0.0}), BoundaryError);
    CHECK_THROWS_AS(classify({1.0, 1e-12, 0.5, 0.0}), BoundaryError);
    CHECK_THROWS_AS(classify({1.0, 1.0, 1.0, 0.0}), BoundaryError);
    CHECK_THROWS_AS(classify({1.0, 1.0, 1.0 + 1e-10, 0.0}), BoundaryError);
    CHECK_NOTHROW(classify({1.0, 1.0, 1.0 + 1e-6, 0.0}));
}

TEST_CASE("total over a grid and independent of g0")
{
    for (double k1 : {-3.0, -0.2, 0.2, 3.0})
        for (double k2 : {-4.0, -0.1, 0.1, 4.0})
            for (double alpha : {0.1, 0.9, 1.1, 4.0}) {
                const int id = classify({k1, k2, alpha, 1.0}).id;
                CHECK(id >= 1);
                CHECK(id <= 8);
                for (double g0 : {2.0, 7.5, 14.0})
                    CHECK(classify({k1, k2, alpha, g0}).id == id);
            }
}

}

TEST_SUITE("model.collapse") {

TEST_CASE("boundary point maps to the origin")
{
    const CollapsePoint pt = collapse_transform(kFinland, 1.0, 0.0);
    CHECK(pt.x == 0.0);
    CHECK(pt.y == 0.0);
}

TEST_CASE("model-exact shares lie on the diagonal")
{
    const SectorShares s = shares_at(kFinland, 9.0);
    const CollapsePoint pt = collapse_transform(kFinland, s.a, s.i);
    CHECK(std::abs(pt.y - pt.x) < 1e-12);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int t = 0; t < 300; ++t) {
        const ModelParams p = random_params(rng);
        const SectorShares m = shares_at(p, p.g0 + u(rng));
        const CollapsePoint c = collapse_transform(p, m.a, m.i);
        CHECK(std::abs(c.y - c.x) < 1e-10);
    }
}

TEST_CASE("pakistan observation")
{
    CHECK(std::abs(collapse_transform(kPakistan, 0.3, 0.2).x - -0.7217) < 1e-3);
}

TEST_CASE("non-positive agrarian share is a domain error")
{
    CHECK_THROWS_AS(collapse_transform(kFinland, 0.0, 0.1), DomainError);
    CHECK_THROWS_AS(collapse_transform(kFinland, -0.1, 0.1), DomainError);
}

TEST_CASE("agrarian share above one is transformed with the same formula")
{
    const CollapsePoint pt = collapse_transform(kFinland, 1.2, 0.0);
    CHECK(pt.x == doctest::Approx(1.2 - std::pow(1.2, 0.35 / 2.29)));
}

TEST_CASE("display transform")
{
    const CollapsePoint t1 = collapse_display(1, {0.2, 0.19});
    CHECK(t1.x == 0.2);
    CHECK(t1.y == 0.19);
    const CollapsePoint t3 = collapse_display(3, {-1.0, -1.0});
    CHECK(t3.x == 0.0);
    CHECK(t3.y == 0.0);
    const CollapsePoint e = collapse_display(3, {-std::exp(1.0), -std::exp(2.0)});
    CHECK(e.x == doctest::Approx(1.0));
    CHECK(e.y == doctest::Approx(2.0));
    CHECK_THROWS_AS(collapse_display(3, {0.5, -1.0}), DomainError);
}

}

TEST_SUITE("model.alt_params") {

TEST_CASE("alpha = 1 sends nothing from a to s")
{
    const AltParams alt = to_alt_params({1.0, 0.5, 1.0, 0.0});
    CHECK(alt.k_ai == 1.0);
    CHECK(alt.k_is == 0.5);
    CHECK(alt.k_as == 0.0);
}

TEST_CASE("finland and usa")
{
    const AltParams fin = to_alt_params(kFinland);
    CHECK(fin.k_ai == doctest::Approx(1.145));
    CHECK(fin.k_is == doctest::Approx(0.35));
    CHECK(fin.k_as == doctest::Approx(1.145));
    CHECK(to_alt_params(kUsa).k_as == doctest::Approx(-0.4752));
}

TEST_CASE("round trip")
{
    std::mt19937_64 rng(37);
    for (int t = 0; t < 500; ++t) {
        const ModelParams p = random_params(rng);
        const AltParams alt = to_alt_params(p);
        CHECK(alt.k_ai + alt.k_as == doctest::Approx(p.k1).epsilon(1e-15));
        const ModelParams back = from_alt_params(alt);
        CHECK(std::abs(back.k1 - p.k1) <= 1e-15 * std::abs(p.k1));
        CHECK(back.k2 == p.k2);
        CHECK(std::abs(back.alpha - p.alpha) <= 1e-15 * std::abs(p.alpha));
        CHECK(back.g0 == p.g0);
    }
}

TEST_CASE("vanishing total outflow")
{
    CHECK_THROWS_AS(from_alt_params({1.0, 0.5, -1.0, 0.0}), DegenerateError);
}

}
