#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fvtaxis/errors.hpp"
#include "fvtaxis/motility.hpp"
#include "oracles.hpp"

using namespace fvtaxis;

namespace {
Motility make(const std::string& name, std::initializer_list<double> params) {
    std::vector<double> p(params);
    return builtin_motility(name, p);
}
}  // namespace

TEST_CASE("builtin closed forms") {
    Motility c = make("constant", {3.0});
    CHECK(c(0.0) == 3.0);
    CHECK(c(12.5) == 3.0);
    CHECK(c.deriv(1.0) == 0.0);

    Motility e = make("exp_decay", {2.0});
    CHECK(e(0.0) == doctest::Approx(1.0));
    CHECK(e(0.5) == doctest::Approx(std::exp(-1.0)));
    CHECK(e.deriv(0.5) == doctest::Approx(-2.0 * std::exp(-1.0)));

    Motility r = make("rational", {2.0});
    CHECK(r(0.5) == doctest::Approx(0.5));
    CHECK(r.deriv(0.5) == doctest::Approx(-2.0 / 4.0));

    Motility a = make("affine", {1.0, 2.0});
    CHECK(a(0.25) == doctest::Approx(1.5));
    CHECK(a.deriv(7.0) == doctest::Approx(2.0));
}

TEST_CASE("builtin parameter validation") {
    CHECK_THROWS_AS(make("constant", {0.0}), hypothesis_violation);
    CHECK_THROWS_AS(make("constant", {-1.0}), hypothesis_violation);
    CHECK_THROWS_AS(make("rational", {-0.5}), hypothesis_violation);
    CHECK_THROWS_AS(make("affine", {0.0, 1.0}), hypothesis_violation);
    CHECK_THROWS_AS(make("affine", {1.0, -0.1}), hypothesis_violation);
    CHECK_THROWS_AS(make("affine", {1.0}), hypothesis_violation);
    CHECK_THROWS_AS(make("constant", {1.0, 2.0}), hypothesis_violation);
    CHECK_THROWS_AS(make("nope", {1.0}), hypothesis_violation);
}

TEST_CASE("derivatives agree with central differences") {
    auto check_fd = [](const Motility& phi) {
        for (double xi : {0.1, 0.7, 1.9, 4.2}) {
            double fd = oracle::central_diff([&](double s) { return phi(s); }, xi);
            CHECK(phi.deriv(xi) == doctest::Approx(fd).epsilon(1e-7));
        }
    };
    check_fd(make("exp_decay", {1.3}));
    check_fd(make("rational", {0.8}));
    check_fd(make("affine", {0.5, 1.7}));
}

TEST_CASE("bounds for a constant motility are exact") {
    MotilityBounds b = compute_bounds(make("constant", {3.0}), 7.0);
    CHECK(b.kappa1 == 3.0);
    CHECK(b.kappa2 == 3.0);
    CHECK(b.kappa3 == 0.0);
    CHECK(b.vbar == 7.0);
}

TEST_CASE("bounds for monotone closed forms land on the endpoint extrema") {
    MotilityBounds e = compute_bounds(make("exp_decay", {1.0}), 1.0);
    CHECK(e.kappa1 == doctest::Approx(std::exp(-1.0)).epsilon(1e-3));
    CHECK(e.kappa1 <= std::exp(-1.0));
    CHECK(e.kappa2 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(e.kappa2 >= 1.0);
    CHECK(e.kappa3 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(e.kappa3 >= 1.0);

    MotilityBounds a = compute_bounds(make("affine", {1.0, 2.0}), 0.5);
    CHECK(a.kappa1 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(a.kappa2 == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(a.kappa3 == 2.0);  // derivative is flat, no padding applies
}

TEST_CASE("bounds agree with a dense long-double scan") {
    struct Case { const char* name; std::vector<double> params; double vbar; };
    for (const auto& c : {Case{"exp_decay", {0.7}, 2.3},
                          Case{"rational", {1.9}, 4.0},
                          Case{"affine", {0.3, 1.1}, 1.7}}) {
        Motility phi = builtin_motility(c.name, c.params);
        auto ref = oracle::scan_bounds([&](double s) { return phi(s); },
                                       [&](double s) { return phi.deriv(s); }, c.vbar);
        MotilityBounds b = compute_bounds(phi, c.vbar);
        // padding is one local Lipschitz step, which can be a few percent of
        // kappa1 when phi is steep at one end and small at the other
        CHECK(b.kappa1 == doctest::Approx(ref.kappa1).epsilon(2e-2));
        CHECK(b.kappa2 == doctest::Approx(ref.kappa2).epsilon(2e-2));
        CHECK(b.kappa3 == doctest::Approx(ref.kappa3).epsilon(2e-2));
        CHECK(b.kappa1 <= ref.kappa1 + 1e-15);
        CHECK(b.kappa2 >= ref.kappa2 - 1e-15);
        CHECK(b.kappa3 >= ref.kappa3 - 1e-15);
    }
}

TEST_CASE("bounds contain fresh random samples") {
    std::mt19937_64 rng(2024);
    struct Case { const char* name; std::vector<double> params; };
    for (const auto& c : {Case{"exp_decay", {1.4}}, Case{"rational", {0.6}},
                          Case{"affine", {0.2, 2.5}}, Case{"constant", {1.25}}}) {
        Motility phi = builtin_motility(c.name, c.params);
        for (double vbar : {0.3, 1.0, 5.0}) {
            MotilityBounds b = compute_bounds(phi, vbar);
            CHECK(b.kappa1 > 0.0);
            std::uniform_real_distribution<double> dist(0.0, vbar);
            for (int i = 0; i < 2000; ++i) {
                double xi = dist(rng);
                CHECK(phi(xi) >= b.kappa1);
                CHECK(phi(xi) <= b.kappa2);
                CHECK(std::abs(phi.deriv(xi)) <= b.kappa3);
            }
        }
    }
}

TEST_CASE("enlarging the signal range only loosens the bounds") {
    for (const char* name : {"exp_decay", "rational"}) {
        Motility phi = builtin_motility(name, std::vector<double>{1.0});
        MotilityBounds prev = compute_bounds(phi, 0.25);
        for (double vbar : {0.5, 1.0, 2.0, 4.0}) {
            MotilityBounds b = compute_bounds(phi, vbar);
            CHECK(b.kappa1 <= prev.kappa1 + 1e-12);
            CHECK(b.kappa2 >= prev.kappa2 - 1e-12);
            CHECK(b.kappa3 >= prev.kappa3 - 1e-12);
            prev = b;
        }
    }
}

TEST_CASE("degenerate signal range collapses to the value at zero") {
    Motility e = make("exp_decay", {2.0});
    MotilityBounds b = compute_bounds(e, 0.0);
    CHECK(b.kappa1 == doctest::Approx(1.0));
    CHECK(b.kappa2 == doctest::Approx(1.0));
    CHECK(b.kappa3 == doctest::Approx(2.0));
    CHECK_THROWS_AS(compute_bounds(e, -1.0), std::invalid_argument);
}
