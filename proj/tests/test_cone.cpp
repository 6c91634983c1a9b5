#include "cmclab/cone.hpp"
#include "cmclab/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cmclab;

TEST_SUITE("cone")
{
    TEST_CASE("cone geometry")
    {
        const CliffordCone c33 = make_cone(3, 3);
        CHECK(c33.n == 7);
        CHECK(c33.a == doctest::Approx(std::sqrt(0.5)));
        CHECK(c33.b == doctest::Approx(std::sqrt(0.5)));
        CHECK(c33.A2 == doctest::Approx(6.0));
        CHECK(make_cone(1, 1).A2 == doctest::Approx(2.0));
        const CliffordCone c24 = make_cone(2, 4);
        CHECK(c24.n == 7);
        CHECK(c24.a == doctest::Approx(std::sqrt(1.0 / 3)));
        CHECK(c24.b == doctest::Approx(std::sqrt(2.0 / 3)));
        CHECK(link_curvature_norm2(2, 4, c24.a, c24.b) == doctest::Approx(6.0));
        for (int p = 1; p <= 6; ++p)
            for (int q = 1; q <= 6; ++q) {
                const CliffordCone c = make_cone(p, q);
                CHECK(c.a * c.a + c.b * c.b == doctest::Approx(1.0));
                CHECK(c.A2 == doctest::Approx(p + q));
            }
        CHECK_THROWS_AS(make_cone(0, 3), UsageError);
        CHECK_THROWS_AS(make_cone(3, -1), UsageError);
    }

    TEST_CASE("link spectrum closed form")
    {
        const SpectralData s33 = link_spectrum(make_cone(3, 3), 3);
        REQUIRE(s33.eigenvalues.size() == 3);
        CHECK(s33.eigenvalues[0] == -6.0);
        CHECK(s33.multiplicities[0] == 1);
        CHECK(s33.eigenvalues[1] == 0.0);
        CHECK(s33.multiplicities[1] == 8);
        CHECK(s33.stable);
        CHECK(link_spectrum(make_cone(1, 1), 1).eigenvalues[0] == -2.0);
        CHECK(sphere_harmonic_multiplicity(1, 0) == 1);
        CHECK(sphere_harmonic_multiplicity(1, 3) == 2);
        CHECK(sphere_harmonic_multiplicity(2, 2) == 5);
        CHECK(sphere_harmonic_multiplicity(3, 2) == 9);
        CHECK_THROWS_AS(link_spectrum(make_cone(2, 2), 0), UsageError);
        for (int p = 1; p <= 4; ++p)
            for (int q = 1; q <= 4; ++q) {
                const SpectralData s = link_spectrum(make_cone(p, q), 6);
                CHECK(s.eigenvalues[0] == -(p + q));
                CHECK(s.multiplicities[0] == 1);
                for (std::size_t k = 1; k < s.eigenvalues.size(); ++k) CHECK(s.eigenvalues[k] > s.eigenvalues[k - 1]);
            }
    }

    TEST_CASE("closed-form spectrum matches a discretized eigensolver")
    {
        for (int p = 1; p <= 4; ++p)
            for (int q = 1; q <= 4; ++q) {
                CAPTURE(p);
                CAPTURE(q);
                const SpectralData s = link_spectrum(make_cone(p, q), 5);
                const auto ref = oracle::product_link_eigenvalues(p, q, 400, 5);
                REQUIRE(ref.size() == 5);
                for (std::size_t k = 0; k < 5; ++k)
                    CHECK(std::abs(s.eigenvalues[k] - ref[k]) <= 1e-2 * std::max(1.0, std::abs(ref[k])));
            }
    }

    TEST_CASE("stability verdicts and the equal-factor frontier")
    {
        CHECK(stability(make_cone(3, 3)));
        CHECK(!stability(make_cone(1, 1)));
        CHECK(stability(make_cone(2, 4)));
        for (int p = 1; p <= 8; ++p) CHECK(stability(make_cone(p, p)) == (p >= 3));
        CHECK(stability(5, 0.0));
        CHECK(!stability(7, -6.3));
    }

    TEST_CASE("indicial exponents")
    {
        auto [gm, gp] = gamma_pm(make_cone(3, 3));
        CHECK(gm == doctest::Approx(2.0));
        CHECK(gp == doctest::Approx(3.0));
        std::tie(gm, gp) = gamma_pm(make_cone(2, 4));
        CHECK(gm == doctest::Approx(2.0));
        CHECK(gp == doctest::Approx(3.0));
        for (int n : {3, 5, 9}) {
            std::tie(gm, gp) = gamma_pm(n, 0.0);
            CHECK(gm == 0.0);
            CHECK(gp == doctest::Approx(n - 2));
        }
        for (int p = 1; p <= 7; ++p)
            for (int q = 1; q <= 7; ++q) {
                const CliffordCone c = make_cone(p, q);
                if (!stability(c)) {
                    CHECK_THROWS_AS(gamma_pm(c), DomainError);
                    continue;
                }
                std::tie(gm, gp) = gamma_pm(c);
                CHECK(gm > 0);
                CHECK(gp >= gm);
                CHECK(gp + gm == doctest::Approx(c.n - 2));
                CHECK(gp * gm == doctest::Approx(c.A2));
            }
    }

    TEST_CASE("radial Jacobi field values")
    {
        const CliffordCone c = make_cone(3, 3);
        CHECK(jacobi_eval(c, 0, 0, 3.7) == 0.0);
        CHECK(jacobi_eval(c, 1, 0, 2) == doctest::Approx(0.125));
        CHECK(jacobi_eval(c, 0, 1, 2) == doctest::Approx(0.25));
        CHECK_THROWS_AS(jacobi_eval(c, 1, 0, 0.0), UsageError);
        CHECK_THROWS_AS(jacobi_eval(make_cone(1, 1), 1, 0, 1.0), DomainError);
    }

    TEST_CASE("L_C residual of Jacobi fields converges at second order")
    {
        const CliffordCone c = make_cone(3, 3);
        for (double gamma : {2.0, 3.0}) {
            auto f = [gamma](double r) { return std::pow(r, -gamma); };
            auto residual = [&](std::size_t n) { return lc_residual(c, RadialFunction::sample(1, 10, n, f)); };
            auto step = [](std::size_t n) { return std::log(10.0) / static_cast<double>(n - 1); };
            // Least-squares slope over 64/128/256 nodes; with equally spaced log steps
            // it reduces to the end-point slope.
            const double fitted = std::log(residual(64) / residual(256)) / std::log(step(64) / step(256));
            CHECK(fitted >= 1.9);
            const double fine = std::log(residual(256) / residual(512)) / std::log(step(256) / step(512));
            CHECK(fine >= 1.9);
        }
    }

    TEST_CASE("L_C residual closed-form cases")
    {
        const CliffordCone c = make_cone(3, 3);
        const RadialFunction lin = RadialFunction::sample(1, 10, 200, [](double r) { return r; });
        // L_C r = 12 / r on (3,3), largest at the first interior node.
        CHECK(lc_residual(c, lin) == doctest::Approx(12.0 / lin.radius(1)).epsilon(1e-3));
        const RadialFunction zero = RadialFunction::sample(1, 10, 32, [](double) { return 0.0; });
        CHECK(lc_residual(c, zero) == 0.0);
        CHECK_THROWS_AS(lc_residual(c, RadialFunction::sample(1, 10, 15, [](double r) { return r; })), UsageError);
        CHECK_THROWS_AS(RadialFunction(0.0, 1.0, {1, 2, 3}), UsageError);
    }

    TEST_CASE("positive Jacobi classification")
    {
        const CliffordCone c = make_cone(3, 3);
        const JacobiFit mix = classify_positive_jacobi(
            c, RadialFunction::sample(1, 100, 200, [](double r) { return 2 * std::pow(r, -3) + 5 * std::pow(r, -2); }));
        CHECK(mix.c1 == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(mix.c2 == doctest::Approx(5.0).epsilon(1e-8));
        CHECK(mix.fit_error <= 1e-8);

        const JacobiFit pure =
            classify_positive_jacobi(c, RadialFunction::sample(1, 100, 200, [](double r) { return std::pow(r, -2); }));
        CHECK(std::abs(pure.c1) <= 1e-8);
        CHECK(pure.c2 == doctest::Approx(1.0).epsilon(1e-8));

        const JacobiFit bad =
            classify_positive_jacobi(c, RadialFunction::sample(1, 100, 200, [](double r) { return 1 / r; }));
        CHECK(bad.fit_error > 1e-2);

        CHECK_THROWS_AS(classify_positive_jacobi(c, RadialFunction::sample(1, 10, 20, [](double r) { return r - 2; })),
                        DomainError);
    }
}
