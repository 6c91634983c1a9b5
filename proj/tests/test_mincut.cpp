#include "cmclab/errors.hpp"
#include "cmclab/mincut.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace cmclab;

namespace {

MinCutProblem random_problem(std::mt19937_64& rng, int dim, std::size_t max_free, bool weighted)
{
    std::uniform_real_distribution<double> lam(-2.0, 6.0);
    const Stencil st = (rng() & 1U) ? Stencil::Crofton : Stencil::Face;
    const auto g = dim == 2 ? GridGeometry::corner_aligned({5, 5}, 0.5, st)
                            : GridGeometry::corner_aligned({3, 3, 3}, 0.5, st);
    MinCutProblem p = MinCutProblem::free_problem(g, lam(rng));
    const std::size_t n = g->cell_count();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_free = 1 + rng() % max_free;
    std::vector<bool> in(n), out(n);
    for (std::size_t k = n_free; k < n; ++k) ((rng() & 1U) ? in : out)[order[k]] = true;
    p.fixed_in = RegionMask(g, in);
    p.fixed_out = RegionMask(g, out);
    if (rng() % 4 == 0) {
        std::vector<bool> act(n);
        for (std::size_t i = 0; i < n; ++i) act[i] = rng() % 5 != 0;
        p.active_region = RegionMask(g, act);
    }
    if (weighted) {
        std::uniform_real_distribution<double> w(0.05, 3.0);
        std::vector<double> cw(n);
        for (auto& x : cw) x = w(rng);
        p.cell_weight = cw;
    }
    return p;
}

} // namespace

TEST_SUITE("mincut")
{
    TEST_CASE("unconstrained problem at lambda zero has the empty minimizer")
    {
        const auto g = GridGeometry::corner_aligned({6, 6}, 1.0);
        const MinimizerResult r = solve(MinCutProblem::free_problem(g, 0.0));
        CHECK(r.set_min.empty());
        CHECK(r.energy == 0.0);
        // The full set also has zero perimeter (hull faces are free).
        CHECK(r.set_max.count() == g->cell_count());
        CHECK(!r.unique);
    }

    TEST_CASE("cellwise dominance fills every free cell")
    {
        const auto g = GridGeometry::corner_aligned({6, 6}, 1.0, Stencil::Face);
        MinCutProblem p = MinCutProblem::free_problem(g, 4.5);
        std::vector<bool> out(g->cell_count());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = g->coord(i)[0] == 0;
        p.fixed_out = RegionMask(g, out);
        const MinimizerResult r = solve(p);
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(r.set_max.contains(i) == !out[i]);
    }

    TEST_CASE("solve agrees with exhaustive search")
    {
        std::mt19937_64 rng(99);
        for (int t = 0; t < 120; ++t) {
            const MinCutProblem p = random_problem(rng, t % 2 == 0 ? 2 : 3, 16, t % 3 == 0);
            const MinimizerResult a = solve(p);
            const MinimizerResult b = brute_force(p);
            CHECK(a.energy_q == b.energy_q);
            CHECK(a.set_min == b.set_min);
            CHECK(a.set_max == b.set_max);
            CHECK(a.unique == b.unique);
            CHECK(a.set_min.subset_of(a.set_max));
            CHECK(p.admissible(a.set_min));
            CHECK(p.admissible(a.set_max));
        }
    }

    TEST_CASE("brute force edge cases")
    {
        const auto g = GridGeometry::corner_aligned({2, 2}, 1.0);
        const MinimizerResult r = brute_force(MinCutProblem::free_problem(g, 0.0));
        CHECK(r.set_min.empty());
        CHECK(r.energy == 0.0);

        MinCutProblem fixed = MinCutProblem::free_problem(g, 1.0);
        fixed.fixed_in = RegionMask(g, {true, false, true, false});
        fixed.fixed_out = RegionMask(g, {false, true, false, true});
        const MinimizerResult only = brute_force(fixed);
        CHECK(only.unique);
        CHECK(only.set_min == fixed.fixed_in.as_set());

        const auto big = GridGeometry::corner_aligned({5, 5}, 1.0);
        try {
            brute_force(MinCutProblem::free_problem(big, 0.0));
            FAIL("expected refusal");
        } catch (const UsageError& e) {
            CHECK(std::string(e.what()).find("25") != std::string::npos);
        }
    }

    TEST_CASE("minimizers form a lattice")
    {
        std::mt19937_64 rng(17);
        for (int t = 0; t < 40; ++t) {
            const MinCutProblem p = random_problem(rng, 2, 16, false);
            const MinimizerResult r = solve(p);
            const EnergyModel m(p);
            const auto [lo, hi] = lattice(r.set_min, r.set_max);
            CHECK(m.energy_q(lo) == r.energy_q);
            CHECK(m.energy_q(hi) == r.energy_q);
        }
    }

    TEST_CASE("inward boundary data gives nested largest minimizers")
    {
        std::mt19937_64 rng(23);
        const auto g = GridGeometry::corner_aligned({12, 12}, 0.25);
        for (int t = 0; t < 20; ++t) {
            MinCutProblem p = MinCutProblem::free_problem(g, std::uniform_real_distribution<double>(-1, 3)(rng));
            std::vector<bool> in(g->cell_count()), out(g->cell_count());
            for (std::size_t i = 0; i < in.size(); ++i) {
                const Coord c = g->coord(i);
                const bool border = c[0] == 0 || c[1] == 0 || c[0] == 11 || c[1] == 11;
                if (border) ((rng() % 3 != 0) ? in : out)[i] = true;
            }
            p.fixed_in = RegionMask(g, in);
            p.fixed_out = RegionMask(g, out);
            MinCutProblem q = p;
            for (std::size_t i = 0; i < in.size(); ++i) {
                if (in[i] && rng() % 3 == 0) {
                    in[i] = false;
                    out[i] = true;
                }
            }
            q.fixed_in = RegionMask(g, in);
            q.fixed_out = RegionMask(g, out);
            CHECK(solve(q).set_max.subset_of(solve(p).set_max));
            CHECK(solve(q).set_min.subset_of(solve(p).set_min));
        }
    }

    TEST_CASE("energy decreases and the largest minimizer grows with lambda")
    {
        std::mt19937_64 rng(31);
        const MinCutProblem base = random_problem(rng, 2, 20, false);
        double prev_energy = std::numeric_limits<double>::infinity();
        CellSet prev_max(base.grid);
        for (double lam = -2.0; lam <= 6.0; lam += 0.25) {
            MinCutProblem p = base;
            p.lambda = lam;
            const MinimizerResult r = solve(p);
            CHECK(r.energy <= prev_energy);
            CHECK(prev_max.subset_of(r.set_max));
            prev_energy = r.energy;
            prev_max = r.set_max;
        }
    }

    TEST_CASE("negative lambda is the complement problem")
    {
        std::mt19937_64 rng(41);
        for (int t = 0; t < 30; ++t) {
            MinCutProblem p = random_problem(rng, 2, 16, t % 2 == 0);
            p.active_region = RegionMask::whole(p.grid);
            MinCutProblem c = p;
            c.lambda = -p.lambda;
            std::swap(c.fixed_in, c.fixed_out);
            const MinimizerResult a = solve(p);
            const MinimizerResult b = solve(c);
            CHECK(b.set_min == a.set_max.complement());
            CHECK(b.set_max == a.set_min.complement());
            const EnergyModel m(p);
            std::int64_t gains = 0;
            for (std::size_t i = 0; i < p.grid->cell_count(); ++i) gains += m.cell_gain(i);
            CHECK(b.energy_q == a.energy_q + gains);
        }
    }

    TEST_CASE("unit weights reproduce the unweighted model exactly")
    {
        std::mt19937_64 rng(43);
        for (int t = 0; t < 20; ++t) {
            MinCutProblem p = random_problem(rng, 2, 20, false);
            MinCutProblem w = p;
            w.cell_weight = std::vector<double>(p.grid->cell_count(), 1.0);
            const MinimizerResult a = solve(p);
            const MinimizerResult b = solve(w);
            CHECK(a.energy_q == b.energy_q);
            CHECK(a.quantum == b.quantum);
            CHECK(a.set_max == b.set_max);
            CHECK(EnergyModel(w).bits() == kLengthBits);
        }
    }

    TEST_CASE("quantized energy matches the real-valued functional")
    {
        std::mt19937_64 rng(47);
        const auto g = GridGeometry::corner_aligned({10, 10}, 0.125);
        const MinCutProblem p = MinCutProblem::free_problem(g, 1.5);
        const EnergyModel m(p);
        for (int t = 0; t < 10; ++t) {
            const CellSet d = testutil::random_set(g, rng);
            // Each volume term rounds by at most half a quantum.
            CHECK(std::abs(m.energy(d) - j_lambda(d, 1.5, p.active_region)) <=
                  0.5 * m.quantum() * static_cast<double>(g->cell_count()));
        }
    }

    TEST_CASE("invalid problems are rejected")
    {
        const auto g = GridGeometry::corner_aligned({4, 4}, 1.0);
        MinCutProblem p = MinCutProblem::free_problem(g, std::numeric_limits<double>::quiet_NaN());
        CHECK_THROWS_AS(solve(p), UsageError);
        p.lambda = 0;
        p.fixed_in = RegionMask::whole(g);
        p.fixed_out = RegionMask::whole(g);
        CHECK_THROWS_AS(solve(p), UsageError);
        MinCutProblem w = MinCutProblem::free_problem(g, 0);
        w.cell_weight = std::vector<double>(16, 1.0);
        (*w.cell_weight)[3] = -1;
        CHECK_THROWS_AS(solve(w), UsageError);
        MinCutProblem big = MinCutProblem::free_problem(g, 1e30);
        CHECK_THROWS_AS(solve(big), ScaledArithmeticError);
    }

    TEST_CASE("obstacle at lambda zero keeps the half plane")
    {
        const ObstacleSetup s = make_obstacle_setup(2, 1.0, 2);
        const MinCutProblem p = make_obstacle_problem(s, 0.0);
        REQUIRE(p.free_count() <= kBruteForceLimit);
        const MinimizerResult a = solve(p);
        const MinimizerResult b = brute_force(p);
        CHECK(a.set_max == b.set_max);
        CHECK(a.set_min == b.set_min);
        const CellSet half = RegionMask::where(s.grid, [](const Point& c) { return c[1] < 0; }).as_set();
        CHECK(a.set_max == half);
        CHECK(!fills_upper_half(s, a.set_max));
        CHECK(contact_excess(s, a.set_min) == 0.0);
    }

    TEST_CASE("threshold experiment fills above and detaches below")
    {
        const std::vector<double> lams{0.0, 0.5 / 16, 2.0 / 16, 0.5};
        const auto rows = threshold_experiment(16.0, 16, lams);
        REQUIRE(rows.size() == 4);
        CHECK(!rows[0].filled);
        CHECK(!rows[1].filled);
        CHECK(rows[2].filled);
        CHECK(rows[3].filled);
        CHECK_THROWS_AS(threshold_experiment(1.0, 4, lams), UsageError);
        ObstacleSetup s = make_obstacle_setup(2, 1.0, 8);
        s.radius = 3.0;
        CHECK_THROWS_AS(make_obstacle_problem(s, 0.0), UsageError);
    }

    TEST_CASE("convergence report for constant and shifting data")
    {
        const auto g = GridGeometry::corner_aligned({8, 8}, 1.0, Stencil::Face);
        auto half = [&](int cut) {
            MinCutProblem p = MinCutProblem::free_problem(g, 0.0);
            std::vector<bool> in(64), out(64);
            for (std::size_t i = 0; i < 64; ++i) {
                const Coord c = g->coord(i);
                // Two data columns on each side plus the top and bottom rows leave 24 free cells.
                if (c[0] <= 1 || c[0] >= 6 || c[1] == 0 || c[1] == 7) (c[1] < cut ? in : out)[i] = true;
            }
            p.fixed_in = RegionMask(g, in);
            p.fixed_out = RegionMask(g, out);
            return p;
        };
        const std::vector<MinCutProblem> same{half(4), half(4), half(4)};
        const ConvergenceReport c0 = convergence_experiment(same, half(4));
        for (double v : c0.successive_sym_diff) CHECK(v == 0.0);
        for (double v : c0.limit_sym_diff) CHECK(v == 0.0);

        const std::vector<MinCutProblem> seq{half(1), half(2), half(3), half(4)};
        const ConvergenceReport c1 = convergence_experiment(seq, half(4));
        for (std::size_t k = 1; k < c1.limit_sym_diff.size(); ++k)
            CHECK(c1.limit_sym_diff[k] <= c1.limit_sym_diff[k - 1]);
        CHECK(c1.limit_sym_diff.back() == 0.0);
        CHECK(c1.perimeter_gaps.back() <= 8.0);
        for (const auto& p : seq) {
            REQUIRE(p.free_count() <= kBruteForceLimit);
            CHECK(solve(p).set_max == brute_force(p).set_max);
        }

        MinCutProblem other = half(4);
        other.lambda = 1.0;
        CHECK_THROWS_AS(convergence_experiment(std::vector<MinCutProblem>{other}, half(4)), UsageError);
    }
}
