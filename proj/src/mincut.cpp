#include "cmclab/mincut.hpp"

#include "cmclab/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace cmclab {

MinCutProblem MinCutProblem::free_problem(const GridPtr& grid, double lambda)
{
    MinCutProblem p;
    p.grid = grid;
    p.lambda = lambda;
    p.fixed_in = RegionMask::none(grid);
    p.fixed_out = RegionMask::none(grid);
    p.active_region = RegionMask::whole(grid);
    return p;
}

void MinCutProblem::validate() const
{
    if (!grid) throw UsageError("problem has no grid");
    if (!std::isfinite(lambda)) throw UsageError("lambda must be finite");
    require_same_grid(grid, fixed_in.grid());
    require_same_grid(grid, fixed_out.grid());
    require_same_grid(grid, active_region.grid());
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
        if (fixed_in.contains(i) && fixed_out.contains(i))
            throw UsageError("cell " + std::to_string(i) + " is fixed both in and out");
    }
    if (cell_weight) {
        if (cell_weight->size() != grid->cell_count())
            throw UsageError("cell_weight length does not match the grid cell count");
        for (double w : *cell_weight) {
            if (!(w > 0) || !std::isfinite(w)) throw UsageError("cell weights must be positive and finite");
        }
    }
}

std::size_t MinCutProblem::free_count() const
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < grid->cell_count(); ++i) n += is_free(i) ? 1 : 0;
    return n;
}

bool MinCutProblem::admissible(const CellSet& d) const
{
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
        if (fixed_in.contains(i) && !d.contains(i)) return false;
        if (fixed_out.contains(i) && d.contains(i)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxBits = 44;
constexpr double kTermLimit = 4503599627370496.0;   // 2^52
constexpr double kTotalLimit = 4611686018427387904.0; // 2^62

} // namespace

EnergyModel::EnergyModel(const MinCutProblem& problem) : problem_(&problem)
{
    problem.validate();
    const auto& grid = *problem.grid;
    const std::size_t n = grid.cell_count();

    double wmax = 1.0;
    norm_weight_.assign(n, 1.0);
    if (problem.cell_weight) {
        const auto& w = *problem.cell_weight;
        wmax = *std::max_element(w.begin(), w.end());
        const double wmin = *std::min_element(w.begin(), w.end());
        const int extra = static_cast<int>(std::ceil(std::log2(wmax / wmin)));
        bits_ = std::clamp(kLengthBits + extra, kLengthBits, kMaxBits);
        for (std::size_t i = 0; i < n; ++i) norm_weight_[i] = w[i] / wmax;
    }
    const double two_bits = std::ldexp(1.0, bits_);
    quantum_ = std::pow(grid.spacing(), grid.dim() - 1) * wmax / two_bits;
    scale_ = std::ldexp(1.0, bits_ - kLengthBits);

    gain_.assign(n, 0);
    double total = 0;
    const double gain_scale = problem.lambda * grid.spacing() * two_bits;
    for (std::size_t i = 0; i < n; ++i) {
        if (!problem.active_region.contains(i)) continue;
        const double g = gain_scale * norm_weight_[i];
        if (std::abs(g) > kTermLimit)
            throw ScaledArithmeticError("volume term of cell " + std::to_string(i) +
                                        " exceeds 2^52 quanta (lambda*h too large)");
        gain_[i] = std::llround(g);
        total += std::abs(g);
    }
    grid.for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        total += static_cast<double>(edge_cost(a, b, off));
    });
    if (total > kTotalLimit)
        throw ScaledArithmeticError("sum of quantized energy terms " + std::to_string(total) +
                                    " exceeds 2^62; reduce lambda or grid size");
}

std::int64_t EnergyModel::edge_cost(std::size_t a, std::size_t b, const StencilOffset& off) const
{
    const auto& active = problem_->active_region;
    if (!active.contains(a) && !active.contains(b)) return 0;
    if (!problem_->cell_weight) return off.weight_q;
    const double mean = 0.5 * (norm_weight_[a] + norm_weight_[b]);
    const double c = static_cast<double>(off.weight_q) * scale_ * mean;
    return std::max<std::int64_t>(1, std::llround(c));
}

std::int64_t EnergyModel::energy_q(const CellSet& d) const
{
    require_same_grid(d.grid(), problem_->grid);
    std::int64_t e = 0;
    problem_->grid->for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        if (d.contains(a) != d.contains(b)) e += edge_cost(a, b, off);
    });
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.contains(i)) e -= gain_[i];
    }
    return e;
}

// ---------------------------------------------------------------------------

MinimizerResult solve(const MinCutProblem& problem)
{
    const EnergyModel model(problem);
    const auto& grid = *problem.grid;
    const std::size_t n = grid.cell_count();

    constexpr std::size_t kFixed = static_cast<std::size_t>(-1);
    std::vector<std::size_t> node(n, kFixed);
    std::size_t free_nodes = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (problem.is_free(i)) node[i] = free_nodes++;
    }

    // Source side = member of D. s->v is cut when v is out, v->t when v is in.
    MaxFlow flow(free_nodes);
    grid.for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        const std::int64_t c = model.edge_cost(a, b, off);
        if (c == 0) return;
        const bool fa = node[a] != kFixed;
        const bool fb = node[b] != kFixed;
        if (fa && fb) {
            flow.add_edge(node[a], node[b], c, c);
        } else if (fa || fb) {
            const std::size_t v = fa ? node[a] : node[b];
            const std::size_t other = fa ? b : a;
            if (problem.fixed_in.contains(other)) {
                flow.add_source_cap(v, c);
            } else {
                flow.add_sink_cap(v, c);
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (node[i] == kFixed) continue;
        const std::int64_t g = model.cell_gain(i);
        if (g > 0) flow.add_source_cap(node[i], g);
        if (g < 0) flow.add_sink_cap(node[i], -g);
    }

    MinimizerResult res;
    res.flow_stats = flow.solve();
    const auto reach_s = flow.source_reachable();
    const auto reach_t = flow.reaches_sink();

    std::vector<bool> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (node[i] == kFixed) {
            lo[i] = hi[i] = problem.fixed_in.contains(i);
        } else {
            lo[i] = reach_s[node[i]];
            hi[i] = !reach_t[node[i]];
        }
    }
    res.set_min = CellSet(problem.grid, std::move(lo));
    res.set_max = CellSet(problem.grid, std::move(hi));
    res.energy_q = model.energy_q(res.set_min);
    if (model.energy_q(res.set_max) != res.energy_q)
        throw InvariantError("extremal minimizers have different energies");
    res.quantum = model.quantum();
    res.energy = static_cast<double>(res.energy_q) * res.quantum;
    res.unique = res.set_min == res.set_max;
    return res;
}

MinimizerResult brute_force(const MinCutProblem& problem)
{
    const EnergyModel model(problem);
    const auto& grid = *problem.grid;
    const std::size_t n = grid.cell_count();

    std::vector<std::size_t> free_cells;
    std::vector<int> slot(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (problem.is_free(i)) {
            slot[i] = static_cast<int>(free_cells.size());
            free_cells.push_back(i);
        }
    }
    const std::size_t m = free_cells.size();
    if (m > kBruteForceLimit)
        throw UsageError("brute_force refuses " + std::to_string(m) + " free cells (limit " +
                         std::to_string(kBruteForceLimit) + ")");

    // Per free cell: neighbours as (free slot or -1, fixed label, edge cost).
    struct Nb {
        int slot;
        bool fixed_in;
        std::int64_t cost;
    };
    std::vector<std::vector<Nb>> nbrs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = free_cells[k];
        grid.for_each_neighbor(i, [&](std::size_t j, const StencilOffset& off) {
            const std::int64_t c = model.edge_cost(i, j, off);
            if (c != 0) nbrs[k].push_back({slot[j], problem.fixed_in.contains(j), c});
        });
    }

    CellSet current(problem.grid, problem.fixed_in.bits());
    std::int64_t energy = model.energy_q(current);
    std::uint32_t mask = 0;
    std::int64_t best = energy;
    std::uint32_t meet = 0;
    std::uint32_t join = 0;

    const std::uint64_t total = std::uint64_t{1} << m;
    for (std::uint64_t step = 1; step < total; ++step) {
        const int k = std::countr_zero(step);
        const bool was_in = (mask >> k) & 1U;
        std::int64_t delta = was_in ? model.cell_gain(free_cells[k]) : -model.cell_gain(free_cells[k]);
        for (const Nb& nb : nbrs[k]) {
            const bool other_in = nb.slot >= 0 ? ((mask >> nb.slot) & 1U) != 0 : nb.fixed_in;
            delta += (other_in != was_in) ? -nb.cost : nb.cost;
        }
        mask ^= (1U << k);
        energy += delta;
        if (energy < best) {
            best = energy;
            meet = join = mask;
        } else if (energy == best) {
            meet &= mask;
            join |= mask;
        }
    }

    auto materialize = [&](std::uint32_t bits) {
        std::vector<bool> out = problem.fixed_in.bits();
        for (std::size_t k = 0; k < m; ++k) out[free_cells[k]] = ((bits >> k) & 1U) != 0;
        return CellSet(problem.grid, std::move(out));
    };
    MinimizerResult res;
    res.set_min = materialize(meet);
    res.set_max = materialize(join);
    res.energy_q = best;
    if (model.energy_q(res.set_min) != best || model.energy_q(res.set_max) != best)
        throw InvariantError("brute_force incremental energy disagrees with direct evaluation");
    res.quantum = model.quantum();
    res.energy = static_cast<double>(best) * res.quantum;
    res.unique = meet == join;
    return res;
}

// ---------------------------------------------------------------------------

ObstacleSetup make_obstacle_setup(int dim, double r, int resolution, Stencil stencil)
{
    if (!(r > 0) || !std::isfinite(r)) throw UsageError("obstacle radius must be positive");
    if (resolution < 1) throw UsageError("resolution must be >= 1");
    const double h = r / resolution;
    std::vector<int> ext(static_cast<std::size_t>(dim), 4 * resolution);
    std::vector<double> origin(static_cast<std::size_t>(dim), -2.0 * r + 0.5 * h);
    ObstacleSetup s;
    s.grid = std::make_shared<const GridGeometry>(std::move(ext), h, std::move(origin), stencil);
    s.center = {0, 0, 0};
    s.radius = r;
    s.band = 2.0 * h;
    return s;
}

MinCutProblem make_obstacle_problem(const ObstacleSetup& setup, double lambda)
{
    const auto& grid = setup.grid;
    const int dim = grid->dim();
    for (int ax = 0; ax < dim; ++ax) {
        const double lo = grid->origin()[ax] - 0.5 * grid->spacing();
        const double hi = lo + grid->spacing() * grid->extents()[ax];
        if (setup.center[ax] - setup.radius < lo || setup.center[ax] + setup.radius > hi)
            throw UsageError("obstacle ball does not fit inside the grid");
    }
    const RegionMask ball = RegionMask::ball(grid, setup.center, setup.radius);
    std::vector<bool> in(grid->cell_count()), out(grid->cell_count());
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
        if (ball.contains(i)) continue;
        const bool lower = grid->center(i)[dim - 1] < setup.center[dim - 1];
        in[i] = lower;
        out[i] = !lower;
    }
    MinCutProblem p;
    p.grid = grid;
    p.lambda = lambda;
    p.fixed_in = RegionMask(grid, std::move(in));
    p.fixed_out = RegionMask(grid, std::move(out));
    p.active_region = RegionMask::whole(grid);
    return p;
}

double contact_excess(const ObstacleSetup& setup, const CellSet& d)
{
    const auto& grid = *setup.grid;
    const int top = grid.dim() - 1;
    const RegionMask ball = RegionMask::ball(setup.grid, setup.center, setup.radius);
    std::int64_t q = 0;
    grid.for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        if (d.contains(a) == d.contains(b) || ball.contains(a) == ball.contains(b)) return;
        const double mid = 0.5 * (grid.center(a)[top] + grid.center(b)[top]) - setup.center[top];
        if (std::abs(mid) > setup.band) q += off.weight_q;
    });
    return static_cast<double>(q) * grid.length_quantum();
}

double obstacle_circumference(const ObstacleSetup& setup)
{
    return perimeter(RegionMask::ball(setup.grid, setup.center, setup.radius).as_set());
}

bool fills_upper_half(const ObstacleSetup& setup, const CellSet& d)
{
    const auto& grid = *setup.grid;
    const int top = grid.dim() - 1;
    const RegionMask ball = RegionMask::ball(setup.grid, setup.center, setup.radius);
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        if (ball.contains(i) && grid.center(i)[top] > setup.center[top] && !d.contains(i)) return false;
    }
    return true;
}

ThresholdRow threshold_row(const ObstacleSetup& setup, double lambda)
{
    const MinCutProblem problem = make_obstacle_problem(setup, lambda);
    MinimizerResult res = solve(problem);
    ThresholdRow row;
    row.lambda = lambda;
    row.filled = fills_upper_half(setup, res.set_max);
    row.contact_excess = contact_excess(setup, res.set_min);
    row.energy = res.energy;
    row.unique = res.unique;
    row.set_min = std::move(res.set_min);
    row.set_max = std::move(res.set_max);
    return row;
}

std::vector<ThresholdRow> threshold_experiment(double r, int resolution, std::span<const double> lambdas,
                                               int dim, Stencil stencil)
{
    if (resolution < 8) throw UsageError("threshold experiment needs r >= 8h (resolution >= 8)");
    for (double l : lambdas) {
        if (!std::isfinite(l)) throw UsageError("lambda list contains a non-finite value");
    }
    const ObstacleSetup setup = make_obstacle_setup(dim, r, resolution, stencil);
    std::vector<ThresholdRow> rows;
    rows.reserve(lambdas.size());
    for (double l : lambdas) rows.push_back(threshold_row(setup, l));
    return rows;
}

// ---------------------------------------------------------------------------

double sym_diff_volume(const CellSet& a, const CellSet& b)
{
    require_same_grid(a.grid(), b.grid());
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += a.contains(i) != b.contains(i) ? 1 : 0;
    return static_cast<double>(n) * a.grid()->cell_volume();
}

ConvergenceReport convergence_experiment(std::span<const MinCutProblem> problems, const MinCutProblem& limit)
{
    for (const auto& p : problems) {
        require_same_grid(p.grid, limit.grid);
        if (p.lambda != limit.lambda) throw UsageError("convergence problems must share lambda");
        if (!(p.active_region == limit.active_region))
            throw UsageError("convergence problems must share the active region");
    }
    ConvergenceReport rep;
    const CellSet limit_set = solve(limit).set_max;
    rep.limit_perimeter = perimeter(limit_set, limit.active_region);
    std::vector<CellSet> sets;
    sets.reserve(problems.size());
    for (const auto& p : problems) sets.push_back(solve(p).set_max);
    for (std::size_t j = 0; j < sets.size(); ++j) {
        if (j > 0) rep.successive_sym_diff.push_back(sym_diff_volume(sets[j - 1], sets[j]));
        rep.limit_sym_diff.push_back(sym_diff_volume(sets[j], limit_set));
        const double per = perimeter(sets[j], limit.active_region);
        rep.perimeters.push_back(per);
        rep.perimeter_gaps.push_back(std::abs(per - rep.limit_perimeter));
    }
    return rep;
}

} // namespace cmclab
