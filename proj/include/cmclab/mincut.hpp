#pragma once

// Exact global minimization of the discrete energy
//
//     J(D) = Per_A(D) - lambda |D ∩ A|      (A = active region)
//
// over all labelings that agree with prescribed labels on fixed cells. The
// pairwise perimeter terms are submodular, so a single s-t min cut yields the
// global minimum together with the inclusion-smallest and inclusion-largest
// minimizers. Cell weights turn perimeter and volume into weighted measures
// (used by the equivariant reduction).

#include "cmclab/grid.hpp"
#include "cmclab/maxflow.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cmclab {

struct MinCutProblem {
    GridPtr grid;
    double lambda = 0.0;
    RegionMask fixed_in;
    RegionMask fixed_out;
    RegionMask active_region;
    // Positive per-cell weights; an edge carries the mean of its two cells.
    std::optional<std::vector<double>> cell_weight;

    // Unconstrained problem on the whole grid.
    static MinCutProblem free_problem(const GridPtr& grid, double lambda);

    void validate() const;
    std::size_t free_count() const;
    bool is_free(std::size_t i) const { return !fixed_in.contains(i) && !fixed_out.contains(i); }
    bool admissible(const CellSet& d) const;
};

// Integer energy model. One energy quantum is h^{d-1} * w_max / 2^bits.
// bits = 20 for unit weights and grows with the weight dynamic range (capped
// at 44) so that the smallest weights stay resolved. Positive perimeter terms
// never round to zero; they are clamped to one quantum.
class EnergyModel {
public:
    explicit EnergyModel(const MinCutProblem& problem);

    const MinCutProblem& problem() const { return *problem_; }
    double quantum() const { return quantum_; }
    int bits() const { return bits_; }

    // Cost of cutting the stencil edge (a,b); zero if neither cell is active.
    std::int64_t edge_cost(std::size_t a, std::size_t b, const StencilOffset& off) const;
    // Energy decrease from including cell i.
    std::int64_t cell_gain(std::size_t i) const { return gain_[i]; }

    std::int64_t energy_q(const CellSet& d) const;
    double energy(const CellSet& d) const { return static_cast<double>(energy_q(d)) * quantum_; }

private:
    const MinCutProblem* problem_;
    double quantum_ = 0;
    int bits_ = 20;
    double scale_ = 0; // multiplies (stencil weight in length units) * (normalized cell weight)
    std::vector<double> norm_weight_;
    std::vector<std::int64_t> gain_;
};

struct MinimizerResult {
    CellSet set_min;
    CellSet set_max;
    double energy = 0;
    std::int64_t energy_q = 0;
    double quantum = 0;
    bool unique = false;
    FlowStats flow_stats;
};

MinimizerResult solve(const MinCutProblem& problem);

// Exhaustive oracle over all labelings of the free cells (at most 24).
MinimizerResult brute_force(const MinCutProblem& problem);

inline constexpr std::size_t kBruteForceLimit = 24;

// ---------------------------------------------------------------------------
// Obstacle threshold experiment: half-space data {x_d < 0} fixed outside the
// ball B_r(center); the ball interior is free.

struct ObstacleSetup {
    GridPtr grid;
    Point center{};
    double radius = 0;
    double band = 0; // half-width of the equator band excluded from contact
};

// Grid of 4*resolution cells per axis covering [-2r, 2r]^d, h = r / resolution.
ObstacleSetup make_obstacle_setup(int dim, double r, int resolution, Stencil stencil = Stencil::Crofton);

MinCutProblem make_obstacle_problem(const ObstacleSetup& setup, double lambda);

struct ThresholdRow {
    double lambda = 0;
    bool filled = false;
    double contact_excess = 0;
    double energy = 0;
    bool unique = false;
    CellSet set_min;
    CellSet set_max;
};

// Boundary length of d lying on the obstacle sphere outside the equator band.
double contact_excess(const ObstacleSetup& setup, const CellSet& d);
// Discrete perimeter of the obstacle ball itself.
double obstacle_circumference(const ObstacleSetup& setup);
// True if d contains every free cell with x_d > 0.
bool fills_upper_half(const ObstacleSetup& setup, const CellSet& d);

ThresholdRow threshold_row(const ObstacleSetup& setup, double lambda);
std::vector<ThresholdRow> threshold_experiment(double r, int resolution, std::span<const double> lambdas,
                                               int dim = 2, Stencil stencil = Stencil::Crofton);

// ---------------------------------------------------------------------------

struct ConvergenceReport {
    std::vector<double> successive_sym_diff; // |E_{j+1} Δ E_j|
    std::vector<double> limit_sym_diff;      // |E_j Δ E_limit|
    std::vector<double> perimeters;          // Per_A(E_j)
    double limit_perimeter = 0;
    std::vector<double> perimeter_gaps;      // |Per_A(E_j) - Per_A(E_limit)|
};

// Minimizers are taken as the inclusion-largest ones.
ConvergenceReport convergence_experiment(std::span<const MinCutProblem> problems, const MinCutProblem& limit);

double sym_diff_volume(const CellSet& a, const CellSet& b);

} // namespace cmclab
