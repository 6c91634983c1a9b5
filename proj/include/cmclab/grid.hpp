#pragma once

// Discrete Caccioppoli sets on rectangular 2-D/3-D cell grids.
//
// A set D is a labeling of grid cells. Its perimeter is the weighted count of
// stencil edges joining a member cell to a non-member cell. Edge weights are
// stored as integers in units of 2^-20 (per h^{d-1}) so that every perimeter
// tally is exact and shared bit-for-bit with the min-cut capacities.
// Faces on the outer hull of the grid are never counted: the grid models an
// open set and experiments keep the interface away from the hull.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cmclab {

using Coord = std::array<int, 3>;
using Point = std::array<double, 3>;

enum class Stencil {
    Face,    // axis neighbours only, unit weights (exact oracle tests)
    Crofton, // face + diagonal neighbours, metrication-corrected weights
};

std::string to_string(Stencil s);
Stencil stencil_from_string(const std::string& name);

// Number of fractional bits used for edge weights and perimeter tallies.
inline constexpr int kLengthBits = 20;
inline constexpr std::int64_t kLengthUnit = std::int64_t{1} << kLengthBits;

struct StencilOffset {
    Coord delta{};          // one representative of each +/- pair
    std::int64_t weight_q;  // weight in units of 2^-20, multiplies h^{d-1}
    int weight_class;       // 0 face, 1 edge diagonal, 2 corner diagonal
};

// Stencil weights for the given dimension and kind, in units of 2^-20.
//
// 2-D Crofton: face pi/8, diagonal pi/(8 sqrt 2) (Cauchy-Crofton with the
// 8-neighbourhood; mean perimeter over all normal directions is exact).
// 3-D Crofton: 26-neighbourhood with weights 2/sqrt3 - 1, 1/sqrt2 - 1/sqrt3,
// 1/2 + 1/(2 sqrt3) - 1/sqrt2 so that planes normal to (1,0,0), (1,1,0) and
// (1,1,1) have exact area.
std::vector<StencilOffset> make_stencil(int dim, Stencil kind);

class GridGeometry {
public:
    GridGeometry(std::vector<int> extents, double spacing, std::vector<double> origin,
                 Stencil stencil = Stencil::Crofton);

    // Grid whose cell (0,..,0) has its lower corner at the coordinate origin.
    static std::shared_ptr<const GridGeometry> corner_aligned(std::vector<int> extents, double spacing,
                                                              Stencil stencil = Stencil::Crofton);

    int dim() const { return dim_; }
    const std::vector<int>& extents() const { return extents_; }
    double spacing() const { return h_; }
    const std::vector<double>& origin() const { return origin_; }
    Stencil stencil() const { return stencil_; }
    std::size_t cell_count() const { return count_; }
    const std::vector<StencilOffset>& offsets() const { return offsets_; }

    // h^{d-1} / 2^20: the length represented by one weight quantum.
    double length_quantum() const;
    double cell_volume() const;

    // Row-major, last axis fastest.
    std::size_t index(const Coord& c) const;
    Coord coord(std::size_t idx) const;
    bool contains(const Coord& c) const;
    Point center(std::size_t idx) const;

    // Visits every unordered stencil pair (a, b) with both cells inside the grid.
    template <class F>
    void for_each_edge(F&& f) const
    {
        for (std::size_t a = 0; a < count_; ++a) {
            const Coord ca = coord(a);
            for (std::size_t k = 0; k < offsets_.size(); ++k) {
                Coord cb{};
                for (int ax = 0; ax < 3; ++ax) cb[ax] = ca[ax] + offsets_[k].delta[ax];
                if (!contains(cb)) continue;
                f(a, index(cb), offsets_[k]);
            }
        }
    }

    // Visits all stencil neighbours of a cell (both directions of each pair).
    template <class F>
    void for_each_neighbor(std::size_t a, F&& f) const
    {
        const Coord ca = coord(a);
        for (const auto& off : offsets_) {
            for (int sign : {1, -1}) {
                Coord cb{};
                for (int ax = 0; ax < 3; ++ax) cb[ax] = ca[ax] + sign * off.delta[ax];
                if (contains(cb)) f(index(cb), off);
            }
        }
    }

    bool operator==(const GridGeometry& other) const;

private:
    int dim_;
    std::vector<int> extents_;
    double h_;
    std::vector<double> origin_;
    Stencil stencil_;
    std::size_t count_;
    std::array<std::size_t, 3> strides_{};
    std::vector<StencilOffset> offsets_;
};

using GridPtr = std::shared_ptr<const GridGeometry>;

// Throws UsageError unless both grids describe the same geometry.
void require_same_grid(const GridPtr& a, const GridPtr& b);

// A binary labeling of the cells of a grid.
class CellSet {
public:
    CellSet() = default;
    explicit CellSet(GridPtr grid, bool value = false);
    CellSet(GridPtr grid, std::vector<bool> bits);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return bits_.size(); }
    bool contains(std::size_t i) const { return bits_[i]; }
    void set(std::size_t i, bool v) { bits_[i] = v; }
    const std::vector<bool>& bits() const { return bits_; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }

    CellSet complement() const;
    bool subset_of(const CellSet& other) const;

    friend bool operator==(const CellSet& a, const CellSet& b);

private:
    GridPtr grid_;
    std::vector<bool> bits_;
};

// Cells selected by a predicate on their centers (W, B_1, B_r(p), ...).
class RegionMask {
public:
    RegionMask() = default;
    RegionMask(GridPtr grid, std::vector<bool> bits);

    static RegionMask whole(const GridPtr& grid);
    static RegionMask none(const GridPtr& grid);
    // Cells whose centers lie within Euclidean distance r of center.
    static RegionMask ball(const GridPtr& grid, const Point& center, double r);
    template <class Pred>
    static RegionMask where(const GridPtr& grid, Pred&& pred)
    {
        std::vector<bool> bits(grid->cell_count());
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = pred(grid->center(i));
        return RegionMask(grid, std::move(bits));
    }

    const GridPtr& grid() const { return grid_; }
    bool contains(std::size_t i) const { return bits_[i]; }
    const std::vector<bool>& bits() const { return bits_; }
    std::size_t count() const;
    CellSet as_set() const { return CellSet(grid_, bits_); }

    friend bool operator==(const RegionMask& a, const RegionMask& b)
    {
        return a.bits_ == b.bits_;
    }

private:
    GridPtr grid_;
    std::vector<bool> bits_;
};

// Perimeter in units of 2^-20 h^{d-1}: edges crossing the boundary of D with at
// least one incident cell in R.
std::int64_t perimeter_quanta(const CellSet& d, const RegionMask& r);
double perimeter(const CellSet& d, const RegionMask& r);
double perimeter(const CellSet& d);
double volume(const CellSet& d, const RegionMask& r);
double j_lambda(const CellSet& d, double lambda, const RegionMask& r);

// Boundary edges classified against the ball B_r(center) by cell centers.
struct SplitReport {
    double per_inner = 0;      // both incident cells inside
    double per_outer = 0;      // both outside
    double per_interface = 0;  // straddling the sphere
    double per_total = 0;      // from the summed integer tally
    std::int64_t inner_q = 0;
    std::int64_t outer_q = 0;
    std::int64_t interface_q = 0;
};

SplitReport split_perimeter(const CellSet& d, double r, const Point& center);

CellSet intersection(const CellSet& a, const CellSet& b);
CellSet set_union(const CellSet& a, const CellSet& b);
// (a ∩ b, a ∪ b)
std::pair<CellSet, CellSet> lattice(const CellSet& a, const CellSet& b);

} // namespace cmclab
