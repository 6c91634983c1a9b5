#include "cmclab/grid.hpp"

#include "cmclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace cmclab {

namespace {

std::int64_t quantize_weight(double w)
{
    return static_cast<std::int64_t>(std::llround(w * static_cast<double>(kLengthUnit)));
}

} // namespace

std::string to_string(Stencil s)
{
    return s == Stencil::Face ? "face" : "crofton";
}

Stencil stencil_from_string(const std::string& name)
{
    if (name == "face") return Stencil::Face;
    if (name == "crofton") return Stencil::Crofton;
    throw UsageError("unknown stencil '" + name + "' (expected face or crofton)");
}

std::vector<StencilOffset> make_stencil(int dim, Stencil kind)
{
    std::vector<StencilOffset> out;
    const double pi = std::numbers::pi;
    if (dim == 2) {
        if (kind == Stencil::Face) {
            out.push_back({{1, 0, 0}, kLengthUnit, 0});
            out.push_back({{0, 1, 0}, kLengthUnit, 0});
        } else {
            const auto wf = quantize_weight(pi / 8.0);
            const auto wd = quantize_weight(pi / (8.0 * std::sqrt(2.0)));
            out.push_back({{1, 0, 0}, wf, 0});
            out.push_back({{0, 1, 0}, wf, 0});
            out.push_back({{1, 1, 0}, wd, 1});
            out.push_back({{1, -1, 0}, wd, 1});
        }
        return out;
    }
    if (dim != 3) throw UsageError("grid dimension must be 2 or 3");

    if (kind == Stencil::Face) {
        out.push_back({{1, 0, 0}, kLengthUnit, 0});
        out.push_back({{0, 1, 0}, kLengthUnit, 0});
        out.push_back({{0, 0, 1}, kLengthUnit, 0});
        return out;
    }
    const double s2 = std::sqrt(2.0);
    const double s3 = std::sqrt(3.0);
    const auto wf = quantize_weight(2.0 / s3 - 1.0);
    const auto we = quantize_weight(1.0 / s2 - 1.0 / s3);
    const auto wc = quantize_weight(0.5 + 0.5 / s3 - 1.0 / s2);
    for (int ax = 0; ax < 3; ++ax) {
        Coord d{0, 0, 0};
        d[ax] = 1;
        out.push_back({d, wf, 0});
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            for (int sb : {1, -1}) {
                Coord d{0, 0, 0};
                d[a] = 1;
                d[b] = sb;
                out.push_back({d, we, 1});
            }
        }
    }
    for (int sy : {1, -1}) {
        for (int sz : {1, -1}) out.push_back({{1, sy, sz}, wc, 2});
    }
    return out;
}

GridGeometry::GridGeometry(std::vector<int> extents, double spacing, std::vector<double> origin,
                           Stencil stencil)
    : dim_(static_cast<int>(extents.size())),
      extents_(std::move(extents)),
      h_(spacing),
      origin_(std::move(origin)),
      stencil_(stencil)
{
    if (dim_ != 2 && dim_ != 3) throw UsageError("grid dimension must be 2 or 3");
    if (!(h_ > 0) || !std::isfinite(h_)) throw UsageError("grid spacing must be positive and finite");
    if (origin_.size() != extents_.size()) throw UsageError("origin must have one coordinate per axis");
    count_ = 1;
    for (int e : extents_) {
        if (e < 1) throw UsageError("grid extents must be >= 1");
        count_ *= static_cast<std::size_t>(e);
    }
    std::size_t stride = 1;
    strides_ = {0, 0, 0};
    for (int ax = dim_ - 1; ax >= 0; --ax) {
        strides_[ax] = stride;
        stride *= static_cast<std::size_t>(extents_[ax]);
    }
    offsets_ = make_stencil(dim_, stencil_);
}

std::shared_ptr<const GridGeometry> GridGeometry::corner_aligned(std::vector<int> extents, double spacing,
                                                                 Stencil stencil)
{
    std::vector<double> origin(extents.size(), 0.5 * spacing);
    return std::make_shared<const GridGeometry>(std::move(extents), spacing, std::move(origin), stencil);
}

double GridGeometry::length_quantum() const
{
    return std::pow(h_, dim_ - 1) / static_cast<double>(kLengthUnit);
}

double GridGeometry::cell_volume() const
{
    return std::pow(h_, dim_);
}

std::size_t GridGeometry::index(const Coord& c) const
{
    std::size_t idx = 0;
    for (int ax = 0; ax < dim_; ++ax) idx += static_cast<std::size_t>(c[ax]) * strides_[ax];
    return idx;
}

Coord GridGeometry::coord(std::size_t idx) const
{
    Coord c{0, 0, 0};
    for (int ax = 0; ax < dim_; ++ax) {
        c[ax] = static_cast<int>(idx / strides_[ax]);
        idx %= strides_[ax];
    }
    return c;
}

bool GridGeometry::contains(const Coord& c) const
{
    for (int ax = 0; ax < 3; ++ax) {
        if (ax < dim_) {
            if (c[ax] < 0 || c[ax] >= extents_[ax]) return false;
        } else if (c[ax] != 0) {
            return false;
        }
    }
    return true;
}

Point GridGeometry::center(std::size_t idx) const
{
    const Coord c = coord(idx);
    Point p{0, 0, 0};
    for (int ax = 0; ax < dim_; ++ax) p[ax] = origin_[ax] + h_ * c[ax];
    return p;
}

bool GridGeometry::operator==(const GridGeometry& other) const
{
    return extents_ == other.extents_ && h_ == other.h_ && origin_ == other.origin_ &&
           stencil_ == other.stencil_;
}

void require_same_grid(const GridPtr& a, const GridPtr& b)
{
    if (!a || !b) throw UsageError("cell set has no grid");
    if (a != b && !(*a == *b)) throw UsageError("grid mismatch between operands");
}

CellSet::CellSet(GridPtr grid, bool value)
    : grid_(std::move(grid)), bits_(grid_->cell_count(), value)
{
}

CellSet::CellSet(GridPtr grid, std::vector<bool> bits)
    : grid_(std::move(grid)), bits_(std::move(bits))
{
    if (bits_.size() != grid_->cell_count())
        throw UsageError("membership length does not match the grid cell count");
}

std::size_t CellSet::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

CellSet CellSet::complement() const
{
    std::vector<bool> out(bits_);
    out.flip();
    return CellSet(grid_, std::move(out));
}

bool CellSet::subset_of(const CellSet& other) const
{
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
}

bool operator==(const CellSet& a, const CellSet& b)
{
    if (!a.grid_ || !b.grid_) return a.grid_ == b.grid_ && a.bits_ == b.bits_;
    return *a.grid_ == *b.grid_ && a.bits_ == b.bits_;
}

RegionMask::RegionMask(GridPtr grid, std::vector<bool> bits)
    : grid_(std::move(grid)), bits_(std::move(bits))
{
    if (bits_.size() != grid_->cell_count())
        throw UsageError("mask length does not match the grid cell count");
}

RegionMask RegionMask::whole(const GridPtr& grid)
{
    return RegionMask(grid, std::vector<bool>(grid->cell_count(), true));
}

RegionMask RegionMask::none(const GridPtr& grid)
{
    return RegionMask(grid, std::vector<bool>(grid->cell_count(), false));
}

RegionMask RegionMask::ball(const GridPtr& grid, const Point& center, double r)
{
    const double r2 = r * r;
    return where(grid, [&](const Point& p) {
        double s = 0;
        for (int ax = 0; ax < 3; ++ax) s += (p[ax] - center[ax]) * (p[ax] - center[ax]);
        return s <= r2;
    });
}

std::size_t RegionMask::count() const
{
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

std::int64_t perimeter_quanta(const CellSet& d, const RegionMask& r)
{
    require_same_grid(d.grid(), r.grid());
    std::int64_t total = 0;
    d.grid()->for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        if (d.contains(a) != d.contains(b) && (r.contains(a) || r.contains(b))) total += off.weight_q;
    });
    return total;
}

double perimeter(const CellSet& d, const RegionMask& r)
{
    return static_cast<double>(perimeter_quanta(d, r)) * d.grid()->length_quantum();
}

double perimeter(const CellSet& d)
{
    return perimeter(d, RegionMask::whole(d.grid()));
}

double volume(const CellSet& d, const RegionMask& r)
{
    require_same_grid(d.grid(), r.grid());
    std::size_t n = 0;
    for (std::size_t i = 0; i < d.size(); ++i) n += (d.contains(i) && r.contains(i)) ? 1 : 0;
    return static_cast<double>(n) * d.grid()->cell_volume();
}

double j_lambda(const CellSet& d, double lambda, const RegionMask& r)
{
    return perimeter(d, r) - lambda * volume(d, r);
}

SplitReport split_perimeter(const CellSet& d, double r, const Point& center)
{
    if (!(r > 0)) throw UsageError("split radius must be positive");
    const auto& grid = d.grid();
    const RegionMask ball = RegionMask::ball(grid, center, r);
    SplitReport rep;
    grid->for_each_edge([&](std::size_t a, std::size_t b, const StencilOffset& off) {
        if (d.contains(a) == d.contains(b)) return;
        const bool ia = ball.contains(a);
        const bool ib = ball.contains(b);
        if (ia && ib) {
            rep.inner_q += off.weight_q;
        } else if (!ia && !ib) {
            rep.outer_q += off.weight_q;
        } else {
            rep.interface_q += off.weight_q;
        }
    });
    const double q = grid->length_quantum();
    rep.per_inner = static_cast<double>(rep.inner_q) * q;
    rep.per_outer = static_cast<double>(rep.outer_q) * q;
    rep.per_interface = static_cast<double>(rep.interface_q) * q;
    rep.per_total = static_cast<double>(rep.inner_q + rep.outer_q + rep.interface_q) * q;
    return rep;
}

CellSet intersection(const CellSet& a, const CellSet& b)
{
    require_same_grid(a.grid(), b.grid());
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.contains(i) && b.contains(i);
    return CellSet(a.grid(), std::move(out));
}

CellSet set_union(const CellSet& a, const CellSet& b)
{
    require_same_grid(a.grid(), b.grid());
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.contains(i) || b.contains(i);
    return CellSet(a.grid(), std::move(out));
}

std::pair<CellSet, CellSet> lattice(const CellSet& a, const CellSet& b)
{
    return {intersection(a, b), set_union(a, b)};
}

} // namespace cmclab
