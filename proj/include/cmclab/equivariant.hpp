#pragma once

// O(p+1) x O(q+1)-equivariant hypersurfaces in R^{p+q+2}, represented by
// profile curves in the open quadrant {x > 0, y > 0}. The point (x, y)
// stands for the product of spheres of radii x and y; area carries the
// weight x^p y^q and volume the weight x^p y^q dx dy.
//
// Orientation: a profile curve bounds the region on its left. The scalar
// mean curvature is positive when the mean curvature vector points into that
// region; with unit tangent T and planar curvature k = dθ/ds,
//
//     H = k + p T_y / x - q T_x / y.

#include "cmclab/cone.hpp"
#include "cmclab/grid.hpp"
#include "cmclab/mincut.hpp"

#include <array>
#include <optional>
#include <vector>

namespace cmclab {

using Vec2 = std::array<double, 2>;

struct ProfileCurve {
    int p = 0;
    int q = 0;
    std::vector<Vec2> points;
    std::vector<Vec2> tangents; // unit
    std::vector<double> arclength;

    std::size_t size() const { return points.size(); }
};

// Curve from points and tangent angles; arclength by chord summation.
ProfileCurve make_profile(int p, int q, std::vector<Vec2> points, std::vector<double> tangent_angles,
                          std::optional<std::vector<double>> arclength = std::nullopt);

// Spacing within 2x the nominal step and no self-intersection. Throws InvariantError.
void validate_profile(const ProfileCurve& curve, double nominal_step);

double profile_mean_curvature(const ProfileCurve& curve, std::size_t i);

// Weighted length sum |segment| * w(midpoint), w = x^p y^q.
double weighted_length(const ProfileCurve& curve);

// ---------------------------------------------------------------------------
// Minimal (and CMC) profile leaves by shooting from an axis.

enum class LeafSide {
    Above, // starts on the y-axis at (0, s0), lies on the y-axis side of the cone
    Below, // starts on the x-axis at (s0, 0)
};

struct LeafOptions {
    double r_max = 100.0;      // stop once |(x,y)| reaches this radius
    double sample_step = 0.01; // output arclength spacing, in units of s0
    double rtol = 1e-10;
    double lambda = 0.0;
};

// Integrates dθ/ds = lambda - p sinθ/x + q cosθ/y with an embedded
// Dormand-Prince 5(4) pair. Throws IntegrationError on axis hits, crossing of
// the cone ray, or step-size collapse.
ProfileCurve shoot_leaf(int p, int q, double s0, LeafSide side, const LeafOptions& opts = {});

enum class DecayMode { GammaMinus, GammaPlus, None };
const char* to_string(DecayMode m);

struct DecayFit {
    double gamma_fit = 0;
    DecayMode matched = DecayMode::None;
    double r_lo = 0;
    double r_hi = 0;
};

// Cone coordinates of a profile point: radius along the cone ray and the
// normal offset toward the y-axis side.
Vec2 cone_coordinates(const CliffordCone& cone, const Vec2& point);

// Fits log|u| against log r over the outer decade of the curve's radial extent.
DecayFit fit_decay_exponent(const ProfileCurve& curve, const CliffordCone& cone);

// The curve r (a,b) + u(r) (-b, a), oriented outward; du/dr by finite differences.
ProfileCurve graph_curve(const CliffordCone& cone, const RadialFunction& u);

// Resamples a profile curve as a radial graph over the cone on a log grid
// (cubic Hermite interpolation in the cone radius).
RadialFunction graph_over_cone(const ProfileCurve& curve, const CliffordCone& cone, double r_min, double r_max,
                               std::size_t n);

// Mean curvature operator of the cone applied to a radial graph at radius r:
// M_C u = H(graph) * det(Id - u A_C).
double mean_curvature_operator(const CliffordCone& cone, double r, double u, double u_r, double u_rr);

// det(Id - u A_C) with principal curvatures b/(a r) (p times), -a/(b r) (q times), 0.
double graph_jacobian_det(const CliffordCone& cone, double r, double u);

// Bound M for |u|/r + |du/dr| under which the graph stays in the open quadrant.
double embeddedness_bound(const CliffordCone& cone);

// Max over interior nodes of |M_C u - lambda det(Id - u A_C)| (fourth-order differences).
double cmc_graph_residual(const CliffordCone& cone, const RadialFunction& u, double lambda);

struct LinearizationReport {
    std::vector<double> radii;
    std::vector<double> ratio; // |M_C v - M_C u - L_C h| / (|h''| + |h'|/r + |h|/r^2)
    double max_ratio = 0;
    double inner_slope = 0;    // d log(ratio) / d log r over the inner decade
    bool vanishes_at_origin = false;
};

LinearizationReport linearization_check(const CliffordCone& cone, const RadialFunction& u,
                                        const RadialFunction& v);

// ---------------------------------------------------------------------------
// Weighted discrete minimization in the quadrant.

// n x n cells over [0, box]^2; cell centers sit half a cell off the axes.
GridPtr make_quadrant_grid(int n, double box, Stencil stencil = Stencil::Crofton);

std::vector<double> equivariant_weights(const GridGeometry& grid, int p, int q);

// Cells strictly on the x-axis side of the cone ray y/x = b/a.
CellSet cone_wedge(const GridPtr& grid, const CliffordCone& cone);
CellSet cone_wedge(const GridPtr& grid, int p, int q);

MinCutProblem make_equivariant_problem(int p, int q, const GridPtr& grid, double lambda, const CellSet& boundary,
                                       double obstacle_r);

MinimizerResult weighted_minimize(int p, int q, const GridPtr& grid, double lambda, const CellSet& boundary,
                                  double obstacle_r);

// Weighted volume sum over cells of x^p y^q h^2.
double weighted_volume(const CellSet& d, int p, int q);

// Max distance from the ray y/x = b/a over boundary-face midpoints with radius in [r_lo, r_hi].
double interface_deviation(const CellSet& d, const CliffordCone& cone, double r_lo, double r_hi);

// Distance from the origin to the nearest boundary face of d.
double min_origin_distance(const CellSet& d);

// True if some interior cell sees >= 3 interface arcs in its 3x3 neighbourhood.
bool has_interface_pinch(const CellSet& d);

// Hausdorff distance between the boundary-face midpoint sets of a and b.
double boundary_hausdorff(const CellSet& a, const CellSet& b);

// Inward displacement t * chi(|x|) supported in the annulus [r_lo, r_hi];
// chi = 1 on the middle half and tapers smoothly to 0 at the ends.
struct PerturbationField {
    double t = 0;
    double r_lo = 0.5;
    double r_hi = 1.5;

    double cutoff(double radius) const;
    double displacement(double radius) const { return t * cutoff(radius); }
};

// Removes from d the cells within the displacement distance of its boundary.
CellSet displace_inward(const CellSet& d, const PerturbationField& field);

struct ApproxParams {
    int p = 3;
    int q = 3;
    double lambda = 0.0;
    double obstacle_r = 1.0;
    double annulus_lo = 0.5;
    double annulus_hi = 1.5;
};

struct ApproxStep {
    double t = 0;
    bool inclusion_ok = false; // E_j ⊆ E
    bool nested_ok = false;    // E_{j-1} ⊆ E_j (true for the first step)
    double sym_diff_volume = 0;
    double hausdorff_to_E = 0;
    double min_origin_distance = 0;
    bool singular_proxy_flag = false;
    double energy = 0;
    bool unique = false;
    CellSet set;
};

struct ApproxRunReport {
    double base_origin_distance = 0;
    std::vector<ApproxStep> steps;
};

// base must be the inclusion-largest minimizer of its own boundary data.
// E_j is the inclusion-largest minimizer for the data displaced inward by t_j.
ApproxRunReport approximation_sequence(const ApproxParams& params, const CellSet& base,
                                       const std::vector<double>& t_list);

} // namespace cmclab
