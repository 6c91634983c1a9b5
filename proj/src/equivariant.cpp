#include "cmclab/equivariant.hpp"

#include "cmclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace cmclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fornberg's recursion: weights of the m-th derivative at z from nodes x.
std::vector<double> fd_weights(double z, const std::vector<double>& x, int m)
{
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][m];
    return w;
}

double cross(const Vec2& o, const Vec2& a, const Vec2& b)
{
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2)
{
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

double weight(int p, int q, double x, double y)
{
    return std::pow(x, p) * std::pow(y, q);
}

std::string state_string(double s, double x, double y, double th)
{
    std::ostringstream os;
    os.precision(17);
    os << "s=" << s << " x=" << x << " y=" << y << " theta=" << th;
    return os.str();
}

} // namespace

ProfileCurve make_profile(int p, int q, std::vector<Vec2> points, std::vector<double> tangent_angles,
                          std::optional<std::vector<double>> arclength)
{
    if (p < 0 || q < 0) throw UsageError("profile exponents must be nonnegative");
    if (points.size() != tangent_angles.size()) throw UsageError("points and tangents differ in length");
    ProfileCurve c;
    c.p = p;
    c.q = q;
    c.tangents.reserve(points.size());
    for (double th : tangent_angles) c.tangents.push_back({std::cos(th), std::sin(th)});
    if (arclength) {
        if (arclength->size() != points.size()) throw UsageError("arclength length differs from points");
        c.arclength = std::move(*arclength);
    } else {
        c.arclength.assign(points.size(), 0.0);
        for (std::size_t i = 1; i < points.size(); ++i)
            c.arclength[i] = c.arclength[i - 1] + std::hypot(points[i][0] - points[i - 1][0],
                                                             points[i][1] - points[i - 1][1]);
    }
    c.points = std::move(points);
    return c;
}

void validate_profile(const ProfileCurve& curve, double nominal_step)
{
    const auto& pts = curve.points;
    if (pts.size() < 2) return;
    double longest = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = std::hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1]);
        if (!(d > 0) || d > 2.0 * nominal_step)
            throw InvariantError("profile spacing " + std::to_string(d) + " at sample " + std::to_string(i) +
                                 " is outside (0, 2 x nominal]");
        longest = std::max(longest, d);
    }
    // Bucket segments on a grid of the longest segment length; only segments
    // sharing a bucket can intersect.
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto lo_x = static_cast<long long>(std::floor(std::min(pts[i][0], pts[i + 1][0]) / longest));
        const auto hi_x = static_cast<long long>(std::floor(std::max(pts[i][0], pts[i + 1][0]) / longest));
        const auto lo_y = static_cast<long long>(std::floor(std::min(pts[i][1], pts[i + 1][1]) / longest));
        const auto hi_y = static_cast<long long>(std::floor(std::max(pts[i][1], pts[i + 1][1]) / longest));
        for (long long bx = lo_x; bx <= hi_x; ++bx)
            for (long long by = lo_y; by <= hi_y; ++by) buckets[{bx, by}].push_back(i);
    }
    for (const auto& [key, segs] : buckets) {
        for (std::size_t u = 0; u < segs.size(); ++u) {
            for (std::size_t v = u + 1; v < segs.size(); ++v) {
                const std::size_t i = segs[u];
                const std::size_t j = segs[v];
                if (j == i + 1 || i == j + 1) continue;
                if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1]))
                    throw InvariantError("profile self-intersects between segments " + std::to_string(i) +
                                         " and " + std::to_string(j));
            }
        }
    }
}

double profile_mean_curvature(const ProfileCurve& curve, std::size_t i)
{
    const std::size_t n = curve.size();
    if (n < 5) throw UsageError("profile_mean_curvature needs at least 5 samples");
    if (i == 0 || i + 1 >= n) throw UsageError("profile_mean_curvature: sample " + std::to_string(i) + " is an endpoint");
    const Vec2& pt = curve.points[i];
    if ((curve.p > 0 && !(pt[0] > 0)) || (curve.q > 0 && !(pt[1] > 0)))
        throw DomainError("profile_mean_curvature: sample " + std::to_string(i) + " touches an axis");

    const std::size_t first = std::min(i >= 2 ? i - 2 : 0, n - 5);
    std::vector<double> s(5), theta(5);
    double prev = 0;
    for (std::size_t k = 0; k < 5; ++k) {
        const Vec2& t = curve.tangents[first + k];
        double th = std::atan2(t[1], t[0]);
        if (k > 0) {
            while (th - prev > std::numbers::pi) th -= 2 * std::numbers::pi;
            while (th - prev < -std::numbers::pi) th += 2 * std::numbers::pi;
        }
        prev = th;
        theta[k] = th;
        s[k] = curve.arclength[first + k];
    }
    const std::vector<double> w = fd_weights(curve.arclength[i], s, 1);
    double k_planar = 0;
    for (std::size_t k = 0; k < 5; ++k) k_planar += w[k] * theta[k];

    const Vec2& t = curve.tangents[i];
    double h = k_planar;
    if (curve.p > 0) h += curve.p * t[1] / pt[0];
    if (curve.q > 0) h -= curve.q * t[0] / pt[1];
    return h;
}

double weighted_length(const ProfileCurve& curve)
{
    double total = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const Vec2& a = curve.points[i - 1];
        const Vec2& b = curve.points[i];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        total += len * weight(curve.p, curve.q, 0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]));
    }
    return total;
}

// ---------------------------------------------------------------------------

namespace {

struct State {
    double x, y, th;
};

// Dormand-Prince 5(4) tableau.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176,
                 A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200,
                 E6 = 22.0 / 525, E7 = -1.0 / 40;

class LeafOde {
public:
    LeafOde(int p, int q, double lambda) : p_(p), q_(q), lambda_(lambda) {}

    // False when the state has left the open quadrant.
    bool operator()(const State& s, State& d) const
    {
        if (!(s.x > 0) || !(s.y > 0)) return false;
        const double c = std::cos(s.th);
        const double sn = std::sin(s.th);
        d = {c, sn, lambda_ - p_ * sn / s.x + q_ * c / s.y};
        return std::isfinite(d.th);
    }

private:
    int p_, q_;
    double lambda_;
};

State axpy(const State& y, double h, std::initializer_list<std::pair<double, const State*>> terms)
{
    State out = y;
    for (const auto& [c, k] : terms) {
        out.x += h * c * k->x;
        out.y += h * c * k->y;
        out.th += h * c * k->th;
    }
    return out;
}

} // namespace

ProfileCurve shoot_leaf(int p, int q, double s0, LeafSide side, const LeafOptions& opts)
{
    if (p < 1 || q < 1) throw UsageError("shoot_leaf needs p, q >= 1");
    if (!(s0 > 0) || !std::isfinite(s0)) throw UsageError("shoot_leaf needs s0 > 0");
    if (!(opts.sample_step > 0) || !(opts.rtol > 0) || !(opts.r_max > s0))
        throw UsageError("shoot_leaf needs sample_step > 0, rtol > 0 and r_max > s0");
    const CliffordCone cone = make_cone(p, q);
    if (!stability(cone))
        throw DomainError("shoot_leaf: cone (" + std::to_string(p) + "," + std::to_string(q) + ") is unstable");

    const LeafOde f(p, q, opts.lambda);
    const double ds = opts.sample_step * s0;
    const double eps = 1e-4 * s0;
    const double atol_pos = 1e-12 * s0;
    const double atol_th = 1e-12;
    const double side_sign = side == LeafSide::Above ? 1.0 : -1.0;

    // Axis point and the series start just off the axis (θ is odd in s there).
    State y{};
    std::vector<Vec2> pts;
    std::vector<double> angles;
    if (side == LeafSide::Above) {
        const double k0 = (opts.lambda + q / s0) / (1 + p);
        pts.push_back({0.0, s0});
        angles.push_back(0.0);
        y = {eps - k0 * k0 * eps * eps * eps / 6, s0 + k0 * eps * eps / 2, k0 * eps};
    } else {
        const double k0 = (opts.lambda - p / s0) / (1 + q);
        pts.push_back({s0, 0.0});
        angles.push_back(std::numbers::pi / 2);
        y = {s0 - k0 * eps * eps / 2, eps - k0 * k0 * eps * eps * eps / 6, std::numbers::pi / 2 + k0 * eps};
    }

    double s = eps;
    double h = 1e-3 * s0;
    std::size_t next = 1;
    const double s_limit = 20.0 * opts.r_max + 20.0 * s0;
    State k1{};
    if (!f(y, k1)) throw IntegrationError("shoot_leaf: invalid start state " + state_string(s, y.x, y.y, y.th));

    while (true) {
        const double target = static_cast<double>(next) * ds;
        const bool landing = s + h >= target;
        const double step = landing ? target - s : h;
        if (step < 1e-14 * s0)
            throw IntegrationError("shoot_leaf: step size collapsed at " + state_string(s, y.x, y.y, y.th));

        State k2{}, k3{}, k4{}, k5{}, k6{}, k7{};
        bool ok = f(axpy(y, step, {{A21, &k1}}), k2);
        ok = ok && f(axpy(y, step, {{A31, &k1}, {A32, &k2}}), k3);
        ok = ok && f(axpy(y, step, {{A41, &k1}, {A42, &k2}, {A43, &k3}}), k4);
        ok = ok && f(axpy(y, step, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}}), k5);
        ok = ok && f(axpy(y, step, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}}), k6);
        State y5{};
        if (ok) {
            y5 = axpy(y, step, {{B1, &k1}, {B3, &k3}, {B4, &k4}, {B5, &k5}, {B6, &k6}});
            ok = f(y5, k7);
        }
        if (!ok) {
            h = step * 0.25;
            continue;
        }
        const State e = axpy(State{0, 0, 0}, step, {{E1, &k1}, {E3, &k3}, {E4, &k4}, {E5, &k5}, {E6, &k6}, {E7, &k7}});
        const double err = std::max({std::abs(e.x) / (atol_pos + opts.rtol * std::max(std::abs(y.x), std::abs(y5.x))),
                                     std::abs(e.y) / (atol_pos + opts.rtol * std::max(std::abs(y.y), std::abs(y5.y))),
                                     std::abs(e.th) / (atol_th + opts.rtol * std::max(std::abs(y.th), std::abs(y5.th)))});
        const double factor = err > 0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
        if (err > 1.0) {
            h = step * factor;
            continue;
        }

        y = y5;
        k1 = k7;
        s = landing ? target : s + step;
        if (!landing) h = step * factor;
        else h = std::max(h, step * factor);

        const double u = -cone.b * y.x + cone.a * y.y;
        if (!(u * side_sign > 0))
            throw IntegrationError("shoot_leaf: leaf crossed the cone ray at " + state_string(s, y.x, y.y, y.th));
        if (s > s_limit)
            throw IntegrationError("shoot_leaf: arclength exceeded " + std::to_string(s_limit) + " at " +
                                   state_string(s, y.x, y.y, y.th));

        if (landing) {
            pts.push_back({y.x, y.y});
            angles.push_back(y.th);
            ++next;
            if (std::hypot(y.x, y.y) >= opts.r_max) break;
        }
    }

    std::vector<double> arc(pts.size());
    for (std::size_t i = 0; i < arc.size(); ++i) arc[i] = static_cast<double>(i) * ds;
    return make_profile(p, q, std::move(pts), std::move(angles), std::move(arc));
}

const char* to_string(DecayMode m)
{
    switch (m) {
    case DecayMode::GammaMinus: return "gamma_minus";
    case DecayMode::GammaPlus: return "gamma_plus";
    case DecayMode::None: return "none";
    }
    return "none";
}

Vec2 cone_coordinates(const CliffordCone& cone, const Vec2& point)
{
    return {cone.a * point[0] + cone.b * point[1], -cone.b * point[0] + cone.a * point[1]};
}

DecayFit fit_decay_exponent(const ProfileCurve& curve, const CliffordCone& cone)
{
    if (curve.size() < 2) throw PreconditionError("fit_decay_exponent needs a nontrivial curve");
    const auto [gm, gp] = gamma_pm(cone);
    const double start = std::hypot(curve.points.front()[0], curve.points.front()[1]);
    const double r_end = cone_coordinates(cone, curve.points.back())[0];
    if (!(r_end >= 40.0 * start))
        throw PreconditionError("fit_decay_exponent: curve reaches r = " + std::to_string(r_end) +
                                ", needs one decade beyond 4 x start radius " + std::to_string(start));

    DecayFit fit;
    fit.r_hi = r_end;
    fit.r_lo = r_end / 10.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (const Vec2& pt : curve.points) {
        const Vec2 cu = cone_coordinates(cone, pt);
        if (cu[0] < fit.r_lo || cu[0] > fit.r_hi) continue;
        if (cu[1] == 0) throw DomainError("fit_decay_exponent: curve touches the cone inside the fit window");
        const double lx = std::log(cu[0]);
        const double ly = std::log(std::abs(cu[1]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 3) throw PreconditionError("fit_decay_exponent: fewer than 3 samples in the outer decade");
    const double md = static_cast<double>(m);
    const double slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    fit.gamma_fit = -slope;

    const double dm = std::abs(fit.gamma_fit - gm) / std::abs(gm);
    const double dp = std::abs(fit.gamma_fit - gp) / std::abs(gp);
    if (std::min(dm, dp) <= 0.05) fit.matched = dm <= dp ? DecayMode::GammaMinus : DecayMode::GammaPlus;
    return fit;
}

namespace {

// du/dr at every node of a log grid.
std::vector<double> radial_slope(const RadialFunction& u)
{
    const std::size_t n = u.size();
    const double dt = u.log_step();
    const auto& v = u.values();
    std::vector<double> ur(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ft = 0;
        if (n >= 5 && i >= 2 && i + 2 < n) {
            ft = log_derivatives_4(u, i).f_t;
        } else if (i >= 1 && i + 1 < n) {
            ft = log_derivatives_2(u, i).f_t;
        } else if (i == 0) {
            ft = n >= 3 ? (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dt) : (v[1] - v[0]) / dt;
        } else {
            ft = n >= 3 ? (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * dt) : (v[n - 1] - v[n - 2]) / dt;
        }
        ur[i] = ft / u.radius(i);
    }
    return ur;
}

} // namespace

ProfileCurve graph_curve(const CliffordCone& cone, const RadialFunction& u)
{
    const std::vector<double> ur = radial_slope(u);
    const double theta_c = std::atan2(cone.b, cone.a);
    std::vector<Vec2> pts(u.size());
    std::vector<double> angles(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u.radius(i);
        pts[i] = {cone.a * r - cone.b * u.value(i), cone.b * r + cone.a * u.value(i)};
        angles[i] = theta_c + std::atan(ur[i]);
    }
    return make_profile(cone.p, cone.q, std::move(pts), std::move(angles));
}

RadialFunction graph_over_cone(const ProfileCurve& curve, const CliffordCone& cone, double r_min, double r_max,
                               std::size_t n)
{
    if (n < 2 || !(r_min > 0) || !(r_max > r_min)) throw UsageError("graph_over_cone needs 0 < r_min < r_max, n >= 2");
    const double theta_c = std::atan2(cone.b, cone.a);
    const std::size_t m = curve.size();
    std::vector<double> rr(m), uu(m), du(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 cu = cone_coordinates(cone, curve.points[i]);
        rr[i] = cu[0];
        uu[i] = cu[1];
        const double rel = std::atan2(curve.tangents[i][1], curve.tangents[i][0]) - theta_c;
        du[i] = std::tan(rel);
    }
    // The covering stretch must be strictly increasing in r.
    std::size_t hi = m - 1;
    while (hi > 0 && rr[hi] < r_max) --hi;
    if (rr[hi] < r_max) throw DomainError("graph_over_cone: curve does not reach r_max");
    std::size_t lo = hi;
    while (lo > 0 && rr[lo] > r_min) {
        if (!(rr[lo - 1] < rr[lo])) throw DomainError("graph_over_cone: curve is not a graph over the cone on the range");
        --lo;
    }
    if (rr[lo] > r_min) throw DomainError("graph_over_cone: curve does not reach r_min");
    for (std::size_t i = lo; i <= hi; ++i) {
        const double c = std::cos(std::atan2(curve.tangents[i][1], curve.tangents[i][0]) - theta_c);
        if (!(c > 0)) throw DomainError("graph_over_cone: tangent is not transverse to the cone normal");
    }

    return RadialFunction::sample(r_min, r_max, n, [&](double r) {
        const auto it = std::upper_bound(rr.begin() + static_cast<std::ptrdiff_t>(lo),
                                         rr.begin() + static_cast<std::ptrdiff_t>(hi) + 1, r);
        std::size_t j = static_cast<std::size_t>(it - rr.begin());
        j = std::clamp<std::size_t>(j, lo + 1, hi);
        const double r0 = rr[j - 1];
        const double r1 = rr[j];
        const double len = r1 - r0;
        const double t = (r - r0) / len;
        const double t2 = t * t;
        const double t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * uu[j - 1] + (t3 - 2 * t2 + t) * len * du[j - 1] + (-2 * t3 + 3 * t2) * uu[j] +
               (t3 - t2) * len * du[j];
    });
}

double graph_jacobian_det(const CliffordCone& cone, double r, double u)
{
    return std::pow(1.0 - u * cone.b / (cone.a * r), cone.p) * std::pow(1.0 + u * cone.a / (cone.b * r), cone.q);
}

double mean_curvature_operator(const CliffordCone& cone, double r, double u, double u_r, double u_rr)
{
    const double x = cone.a * r - cone.b * u;
    const double y = cone.b * r + cone.a * u;
    if (!(x > 0) || !(y > 0)) throw DomainError("graph leaves the open quadrant at r = " + std::to_string(r));
    const double w = std::sqrt(1.0 + u_r * u_r);
    const double h = u_rr / (w * w * w) + cone.p * (cone.b + cone.a * u_r) / (w * x) -
                     cone.q * (cone.a - cone.b * u_r) / (w * y);
    return h * graph_jacobian_det(cone, r, u);
}

double embeddedness_bound(const CliffordCone& cone)
{
    return std::min(cone.a / cone.b, cone.b / cone.a);
}

double cmc_graph_residual(const CliffordCone& cone, const RadialFunction& u, double lambda)
{
    if (u.size() < 5) throw UsageError("cmc_graph_residual needs at least 5 radial nodes");
    const double bound = embeddedness_bound(cone);
    const std::vector<double> ur = radial_slope(u);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u.radius(i);
        const double e = std::abs(u.value(i)) / r + std::abs(ur[i]);
        if (!(e <= bound))
            throw DomainError("cmc_graph_residual: |u|/r + |u'| = " + std::to_string(e) + " exceeds M = " +
                              std::to_string(bound) + " at r = " + std::to_string(r));
    }
    double worst = 0;
    for (std::size_t i = 2; i + 2 < u.size(); ++i) {
        const double r = u.radius(i);
        const LogDerivatives d = log_derivatives_4(u, i);
        const double u_r = d.f_t / r;
        const double u_rr = (d.f_tt - d.f_t) / (r * r);
        const double v = u.value(i);
        const double res = mean_curvature_operator(cone, r, v, u_r, u_rr) - lambda * graph_jacobian_det(cone, r, v);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

LinearizationReport linearization_check(const CliffordCone& cone, const RadialFunction& u, const RadialFunction& v)
{
    if (!u.same_grid(v)) throw UsageError("linearization_check: u and v live on different radial grids");
    if (u.size() < 16) throw UsageError("linearization_check needs at least 16 radial nodes");
    std::vector<double> hv(u.size());
    bool nonzero = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        hv[i] = v.value(i) - u.value(i);
        nonzero = nonzero || hv[i] != 0;
    }
    if (!nonzero) throw UsageError("linearization_check: h = v - u vanishes identically");
    const RadialFunction h(u.r_min(), u.r_max(), hv);

    LinearizationReport rep;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        const double r = u.radius(i);
        auto eval = [&](const RadialFunction& f) {
            const LogDerivatives d = log_derivatives_2(f, i);
            return mean_curvature_operator(cone, r, f.value(i), d.f_t / r, (d.f_tt - d.f_t) / (r * r));
        };
        const LogDerivatives dh = log_derivatives_2(h, i);
        const double h_r = dh.f_t / r;
        const double h_rr = (dh.f_tt - dh.f_t) / (r * r);
        const double scale = std::abs(h_rr) + std::abs(h_r) / r + std::abs(h.value(i)) / (r * r);
        if (!(scale > 0)) continue;
        const double rem = eval(v) - eval(u) - lc_apply(cone, r, h.value(i), dh);
        rep.radii.push_back(r);
        rep.ratio.push_back(std::abs(rem) / scale);
    }
    if (rep.ratio.empty()) throw UsageError("linearization_check: h has no resolvable node");
    rep.max_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());

    // Inner decade, or the lower third when the range is shorter than a decade.
    const double r_cut = std::min(10.0 * rep.radii.front(),
                                  rep.radii.front() * std::pow(rep.radii.back() / rep.radii.front(), 1.0 / 3.0));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < rep.radii.size() && rep.radii[k] <= r_cut; ++k) {
        if (!(rep.ratio[k] > 0)) continue;
        const double lx = std::log(rep.radii[k]);
        const double ly = std::log(rep.ratio[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m >= 2) {
        const double md = static_cast<double>(m);
        rep.inner_slope = (md * sxy - sx * sy) / (md * sxx - sx * sx);
    }
    rep.vanishes_at_origin = m >= 2 && rep.inner_slope > 0;
    return rep;
}

// ---------------------------------------------------------------------------

GridPtr make_quadrant_grid(int n, double box, Stencil stencil)
{
    if (n < 2 || !(box > 0)) throw UsageError("quadrant grid needs n >= 2 and box > 0");
    return GridGeometry::corner_aligned({n, n}, box / n, stencil);
}

std::vector<double> equivariant_weights(const GridGeometry& grid, int p, int q)
{
    if (grid.dim() != 2) throw UsageError("equivariant weights need a 2-D grid");
    if (p < 0 || q < 0) throw UsageError("equivariant exponents must be nonnegative");
    std::vector<double> w(grid.cell_count());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Point c = grid.center(i);
        if ((p > 0 && !(c[0] > 0)) || (q > 0 && !(c[1] > 0)))
            throw UsageError("quadrant grid must keep cell centers off the axes");
        w[i] = weight(p, q, c[0], c[1]);
    }
    return w;
}

CellSet cone_wedge(const GridPtr& grid, const CliffordCone& cone)
{
    return RegionMask::where(grid, [&](const Point& c) { return cone.a * c[1] < cone.b * c[0]; }).as_set();
}

CellSet cone_wedge(const GridPtr& grid, int p, int q)
{
    return cone_wedge(grid, make_cone(p, q));
}

MinCutProblem make_equivariant_problem(int p, int q, const GridPtr& grid, double lambda, const CellSet& boundary,
                                       double obstacle_r)
{
    require_same_grid(grid, boundary.grid());
    if (!(obstacle_r > 0)) throw UsageError("obstacle radius must be positive");
    const RegionMask ball = RegionMask::ball(grid, {0, 0, 0}, obstacle_r);
    std::vector<bool> in(grid->cell_count()), out(grid->cell_count());
    for (std::size_t i = 0; i < grid->cell_count(); ++i) {
        if (ball.contains(i)) continue;
        in[i] = boundary.contains(i);
        out[i] = !boundary.contains(i);
    }
    MinCutProblem prob;
    prob.grid = grid;
    prob.lambda = lambda;
    prob.fixed_in = RegionMask(grid, std::move(in));
    prob.fixed_out = RegionMask(grid, std::move(out));
    prob.active_region = RegionMask::whole(grid);
    prob.cell_weight = equivariant_weights(*grid, p, q);
    return prob;
}

MinimizerResult weighted_minimize(int p, int q, const GridPtr& grid, double lambda, const CellSet& boundary,
                                  double obstacle_r)
{
    return solve(make_equivariant_problem(p, q, grid, lambda, boundary, obstacle_r));
}

double weighted_volume(const CellSet& d, int p, int q)
{
    const auto& grid = *d.grid();
    const double h = grid.spacing();
    double total = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!d.contains(i)) continue;
        const Point c = grid.center(i);
        total += weight(p, q, c[0], c[1]) * h * h;
    }
    return total;
}

namespace {

struct Face {
    Vec2 mid;
    Vec2 a; // segment endpoints
    Vec2 b;
};

std::vector<Face> boundary_faces(const CellSet& d)
{
    const auto& grid = *d.grid();
    if (grid.dim() != 2) throw UsageError("interface geometry is implemented for 2-D grids");
    const double hh = 0.5 * grid.spacing();
    const int nx = grid.extents()[0];
    const int ny = grid.extents()[1];
    std::vector<Face> faces;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t c = grid.index({i, j, 0});
            const Point pc = grid.center(c);
            if (i + 1 < nx && d.contains(c) != d.contains(grid.index({i + 1, j, 0}))) {
                const double xm = pc[0] + hh;
                faces.push_back({{xm, pc[1]}, {xm, pc[1] - hh}, {xm, pc[1] + hh}});
            }
            if (j + 1 < ny && d.contains(c) != d.contains(grid.index({i, j + 1, 0}))) {
                const double ym = pc[1] + hh;
                faces.push_back({{pc[0], ym}, {pc[0] - hh, ym}, {pc[0] + hh, ym}});
            }
        }
    }
    return faces;
}

} // namespace

double interface_deviation(const CellSet& d, const CliffordCone& cone, double r_lo, double r_hi)
{
    double worst = 0;
    for (const Face& f : boundary_faces(d)) {
        const double r = std::hypot(f.mid[0], f.mid[1]);
        if (r < r_lo || r > r_hi) continue;
        worst = std::max(worst, std::abs(cone_coordinates(cone, f.mid)[1]));
    }
    return worst;
}

double min_origin_distance(const CellSet& d)
{
    double best = kInf;
    for (const Face& f : boundary_faces(d)) {
        const double cx = std::clamp(0.0, std::min(f.a[0], f.b[0]), std::max(f.a[0], f.b[0]));
        const double cy = std::clamp(0.0, std::min(f.a[1], f.b[1]), std::max(f.a[1], f.b[1]));
        best = std::min(best, std::hypot(cx, cy));
    }
    return best;
}

bool has_interface_pinch(const CellSet& d)
{
    const auto& grid = *d.grid();
    if (grid.dim() != 2) throw UsageError("interface geometry is implemented for 2-D grids");
    const int nx = grid.extents()[0];
    const int ny = grid.extents()[1];
    static constexpr int ring[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    for (int i = 1; i + 1 < nx; ++i) {
        for (int j = 1; j + 1 < ny; ++j) {
            int transitions = 0;
            for (int k = 0; k < 8; ++k) {
                const auto& u = ring[k];
                const auto& v = ring[(k + 1) % 8];
                const bool a = d.contains(grid.index({i + u[0], j + u[1], 0}));
                const bool b = d.contains(grid.index({i + v[0], j + v[1], 0}));
                transitions += a != b ? 1 : 0;
            }
            if (transitions >= 6) return true;
        }
    }
    return false;
}

double boundary_hausdorff(const CellSet& a, const CellSet& b)
{
    require_same_grid(a.grid(), b.grid());
    const auto fa = boundary_faces(a);
    const auto fb = boundary_faces(b);
    if (fa.empty() && fb.empty()) return 0;
    if (fa.empty() || fb.empty()) return kInf;
    auto directed = [](const std::vector<Face>& from, const std::vector<Face>& to) {
        double worst = 0;
        for (const Face& f : from) {
            double best = kInf;
            for (const Face& g : to) best = std::min(best, std::hypot(f.mid[0] - g.mid[0], f.mid[1] - g.mid[1]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(fa, fb), directed(fb, fa));
}

double PerturbationField::cutoff(double radius) const
{
    if (radius <= r_lo || radius >= r_hi) return 0;
    const double ramp = 0.25 * (r_hi - r_lo);
    const double from_edge = std::min(radius - r_lo, r_hi - radius);
    if (from_edge >= ramp) return 1;
    const double s = std::sin(0.5 * std::numbers::pi * from_edge / ramp);
    return s * s;
}

CellSet displace_inward(const CellSet& d, const PerturbationField& field)
{
    if (!(field.t >= 0) || !(field.r_lo >= 0) || !(field.r_hi > field.r_lo))
        throw UsageError("perturbation needs t >= 0 and 0 <= r_lo < r_hi");
    const auto& grid = *d.grid();
    if (grid.dim() != 2) throw UsageError("inward displacement is implemented for 2-D grids");
    const double h = grid.spacing();
    const int nx = grid.extents()[0];
    const int ny = grid.extents()[1];
    const int reach = static_cast<int>(std::ceil(field.t / h)) + 1;

    CellSet out = d;
    for (std::size_t c = 0; c < d.size(); ++c) {
        if (!d.contains(c)) continue;
        const Point pc = grid.center(c);
        const double disp = field.displacement(std::hypot(pc[0], pc[1]));
        if (!(disp > 0)) continue;
        const Coord cc = grid.coord(c);
        double nearest = kInf;
        for (int di = -reach; di <= reach; ++di) {
            for (int dj = -reach; dj <= reach; ++dj) {
                const int i = cc[0] + di;
                const int j = cc[1] + dj;
                if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
                if (d.contains(grid.index({i, j, 0}))) continue;
                nearest = std::min(nearest, h * std::hypot(di, dj));
            }
        }
        // Distance from the cell center to the boundary is nearest - h/2 along an axis.
        if (nearest - 0.5 * h < disp) out.set(c, false);
    }
    return out;
}

ApproxRunReport approximation_sequence(const ApproxParams& params, const CellSet& base,
                                       const std::vector<double>& t_list)
{
    if (t_list.empty()) throw UsageError("approximation_sequence: t_list is empty");
    for (std::size_t j = 0; j < t_list.size(); ++j) {
        if (!std::isfinite(t_list[j]) || t_list[j] < 0)
            throw UsageError("approximation_sequence: t values must be finite and nonnegative");
        if (j > 0 && !(t_list[j] < t_list[j - 1]))
            throw UsageError("approximation_sequence: t_list must be strictly decreasing");
    }
    const GridPtr& grid = base.grid();
    const MinimizerResult self = weighted_minimize(params.p, params.q, grid, params.lambda, base, params.obstacle_r);
    if (!(self.set_max == base))
        throw PreconditionError("approximation_sequence: base is not the largest minimizer of its own boundary data");

    ApproxRunReport rep;
    rep.base_origin_distance = min_origin_distance(base);
    rep.steps.reserve(t_list.size());
    const CellSet* previous = nullptr;
    for (double t : t_list) {
        const PerturbationField field{t, params.annulus_lo, params.annulus_hi};
        const CellSet data = displace_inward(base, field);
        MinimizerResult res = weighted_minimize(params.p, params.q, grid, params.lambda, data, params.obstacle_r);

        ApproxStep step;
        step.t = t;
        step.set = std::move(res.set_max);
        step.inclusion_ok = step.set.subset_of(base);
        if (!step.inclusion_ok)
            throw InvariantError("approximation_sequence: E_j is not contained in E at t = " + std::to_string(t));
        step.nested_ok = previous == nullptr || previous->subset_of(step.set);
        CellSet diff(grid);
        for (std::size_t i = 0; i < base.size(); ++i) diff.set(i, base.contains(i) != step.set.contains(i));
        step.sym_diff_volume = weighted_volume(diff, params.p, params.q);
        step.hausdorff_to_E = boundary_hausdorff(step.set, base);
        step.min_origin_distance = min_origin_distance(step.set);
        step.singular_proxy_flag = has_interface_pinch(step.set);
        step.energy = res.energy;
        step.unique = res.unique;
        rep.steps.push_back(std::move(step));
        previous = &rep.steps.back().set;
    }
    return rep;
}

} // namespace cmclab
