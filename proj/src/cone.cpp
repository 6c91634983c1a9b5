#include "cmclab/cone.hpp"

#include "cmclab/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace cmclab {

CliffordCone make_cone(int p, int q)
{
    if (p < 1 || q < 1)
        throw UsageError("Clifford cone needs p, q >= 1 (got " + std::to_string(p) + ", " +
                         std::to_string(q) + ")");
    CliffordCone c;
    c.p = p;
    c.q = q;
    c.n = p + q + 1;
    c.a = std::sqrt(static_cast<double>(p) / (p + q));
    c.b = std::sqrt(static_cast<double>(q) / (p + q));
    c.A2 = static_cast<double>(p + q);
    if (std::abs(link_curvature_norm2(p, q, c.a, c.b) - c.A2) > 1e-12 * c.A2)
        throw InvariantError("|A_Sigma|^2 closed form disagrees with principal curvatures");
    return c;
}

double link_curvature_norm2(int p, int q, double a, double b)
{
    return p * (b / a) * (b / a) + q * (a / b) * (a / b);
}

long long sphere_harmonic_multiplicity(int p, int i)
{
    auto binom = [](long long n, long long k) -> long long {
        if (n < 0 || k < 0 || k > n) return 0;
        long long r = 1;
        for (long long j = 1; j <= k; ++j) r = r * (n - k + j) / j;
        return r;
    };
    return binom(i + p, p) - binom(i + p - 2, p);
}

SpectralData link_spectrum(const CliffordCone& cone, int k)
{
    if (k < 1) throw UsageError("link_spectrum needs K >= 1");
    // The K smallest distinct values all have i, j <= K since the pure
    // sequences (i,0) and (0,j) are strictly increasing.
    struct Entry {
        double value;
        long long mult;
    };
    std::vector<Entry> entries;
    for (int i = 0; i <= k; ++i) {
        for (int j = 0; j <= k; ++j) {
            // 1/a^2 = (p+q)/p and 1/b^2 = (p+q)/q, kept rational so integer cases are exact.
            const double v = static_cast<double>(i * (i + cone.p - 1) * (cone.p + cone.q)) / cone.p +
                             static_cast<double>(j * (j + cone.q - 1) * (cone.p + cone.q)) / cone.q - cone.A2;
            entries.push_back({v, sphere_harmonic_multiplicity(cone.p, i) *
                                      sphere_harmonic_multiplicity(cone.q, j)});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) { return x.value < y.value; });

    SpectralData out;
    for (const Entry& e : entries) {
        if (!out.eigenvalues.empty() &&
            std::abs(e.value - out.eigenvalues.back()) <= 1e-9 * std::max(1.0, std::abs(e.value))) {
            out.multiplicities.back() += static_cast<int>(e.mult);
            continue;
        }
        if (static_cast<int>(out.eigenvalues.size()) == k) break;
        out.eigenvalues.push_back(e.value);
        out.multiplicities.push_back(static_cast<int>(e.mult));
    }
    out.stable = stability(cone.n, out.eigenvalues.front());
    if (out.stable) std::tie(out.gamma_minus, out.gamma_plus) = gamma_pm(cone.n, out.eigenvalues.front());
    return out;
}

bool stability(int n, double lambda1)
{
    const double half = (n - 2) / 2.0;
    return std::max(-lambda1, 0.0) <= half * half;
}

bool stability(const CliffordCone& cone)
{
    return stability(cone.n, link_spectrum(cone, 1).eigenvalues.front());
}

std::pair<double, double> gamma_pm(int n, double lambda1)
{
    const double half = (n - 2) / 2.0;
    const double radicand = half * half + lambda1;
    if (radicand < 0)
        throw DomainError("cone is unstable: max{-lambda_1, 0} = " + std::to_string(-lambda1) +
                          " exceeds (n-2)^2/4 = " + std::to_string(half * half));
    const double root = std::sqrt(radicand);
    return {half - root, half + root};
}

std::pair<double, double> gamma_pm(const CliffordCone& cone)
{
    return gamma_pm(cone.n, -cone.A2);
}

double jacobi_eval(const CliffordCone& cone, double c1, double c2, double r)
{
    if (!(r > 0)) throw UsageError("jacobi_eval needs r > 0");
    const auto [gm, gp] = gamma_pm(cone);
    return c1 * std::pow(r, -gp) + c2 * std::pow(r, -gm);
}

// ---------------------------------------------------------------------------

RadialFunction::RadialFunction(double r_min, double r_max, std::vector<double> values)
    : r_min_(r_min), r_max_(r_max), values_(std::move(values))
{
    if (!(r_min_ > 0) || !(r_max_ > r_min_)) throw UsageError("radial grid needs 0 < r_min < r_max");
    if (values_.size() < 2) throw UsageError("radial function needs at least two samples");
    for (double v : values_) {
        if (!std::isfinite(v)) throw UsageError("radial samples must be finite");
    }
}

RadialFunction RadialFunction::sample(double r_min, double r_max, std::size_t n,
                                      const std::function<double(double)>& f)
{
    if (n < 2) throw UsageError("radial function needs at least two samples");
    std::vector<double> v(n);
    const double dt = std::log(r_max / r_min) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(r_min * std::exp(dt * static_cast<double>(i)));
    return RadialFunction(r_min, r_max, std::move(v));
}

double RadialFunction::log_step() const
{
    return std::log(r_max_ / r_min_) / static_cast<double>(values_.size() - 1);
}

double RadialFunction::radius(std::size_t i) const
{
    return r_min_ * std::exp(log_step() * static_cast<double>(i));
}

bool RadialFunction::same_grid(const RadialFunction& other) const
{
    return r_min_ == other.r_min_ && r_max_ == other.r_max_ && values_.size() == other.values_.size();
}

LogDerivatives log_derivatives_2(const RadialFunction& f, std::size_t i)
{
    const double dt = f.log_step();
    const auto& v = f.values();
    return {(v[i + 1] - v[i - 1]) / (2 * dt), (v[i + 1] - 2 * v[i] + v[i - 1]) / (dt * dt)};
}

LogDerivatives log_derivatives_4(const RadialFunction& f, std::size_t i)
{
    const double dt = f.log_step();
    const auto& v = f.values();
    const double d1 = (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12 * dt);
    const double d2 = (-v[i + 2] + 16 * v[i + 1] - 30 * v[i] + 16 * v[i - 1] - v[i - 2]) / (12 * dt * dt);
    return {d1, d2};
}

double lc_apply(const CliffordCone& cone, double r, double f, const LogDerivatives& d)
{
    return (d.f_tt + (cone.n - 2) * d.f_t + cone.A2 * f) / (r * r);
}

double lc_residual(const CliffordCone& cone, const RadialFunction& f)
{
    if (f.size() < 16) throw UsageError("lc_residual needs at least 16 radial nodes");
    double worst = 0;
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double v = lc_apply(cone, f.radius(i), f.value(i), log_derivatives_2(f, i));
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

JacobiFit classify_positive_jacobi(const CliffordCone& cone, const RadialFunction& f)
{
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f.value(i) > 0))
            throw DomainError("classify_positive_jacobi: sample " + std::to_string(i) + " is not positive");
    }
    const auto [gm, gp] = gamma_pm(cone);
    const auto n = static_cast<Eigen::Index>(f.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = f.radius(static_cast<std::size_t>(i));
        const double v = f.value(static_cast<std::size_t>(i));
        design(i, 0) = std::pow(r, -gp) / v;
        design(i, 1) = std::pow(r, -gm) / v;
    }
    const Eigen::Vector2d c = design.colPivHouseholderQr().solve(rhs);
    JacobiFit fit{c(0), c(1), 0.0};
    const Eigen::VectorXd rel = design * c - rhs;
    fit.fit_error = rel.cwiseAbs().maxCoeff();
    return fit;
}

} // namespace cmclab
