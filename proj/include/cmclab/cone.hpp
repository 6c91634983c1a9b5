#pragma once

// Clifford minimal cones C_{p,q} over S^p(a) x S^q(b) ⊂ S^{p+q+1}, their
// link Jacobi spectrum, stability, indicial exponents and radial Jacobi fields.
//
// Conventions: the first link eigenfunction is the constant 1; radial
// functions are sampled on log-uniform grids.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace cmclab {

struct CliffordCone {
    int p = 0;
    int q = 0;
    int n = 0;     // hypersurface dimension p + q + 1
    double a = 0;  // radius of the S^p factor
    double b = 0;  // radius of the S^q factor
    double A2 = 0; // |A_Sigma|^2, constant on the link
};

CliffordCone make_cone(int p, int q);

// |A_Sigma|^2 from the principal curvatures b/a (p times) and -a/b (q times).
double link_curvature_norm2(int p, int q, double a, double b);

struct SpectralData {
    std::vector<double> eigenvalues;  // distinct, ascending
    std::vector<int> multiplicities;
    bool stable = false;
    double gamma_minus = 0; // meaningful only when stable
    double gamma_plus = 0;
};

// Distinct eigenvalues of -L_Sigma = -Delta_Sigma - |A|^2:
//     i(i+p-1)/a^2 + j(j+q-1)/b^2 - |A|^2,  i, j >= 0.
SpectralData link_spectrum(const CliffordCone& cone, int k);

// Dimension of degree-i spherical harmonics on S^p.
long long sphere_harmonic_multiplicity(int p, int i);

// max{-lambda_1, 0} <= (n-2)^2/4.
bool stability(const CliffordCone& cone);
bool stability(int n, double lambda1);

// (gamma-, gamma+) = (n-2)/2 -/+ sqrt((n-2)^2/4 + lambda_1). Throws DomainError if unstable.
std::pair<double, double> gamma_pm(const CliffordCone& cone);
std::pair<double, double> gamma_pm(int n, double lambda1);

// (c1 r^{-gamma+} + c2 r^{-gamma-}) * phi_1, phi_1 = 1.
double jacobi_eval(const CliffordCone& cone, double c1, double c2, double r);

// Samples of a function of |x| on a log-uniform grid.
class RadialFunction {
public:
    RadialFunction(double r_min, double r_max, std::vector<double> values);
    static RadialFunction sample(double r_min, double r_max, std::size_t n,
                                 const std::function<double(double)>& f);

    double r_min() const { return r_min_; }
    double r_max() const { return r_max_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double value(std::size_t i) const { return values_[i]; }
    double radius(std::size_t i) const;
    double log_step() const;

    bool same_grid(const RadialFunction& other) const;

private:
    double r_min_;
    double r_max_;
    std::vector<double> values_;
};

// Log-grid derivatives df/dt and d2f/dt2 (t = ln r) at node i.
struct LogDerivatives {
    double f_t = 0;
    double f_tt = 0;
};
// Second-order central differences; requires 1 <= i <= n-2.
LogDerivatives log_derivatives_2(const RadialFunction& f, std::size_t i);
// Fourth-order central differences; requires 2 <= i <= n-3.
LogDerivatives log_derivatives_4(const RadialFunction& f, std::size_t i);

// L_C applied to f * phi_1 at interior node i:
//     r^{-2} (f_tt + (n-2) f_t + |A|^2 f).
double lc_apply(const CliffordCone& cone, double r, double f, const LogDerivatives& d);

// Max over interior nodes of |L_C f| with second-order differences. Needs >= 16 nodes.
double lc_residual(const CliffordCone& cone, const RadialFunction& f);

struct JacobiFit {
    double c1 = 0; // coefficient of r^{-gamma+}
    double c2 = 0; // coefficient of r^{-gamma-}
    double fit_error = 0; // max relative deviation
};

// Relative least-squares fit of positive samples by the two radial Jacobi modes.
JacobiFit classify_positive_jacobi(const CliffordCone& cone, const RadialFunction& f);

} // namespace cmclab
