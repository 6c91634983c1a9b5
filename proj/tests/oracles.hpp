#pragma once

// Independent reference computations used only by tests.

#include "cmclab/grid.hpp"

#include <cstdint>
#include <vector>

namespace oracle {

// Lowest distinct eigenvalues of -Delta on the round S^p(radius), computed by a
// symmetrized finite-volume discretization of the zonal operator
// sin^{1-p} d/dθ (sin^{p-1} d/dθ) on n cells (periodic circle when p = 1).
std::vector<double> sphere_laplacian_eigenvalues(int p, double radius, int n, int count);

// Lowest distinct eigenvalues of -Delta - |A|^2 on S^p(a) x S^q(b) with |A|^2
// from principal curvatures b/a and -a/b, as sums of the factor spectra.
std::vector<double> product_link_eigenvalues(int p, int q, int n, int count);

// Face-stencil perimeter in units of h^{d-1}: counts, axis by axis, adjacent
// cell pairs with different labels using explicit nested loops.
std::int64_t face_count_perimeter(const cmclab::CellSet& d);

} // namespace oracle
