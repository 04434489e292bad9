#pragma once

#include <vector>

namespace hyperlab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule with n nodes on [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Smallest power of two >= n.
int next_pow2(int n);

// Imaginary distance from the real axis to the nearest singularity of
// theta -> H(a_t^{-1} k_theta); governs the periodic quadrature size.
double strip_half_width(double t);

// Periodic node count on [0, pi) keeping the aliasing error near e^{-36} for
// integrands e^{-(1/2 + i r) H(g^{-1} k_theta)} with kappa(g) = t.
int periodic_nodes(double t, double r, int min_nodes, int max_nodes = 1 << 18);

}  // namespace hyperlab
