#include "hyperlab/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <cmath>
#include <limits>
#include <memory>

#include "hyperlab/errors.hpp"
#include "hyperlab/group.hpp"

namespace hyperlab {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ValidationError("gauss_legendre needs n >= 1");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table(
        gsl_integration_glfixed_table_alloc(static_cast<size_t>(n)), &gsl_integration_glfixed_table_free);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i)
        gsl_integration_glfixed_point(a, b, static_cast<size_t>(i), &rule.nodes[i], &rule.weights[i], table.get());
    return rule;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

double strip_half_width(double t) {
    t = std::abs(t);
    if (t < 1e-300) return std::numeric_limits<double>::infinity();
    return 0.5 * std::acosh(1.0 / std::tanh(t));
}

int periodic_nodes(double t, double r, int min_nodes, int max_nodes) {
    const double w = strip_half_width(t);
    if (!std::isfinite(w)) return next_pow2(min_nodes);
    const double need = (kPi * std::abs(r) + 36.0) / (2.0 * w);
    const double capped = std::min<double>(need, max_nodes);
    return next_pow2(std::max(min_nodes, static_cast<int>(std::ceil(capped))));
}

}  // namespace hyperlab
