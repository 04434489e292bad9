#include "hyperlab/group.hpp"

#include <sstream>

#include "hyperlab/errors.hpp"

namespace hyperlab {

GroupElement GroupElement::rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
}

GroupElement GroupElement::diagonal(double t) {
    return {std::exp(0.5 * t), 0.0, 0.0, std::exp(-0.5 * t)};
}

GroupElement GroupElement::unipotent(double x) { return {1.0, x, 0.0, 1.0}; }

GroupElement GroupElement::renormalized() const {
    const double dt = det();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        std::ostringstream os;
        os << "invalid group element: determinant " << dt << " is not positive";
        throw InvalidElementError(os.str());
    }
    const double s = 1.0 / std::sqrt(dt);
    return {a * s, b * s, c * s, d * s};
}

void GroupElement::validate(double tol) const {
    const double dt = det();
    if (!std::isfinite(dt) || std::abs(dt - 1.0) > tol) {
        std::ostringstream os;
        os << "invalid group element: det = " << dt;
        throw InvalidElementError(os.str());
    }
}

GroupElement operator*(const GroupElement& g, const GroupElement& h) {
    return {g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d,
            g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d};
}

double frobenius_distance(const GroupElement& g, const GroupElement& h) {
    const double da = g.a - h.a, db = g.b - h.b, dc = g.c - h.c, dd = g.d - h.d;
    return std::sqrt(da * da + db * db + dc * dc + dd * dd);
}

double max_entry_difference(const GroupElement& g, const GroupElement& h) {
    return std::max({std::abs(g.a - h.a), std::abs(g.b - h.b), std::abs(g.c - h.c),
                     std::abs(g.d - h.d)});
}

double reduce_boundary(double omega) {
    double r = std::fmod(omega, kPi);
    if (r < 0.0) r += kPi;
    if (r >= kPi) r -= kPi;
    return r;
}

double reduce_circle(double theta) {
    const double two_pi = 2.0 * kPi;
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

GroupElement IwasawaFactors::reconstruct() const {
    return GroupElement::rotation(theta) * GroupElement::diagonal(t) * GroupElement::unipotent(x);
}

GroupElement CartanFactors::reconstruct() const {
    return GroupElement::rotation(theta1) * GroupElement::diagonal(t) *
           GroupElement::rotation(theta2);
}

double iwasawa_height(const GroupElement& g) { return std::log(g.a * g.a + g.c * g.c); }

IwasawaFactors iwasawa(const GroupElement& g0) {
    const GroupElement g = g0.renormalized();
    IwasawaFactors f;
    f.t = iwasawa_height(g);
    f.theta = reduce_circle(std::atan2(g.c, g.a));
    // (k^T g)_{12} = e^{t/2} x
    const double ct = std::cos(f.theta), st = std::sin(f.theta);
    f.x = (ct * g.b + st * g.d) * std::exp(-0.5 * f.t);
    return f;
}

CartanFactors cartan(const GroupElement& g0) {
    const GroupElement g = g0.renormalized();
    // Closed-form 2x2 SVD: g = R(beta) diag(s1, s2) R(gamma).
    const double e = 0.5 * (g.a + g.d), f = 0.5 * (g.a - g.d);
    const double gg = 0.5 * (g.c + g.b), h = 0.5 * (g.c - g.b);
    const double q = std::hypot(e, h), r = std::hypot(f, gg);
    const double a1 = std::atan2(gg, f), a2 = std::atan2(h, e);
    CartanFactors c;
    c.t = 2.0 * std::log(q + r);
    c.theta1 = reduce_circle(0.5 * (a2 + a1));
    c.theta2 = reduce_circle(0.5 * (a2 - a1));
    return c;
}

double cartan_norm(const GroupElement& g) {
    const double e = 0.5 * (g.a + g.d), f = 0.5 * (g.a - g.d);
    const double gg = 0.5 * (g.c + g.b), h = 0.5 * (g.c - g.b);
    const double s1 = std::hypot(e, h) + std::hypot(f, gg);
    return 2.0 * std::log(s1);
}

double horocycle_cocycle(const GroupElement& g, double w) {
    const double cw = std::cos(w), sw = std::sin(w);
    const double v1 = g.d * cw - g.b * sw;
    const double v2 = -g.c * cw + g.a * sw;
    return std::log(v1 * v1 + v2 * v2);
}

double boundary_action(const GroupElement& g, double w) {
    const double cw = std::cos(w), sw = std::sin(w);
    return reduce_boundary(std::atan2(g.c * cw + g.d * sw, g.a * cw + g.b * sw));
}

double rn_derivative(const GroupElement& g, double w) {
    return std::exp(-2.0 * kConstants.delta_coeff * horocycle_cocycle(g, w));
}

double sym_space_distance(const GroupElement& g, const GroupElement& h) {
    return cartan_norm(h.inverse() * g);
}

void ProductChain::multiply_right(const GroupElement& g) {
    acc_ = acc_ * g;
    if (++since_renorm_ >= 32) {
        acc_ = acc_.renormalized();
        since_renorm_ = 0;
    }
}

}  // namespace hyperlab
