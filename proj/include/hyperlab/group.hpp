#pragma once

#include <cmath>
#include <numbers>

namespace hyperlab {

inline constexpr double kPi = std::numbers::pi;

// Element of SL(2,R), row-major [[a, b], [c, d]].
struct GroupElement {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    GroupElement() = default;
    GroupElement(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

    static GroupElement identity() { return {}; }
    static GroupElement rotation(double theta);  // k_theta
    static GroupElement diagonal(double t);      // a_t = diag(e^{t/2}, e^{-t/2})
    static GroupElement unipotent(double x);     // n_x

    double det() const { return a * d - b * c; }
    GroupElement inverse() const { return {d, -b, -c, a}; }
    GroupElement transpose() const { return {a, c, b, d}; }
    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    // Divide by sqrt(det); throws InvalidElementError if det <= 0.
    GroupElement renormalized() const;
    // Throws unless |det - 1| <= tol.
    void validate(double tol = 1e-12) const;
};

GroupElement operator*(const GroupElement& g, const GroupElement& h);
double frobenius_distance(const GroupElement& g, const GroupElement& h);
double max_entry_difference(const GroupElement& g, const GroupElement& h);

struct IwasawaFactors {
    double theta;  // [0, 2pi)
    double t;
    double x;
    GroupElement reconstruct() const;
};

struct CartanFactors {
    double theta1;
    double t;  // >= 0
    double theta2;
    GroupElement reconstruct() const;
};

struct GroupConstants {
    int p = 1;
    int d = 1;
    int ell = 3;
    double delta_coeff = 0.5;
    int root_multiplicity = 1;
};

inline constexpr GroupConstants kConstants{};
static_assert(kConstants.ell == 2 * kConstants.p + kConstants.d);

// Angle on the boundary Omega = K/M, reduced to [0, pi).
double reduce_boundary(double omega);
// Angle on K, reduced to [0, 2pi).
double reduce_circle(double theta);

IwasawaFactors iwasawa(const GroupElement& g);
CartanFactors cartan(const GroupElement& g);

// H(g), the log of the A-part in g = k a_{H(g)} n.
double iwasawa_height(const GroupElement& g);
// kappa(g) = ||g|| = d_X(g.o, o).
double cartan_norm(const GroupElement& g);

// H(g^{-1} k_w).
double horocycle_cocycle(const GroupElement& g, double w);
// alpha_g(w): angle of g (cos w, sin w) mod pi.
double boundary_action(const GroupElement& g, double w);
// exp(-2 delta H(g^{-1} k_w)).
double rn_derivative(const GroupElement& g, double w);
// kappa(h^{-1} g).
double sym_space_distance(const GroupElement& g, const GroupElement& h);

// Product accumulator that renormalizes the determinant every 32 factors.
class ProductChain {
public:
    void multiply_right(const GroupElement& g);
    const GroupElement& value() const { return acc_; }
    GroupElement finish() const { return acc_.renormalized(); }

private:
    GroupElement acc_;
    int since_renorm_ = 0;
};

}  // namespace hyperlab
