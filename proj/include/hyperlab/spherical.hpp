#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "hyperlab/boundary.hpp"
#include "hyperlab/group.hpp"

namespace hyperlab {

// One positive root r_l: multiplicity m(r_l) and the scale s_l with <r, r_l>/<r_l, r_l> = s_l * r.
struct RootDatum {
    double multiplicity = 1.0;
    double scale = 1.0;
    double half_multiplicity = 0.0;  // m(r_l / 2); used only for divisible roots
};

struct RootSystem {
    std::vector<RootDatum> indivisible;
    std::vector<RootDatum> divisible;  // roots r_l whose half is also a root
    double delta = 0.5;                // half-sum of positive roots in the same coordinate
};

RootSystem sl2_root_system();

// log|I(z)| for complex z, product of Beta factors over the root system.
double log_abs_I(const RootSystem& roots, cplx z);
// |c(r)|^{-2} = |I(delta) / I(ir)|^2; 0 at r = 0.
double c_inverse_sq(double r, const RootSystem& roots);
double c_inverse_sq(double r);

struct QuadraticFit {
    double c0 = 0.0;  // leading coefficient
    double c1 = 0.0;  // next-order coefficient
};
// Fits c_inverse_sq(r) / r^2 = c0 + c1 r^2 on (0, r_hi].
QuadraticFit fit_small_r(double r_hi = 0.01, int samples = 40);

// phi_r(a_t) by adaptive periodic quadrature.
double spherical_function(double r, double t);
// Complex value of the same quadrature, for checking reality.
cplx spherical_function_complex(double r, double t);

inline constexpr double kPlancherelConstant = 1.0 / (2.0 * kPi * kPi);

struct PlancherelGrid {
    std::vector<double> r_nodes;
    std::vector<double> r_weights;  // Gauss weight * |c(r)|^{-2} * constant
    double r_max = 0.0;
    double constant = kPlancherelConstant;
};

PlancherelGrid plancherel_grid(double r_max = 20.0, int nodes = 128, double constant = kPlancherelConstant);

struct HelgasonCoefficients {
    CMatrix values;  // rows r-nodes, columns Omega-modes
    std::vector<double> r_nodes;
    FourierTruncation trunc;
    double l1_norm = 0.0;         // NaN for band-limited inputs
    double max_l2_over_l1 = 0.0;  // max over nodes of |f^(r, .)|_2 / |f|_1
};

// Inversion sum f(g.o) = sum_i w_i (1/pi) int f^(r_i, w) (rho_{r_i}(g) 1)(w) dw. The boundary
// synthesis of f^(r_i, .) is cached per periodic node count.
class InverseEvaluator {
public:
    InverseEvaluator(HelgasonCoefficients coeffs, PlancherelGrid grid);
    double operator()(const GroupElement& g) const;
    const HelgasonCoefficients& coefficients() const { return coeffs_; }
    const PlancherelGrid& grid() const { return grid_; }

private:
    const CMatrix& synthesis(int nodes) const;

    HelgasonCoefficients coeffs_;
    PlancherelGrid grid_;
    mutable std::mutex mutex_;
    mutable std::map<int, std::unique_ptr<CMatrix>> cache_;
};

class TestFunctionX {
public:
    enum class Kind { GaussianBump, BandLimited };

    // exp(-d_X(x, center.o)^2 / (2 width^2)).
    static TestFunctionX gaussian_bump(const GroupElement& center, double width);
    // f(g.o) = sum_i w_i sum_m profile(r_i) modes_m (rho_{r_i}(g) 1)_{-m} on an internal grid over [0, R].
    static TestFunctionX band_limited(double R, const CVector& modes, const FourierTruncation& trunc,
                                      int nodes = 128);

    Kind kind() const { return kind_; }
    bool radial() const;
    // f(g.o).
    double operator()(const GroupElement& g) const;
    // Radial profile f(a_t.o); radial functions only.
    double profile(double t) const;
    // Radius beyond which the function is treated as zero in X-quadrature.
    double quadrature_radius() const;

    const GroupElement& center() const { return center_; }
    double width() const { return width_; }
    double band_limit() const { return R_; }
    const CVector& modes() const { return modes_; }
    const FourierTruncation& trunc() const { return trunc_; }
    // Exact band-limited coefficients at frequency r (zero for r >= R).
    CVector band_coefficients(double r) const;
    // The bump r-profile of the band-limited kind.
    static double band_profile(double r, double R);

private:
    Kind kind_ = Kind::GaussianBump;
    GroupElement center_;
    double width_ = 0.5;
    double R_ = 0.0;
    CVector modes_;
    FourierTruncation trunc_;
    std::shared_ptr<const InverseEvaluator> evaluator_;
};

struct RadialTransform {
    std::vector<double> values;
    double t_max = 0.0;
    double boundary_value = 0.0;  // |f| at t_max relative to its maximum
    bool truncated = false;
};

// f^(r) = 2 pi int f(a_t) phi_r(a_t) sinh t dt on the grid nodes.
RadialTransform spherical_transform(const TestFunctionX& f, const std::vector<double>& r_nodes, int t_nodes = 192);


// f^(r, w) = int f(g.o) e^{-(1/2 - ir) H(g^{-1} k_w)} dg projected on Omega-modes.
HelgasonCoefficients helgason_transform(const TestFunctionX& f, const std::vector<double>& r_nodes,
                                        const FourierTruncation& trunc, int t_nodes = 192);

// f(g.o) by the inversion sum over the grid.
std::vector<double> inverse_transform(const HelgasonCoefficients& coeffs, const PlancherelGrid& grid,
                                      const std::vector<GroupElement>& points);

struct Norms {
    double l1 = 0.0;
    double star = 0.0;
    double sobolev = std::numeric_limits<double>::quiet_NaN();
    bool l1_truncated = false;  // band-limited input: integral over the quadrature ball only
};
Norms norms(const TestFunctionX& f, double s, const PlancherelGrid* grid = nullptr,
            const FourierTruncation* trunc = nullptr);

// int_X |f| (1 + d(x, o)^2)^power dx over the function's quadrature ball.
double x_integral_abs(const TestFunctionX& f, double power);

// Band-limited test function with r-profile cut at R.
TestFunctionX bandlimited_bump(double R, const CVector& mode_profile, const FourierTruncation& trunc);

struct Calibration {
    double constant = 0.0;                 // fitted from the reference bump
    std::vector<double> others;            // fits from the other bumps
    double max_relative_spread = 0.0;      // max |other / constant - 1|
    bool stable = false;                   // spread within 1e-3
};
// Fits the inversion constant on a reference bump and checks it on the others.
Calibration calibrate_plancherel(const TestFunctionX& reference, const std::vector<TestFunctionX>& others,
                                 const FourierTruncation& trunc, double r_max = 20.0, int nodes = 128);

// Points g = k_theta a_t on a polar patch around the function's centre, for sup-error checks.
std::vector<GroupElement> support_points(const TestFunctionX& f, int radial, int angular, double radius_in_widths = 2.0);

}  // namespace hyperlab
