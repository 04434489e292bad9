#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hyperlab/boundary.hpp"
#include "hyperlab/measure.hpp"

namespace hyperlab {

struct StationaryDensity {
    CVector coefficients;  // Omega-modes of psi_F
    FourierTruncation trunc;
    double positivity_min = 0.0;
    double mass = 0.0;
    double eigenvalue_distance = 0.0;  // |lambda - 1| of the selected T0* eigenvalue
    double asymmetry = 0.0;            // max |c_m - conj(c_{-m})|
    double value(double theta) const;
};

// Fixed point of T0* with mass 1. Throws FixedPointError when the eigenvalue at 1 is missing or not simple.
StationaryDensity stationary_density(const AtomicMeasure& mu, const FourierTruncation& trunc,
                                     const MatrixCache* cache = nullptr);

// max over random real trigonometric phi of |int T0 phi psi - int phi psi|, by pointwise quadrature.
double stationarity_residual(const StationaryDensity& psi, const AtomicMeasure& mu, int test_count,
                             std::uint64_t seed);

// Dyadic block norms |P_l c|_2, blocks 2^{l-1} <= |m| < 2^l and l = 0 for m = 0.
std::vector<double> dyadic_block_norms(const CVector& coeffs, const FourierTruncation& trunc);

struct DecayReport {
    std::vector<double> block_norms;
    double s = 0.0;        // fitted exponent, |P_l| ~ 2^{-(s+1) l}
    bool infinite = false;  // all blocks l >= 1 vanish
    int m_class = 0;        // floor(s - dim K / 2)
    bool truncated_fit = true;
};

// Least squares over blocks l in [2, l_max - 1].
DecayReport smoothness_report(const CVector& coeffs, const FourierTruncation& trunc);
inline DecayReport smoothness_report(const StationaryDensity& psi) {
    return smoothness_report(psi.coefficients, psi.trunc);
}

inline constexpr double kAgmonConstant = 2.0;

struct AgmonResult {
    double sup = 0.0;
    double rhs = 0.0;  // |phi|_2^{1/2} |phi|_{H^t}^{1/2}
    double ratio = 0.0;
};
AgmonResult agmon_check(const CVector& coeffs, const FourierTruncation& trunc, double t = 1.0);

// Top singular value of the (l2, l1) block of rho_0^+(g) times 2^{|l1 - l2|}.
double almost_orthogonality_probe(const GroupElement& g, int l1, int l2, const FourierTruncation& trunc);

inline constexpr double kAlmostOrthogonalityConstant = 2.0;

struct PartialIntegration {
    double lhs = 0.0;  // <phi1, -phi2''> from coefficients
    cplx lhs_c;
    cplx rhs_c;        // <phi1', phi2'> by grid quadrature
    double error = 0.0;
};
// Circle form of the Casimir partial integration identity.
PartialIntegration partial_integration(const CVector& c1, const CVector& c2, const FourierTruncation& trunc);

struct HighModeCurve {
    std::vector<int> L;
    std::vector<double> s0_plus;  // on K-modes
    std::vector<double> t0;       // on Omega-modes
    std::optional<int> s0_plus_quarter;
    std::optional<int> s0_plus_half;
    std::optional<int> t0_quarter;
    std::optional<int> t0_half;
};
HighModeCurve high_mode_decay_curve(const AtomicMeasure& mu, int N, const std::vector<int>& L_range,
                                    const MatrixCache* cache = nullptr);

}  // namespace hyperlab
