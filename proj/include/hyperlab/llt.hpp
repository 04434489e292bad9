#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperlab/boundary.hpp"
#include "hyperlab/measure.hpp"
#include "hyperlab/spherical.hpp"

namespace hyperlab {

struct LLTConfig {
    AtomicMeasure measure = default_measure(0.3);
    TestFunctionX f = TestFunctionX::gaussian_bump(GroupElement::identity(), 0.7);
    GroupElement h0;  // basepoint x0 = h0.o
    std::vector<int> n_range = {1, 2, 4, 6, 8, 16, 32, 64, 128, 256};
    FourierTruncation trunc = FourierTruncation::omega(64, 512);
    double r_max = 20.0;
    int r_nodes = 128;
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 20240611;
    bool use_mc = true;
    int u_nodes = 48;  // Gauss nodes on [0, delta0] for the scaled-frequency branch
    std::vector<double> lambda_grid = default_lambda_grid();
    const MatrixCache* cache = nullptr;

    void validate() const;
};

struct MonteCarloEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;
};

struct FourierLHS {
    double value = 0.0;
    double low = 0.0;   // r <= delta0
    double high = 0.0;  // r > delta0
    double imag = 0.0;  // imaginary residue of the sum
};

struct RhsLimit {
    double path_a = 0.0;  // X-quadrature of int f(g.x0) psi_0(g) dg
    double path_b = 0.0;  // boundary formula c_mu <rho_0(h0) 1, eta'> sum_m f^_m(0) eta_{-m}
    double relative_gap = 0.0;
    double value() const { return path_b; }
};

struct ConvergenceRecord {
    int n = 0;
    std::optional<double> lhs_exact;
    std::optional<MonteCarloEstimate> lhs_mc;
    FourierLHS lhs_fourier;
    double rhs_limit = 0.0;
    double err_exact = std::numeric_limits<double>::quiet_NaN();
    double err_mc = std::numeric_limits<double>::quiet_NaN();
    double err_fourier = 0.0;
    std::string exact_note;  // refusal message when the atom cap blocks the exact sum
};

struct LineFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ConvergenceReport {
    std::vector<ConvergenceRecord> records;
    LineFit error_slope;            // log|lhs_fourier - rhs| vs log n, n >= 8
    LineFit residual_slope;         // same for |low - rhs|, the high-frequency part removed
    // log|high| - (l/2) log n vs n for n >= 8, so high ~ A n^{l/2} e^{-c n} with c = -slope.
    LineFit high_frequency_decay;
    LineFit high_frequency_raw;     // log|high| vs n without removing the n^{l/2} prefactor
    bool monotone_after_16 = false;
    double max_lhs_over_l1 = 0.0;   // LLT bound probe
};

// gamma(r) = cG e^{-c2 Q r^2} r^2.
double gamma_density(double r, double Q, double c2, double cG = kPi * kPi);
// Closed-form int over the real line of gamma.
double gamma_integral_closed_form(double Q, double c2, double cG = kPi * kPi);

// psi_{mu,r}(g) = <eta_r, rho_r(g) eta'_r>.
cplx psi_mu_r(const SpectralSummary& s, const GroupElement& g, const FourierTruncation& trunc);

class LLTLab {
public:
    explicit LLTLab(LLTConfig cfg);

    const LLTConfig& config() const { return cfg_; }
    const SpectralSummary& perron() const { return perron_; }
    double sigma() const { return perron_.sigma; }
    const LambdaCurve& curve() const { return curve_; }
    const HessianResult& hessian() const { return hessian_; }
    double delta0() const { return curve_.delta0; }
    const PlancherelGrid& grid() const { return grid_; }
    const HelgasonCoefficients& transform() const { return fhat_; }
    double l1_norm() const { return l1_; }
    // Branch summaries at the Gauss nodes u_k of [0, delta0].
    const std::vector<SpectralSummary>& branch() const { return branch_; }
    const std::vector<double>& branch_weights() const { return branch_w_; }

    // C * int_0^inf gamma by quadrature, the half-line form of int_R gamma with constant C / 2.
    double c_mu() const { return c_mu_; }

    double prefactor(int n) const;
    double lhs_exact(int n) const;
    MonteCarloEstimate lhs_monte_carlo(int n) const;
    FourierLHS lhs_fourier(int n) const;
    std::vector<FourierLHS> lhs_fourier(const std::vector<int>& ns) const;

    double psi_zero(const GroupElement& g) const;
    RhsLimit rhs_limit() const;
    // Same limit for another test function and basepoint, reusing the spectral data.
    RhsLimit rhs_limit(const TestFunctionX& f, const GroupElement& h0) const;
    double psi_n(const GroupElement& g, int n) const;
    // Tail of the gamma integral dropped when delta0 sqrt(n) exceeds r_max.
    double psi_n_tail(int n) const;

    ConvergenceReport run_convergence() const;

    // lhs_fourier low part on a dense grid over [0, delta0] for very large n.
    std::vector<double> large_n_low_part(const std::vector<int>& ns, int nodes = 96) const;

    // max over branch nodes u of n * |n (lambda(u) / sigma)^n |c(u)|^{-2} - gamma(u sqrt(n))|.
    double s_c_surrogate_constant(int n) const;
    // max over branch nodes of |(S_u / sigma)^n - (lambda(u) / sigma)^n E_u|.
    double low_frequency_remainder(int n) const;

private:
    void build_branch();
    // Per node r_i and per n: sum_m c_m(r_i) ((S_{r_i} / sigma)^n rho_{r_i}(h0) 1)_{-m}.
    std::vector<std::vector<cplx>> node_terms(const std::vector<double>& r, const CMatrix& coeffs,
                                              const std::vector<int>& ns) const;
    RhsLimit rhs_limit_impl(const TestFunctionX& f, const CVector& fhat0, const GroupElement& h0) const;
    double path_a(const TestFunctionX& f, const GroupElement& h0) const;
    double path_b(const CVector& fhat0, const GroupElement& h0) const;

    LLTConfig cfg_;
    SpectralSummary perron_;
    LambdaCurve curve_;
    HessianResult hessian_;
    PlancherelGrid grid_;
    HelgasonCoefficients fhat_;
    CVector fhat0_;
    double l1_ = 0.0;
    double c_mu_ = 0.0;
    std::vector<double> branch_u_;
    std::vector<double> branch_w_;
    std::vector<SpectralSummary> branch_;
    std::vector<BoundaryOperatorMatrix> branch_ops_;
};

}  // namespace hyperlab
