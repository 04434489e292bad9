#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "hyperlab/group.hpp"
#include "hyperlab/measure.hpp"

namespace hyperlab {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

enum class ModeSpace { Omega, K };
enum class OperatorKind { Rho, Transfer, TransferPlus, T0 };

const char* to_string(OperatorKind kind);
const char* to_string(ModeSpace space);

// Omega-modes e^{2im theta}, |m| <= N, on [0, pi); K-modes e^{im theta}, |m| <= 2N, on [0, 2pi).
struct FourierTruncation {
    int N = 64;
    int Q = 512;  // nodes on [0, pi); K-modes use 2Q nodes on [0, 2pi)
    ModeSpace space = ModeSpace::Omega;

    static FourierTruncation omega(int N, int Q = 0) { return {N, Q > 0 ? Q : 8 * N, ModeSpace::Omega}; }
    static FourierTruncation k_modes(int N, int Q = 0) { return {N, Q > 0 ? Q : 8 * N, ModeSpace::K}; }

    int max_mode() const { return space == ModeSpace::Omega ? N : 2 * N; }
    int dim() const { return 2 * max_mode() + 1; }
    int index(int m) const { return m + max_mode(); }
    int mode(int index) const { return index - max_mode(); }
    int nodes() const { return space == ModeSpace::Omega ? Q : 2 * Q; }
    double node(int j) const { return kPi * j / Q; }
    // Frequency multiplier s in e^{i s m theta}.
    int frequency() const { return space == ModeSpace::Omega ? 2 : 1; }
    void validate() const;
};

struct BoundaryOperatorMatrix {
    CMatrix entries;
    double r = 0.0;
    FourierTruncation trunc;
    OperatorKind kind = OperatorKind::Rho;
};

// Galerkin matrix of rho_r(g) (Omega-modes) or rho_r^+(g) (K-modes).
BoundaryOperatorMatrix assemble_rho(const GroupElement& g, double r, const FourierTruncation& trunc);

// Galerkin rho_r(g) applied to v without forming the matrix.
CVector apply_rho(const GroupElement& g, double r, const FourierTruncation& trunc, const CVector& v);
// rho_r(g) 1.
CVector rho_one(const GroupElement& g, double r, const FourierTruncation& trunc);

struct CacheKey {
    std::uint64_t measure_hash = 0;
    double r = 0.0;
    int N = 0;
    int Q = 0;
    OperatorKind kind = OperatorKind::Transfer;
    ModeSpace space = ModeSpace::Omega;
    std::uint64_t digest() const;
};

enum class CacheStatus { Miss, Hit, Corrupt };

// Binary cache of assembled matrices. Each file carries its key and a payload checksum.
class MatrixCache {
public:
    explicit MatrixCache(std::filesystem::path dir);
    // Uses $HYPERLAB_CACHE_DIR when set, otherwise the fallback.
    static MatrixCache from_env(const std::filesystem::path& fallback);

    CacheStatus load(const CacheKey& key, CMatrix& out) const;
    void store(const CacheKey& key, const CMatrix& m) const;
    std::filesystem::path path_for(const CacheKey& key) const;
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
};

BoundaryOperatorMatrix assemble_transfer(const AtomicMeasure& mu, double r, const FourierTruncation& trunc,
                                         OperatorKind kind, const MatrixCache* cache = nullptr);

struct SpectralSummary {
    double r = 0.0;
    double sigma = 0.0;  // top modulus eigenvalue of S_0
    cplx lambda;         // tracked branch value
    double lambda2_abs = 0.0;
    double gap = 0.0;        // |lambda| - |lambda_2|
    double ess_proxy = 0.0;  // |lambda_2|
    bool ess_stable = false;
    double ess_change = -1.0;  // |lambda_2| change under N -> 2N, -1 if not computed
    CVector eta;               // unit L2 norm
    CVector eta_prime;         // <eta', eta> = 1
    double residual = 0.0;
    double adjoint_residual = 0.0;
    double eta_min = 0.0;        // min of synthesized eta (r = 0)
    double eta_prime_min = 0.0;  // min of synthesized eta' (r = 0)
    CVector eigenvalues;         // sorted by decreasing modulus
};

// Perron summary at r = 0. If doubled (same measure at 2N) is given, sets ess_stable.
SpectralSummary spectral_summary(const BoundaryOperatorMatrix& S, const BoundaryOperatorMatrix* doubled = nullptr);
// Eigenpair of S with maximal overlap with previous_eta; sigma is carried for reference.
SpectralSummary tracked_summary(const BoundaryOperatorMatrix& S, const CVector& previous_eta, double sigma);

struct LambdaPoint {
    double r = 0.0;
    cplx lambda;
    double gap = 0.0;
    double spectral_radius = 0.0;
    double norm = 0.0;
};

struct LambdaCurve {
    std::vector<LambdaPoint> points;  // sorted by r
    double sigma = 0.0;
    double delta0 = 0.0;
    double sup_rho_high = std::numeric_limits<double>::quiet_NaN();   // sup over |r| >= 1
    double sup_norm_high = std::numeric_limits<double>::quiet_NaN();  // sup over |r| >= 1
    const LambdaPoint& at(double r) const;
};

// 0, +-h, +-2h, +-4h and then step-spaced points up to r_max, mirrored.
std::vector<double> default_lambda_grid(double h = 0.005, double step = 0.05, double r_max = 0.95);

// Branch continuation from r = 0 outwards. summaries (optional) receives one entry per grid point.
LambdaCurve lambda_curve(const AtomicMeasure& mu, const std::vector<double>& r_grid, const FourierTruncation& trunc,
                         const MatrixCache* cache = nullptr, std::vector<SpectralSummary>* summaries = nullptr);

struct RadiusPoint {
    double r = 0.0;
    double spectral_radius = 0.0;
    double norm = 0.0;
};
// Spectral radius and operator norm of S_r on a grid; no branch tracking.
std::vector<RadiusPoint> radius_scan(const AtomicMeasure& mu, const std::vector<double>& r_grid,
                                     const FourierTruncation& trunc, const MatrixCache* cache = nullptr);

struct HessianResult {
    double Q = 0.0;
    double c2 = 0.0;
    double first_derivative = 0.0;  // central difference of Re lambda at 0
    double h = 0.0;
};
HessianResult hessian_at_zero(const LambdaCurve& curve, double h = 0.01);

CVector rank_one_project(const SpectralSummary& summary, const CVector& phi);

// Top singular value of S restricted to modes |m| >= 2^{L-1}.
double high_mode_norm(const BoundaryOperatorMatrix& S, int L);

// Pointwise synthesis sum_m c_m e^{i s m theta}.
cplx synthesize(const CVector& coeffs, const FourierTruncation& trunc, double theta);
std::vector<double> synthesize_real_on_grid(const CVector& coeffs, const FourierTruncation& trunc, int points);

double spectral_radius(const CMatrix& m);
double operator_norm(const CMatrix& m);
CMatrix matrix_power(const CMatrix& m, long n);

}  // namespace hyperlab
