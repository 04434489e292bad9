#include "hyperlab/spherical.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/quadrature.hpp"

namespace hyperlab {

namespace {

struct GslQuiet {
    GslQuiet() { gsl_set_error_handler_off(); }
};
const GslQuiet gsl_quiet;

double log_abs_gamma(cplx z) {
    gsl_sf_result lnr, arg;
    if (gsl_sf_lngamma_complex_e(z.real(), z.imag(), &lnr, &arg) != GSL_SUCCESS)
        return std::numeric_limits<double>::infinity();
    return lnr.val;
}

// log|B(x, y)| for real x > 0 and complex y.
double log_abs_beta(double x, cplx y) {
    if (std::abs(y) == 0.0) return std::numeric_limits<double>::infinity();
    return std::lgamma(x) + log_abs_gamma(y) - log_abs_gamma(cplx(x) + y);
}

// H(a_t^{-1} k_theta).
inline double radial_height(double t, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return std::log(std::exp(-t) * c * c + std::exp(t) * s * s);
}

}  // namespace

RootSystem sl2_root_system() {
    RootSystem rs;
    rs.indivisible.push_back({static_cast<double>(kConstants.root_multiplicity), 1.0, 0.0});
    rs.delta = kConstants.delta_coeff;
    return rs;
}

double log_abs_I(const RootSystem& roots, cplx z) {
    double acc = 0.0;
    for (const auto& r : roots.indivisible) acc += log_abs_beta(0.5 * r.multiplicity, z * r.scale);
    // Untested for SL(2,R): the divisible product is empty there.
    for (const auto& r : roots.divisible)
        acc += log_abs_beta(0.5 * r.multiplicity, 0.25 * r.half_multiplicity + z * r.scale);
    return acc;
}

double c_inverse_sq(double r, const RootSystem& roots) {
    if (r == 0.0) return 0.0;
    const double num = log_abs_I(roots, cplx(roots.delta, 0.0));
    const double den = log_abs_I(roots, cplx(0.0, r));
    return std::exp(2.0 * (num - den));
}

double c_inverse_sq(double r) {
    static const RootSystem rs = sl2_root_system();
    return c_inverse_sq(r, rs);
}

QuadraticFit fit_small_r(double r_hi, int samples) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 1; k <= samples; ++k) {
        const double r = r_hi * k / samples;
        const double x = r * r, y = c_inverse_sq(r) / x;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = samples;
    QuadraticFit fit;
    fit.c1 = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.c0 = (sy - fit.c1 * sx) / n;
    return fit;
}

cplx spherical_function_complex(double r, double t) {
    t = std::abs(t);
    const int L = periodic_nodes(t, r, 64);
    cplx acc = 0.0;
    for (int j = 0; j < L; ++j) {
        const double H = radial_height(t, kPi * j / L);
        acc += std::exp(cplx(-0.5 * H, -r * H));
    }
    return acc / static_cast<double>(L);
}

double spherical_function(double r, double t) { return spherical_function_complex(r, t).real(); }

PlancherelGrid plancherel_grid(double r_max, int nodes, double constant) {
    if (!(r_max > 0.0)) throw ValidationError("plancherel_grid: r_max must be positive");
    if (nodes < 64) throw ValidationError("plancherel_grid: at least 64 nodes required");
    const auto rule = gauss_legendre(nodes, 0.0, r_max);
    PlancherelGrid g;
    g.r_max = r_max;
    g.constant = constant;
    g.r_nodes = rule.nodes;
    g.r_weights.resize(nodes);
    for (int i = 0; i < nodes; ++i) g.r_weights[i] = rule.weights[i] * c_inverse_sq(rule.nodes[i]) * constant;
    return g;
}

InverseEvaluator::InverseEvaluator(HelgasonCoefficients coeffs, PlancherelGrid grid)
    : coeffs_(std::move(coeffs)), grid_(std::move(grid)) {
    if (coeffs_.r_nodes.size() != grid_.r_nodes.size() ||
        coeffs_.values.rows() != static_cast<Eigen::Index>(grid_.r_nodes.size()))
        throw ValidationError("inverse transform: coefficient nodes do not match the Plancherel grid");
    for (std::size_t i = 0; i < grid_.r_nodes.size(); ++i)
        if (std::abs(coeffs_.r_nodes[i] - grid_.r_nodes[i]) > 1e-12)
            throw ValidationError("inverse transform: coefficient nodes do not match the Plancherel grid");
}

const CMatrix& InverseEvaluator::synthesis(int L) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(L);
    if (it != cache_.end()) return *it->second;
    const int M = coeffs_.trunc.max_mode();
    const Eigen::Index R = coeffs_.values.rows();
    auto F = std::make_unique<CMatrix>(L, R);
    for (int j = 0; j < L; ++j) {
        const cplx z = std::polar(1.0, 2.0 * kPi * j / L);
        for (Eigen::Index i = 0; i < R; ++i) {
            cplx val = coeffs_.values(i, M), p = 1.0;
            for (int m = 1; m <= M; ++m) {
                p *= z;
                val += coeffs_.values(i, M + m) * p + coeffs_.values(i, M - m) * std::conj(p);
            }
            (*F)(j, i) = val;
        }
    }
    const CMatrix& ref = *F;
    cache_.emplace(L, std::move(F));
    return ref;
}

double InverseEvaluator::operator()(const GroupElement& g) const {
    const double t = cartan_norm(g);
    const int M = coeffs_.trunc.max_mode();
    double r_top = 0.0;
    for (double r : grid_.r_nodes) r_top = std::max(r_top, std::abs(r));
    const int L = periodic_nodes(t, r_top, std::max(64, 4 * M));
    const CMatrix& F = synthesis(L);
    const GroupElement h = g.inverse();
    const std::size_t R = grid_.r_nodes.size();
    cplx acc = 0.0;
    for (int j = 0; j < L; ++j) {
        const double th = kPi * j / L;
        const double c = std::cos(th), s = std::sin(th);
        const double v1 = h.a * c + h.b * s, v2 = h.c * c + h.d * s;
        const double H = std::log(v1 * v1 + v2 * v2);
        const double damp = std::exp(-0.5 * H);
        cplx row = 0.0;
        for (std::size_t i = 0; i < R; ++i)
            row += grid_.r_weights[i] * F(j, static_cast<Eigen::Index>(i)) * std::polar(1.0, -grid_.r_nodes[i] * H);
        acc += damp * row;
    }
    return acc.real() / L;
}

TestFunctionX TestFunctionX::gaussian_bump(const GroupElement& center, double width) {
    if (!(width > 0.0)) throw ValidationError("gaussian bump width must be positive");
    TestFunctionX f;
    f.kind_ = Kind::GaussianBump;
    f.center_ = center.renormalized();
    f.width_ = width;
    return f;
}

double TestFunctionX::band_profile(double r, double R) {
    const double x = std::abs(r) / R;
    if (x >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

TestFunctionX TestFunctionX::band_limited(double R, const CVector& modes, const FourierTruncation& trunc,
                                          int nodes) {
    if (!(R > 0.0)) throw ValidationError("band limit R must be positive");
    trunc.validate();
    if (modes.size() != trunc.dim()) throw ValidationError("band-limited mode profile has the wrong length");
    TestFunctionX f;
    f.kind_ = Kind::BandLimited;
    f.R_ = R;
    f.modes_ = modes;
    f.trunc_ = trunc;
    f.width_ = 1.0;
    PlancherelGrid grid = plancherel_grid(R, std::max(nodes, 64));
    HelgasonCoefficients hc;
    hc.r_nodes = grid.r_nodes;
    hc.trunc = trunc;
    hc.l1_norm = std::numeric_limits<double>::quiet_NaN();
    hc.values.resize(static_cast<Eigen::Index>(grid.r_nodes.size()), trunc.dim());
    for (std::size_t i = 0; i < grid.r_nodes.size(); ++i)
        hc.values.row(static_cast<Eigen::Index>(i)) = f.band_coefficients(grid.r_nodes[i]).transpose();
    f.evaluator_ = std::make_shared<const InverseEvaluator>(std::move(hc), std::move(grid));
    return f;
}

CVector TestFunctionX::band_coefficients(double r) const {
    if (kind_ != Kind::BandLimited) throw ValidationError("band_coefficients needs a band-limited function");
    return modes_ * band_profile(r, R_);
}

bool TestFunctionX::radial() const {
    if (kind_ == Kind::GaussianBump) return cartan_norm(center_) < 1e-14;
    for (int m = -trunc_.max_mode(); m <= trunc_.max_mode(); ++m)
        if (m != 0 && std::abs(modes_[trunc_.index(m)]) != 0.0) return false;
    return true;
}

double TestFunctionX::operator()(const GroupElement& g) const {
    if (kind_ == Kind::BandLimited) return (*evaluator_)(g);
    const double d = cartan_norm(center_.inverse() * g);
    return std::exp(-d * d / (2.0 * width_ * width_));
}

double TestFunctionX::profile(double t) const {
    if (!radial()) throw ValidationError("profile requires a radial test function");
    return (*this)(GroupElement::diagonal(t));
}

double TestFunctionX::quadrature_radius() const {
    if (kind_ == Kind::BandLimited) return 4.0;
    return cartan_norm(center_) + 8.0 * width_;
}

RadialTransform spherical_transform(const TestFunctionX& f, const std::vector<double>& r_nodes, int t_nodes) {
    if (!f.radial()) throw ValidationError("spherical_transform requires a radial test function");
    RadialTransform out;
    out.t_max = f.quadrature_radius();
    const auto rule = gauss_legendre(t_nodes, 0.0, out.t_max);
    std::vector<double> prof(t_nodes);
    double peak = 0.0;
    for (int k = 0; k < t_nodes; ++k) {
        prof[k] = f.profile(rule.nodes[k]);
        peak = std::max(peak, std::abs(prof[k]));
    }
    out.boundary_value = peak > 0.0 ? std::abs(f.profile(out.t_max)) / peak : 0.0;
    out.truncated = out.boundary_value > 1e-12;
    out.values.assign(r_nodes.size(), 0.0);
    parallel_for(r_nodes.size(), [&](std::size_t i) {
        double acc = 0.0;
        for (int k = 0; k < t_nodes; ++k)
            acc += rule.weights[k] * prof[k] * spherical_function(r_nodes[i], rule.nodes[k]) * std::sinh(rule.nodes[k]);
        out.values[i] = 2.0 * kPi * acc;
    });
    return out;
}

double x_integral_abs(const TestFunctionX& f, double power) {
    const double R = f.quadrature_radius();
    const int nt = 192;
    const auto rule = gauss_legendre(nt, 0.0, R);
    const bool rad = f.radial();
    const double D = f.kind() == TestFunctionX::Kind::GaussianBump ? cartan_norm(f.center()) : 0.0;
    std::vector<double> parts(nt, 0.0);
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t k) {
        const double t = rule.nodes[k];
        double mean = 0.0;
        if (rad) {
            mean = std::abs(f(GroupElement::diagonal(t)));
        } else {
            int L = 64;
            if (f.kind() == TestFunctionX::Kind::GaussianBump) {
                const double need = 32.0 * (1.0 + std::sinh(t) * std::sinh(D)) / f.width();
                L = next_pow2(std::max(256, static_cast<int>(std::ceil(need))));
            }
            const GroupElement at = GroupElement::diagonal(t);
            for (int j = 0; j < L; ++j) mean += std::abs(f(GroupElement::rotation(kPi * j / L) * at));
            mean /= L;
        }
        parts[k] = rule.weights[k] * std::sinh(t) * mean * std::pow(1.0 + t * t, power);
    });
    double acc = 0.0;
    for (double p : parts) acc += p;
    return 2.0 * kPi * acc;
}

HelgasonCoefficients helgason_transform(const TestFunctionX& f, const std::vector<double>& r_nodes,
                                        const FourierTruncation& trunc, int t_nodes) {
    const int M = trunc.max_mode();
    HelgasonCoefficients out;
    out.r_nodes = r_nodes;
    out.trunc = trunc;
    out.values = CMatrix::Zero(static_cast<Eigen::Index>(r_nodes.size()), trunc.dim());
    if (trunc.space != ModeSpace::Omega) throw ValidationError("Helgason coefficients live on Omega-modes");

    if (f.kind() == TestFunctionX::Kind::BandLimited) {
        const int Mf = f.trunc().max_mode();
        for (std::size_t i = 0; i < r_nodes.size(); ++i) {
            const CVector c = f.band_coefficients(r_nodes[i]);
            for (int m = -std::min(M, Mf); m <= std::min(M, Mf); ++m)
                out.values(static_cast<Eigen::Index>(i), trunc.index(m)) = c[f.trunc().index(m)];
        }
        out.l1_norm = std::numeric_limits<double>::quiet_NaN();
        out.max_l2_over_l1 = std::numeric_limits<double>::quiet_NaN();
        return out;
    }

    const double t_max = f.quadrature_radius();
    const double D = cartan_norm(f.center());
    const double w = f.width();
    double r_top = 0.0;
    for (double r : r_nodes) r_top = std::max(r_top, std::abs(r));
    const auto rule = gauss_legendre(t_nodes, 0.0, t_max);
    std::vector<CMatrix> parts(t_nodes);

    parallel_for(static_cast<std::size_t>(t_nodes), [&](std::size_t k) {
        const double t = rule.nodes[k];
        const double angular = 4.0 * (1.0 + std::sinh(t) * std::sinh(D)) / (w * w);
        const int L = std::max(periodic_nodes(t, r_top, 8 * M), next_pow2(static_cast<int>(std::ceil(angular))));
        Eigen::FFT<double> fft;
        std::vector<cplx> samples(L), spec;
        const GroupElement at = GroupElement::diagonal(t);
        for (int j = 0; j < L; ++j) samples[j] = f(GroupElement::rotation(kPi * j / L) * at);
        fft.fwd(spec, samples);
        std::vector<cplx> Fm(2 * M + 1);
        for (int m = -M; m <= M; ++m) Fm[m + M] = spec[(m + L) % L] / static_cast<double>(L);

        std::vector<double> H(L);
        for (int j = 0; j < L; ++j) H[j] = radial_height(t, kPi * j / L);
        CMatrix contrib(static_cast<Eigen::Index>(r_nodes.size()), 2 * M + 1);
        const double scale = 2.0 * kPi * rule.weights[k] * std::sinh(t);
        std::vector<cplx> kern(L), kspec;
        for (std::size_t i = 0; i < r_nodes.size(); ++i) {
            const double r = r_nodes[i];
            for (int j = 0; j < L; ++j) kern[j] = std::exp(cplx(-0.5 * H[j], r * H[j]));
            fft.fwd(kspec, kern);
            for (int m = -M; m <= M; ++m)
                contrib(static_cast<Eigen::Index>(i), m + M) =
                    scale * Fm[m + M] * kspec[(m + L) % L] / static_cast<double>(L);
        }
        parts[k] = std::move(contrib);
    });
    for (const auto& p : parts) out.values += p;

    out.l1_norm = x_integral_abs(f, 0.0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) worst = std::max(worst, out.values.row(i).norm());
    out.max_l2_over_l1 = worst / out.l1_norm;
    if (out.max_l2_over_l1 > 1.0 + 1e-6) {
        std::ostringstream os;
        os << "Fourier L1 bound violated: |f^(r,.)|_2 / |f|_1 = " << out.max_l2_over_l1;
        throw NumericalError(os.str());
    }
    return out;
}

std::vector<double> inverse_transform(const HelgasonCoefficients& coeffs, const PlancherelGrid& grid,
                                      const std::vector<GroupElement>& points) {
    const InverseEvaluator ev(coeffs, grid);
    std::vector<double> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) { out[i] = ev(points[i]); });
    return out;
}

Norms norms(const TestFunctionX& f, double s, const PlancherelGrid* grid, const FourierTruncation* trunc) {
    Norms n;
    n.l1 = x_integral_abs(f, 0.0);
    n.star = x_integral_abs(f, 1.0);
    n.l1_truncated = f.kind() == TestFunctionX::Kind::BandLimited;
    if (grid && trunc) {
        const auto hc = helgason_transform(f, grid->r_nodes, *trunc);
        double acc = 0.0;
        for (std::size_t i = 0; i < grid->r_nodes.size(); ++i) {
            const double r = grid->r_nodes[i];
            acc += grid->r_weights[i] * hc.values.row(static_cast<Eigen::Index>(i)).squaredNorm() *
                   std::pow(1.0 + r * r, s);
        }
        n.sobolev = std::sqrt(acc);
    }
    return n;
}

TestFunctionX bandlimited_bump(double R, const CVector& mode_profile, const FourierTruncation& trunc) {
    return TestFunctionX::band_limited(R, mode_profile, trunc);
}

std::vector<GroupElement> support_points(const TestFunctionX& f, int radial, int angular, double radius_in_widths) {
    std::vector<GroupElement> pts;
    const GroupElement c = f.kind() == TestFunctionX::Kind::GaussianBump ? f.center() : GroupElement::identity();
    const double rad = radius_in_widths * f.width();
    pts.push_back(c);
    for (int k = 1; k <= radial; ++k) {
        const GroupElement a = GroupElement::diagonal(rad * k / radial);
        for (int j = 0; j < angular; ++j) pts.push_back(c * GroupElement::rotation(kPi * j / angular) * a);
    }
    return pts;
}

Calibration calibrate_plancherel(const TestFunctionX& reference, const std::vector<TestFunctionX>& others,
                                 const FourierTruncation& trunc, double r_max, int nodes) {
    const PlancherelGrid unit = plancherel_grid(r_max, nodes, 1.0);
    auto fit = [&](const TestFunctionX& f) {
        const auto hc = helgason_transform(f, unit.r_nodes, trunc);
        const auto pts = support_points(f, 4, 8);
        const auto vals = inverse_transform(hc, unit, pts);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            num += f(pts[i]) * vals[i];
            den += vals[i] * vals[i];
        }
        return num / den;
    };
    Calibration cal;
    cal.constant = fit(reference);
    for (const auto& f : others) {
        cal.others.push_back(fit(f));
        cal.max_relative_spread = std::max(cal.max_relative_spread, std::abs(cal.others.back() / cal.constant - 1.0));
    }
    cal.stable = cal.max_relative_spread <= 1e-3;
    return cal;
}

}  // namespace hyperlab
