#include "hyperlab/llt.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/quadrature.hpp"

namespace hyperlab {

void LLTConfig::validate() const {
    if (measure.empty()) throw ValidationError("llt: measure has no atoms");
    trunc.validate();
    if (trunc.space != ModeSpace::Omega) throw ValidationError("llt: truncation must use Omega-modes");
    for (int n : n_range)
        if (n < 0) throw ValidationError("llt: n_range entries must be >= 0");
    if (use_mc && mc_samples < 10000) throw ValidationError("llt: mc_samples must be >= 1e4");
    if (!(r_max > 0.0)) throw ValidationError("llt: r_max must be positive");
    if (r_nodes < 64) throw ValidationError("llt: r_nodes must be >= 64");
    if (u_nodes < 8) throw ValidationError("llt: u_nodes must be >= 8");
    h0.validate(1e-10);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    fit.points = static_cast<int>(x.size());
    if (x.size() < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

double gamma_density(double r, double Q, double c2, double cG) {
    if (!(Q > 0.0) || !(c2 > 0.0) || !(cG > 0.0)) throw ValidationError("gamma_density needs Q, c2, cG > 0");
    return cG * std::exp(-c2 * Q * r * r) * r * r;
}

double gamma_integral_closed_form(double Q, double c2, double cG) {
    return cG * std::sqrt(kPi) / (2.0 * std::pow(c2 * Q, 1.5));
}

cplx psi_mu_r(const SpectralSummary& s, const GroupElement& g, const FourierTruncation& trunc) {
    const CVector w = apply_rho(g, s.r, trunc, s.eta_prime);
    return w.dot(s.eta);  // w^H eta = <eta, rho_r(g) eta'>
}

LLTLab::LLTLab(LLTConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::vector<SpectralSummary> sums;
    curve_ = lambda_curve(cfg_.measure, cfg_.lambda_grid, cfg_.trunc, cfg_.cache, &sums);
    for (const auto& s : sums)
        if (s.r == 0.0) perron_ = s;
    hessian_ = hessian_at_zero(curve_, 0.01);
    if (!(curve_.delta0 > 0.0)) throw NumericalError("llt: no validated branch radius delta0 > 0");

    grid_ = plancherel_grid(cfg_.r_max, cfg_.r_nodes);
    fhat_ = helgason_transform(cfg_.f, grid_.r_nodes, cfg_.trunc);
    fhat0_ = helgason_transform(cfg_.f, {0.0}, cfg_.trunc).values.row(0).transpose();
    l1_ = x_integral_abs(cfg_.f, 0.0);

    const double a = hessian_.c2 * hessian_.Q;
    const auto rule = gauss_legendre(200, 0.0, 14.0 / std::sqrt(a));
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * gamma_density(rule.nodes[k], hessian_.Q, hessian_.c2);
    c_mu_ = kPlancherelConstant * acc;

    build_branch();
}

void LLTLab::build_branch() {
    const auto rule = gauss_legendre(cfg_.u_nodes, 0.0, curve_.delta0);
    branch_u_ = rule.nodes;
    branch_w_ = rule.weights;
    const std::size_t n = branch_u_.size();
    branch_ops_.resize(n);
    parallel_for(n, [&](std::size_t k) {
        branch_ops_[k] = assemble_transfer(cfg_.measure, branch_u_[k], cfg_.trunc, OperatorKind::Transfer, cfg_.cache);
    });
    branch_.resize(n);
    const SpectralSummary* prev = &perron_;
    for (std::size_t k = 0; k < n; ++k) {
        branch_[k] = tracked_summary(branch_ops_[k], prev->eta, perron_.sigma);
        if (std::abs(branch_[k].lambda - prev->lambda) >= 0.5 * prev->gap)
            throw ContinuationError("branch step too coarse on the scaled-frequency grid", branch_u_[k]);
        prev = &branch_[k];
    }
}

double LLTLab::prefactor(int n) const {
    if (n == 0) return 1.0;
    const double half_ell = 0.5 * kConstants.ell;
    return std::exp(half_ell * std::log(static_cast<double>(n)) - n * std::log(perron_.sigma));
}

double LLTLab::lhs_exact(int n) const {
    if (n < 0) throw ValidationError("lhs_exact needs n >= 0");
    if (n == 0) return cfg_.f(cfg_.h0);
    const AtomicMeasure mun = convolution_power(cfg_.measure, n);
    double acc = 0.0;
    for (const auto& a : mun.atoms()) acc += a.weight * cfg_.f(a.g * cfg_.h0);
    return prefactor(n) * acc;
}

MonteCarloEstimate LLTLab::lhs_monte_carlo(int n) const {
    if (n < 0) throw ValidationError("lhs_monte_carlo needs n >= 0");
    if (cfg_.mc_samples < 10000) throw ValidationError("lhs_monte_carlo needs at least 1e4 samples");
    MonteCarloEstimate est;
    est.samples = cfg_.mc_samples;
    if (n == 0) {
        est.value = cfg_.f(cfg_.h0);
        return est;
    }
    constexpr std::size_t kChunk = 4096;
    const std::size_t chunks = (cfg_.mc_samples + kChunk - 1) / kChunk;
    std::vector<double> sums(chunks), sq(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = make_stream(cfg_.seed, (static_cast<std::uint64_t>(n) << 32) | c);
        const std::size_t count = std::min(kChunk, cfg_.mc_samples - c * kChunk);
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double v = cfg_.f(sample_product(cfg_.measure, n, rng) * cfg_.h0);
            s += v;
            s2 += v * v;
        }
        sums[c] = s;
        sq[c] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        s += sums[c];
        s2 += sq[c];
    }
    const double N = static_cast<double>(cfg_.mc_samples);
    const double mean = s / N;
    const double var = std::max(0.0, (s2 - N * mean * mean) / (N - 1.0));
    const double pre = prefactor(n);
    est.value = pre * mean;
    est.stderr_ = pre * std::sqrt(var / N);
    return est;
}

std::vector<std::vector<cplx>> LLTLab::node_terms(const std::vector<double>& r, const CMatrix& coeffs,
                                                  const std::vector<int>& ns) const {
    const FourierTruncation& tr = cfg_.trunc;
    const int M = tr.max_mode();
    int top_bit = 0;
    for (int n : ns) {
        if (n < 0) throw ValidationError("lhs_fourier needs n >= 0");
        while ((n >> top_bit) > 1) ++top_bit;
    }
    std::vector<std::vector<cplx>> out(r.size(), std::vector<cplx>(ns.size()));
    parallel_for(r.size(), [&](std::size_t i) {
        const auto S = assemble_transfer(cfg_.measure, r[i], tr, OperatorKind::Transfer, cfg_.cache);
        CMatrix P = S.entries / perron_.sigma;
        const CVector v0 = rho_one(cfg_.h0, r[i], tr);
        std::vector<CVector> v(ns.size(), v0);
        for (int k = 0; k <= top_bit; ++k) {
            for (std::size_t j = 0; j < ns.size(); ++j)
                if ((ns[j] >> k) & 1) v[j] = P * v[j];
            if (k < top_bit) P = P * P;
        }
        for (std::size_t j = 0; j < ns.size(); ++j) {
            cplx acc = 0.0;
            for (int m = -M; m <= M; ++m) acc += coeffs(static_cast<Eigen::Index>(i), tr.index(m)) * v[j][tr.index(-m)];
            out[i][j] = acc;
        }
    });
    return out;
}

std::vector<FourierLHS> LLTLab::lhs_fourier(const std::vector<int>& ns) const {
    const auto terms = node_terms(grid_.r_nodes, fhat_.values, ns);
    std::vector<FourierLHS> out(ns.size());
    for (std::size_t j = 0; j < ns.size(); ++j) {
        const double pre = ns[j] == 0 ? 1.0 : std::pow(static_cast<double>(ns[j]), 0.5 * kConstants.ell);
        cplx low = 0.0, high = 0.0;
        for (std::size_t i = 0; i < grid_.r_nodes.size(); ++i) {
            const cplx term = grid_.r_weights[i] * terms[i][j];
            if (grid_.r_nodes[i] <= curve_.delta0)
                low += term;
            else
                high += term;
        }
        out[j].low = pre * low.real();
        out[j].high = pre * high.real();
        out[j].value = out[j].low + out[j].high;
        out[j].imag = pre * (low + high).imag();
    }
    return out;
}

FourierLHS LLTLab::lhs_fourier(int n) const { return lhs_fourier(std::vector<int>{n}).front(); }

std::vector<double> LLTLab::large_n_low_part(const std::vector<int>& ns, int nodes) const {
    const auto rule = gauss_legendre(nodes, 0.0, curve_.delta0);
    const auto hc = helgason_transform(cfg_.f, rule.nodes, cfg_.trunc);
    const auto terms = node_terms(rule.nodes, hc.values, ns);
    std::vector<double> out(ns.size());
    for (std::size_t j = 0; j < ns.size(); ++j) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * c_inverse_sq(rule.nodes[i]) * kPlancherelConstant * terms[i][j];
        out[j] = std::pow(static_cast<double>(ns[j]), 0.5 * kConstants.ell) * acc.real();
    }
    return out;
}

double LLTLab::psi_zero(const GroupElement& g) const {
    return c_mu_ * psi_mu_r(perron_, g, cfg_.trunc).real();
}

double LLTLab::path_b(const CVector& fhat0, const GroupElement& h0) const {
    const CVector v0 = rho_one(h0, 0.0, cfg_.trunc);
    const cplx pair = perron_.eta_prime.dot(v0);  // <rho_0(h0) 1, eta'>
    const FourierTruncation& tr = cfg_.trunc;
    cplx acc = 0.0;
    for (int m = -tr.max_mode(); m <= tr.max_mode(); ++m) acc += fhat0[tr.index(m)] * perron_.eta[tr.index(-m)];
    return (c_mu_ * pair * acc).real();
}

double LLTLab::path_a(const TestFunctionX& f, const GroupElement& h0) const {
    const FourierTruncation& tr = cfg_.trunc;
    const int M = tr.max_mode();
    // eta'' = rho_0(h0^{-1}) eta', only its mean over the boundary survives the k2-average.
    const GroupElement& h = h0;
    const int Lh = periodic_nodes(cartan_norm(h), 0.0, 8 * M);
    cplx mean = 0.0;
    for (int j = 0; j < Lh; ++j) {
        const double w = kPi * j / Lh;
        const double v1 = h.a * std::cos(w) + h.b * std::sin(w), v2 = h.c * std::cos(w) + h.d * std::sin(w);
        const double H = std::log(v1 * v1 + v2 * v2);
        mean += std::exp(-0.5 * H) * synthesize(perron_.eta_prime, tr, std::atan2(v2, v1));
    }
    const cplx eta2_0 = mean / static_cast<double>(Lh);

    const double t_max = f.quadrature_radius();
    const double D = f.kind() == TestFunctionX::Kind::GaussianBump ? cartan_norm(f.center()) : 0.0;
    const double width = f.width();
    const auto rule = gauss_legendre(192, 0.0, t_max);
    std::vector<double> parts(rule.nodes.size());
    parallel_for(rule.nodes.size(), [&](std::size_t k) {
        const double t = rule.nodes[k];
        const double angular = 4.0 * (1.0 + std::sinh(t) * std::sinh(D)) / (width * width);
        const int L = std::max(periodic_nodes(t, 0.0, 8 * M), next_pow2(static_cast<int>(std::ceil(angular))));
        std::vector<cplx> eta(L), kern(L), fe, fk, corr;
        for (int j = 0; j < L; ++j) {
            const double th = kPi * j / L;
            eta[j] = synthesize(perron_.eta, tr, th);
            const double c = std::cos(th), s = std::sin(th);
            kern[j] = std::exp(-0.5 * std::log(std::exp(-t) * c * c + std::exp(t) * s * s));
        }
        Eigen::FFT<double> fft;
        fft.fwd(fe, eta);
        fft.fwd(fk, kern);
        for (int j = 0; j < L; ++j) fe[j] *= std::conj(fk[j]);
        fft.inv(corr, fe);
        // corr_j = sum_i eta_i K_{i - j}; G(theta_j) = corr_j / L.
        const GroupElement at = GroupElement::diagonal(t);
        double acc = 0.0;
        for (int j = 0; j < L; ++j) {
            const double fv = f(GroupElement::rotation(kPi * j / L) * at);
            acc += fv * (2.0 * kPi * std::conj(eta2_0) * corr[j] / static_cast<double>(L)).real();
        }
        parts[k] = rule.weights[k] * std::sinh(t) * acc / L;
    });
    double total = 0.0;
    for (double p : parts) total += p;
    return c_mu_ * total;
}

RhsLimit LLTLab::rhs_limit() const { return rhs_limit_impl(cfg_.f, fhat0_, cfg_.h0); }

RhsLimit LLTLab::rhs_limit(const TestFunctionX& f, const GroupElement& h0) const {
    h0.validate(1e-10);
    const CVector fhat0 = helgason_transform(f, {0.0}, cfg_.trunc).values.row(0).transpose();
    return rhs_limit_impl(f, fhat0, h0);
}

RhsLimit LLTLab::rhs_limit_impl(const TestFunctionX& f, const CVector& fhat0, const GroupElement& h0) const {
    RhsLimit out;
    out.path_b = path_b(fhat0, h0);
    if (f.kind() == TestFunctionX::Kind::BandLimited) {
        out.path_a = std::numeric_limits<double>::quiet_NaN();
        out.relative_gap = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.path_a = path_a(f, h0);
    out.relative_gap = std::abs(out.path_a - out.path_b) / std::max(std::abs(out.path_b), 1e-300);
    if (out.relative_gap > 1e-3) {
        std::ostringstream os;
        os << "normalization-calibration error: X-quadrature " << out.path_a << " vs boundary formula " << out.path_b
           << "; check the Plancherel constant";
        throw NumericalError(os.str());
    }
    return out;
}

double LLTLab::psi_n(const GroupElement& g, int n) const {
    if (n < 1) throw ValidationError("psi_n needs n >= 1");
    const double sn = std::sqrt(static_cast<double>(n));
    double acc = 0.0;
    for (std::size_t k = 0; k < branch_u_.size(); ++k) {
        const double r = branch_u_[k] * sn;
        if (r > cfg_.r_max) continue;
        acc += branch_w_[k] * gamma_density(r, hessian_.Q, hessian_.c2) * psi_mu_r(branch_[k], g, cfg_.trunc).real();
    }
    return kPlancherelConstant * sn * acc;
}

double LLTLab::psi_n_tail(int n) const {
    const double top = curve_.delta0 * std::sqrt(static_cast<double>(n));
    if (top <= cfg_.r_max) return 0.0;
    const auto rule = gauss_legendre(64, cfg_.r_max, top);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * gamma_density(rule.nodes[k], hessian_.Q, hessian_.c2);
    return kPlancherelConstant * acc;
}

double LLTLab::s_c_surrogate_constant(int n) const {
    const double sn = std::sqrt(static_cast<double>(n));
    double worst = 0.0;
    for (std::size_t k = 0; k < branch_u_.size(); ++k) {
        const double u = branch_u_[k];
        const double lhs =
            n * std::pow(std::abs(branch_[k].lambda) / perron_.sigma, n) * c_inverse_sq(u);
        const double diff = std::abs(lhs - gamma_density(u * sn, hessian_.Q, hessian_.c2));
        worst = std::max(worst, diff * n);
    }
    return worst;
}

double LLTLab::low_frequency_remainder(int n) const {
    std::vector<double> norms(branch_u_.size());
    parallel_for(branch_u_.size(), [&](std::size_t k) {
        const SpectralSummary& s = branch_[k];
        const CMatrix P = matrix_power(branch_ops_[k].entries / perron_.sigma, n);
        const CMatrix E = s.eta * s.eta_prime.adjoint();
        norms[k] = operator_norm(P - std::pow(s.lambda / perron_.sigma, n) * E);
    });
    return *std::max_element(norms.begin(), norms.end());
}

ConvergenceReport LLTLab::run_convergence() const {
    ConvergenceReport rep;
    const std::vector<int>& ns = cfg_.n_range;
    const auto fourier = lhs_fourier(ns);
    const double rhs = rhs_limit().value();
    std::vector<double> lx, ly, rx, ry, hx, hy, hy_raw;
    for (std::size_t j = 0; j < ns.size(); ++j) {
        ConvergenceRecord rec;
        rec.n = ns[j];
        rec.lhs_fourier = fourier[j];
        rec.rhs_limit = rhs;
        try {
            rec.lhs_exact = lhs_exact(ns[j]);
            rec.err_exact = std::abs(*rec.lhs_exact - rhs);
        } catch (const BudgetError& e) {
            rec.exact_note = e.what();
        }
        if (cfg_.use_mc) {
            rec.lhs_mc = lhs_monte_carlo(ns[j]);
            rec.err_mc = std::abs(rec.lhs_mc->value - rhs);
        }
        rec.err_fourier = std::abs(fourier[j].value - rhs);
        rep.max_lhs_over_l1 = std::max(rep.max_lhs_over_l1, std::abs(fourier[j].value) / l1_);
        if (ns[j] >= 8) {
            lx.push_back(std::log(static_cast<double>(ns[j])));
            ly.push_back(std::log(rec.err_fourier));
            rx.push_back(lx.back());
            ry.push_back(std::log(std::abs(fourier[j].low - rhs)));
            if (fourier[j].high != 0.0) {
                hx.push_back(ns[j]);
                hy_raw.push_back(std::log(std::abs(fourier[j].high)));
                hy.push_back(hy_raw.back() - 0.5 * kConstants.ell * std::log(static_cast<double>(ns[j])));
            }
        }
        rep.records.push_back(std::move(rec));
    }
    rep.error_slope = fit_line(lx, ly);
    rep.residual_slope = fit_line(rx, ry);
    rep.high_frequency_decay = fit_line(hx, hy);
    rep.high_frequency_raw = fit_line(hx, hy_raw);
    bool mono = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& rec : rep.records) {
        if (rec.n < 16) continue;
        if (!(rec.err_fourier < prev)) mono = false;
        prev = rec.err_fourier;
    }
    rep.monotone_after_16 = mono;
    return rep;
}

}  // namespace hyperlab
