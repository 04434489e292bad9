// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 1 when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hyperlab/boundary.hpp"
#include "hyperlab/errors.hpp"
#include "hyperlab/furstenberg.hpp"
#include "hyperlab/group.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/measure.hpp"
#include "hyperlab/spherical.hpp"

using namespace hyperlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_s) {
        out.pass = false;
        out.detail += "; over the runtime budget";
    }
    if (!out.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s, budget %.0f s)\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
                secs, budget_s);
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

GroupElement random_element(std::mt19937_64& rng, double t_max) {
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi), rad(0.0, t_max);
    return GroupElement::rotation(ang(rng)) * GroupElement::diagonal(rad(rng)) * GroupElement::rotation(ang(rng));
}

double legendre_oracle(double t) {
    const double x = 0.5 * (1.0 - std::cosh(t));
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 100000 && std::abs(term) > 1e-17; ++k) {
        term *= (k + 0.5) * (k + 0.5) / ((k + 1.0) * (k + 1.0)) * x;
        sum += term;
    }
    return sum;
}

double relative_sup_error(const TestFunctionX& f, const HelgasonCoefficients& hc, const PlancherelGrid& grid) {
    const auto pts = support_points(f, 6, 12, 3.0);
    const auto vals = inverse_transform(hc, grid, pts);
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        err = std::max(err, std::abs(vals[i] - f(pts[i])));
        peak = std::max(peak, std::abs(f(pts[i])));
    }
    return err / peak;
}

CVector random_real_coeffs(const FourierTruncation& tr, std::mt19937_64& rng, int band) {
    std::normal_distribution<double> gauss;
    CVector c = CVector::Zero(tr.dim());
    c[tr.index(0)] = gauss(rng);
    for (int m = 1; m <= std::min(band, tr.max_mode()); ++m) {
        const cplx v(gauss(rng), gauss(rng));
        c[tr.index(m)] = v;
        c[tr.index(-m)] = std::conj(v);
    }
    return c;
}

}  // namespace

int main() {
    const auto cache = MatrixCache::from_env(".hyperlab-cache");
    std::unique_ptr<LLTLab> lab;

    run(1, "decomposition round trips and |H| <= kappa", 10, [] {
        std::mt19937_64 rng(20240611);
        double worst = 0.0, excess = -INFINITY;
        for (int i = 0; i < 100000; ++i) {
            const GroupElement g = random_element(rng, 10.0);
            const double scale = std::max(1.0, g.frobenius());
            worst = std::max(worst, max_entry_difference(iwasawa(g).reconstruct(), g) / scale);
            worst = std::max(worst, max_entry_difference(cartan(g).reconstruct(), g) / scale);
            excess = std::max(excess, std::abs(iwasawa_height(g)) - cartan_norm(g));
        }
        return Outcome{worst <= 1e-10 && excess <= 1e-12,
                       fmt("max relative error %.2e", worst) + fmt(", max |H| - kappa %.2e", excess)};
    });

    run(2, "c-function closed form and small-r fit", 1, [] {
        double worst = 0.0;
        for (int k = 0; k <= 5000; ++k) {
            const double r = 0.01 * k;
            worst = std::max(worst, std::abs(c_inverse_sq(r) - kPi * r * std::tanh(kPi * r)));
        }
        const double cG = fit_small_r().c0;
        return Outcome{worst <= 1e-10 && std::abs(cG - kPi * kPi) <= 1e-4,
                       fmt("max error %.2e", worst) + fmt(", c_G = %.10f", cG)};
    });

    run(3, "spherical function", 1, [] {
        const double at_e = spherical_function(0.7, 0.0);
        const double err = std::abs(spherical_function(0.0, 1.0) - legendre_oracle(1.0));
        return Outcome{at_e == 1.0 && err <= 1e-8, fmt("phi_0.7(e) = %.17g", at_e) + fmt(", |phi_0(a_1) - P| = %.2e", err)};
    });

    run(4, "Helgason round trips and the L1 bound", 60, [] {
        const auto grid = plancherel_grid(20.0, 128);
        const auto tr = FourierTruncation::omega(32);
        const auto radial = TestFunctionX::gaussian_bump(GroupElement(), 0.5);
        const auto hr = helgason_transform(radial, grid.r_nodes, tr);
        const double e_rad = relative_sup_error(radial, hr, grid);
        const auto moved = TestFunctionX::gaussian_bump(GroupElement::rotation(0.4) * GroupElement::diagonal(0.8), 0.5);
        const auto hm = helgason_transform(moved, grid.r_nodes, tr);
        const double e_mov = relative_sup_error(moved, hm, grid);
        const double l1_ratio = std::max(hr.max_l2_over_l1, hm.max_l2_over_l1);
        return Outcome{e_rad <= 1e-3 && e_mov <= 5e-3 && l1_ratio <= 1.0,
                       fmt("radial %.2e", e_rad) + fmt(", non-radial %.2e", e_mov) +
                           fmt(", max |f^(r)|_2 / |f|_1 = %.4f", l1_ratio)};
    });

    run(5, "spectral suite on the default measure", 300, [&] {
        const auto mu = default_measure(0.3);
        const auto S64 = assemble_transfer(mu, 0.0, FourierTruncation::omega(64), OperatorKind::Transfer, &cache);
        const auto S128 = assemble_transfer(mu, 0.0, FourierTruncation::omega(128), OperatorKind::Transfer, &cache);
        const auto s = spectral_summary(S64, &S128);
        const auto s2 = spectral_summary(S128);
        LLTConfig cfg;
        cfg.cache = &cache;
        lab = std::make_unique<LLTLab>(cfg);
        const auto& curve = lab->curve();
        double conj_err = 0.0, worst_rho = 0.0;
        for (const auto& p : curve.points) {
            conj_err = std::max(conj_err, std::abs(curve.at(-p.r).lambda - std::conj(p.lambda)));
            if (p.r != 0.0) worst_rho = std::max(worst_rho, p.spectral_radius);
        }
        const auto scan = radius_scan(mu, {-16, -8, -4, -2, -1, 1, 2, 4, 8, 16}, FourierTruncation::omega(64), &cache);
        for (const auto& p : scan) worst_rho = std::max(worst_rho, p.spectral_radius);
        const double Q = lab->hessian().Q;
        const bool ok = s.sigma < 1.0 && s.gap > 0.0 && std::abs(s.sigma - s2.sigma) <= 1e-6 && s.eta_min > 0.0 &&
                        s.eta_prime_min > 0.0 && conj_err <= 1e-10 && worst_rho < s.sigma && Q > 0.0;
        return Outcome{ok, fmt("sigma %.15f", s.sigma) + fmt(", gap %.6f", s.gap) +
                               fmt(", |sigma_64 - sigma_128| %.1e", std::abs(s.sigma - s2.sigma)) +
                               fmt(", min eta %.4f", s.eta_min) + fmt(", min eta' %.4f", s.eta_prime_min) +
                               fmt(", conj err %.1e", conj_err) + fmt(", max rho(S_r) %.6f", worst_rho) +
                               fmt(", Q %.6f", Q)};
    });
    if (!lab) {
        LLTConfig cfg;
        cfg.cache = &cache;
        lab = std::make_unique<LLTLab>(cfg);
    }

    run(6, "two evaluations of the limit agree on five bumps", 120, [&] {
        const std::vector<std::pair<TestFunctionX, GroupElement>> cases = {
            {TestFunctionX::gaussian_bump(GroupElement(), 0.7), GroupElement()},
            {TestFunctionX::gaussian_bump(GroupElement(), 0.5), GroupElement::diagonal(0.4)},
            {TestFunctionX::gaussian_bump(GroupElement::diagonal(0.6), 0.6), GroupElement()},
            {TestFunctionX::gaussian_bump(GroupElement::rotation(1.1) * GroupElement::diagonal(0.8), 0.8),
             GroupElement::rotation(0.3) * GroupElement::diagonal(0.5)},
            {TestFunctionX::gaussian_bump(GroupElement::rotation(2.4) * GroupElement::diagonal(0.3), 0.45),
             GroupElement::unipotent(0.4)},
        };
        double worst = 0.0;
        for (const auto& [f, h0] : cases) worst = std::max(worst, lab->rhs_limit(f, h0).relative_gap);
        return Outcome{worst <= 1e-3, fmt("max relative gap %.2e", worst)};
    });

    run(7, "three-way oracle at n = 4, 6, 8", 600, [&] {
        const auto fourier = lab->lhs_fourier({4, 6, 8});
        const std::vector<int> ns = {4, 6, 8};
        bool ok = true;
        std::ostringstream detail;
        for (std::size_t j = 0; j < ns.size(); ++j) {
            const double exact = lab->lhs_exact(ns[j]);
            const auto mc = lab->lhs_monte_carlo(ns[j]);
            const double ef = std::abs(exact - fourier[j].value), em = std::abs(exact - mc.value);
            ok = ok && ef <= 1e-4 * lab->l1_norm() && em <= 3 * mc.stderr_ && mc.samples >= 100000;
            detail << (j ? "; " : "") << "n=" << ns[j] << fmt(" |ex-fo| %.1e", ef) << fmt(" |ex-mc| %.1e", em)
                   << fmt(" 3se %.1e", 3 * mc.stderr_);
        }
        return Outcome{ok, detail.str()};
    });

    run(8, "convergence to the limit and its rate", 900, [&] {
        const std::vector<int> ns = {8, 16, 32, 64, 128, 256};
        const auto fourier = lab->lhs_fourier(ns);
        const double rhs = lab->rhs_limit().value();
        std::vector<double> lx, ly;
        bool mono = true;
        double prev = INFINITY;
        for (std::size_t j = 0; j < ns.size(); ++j) {
            const double err = std::abs(fourier[j].value - rhs);
            lx.push_back(std::log(static_cast<double>(ns[j])));
            ly.push_back(std::log(err));
            if (ns[j] >= 16) {
                if (!(err < prev)) mono = false;
                prev = err;
            }
        }
        const LineFit slope = fit_line(lx, ly);

        LLTConfig bl;
        bl.cache = &cache;
        CVector profile = CVector::Zero(bl.trunc.dim());
        profile[bl.trunc.index(0)] = 1.0;
        bl.f = bandlimited_bump(3.0, profile, bl.trunc);
        bl.n_range = {16, 32, 64, 128};
        bl.use_mc = false;
        const LLTLab band(bl);
        const auto rep = band.run_convergence();
        const double rate = -rep.high_frequency_decay.slope;

        const bool ok = mono && slope.slope >= -1.5 && slope.slope <= -0.6 && rate > 0.0;
        return Outcome{ok, std::string("monotone after 16: ") + (mono ? "yes" : "no") +
                               fmt(", slope %.4f in [-1.5, -0.6]", slope.slope) +
                               fmt(", band-limited high-frequency rate %.4f", rate)};
    });

    {
        // Informational, not a criterion: the low part alone at much larger n.
        const std::vector<int> big = {256, 512, 1024, 2048, 4096};
        const auto low = lab->large_n_low_part(big);
        const double rhs = lab->rhs_limit().value();
        std::vector<double> lx, ly;
        for (std::size_t j = 0; j < big.size(); ++j) {
            lx.push_back(std::log(static_cast<double>(big[j])));
            ly.push_back(std::log(std::abs(low[j] - rhs)));
        }
        std::printf("[INFO]    low-part error slope over n = 256..4096: %.4f\n", fit_line(lx, ly).slope);
    }

    run(9, "psi_n constant is stable across two balls", 300, [&] {
        auto fitted = [&](double R) {
            double C = 0.0;
            for (int n : {4, 8, 16, 32, 64})
                for (int i = 0; i <= 8; ++i)
                    for (int j = 0; j < 8; ++j) {
                        const double t = R * i / 8.0;
                        const GroupElement g = GroupElement::rotation(kPi * j / 8.0) * GroupElement::diagonal(t);
                        C = std::max(C, n * std::abs(lab->psi_n(g, n) - lab->psi_zero(g)) / (1.0 + t * t));
                    }
            return C;
        };
        const double c1 = fitted(1.0), c2 = fitted(2.0);
        const bool ok = std::isfinite(c1) && std::isfinite(c2) && std::abs(c2 / c1 - 1.0) <= 0.2;
        return Outcome{ok, fmt("C(ball 1) %.4g", c1) + fmt(", C(ball 2) %.4g", c2)};
    });

    run(10, "Furstenberg density", 300, [&] {
        const auto mu = default_measure(0.3);
        const auto tr = FourierTruncation::omega(64);
        const auto psi = stationary_density(mu, tr, &cache);
        const double res = stationarity_residual(psi, mu, 20, 7);
        const double s03 = smoothness_report(psi).s;
        const double s015 = smoothness_report(stationary_density(default_measure(0.15), tr, &cache)).s;
        const auto big = FourierTruncation::omega(1024, 8192);
        CVector c = CVector::Zero(big.dim());
        c[big.index(0)] = 1.0;
        for (int m = 1; m <= 1024; ++m) c[big.index(m)] = c[big.index(-m)] = std::pow(m, -3.0);
        const double planted = smoothness_report(c, big).s;
        const bool ok = psi.eigenvalue_distance <= 1e-6 && std::abs(psi.mass - 1.0) <= 1e-12 &&
                        psi.positivity_min > 0.0 && res <= 1e-8 && std::abs(planted - 1.5) <= 0.1 && s015 > s03;
        return Outcome{ok, fmt("|lambda - 1| %.1e", psi.eigenvalue_distance) + fmt(", mass %.15f", psi.mass) +
                               fmt(", min %.6f", psi.positivity_min) + fmt(", residual %.1e", res) +
                               fmt(", planted s 1.5 -> %.4f", planted) + fmt(", s(0.3) %.4f", s03) +
                               fmt(", s(0.15) %.4f", s015)};
    });

    run(11, "boundary probes", 180, [&] {
        std::mt19937_64 rng(20240611);
        const auto tr = FourierTruncation::omega(32);
        double pi_err = 0.0, agmon = 0.0, ortho = 0.0;
        for (int k = 0; k < 20; ++k) {
            const auto p = partial_integration(random_real_coeffs(tr, rng, 32), random_real_coeffs(tr, rng, 32), tr);
            pi_err = std::max(pi_err, p.error / std::max(1.0, std::abs(p.lhs_c)));
        }
        const auto kt = FourierTruncation::k_modes(32);
        std::uniform_int_distribution<int> band(1, kt.max_mode());
        for (int k = 0; k < 1000; ++k) agmon = std::max(agmon, agmon_check(random_real_coeffs(kt, rng, band(rng)), kt).ratio);
        const GroupElement g = exp_generator('F', 0.3);
        for (int l1 = 0; l1 <= 6; ++l1)
            for (int l2 = 0; l2 <= 6; ++l2) ortho = std::max(ortho, almost_orthogonality_probe(g, l1, l2, kt));
        const auto curve = high_mode_decay_curve(default_measure(0.3), 64, {1, 2, 3, 4, 5, 6, 7}, &cache);
        bool mono = true;
        for (std::size_t k = 1; k < curve.t0.size(); ++k) mono = mono && curve.t0[k] <= curve.t0[k - 1] + 1e-12;
        const bool ok = pi_err <= 1e-10 && agmon <= kAgmonConstant && ortho <= kAlmostOrthogonalityConstant && mono;
        return Outcome{ok, fmt("partial integration %.1e", pi_err) + fmt(", Agmon max %.4f", agmon) +
                               fmt(", almost-orthogonality max %.4f", ortho) +
                               std::string(", T0 curve non-increasing: ") + (mono ? "yes" : "no")};
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
