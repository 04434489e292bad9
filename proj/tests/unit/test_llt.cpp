#include "doctest.h"

#include <random>

#include "hyperlab/errors.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/parallel.hpp"

using namespace hyperlab;

namespace {

const LLTLab& lab() {
    static const LLTLab instance{LLTConfig{}};
    return instance;
}

GroupElement random_element(std::mt19937_64& rng, double t_max) {
    std::uniform_real_distribution<double> ang(0.0, 2 * kPi), rad(0.0, t_max);
    return GroupElement::rotation(ang(rng)) * GroupElement::diagonal(rad(rng)) * GroupElement::rotation(ang(rng));
}

}  // namespace

TEST_SUITE("llt") {
    TEST_CASE("config validation") {
        LLTConfig c;
        c.mc_samples = 100;
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = LLTConfig{};
        c.trunc = FourierTruncation::k_modes(16);
        CHECK_THROWS_AS(c.validate(), ValidationError);
        c = LLTConfig{};
        c.r_nodes = 10;
        CHECK_THROWS_AS(c.validate(), ValidationError);
    }

    TEST_CASE("line fit") {
        const auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
        CHECK(fit.slope == doctest::Approx(2.0));
        CHECK(fit.intercept == doctest::Approx(1.0));
        CHECK(fit.points == 4);
    }

    TEST_CASE("gamma density") {
        const double Q = 0.02, c2 = 1.1;
        CHECK(gamma_density(0.0, Q, c2) == 0.0);
        CHECK(gamma_density(1.3, Q, c2) == gamma_density(-1.3, Q, c2));
        double acc = 0.0;
        const double h = 1e-3;
        for (int k = -60000; k <= 60000; ++k) acc += h * gamma_density(k * h, Q, c2);
        const double a = c2 * Q;
        const double closed = kPi * kPi * std::sqrt(kPi) / (2 * a * std::sqrt(a));
        CHECK(acc == doctest::Approx(closed).epsilon(1e-8));
        CHECK(gamma_integral_closed_form(Q, c2) == doctest::Approx(closed).epsilon(1e-14));
    }

    TEST_CASE("spectral data of the default lab") {
        const auto& L = lab();
        CHECK(L.sigma() == doctest::Approx(0.9972975881453063).epsilon(1e-12));
        CHECK(L.delta0() == doctest::Approx(0.95));
        CHECK(L.hessian().Q == doctest::Approx(0.0107526573).epsilon(1e-8));
        CHECK(L.l1_norm() == doctest::Approx(3.634552).epsilon(1e-6));
        CHECK(L.c_mu() == doctest::Approx(197.901186).epsilon(1e-8));
        const double half_line = 0.5 * kPlancherelConstant * gamma_integral_closed_form(L.hessian().Q, L.hessian().c2);
        CHECK(L.c_mu() == doctest::Approx(half_line).epsilon(1e-8));
    }

    TEST_CASE("exact side: n = 0, hand evaluation at n = 1, cap refusal") {
        const auto& L = lab();
        const auto& cfg = L.config();
        CHECK(L.lhs_exact(0) == cfg.f(cfg.h0));
        CHECK(L.lhs_monte_carlo(0).value == cfg.f(cfg.h0));
        double hand = 0.0;
        for (const auto& a : cfg.measure.atoms()) hand += a.weight * cfg.f(a.g * cfg.h0);
        CHECK(L.lhs_exact(1) == doctest::Approx(hand / L.sigma()).epsilon(1e-14));
        CHECK_THROWS_AS(L.lhs_exact(16), BudgetError);
    }

    TEST_CASE("three-way oracle at small n") {
        const auto& L = lab();
        const std::vector<int> ns = {1, 2, 4, 6, 8};
        const std::vector<double> frozen = {0.9587178890, 2.6097285562, 6.8828017361, 11.8549576438, 17.1764766410};
        const auto fourier = L.lhs_fourier(ns);
        for (std::size_t j = 0; j < ns.size(); ++j) {
            const double exact = L.lhs_exact(ns[j]);
            CHECK(exact == doctest::Approx(frozen[j]).epsilon(1e-9));
            CHECK(std::abs(exact - fourier[j].value) <= 1e-4 * L.l1_norm());
            CHECK(std::abs(fourier[j].imag) < 1e-8);
        }
        const auto mc = L.lhs_monte_carlo(6);
        CHECK(std::abs(mc.value - L.lhs_exact(6)) <= 3 * mc.stderr_);
    }

    TEST_CASE("Monte Carlo is deterministic across thread counts") {
        const auto& L = lab();
        const int saved = thread_count();
        set_thread_count(1);
        const auto a = L.lhs_monte_carlo(4);
        set_thread_count(3);
        const auto b = L.lhs_monte_carlo(4);
        set_thread_count(saved);
        CHECK(a.value == b.value);
        CHECK(a.stderr_ == b.stderr_);
    }

    TEST_CASE("limit: two evaluations agree and are frozen") {
        const auto& L = lab();
        const auto rhs = L.rhs_limit();
        CHECK(rhs.relative_gap <= 1e-3);
        CHECK(rhs.path_b == doctest::Approx(673.18307823).epsilon(1e-9));
        CHECK(rhs.value() > 0.0);
        // Representative change h0 -> h0 k leaves x0 and the limit unchanged.
        const auto turned = L.rhs_limit(L.config().f, L.config().h0 * GroupElement::rotation(0.8));
        CHECK(turned.path_b == doctest::Approx(rhs.path_b).epsilon(1e-9));
        CHECK(turned.path_a == doctest::Approx(rhs.path_a).epsilon(1e-9));
    }

    TEST_CASE("psi_mu_r normalization and eigen-equations") {
        const auto& L = lab();
        const auto& tr = L.config().trunc;
        const auto& mu = L.config().measure;
        CHECK(std::abs(psi_mu_r(L.perron(), GroupElement(), tr) - 1.0) < 1e-12);
        const auto& s = L.branch()[20];
        std::mt19937_64 rng(8);
        for (int k = 0; k < 20; ++k) {
            const GroupElement g = random_element(rng, 1.5);
            cplx conv = 0.0;
            double conv0 = 0.0;
            for (const auto& a : mu.atoms()) {
                conv += a.weight * psi_mu_r(s, a.g.inverse() * g, tr);
                conv0 += a.weight * L.psi_zero(a.g.inverse() * g);
            }
            CHECK(std::abs(conv - s.lambda * psi_mu_r(s, g, tr)) < 1e-8);
            CHECK(std::abs(conv0 - L.sigma() * L.psi_zero(g)) < 1e-8 * std::max(1.0, std::abs(L.psi_zero(g))));
        }
    }

    TEST_CASE("psi_mu_r is Lipschitz in r") {
        const auto& L = lab();
        const auto& tr = L.config().trunc;
        double C = 0.0;
        for (std::size_t k = 0; k < L.branch().size(); k += 6) {
            const double r = std::abs(L.branch()[k].r);
            for (double t : {0.0, 0.5, 1.0, 2.0}) {
                const GroupElement g = GroupElement::rotation(0.3) * GroupElement::diagonal(t);
                const double d = std::abs(psi_mu_r(L.branch()[k], g, tr) - psi_mu_r(L.perron(), g, tr));
                C = std::max(C, d / (r * (1 + t)));
            }
        }
        MESSAGE("fitted Lipschitz constant " << C);
        CHECK(std::isfinite(C));
        CHECK(C < 100.0);
    }

    TEST_CASE("psi_n approaches psi_0 at the identity") {
        const auto& L = lab();
        const double a = L.psi_n(GroupElement(), 4), b = L.psi_n(GroupElement(), 16), c = L.psi_n(GroupElement(), 64);
        CHECK(a == doctest::Approx(1.117).epsilon(1e-3));
        CHECK(a < b);
        CHECK(b < c);
        CHECK(c < L.psi_zero(GroupElement()));
        CHECK(L.psi_zero(GroupElement()) == doctest::Approx(L.c_mu()).epsilon(1e-10));
    }

    TEST_CASE("low-frequency remainder decays and the surrogate constant is finite") {
        const auto& L = lab();
        const double r8 = L.low_frequency_remainder(8), r32 = L.low_frequency_remainder(32);
        CHECK(r8 == doctest::Approx(0.443).epsilon(2e-3));
        CHECK(r32 < r8);
        const double rate = -std::log(r32 / r8) / 24.0;
        CHECK(rate > 0.0);
        CHECK(std::isfinite(L.s_c_surrogate_constant(16)));
    }

    TEST_CASE("Fourier side at large n is bounded by the L1 norm and approaches the limit") {
        const auto& L = lab();
        const std::vector<int> ns = {16, 32, 64, 128, 256};
        const auto values = L.lhs_fourier(ns);
        const double rhs = L.rhs_limit().value();
        double prev = INFINITY;
        for (const auto& v : values) {
            CHECK(std::abs(v.value) / L.l1_norm() < 1e3);
            const double err = std::abs(v.value - rhs);
            CHECK(err < prev);
            prev = err;
        }
        CHECK(values.back().value == doctest::Approx(306.483877).epsilon(1e-8));
    }
}
