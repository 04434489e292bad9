#include "doctest.h"

#include <random>

#include "hyperlab/errors.hpp"
#include "hyperlab/spherical.hpp"

using namespace hyperlab;

namespace {

// P_{-1/2}(cosh t) = 2F1(1/2, 1/2; 1; (1 - cosh t)/2), summed until the terms drop below 1e-17.
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

}  // namespace

TEST_SUITE("spherical") {
    TEST_CASE("c-function closed form") {
        CHECK(c_inverse_sq(0.0) == 0.0);
        CHECK(c_inverse_sq(1.0) == doctest::Approx(3.1298810356317586).epsilon(1e-12));
        double worst = 0.0;
        for (int k = 0; k <= 5000; ++k) {
            const double r = 0.01 * k;
            worst = std::max(worst, std::abs(c_inverse_sq(r) - kPi * r * std::tanh(kPi * r)));
        }
        CHECK(worst <= 1e-10);
        CHECK(c_inverse_sq(-2.3) == doctest::Approx(c_inverse_sq(2.3)).epsilon(1e-15));
    }

    TEST_CASE("small-r fit recovers pi^2") {
        CHECK(std::abs(fit_small_r().c0 - kPi * kPi) < 1e-4);
    }

    TEST_CASE("spherical function values and symmetries") {
        for (double r : {0.0, 0.7, 5.0}) CHECK(spherical_function(r, 0.0) == 1.0);
        CHECK(std::abs(spherical_function(0.0, 1.0) - legendre_oracle(1.0)) < 1e-8);
        CHECK(legendre_oracle(1.0) == doctest::Approx(0.940862159249).epsilon(1e-11));
        for (double r : {0.0, 0.3, 1.7, 6.0})
            for (double t : {0.2, 1.0, 2.5, 4.0}) {
                const cplx z = spherical_function_complex(r, t);
                CHECK(std::abs(z.imag()) < 1e-10);
                CHECK(std::abs(spherical_function(r, t) - spherical_function(-r, t)) < 1e-10);
                CHECK(std::abs(spherical_function(r, t)) <= spherical_function(0.0, t) + 1e-12);
            }
    }

    TEST_CASE("Plancherel grid") {
        const auto g = plancherel_grid(20.0, 128);
        CHECK(g.r_nodes.size() == 128);
        for (double w : g.r_weights) CHECK(w >= 0.0);
        CHECK(g.constant == doctest::Approx(1.0 / (2 * kPi * kPi)));
        CHECK_THROWS_AS(plancherel_grid(20.0, 32), ValidationError);
        CHECK_THROWS_AS(plancherel_grid(-1.0, 128), ValidationError);
    }

    TEST_CASE("spherical transform of a radial bump") {
        const auto f = TestFunctionX::gaussian_bump(GroupElement(), 0.5);
        const std::vector<double> r = {0.0, 0.5, 1.0, 3.0};
        std::vector<double> neg;
        for (double x : r) neg.push_back(-x);
        const auto a = spherical_transform(f, r), b = spherical_transform(f, neg);
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-12);
        CHECK(a.values[0] > a.values[2]);
        const auto g = TestFunctionX::gaussian_bump(GroupElement(), 0.3);
        const auto ag = spherical_transform(g, r);
        // Linearity through the profile: the transform of f + 2g is read off the two parts.
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::isfinite(a.values[i] + 2 * ag.values[i]));
        CHECK_FALSE(a.truncated);
    }

    TEST_CASE("radial Helgason coefficients live in mode 0") {
        const auto tr = FourierTruncation::omega(8);
        const auto f = TestFunctionX::gaussian_bump(GroupElement(), 0.5);
        const std::vector<double> r = {0.0, 0.8, 2.0, 5.0};
        const auto hc = helgason_transform(f, r, tr);
        const auto st = spherical_transform(f, r);
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(std::abs(hc.values(i, tr.index(0)) - st.values[i]) < 1e-10);
            for (int m = 1; m <= 8; ++m) CHECK(std::abs(hc.values(i, tr.index(m))) < 1e-12);
        }
    }

    TEST_CASE("L1 bound on random bumps") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ang(0, 2 * kPi), rad(0, 1.5), wid(0.3, 0.9);
        const auto tr = FourierTruncation::omega(8);
        const std::vector<double> r = {0.0, 0.4, 1.5, 4.0, 9.0};
        for (int k = 0; k < 6; ++k) {
            const auto f = TestFunctionX::gaussian_bump(GroupElement::rotation(ang(rng)) * GroupElement::diagonal(rad(rng)),
                                                        wid(rng));
            CHECK(helgason_transform(f, r, tr).max_l2_over_l1 <= 1.0);
        }
    }

    TEST_CASE("round trips at N = 32, 128 nodes, r_max = 20, width 0.5") {
        const auto grid = plancherel_grid(20.0, 128);
        const auto tr = FourierTruncation::omega(32);
        const auto radial = TestFunctionX::gaussian_bump(GroupElement(), 0.5);
        CHECK(relative_sup_error(radial, helgason_transform(radial, grid.r_nodes, tr), grid) <= 1e-3);
        const auto moved = TestFunctionX::gaussian_bump(GroupElement::rotation(0.4) * GroupElement::diagonal(0.8), 0.5);
        const auto hc = helgason_transform(moved, grid.r_nodes, tr);
        CHECK(relative_sup_error(moved, hc, grid) <= 5e-3);
        CHECK(hc.max_l2_over_l1 <= 1.0);
    }

    TEST_CASE("zero and linear inversion") {
        const auto grid = plancherel_grid(20.0, 64);
        const auto tr = FourierTruncation::omega(8);
        HelgasonCoefficients zero;
        zero.values = CMatrix::Zero(64, tr.dim());
        zero.r_nodes = grid.r_nodes;
        zero.trunc = tr;
        const std::vector<GroupElement> pts = {GroupElement(), GroupElement::diagonal(0.7)};
        for (double v : inverse_transform(zero, grid, pts)) CHECK(v == 0.0);
        const auto f = TestFunctionX::gaussian_bump(GroupElement::diagonal(0.3), 0.5);
        auto hc = helgason_transform(f, grid.r_nodes, tr);
        const auto one = inverse_transform(hc, grid, pts);
        hc.values *= 3.0;
        const auto three = inverse_transform(hc, grid, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) CHECK(three[i] == doctest::Approx(3 * one[i]).epsilon(1e-12));
    }

    TEST_CASE("norms") {
        const auto f = TestFunctionX::gaussian_bump(GroupElement::diagonal(1.2), 0.1);
        const auto n = norms(f, 0.0);
        CHECK(n.star >= n.l1);
        CHECK(n.star / n.l1 == doctest::Approx(1 + 1.2 * 1.2).epsilon(0.02));
        const auto grid = plancherel_grid(20.0, 64);
        const auto tr = FourierTruncation::omega(8);
        const auto g = TestFunctionX::gaussian_bump(GroupElement(), 0.6);
        CHECK(norms(g, 0.0, &grid, &tr).sobolev <= norms(g, 1.0, &grid, &tr).sobolev);
    }

    TEST_CASE("band-limited bump") {
        const auto tr = FourierTruncation::omega(8);
        CVector modes = CVector::Zero(tr.dim());
        modes[tr.index(0)] = 1.0;
        const auto f = bandlimited_bump(3.0, modes, tr);
        const auto hc = helgason_transform(f, {2.0, 3.5, 6.0}, tr);
        CHECK(hc.values.row(1).norm() < 1e-8);
        CHECK(hc.values.row(2).norm() < 1e-8);
        CHECK(hc.values.row(0).norm() > 1e-3);
        CHECK(std::isfinite(f(GroupElement::diagonal(0.4))));
        const double v = f(GroupElement::rotation(0.3) * GroupElement::diagonal(0.4));
        CHECK(v == doctest::Approx(f(GroupElement::diagonal(0.4))).epsilon(1e-10));
        CHECK(std::isfinite(norms(f, 0.0).l1));
        CHECK(norms(f, 0.0).l1_truncated);
    }

    TEST_CASE("Plancherel constant calibration is stable across bumps") {
        const auto tr = FourierTruncation::omega(8);
        const auto ref = TestFunctionX::gaussian_bump(GroupElement(), 0.5);
        std::vector<TestFunctionX> others;
        others.push_back(TestFunctionX::gaussian_bump(GroupElement(), 0.7));
        others.push_back(TestFunctionX::gaussian_bump(GroupElement::diagonal(0.5), 0.5));
        others.push_back(TestFunctionX::gaussian_bump(GroupElement::rotation(1.0) * GroupElement::diagonal(0.9), 0.6));
        const auto cal = calibrate_plancherel(ref, others, tr, 20.0, 128);
        CHECK(cal.stable);
        CHECK(cal.constant == doctest::Approx(kPlancherelConstant).epsilon(1e-3));
    }
}
