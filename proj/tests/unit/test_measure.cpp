#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "hyperlab/errors.hpp"
#include "hyperlab/measure.hpp"
#include "hyperlab/parallel.hpp"

using namespace hyperlab;

namespace {

double total_mass(const AtomicMeasure& mu) {
    double m = 0.0;
    for (const auto& a : mu.atoms()) m += a.weight;
    return m;
}

// Sorted (entries, weight) signature for comparing measures up to atom order.
std::vector<std::array<double, 5>> signature(const AtomicMeasure& mu) {
    std::vector<std::array<double, 5>> out;
    for (const auto& a : mu.atoms()) out.push_back({a.g.a, a.g.b, a.g.c, a.g.d, a.weight});
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_SUITE("measures") {
    TEST_CASE("atomic measure invariants") {
        CHECK_THROWS_AS(AtomicMeasure({{GroupElement(), 0.5}}), ValidationError);
        CHECK_THROWS_AS(AtomicMeasure({{GroupElement(), 1.0}, {GroupElement::diagonal(1), 0.0}}), ValidationError);
        const auto mu = default_measure(0.3);
        CHECK(mu.size() == 4);
        CHECK(total_mass(mu) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(support_radius(mu) == doctest::Approx(0.3).epsilon(1e-13));
    }

    TEST_CASE("generator words") {
        const GroupElement k = word_element("E", 0.3);
        CHECK(max_entry_difference(k, GroupElement::rotation(0.3)) < 1e-15);
        const GroupElement a = word_element("-F", 0.3);
        CHECK(max_entry_difference(a, GroupElement::diagonal(-0.3)) < 1e-15);
        CHECK_THROWS_AS(word_element("", 0.3), ValidationError);
    }

    TEST_CASE("convolution is associative and keeps mass") {
        const auto mu = default_measure(0.3);
        const auto nu = generator_measure({"E", "X"}, 0.2);
        const auto rho = generator_measure({"F", "-X", "EF"}, 0.1);
        const auto left = convolve(convolve(mu, nu).measure, rho).measure;
        const auto right = convolve(mu, convolve(nu, rho).measure).measure;
        const auto sl = signature(left), sr = signature(right);
        REQUIRE(sl.size() == sr.size());
        for (std::size_t i = 0; i < sl.size(); ++i)
            for (int k = 0; k < 5; ++k) CHECK(std::abs(sl[i][k] - sr[i][k]) < 1e-12);
        CHECK(total_mass(left) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("pruning reports the dropped mass") {
        std::vector<Atom> atoms = {{GroupElement(), 0.9}, {GroupElement::diagonal(0.1), 0.1}};
        const AtomicMeasure mu(atoms);
        const auto res = convolve(mu, mu, 0.05);
        CHECK(res.dropped_atoms == 1);
        CHECK(res.dropped_mass == doctest::Approx(0.01).epsilon(1e-12));
        CHECK(total_mass(res.measure) == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("atom cap") {
        CHECK_THROWS_AS(convolution_power(default_measure(0.3), 10), BudgetError);
        CHECK(convolution_power(default_measure(0.3), 0).size() == 1);
        CHECK(convolution_power(default_measure(0.3), 3).size() == 64);
    }

    TEST_CASE("symmetrize") {
        const auto mu = default_measure(0.3);
        CHECK(signature(symmetrize(mu)) == signature(mu));
        const GroupElement g = GroupElement::diagonal(0.4) * GroupElement::unipotent(0.2);
        const auto s = symmetrize(AtomicMeasure::dirac(g));
        REQUIRE(s.size() == 2);
        CHECK(s.atoms()[0].weight == doctest::Approx(0.5));
        CHECK(max_entry_difference(s.atoms()[1].g, g.inverse()) < 1e-15);
        CHECK(signature(symmetrize(s)) == signature(s));
    }

    TEST_CASE("sampling: identity at n = 0 and atom frequencies at n = 1") {
        const auto mu = AtomicMeasure({{GroupElement::rotation(0.1), 0.2},
                                       {GroupElement::rotation(0.2), 0.3},
                                       {GroupElement::rotation(0.3), 0.5}});
        CHECK(max_entry_difference(sample_product(mu, 0, 5u), GroupElement()) == 0.0);
        std::mt19937_64 rng(21);
        std::map<int, int> hits;
        const int S = 100000;
        for (int i = 0; i < S; ++i) {
            const GroupElement g = sample_product(mu, 1, rng);
            hits[static_cast<int>(std::lround(std::atan2(g.c, g.a) * 10))]++;
        }
        for (const auto& [key, p] : std::map<int, double>{{1, 0.2}, {2, 0.3}, {3, 0.5}}) {
            const double sd = std::sqrt(S * p * (1 - p));
            CHECK(std::abs(hits[key] - S * p) <= 3 * sd);
        }
    }

    TEST_CASE("E[kappa] at n = 1 matches the first moment") {
        const auto mu = generator_measure({"F", "-F", "X", "E"}, 0.5);
        std::mt19937_64 rng(23);
        const int S = 100000;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < S; ++i) {
            const double k = cartan_norm(sample_product(mu, 1, rng));
            s1 += k;
            s2 += k * k;
        }
        const double mean = s1 / S, sd = std::sqrt((s2 / S - mean * mean) / S);
        CHECK(std::abs(mean - moment(mu, 1)) <= 3 * sd);
    }

    TEST_CASE("moments and support radius") {
        const auto K = generator_measure({"E", "-E"}, 0.7);
        CHECK(moment(K, 2) < 1e-14);
        CHECK(support_radius(K) < 1e-7);
        const auto a = AtomicMeasure::dirac(GroupElement::diagonal(-1.5));
        CHECK(moment(a, 3) == doctest::Approx(std::pow(1.5, 3)).epsilon(1e-12));
        CHECK(support_radius(a) == doctest::Approx(1.5).epsilon(1e-12));
        const auto mu = default_measure(0.3);
        double direct = 0.0, radius = 0.0;
        for (const auto& at : mu.atoms()) {
            direct += at.weight * std::pow(cartan_norm(at.g), 2);
            radius = std::max(radius, cartan_norm(at.g));
        }
        CHECK(moment(mu, 2) == doctest::Approx(direct).epsilon(1e-14));
        CHECK(support_radius(mu) == radius);
    }

    TEST_CASE("sample_product(m + n) matches independent products in kappa statistics") {
        const auto mu = default_measure(0.3);
        const int S = 40000;
        std::mt19937_64 r1(31), r2(37);
        double a1 = 0, a2 = 0, b1 = 0, b2 = 0;
        for (int i = 0; i < S; ++i) {
            const double x = cartan_norm(sample_product(mu, 7, r1));
            const double y = cartan_norm(sample_product(mu, 3, r2) * sample_product(mu, 4, r2));
            a1 += x;
            a2 += x * x;
            b1 += y;
            b2 += y * y;
        }
        const double ma = a1 / S, mb = b1 / S;
        const double se = std::sqrt((a2 / S - ma * ma) / S + (b2 / S - mb * mb) / S);
        CHECK(std::abs(ma - mb) <= 3 * se);
    }

    TEST_CASE("Monte Carlo streams are deterministic") {
        auto r1 = make_stream(99, 4), r2 = make_stream(99, 4), r3 = make_stream(99, 5);
        CHECK(r1() == r2());
        CHECK(r1() != r3());
    }

    TEST_CASE("flattening estimator") {
        const double delta = 0.05;
        const auto dirac = AtomicMeasure::dirac(GroupElement());
        const auto est = flattening_l2(dirac, 3, delta, 10000, 1);
        CHECK(est.value == doctest::Approx(1.0 / std::sqrt(haar_ball_volume(delta))).epsilon(1e-12));
        const auto mu = default_measure(0.3);
        const double big = 1.5;
        const auto mc = flattening_l2(mu, 1, big, 100000, 2);
        const double exact = flattening_exact_n1(mu, big);
        // Delta method: value = sqrt(p / vol).
        CHECK(std::abs(mc.value - exact) <= 3 * mc.stderr_ + 1e-12);
    }

    TEST_CASE("subgroup concentration") {
        const auto dirac = AtomicMeasure::dirac(GroupElement());
        const auto rep = subgroup_concentration(dirac, 4, 0.05, 10000, 3);
        for (const auto& [name, m] : rep.family_mass) CHECK(m == 1.0);
        const auto in_A = generator_measure({"F", "-F"}, 0.4);
        CHECK(subgroup_concentration(in_A, 5, 0.05, 10000, 3).family_mass.at("conj_A") == 1.0);
        const auto def = subgroup_concentration(default_measure(0.3), 6, 0.05, 10000, 4);
        for (const auto& [name, m] : def.family_mass) {
            CHECK(m >= 0.0);
            CHECK(m < 0.5);
        }
    }

    TEST_CASE("subgroup distances vanish on the subgroup") {
        CHECK(distance_to_K(GroupElement::rotation(1.2)) < 1e-12);
        const double phi = kPi * 5 / 64;
        const GroupElement k = GroupElement::rotation(phi);
        CHECK(distance_to_conj_A(k * GroupElement::diagonal(0.7) * k.inverse(), phi) < 1e-8);
        CHECK(distance_to_conj_N(k * GroupElement::unipotent(1.3) * k.inverse(), phi) < 1e-8);
        CHECK(distance_to_conj_AN(k * GroupElement::diagonal(0.2) * GroupElement::unipotent(0.4) * k.inverse(), phi) <
              1e-8);
    }
}
