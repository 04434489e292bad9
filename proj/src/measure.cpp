#include "hyperlab/measure.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <bit>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/parallel.hpp"

namespace hyperlab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    return h;
}

void check_atoms(const std::vector<Atom>& atoms) {
    if (atoms.empty()) throw ValidationError("measure has no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.weight > 0.0)) throw ValidationError("measure atom with non-positive weight");
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "measure weights sum to " << total << ", expected 1";
        throw ValidationError(os.str());
    }
}

bool same_element(const GroupElement& g, const GroupElement& h) {
    return g.a == h.a && g.b == h.b && g.c == h.c && g.d == h.d;
}

// Chunked Monte Carlo: each chunk owns a substream; reduction follows chunk order.
constexpr std::size_t kChunk = 4096;

}  // namespace

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    check_atoms(atoms_);
    for (auto& a : atoms_) a.g.validate(1e-10);
}

AtomicMeasure AtomicMeasure::dirac(const GroupElement& g) { return AtomicMeasure({{g, 1.0}}); }

AtomicMeasure AtomicMeasure::from_unnormalized(std::vector<Atom> atoms) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.weight;
    if (!(total > 0.0)) throw ValidationError("measure has zero total mass");
    for (auto& a : atoms) a.weight /= total;
    // Absorb rounding in the last weight.
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    if (!atoms.empty()) atoms.back().weight += 1.0 - s;
    return AtomicMeasure(std::move(atoms));
}

std::uint64_t AtomicMeasure::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& a : atoms_) {
        for (double v : {a.g.a, a.g.b, a.g.c, a.g.d, a.weight}) h = fnv1a(h, std::bit_cast<std::uint64_t>(v));
    }
    return h;
}

GroupElement exp_generator(char letter, double s) {
    switch (letter) {
        case 'E': return GroupElement::rotation(s);
        case 'F': return GroupElement::diagonal(s);
        case 'X': return GroupElement::unipotent(s);
        default: {
            std::string msg = "unknown generator letter '";
            msg += letter;
            msg += "' (expected E, F or X)";
            throw ValidationError(msg);
        }
    }
}

GroupElement word_element(const std::string& word, double eps) {
    GroupElement g;
    double sign = 1.0;
    bool any = false;
    for (char ch : word) {
        if (ch == '-') {
            sign = -sign;
            continue;
        }
        if (ch == '+' || ch == ' ') continue;
        g = g * exp_generator(ch, sign * eps);
        sign = 1.0;
        any = true;
    }
    if (!any) throw ValidationError("empty generator word '" + word + "'");
    return g;
}

AtomicMeasure generator_measure(const std::vector<std::string>& words, double eps) {
    std::vector<Atom> atoms;
    for (const auto& w : words) atoms.push_back({word_element(w, eps), 1.0});
    return AtomicMeasure::from_unnormalized(std::move(atoms));
}

AtomicMeasure default_measure(double eps) { return generator_measure({"E", "-E", "F", "-F"}, eps); }

AtomicMeasure bi_k_invariant_surrogate(double t, int q) {
    std::vector<Atom> atoms;
    const GroupElement a = GroupElement::diagonal(t);
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) {
            const GroupElement g = GroupElement::rotation(kPi * i / q) * a * GroupElement::rotation(kPi * j / q);
            atoms.push_back({g, 1.0});
        }
    }
    return AtomicMeasure::from_unnormalized(std::move(atoms));
}

AtomicMeasure conjugate(const AtomicMeasure& mu, const GroupElement& k) {
    std::vector<Atom> atoms;
    const GroupElement ki = k.inverse();
    for (const auto& a : mu.atoms()) atoms.push_back({(k * a.g * ki).renormalized(), a.weight});
    return AtomicMeasure(std::move(atoms));
}

ConvolveResult convolve(const AtomicMeasure& mu, const AtomicMeasure& nu, double prune_threshold,
                        std::size_t cap) {
    const std::size_t count = mu.size() * nu.size();
    if (count > cap) {
        std::ostringstream os;
        os << "convolution would produce " << count << " atoms, above the cap of " << cap
           << "; prune or use Monte Carlo sampling";
        throw BudgetError(os.str());
    }
    std::vector<Atom> atoms;
    atoms.reserve(count);
    ConvolveResult res;
    for (const auto& x : mu.atoms()) {
        for (const auto& y : nu.atoms()) {
            const double w = x.weight * y.weight;
            if (prune_threshold > 0.0 && w < prune_threshold) {
                res.dropped_mass += w;
                ++res.dropped_atoms;
                continue;
            }
            atoms.push_back({x.g * y.g, w});
        }
    }
    if (atoms.empty()) throw ValidationError("pruning removed every atom");
    for (auto& a : atoms) a.g = a.g.renormalized();
    res.measure = AtomicMeasure::from_unnormalized(std::move(atoms));
    return res;
}

AtomicMeasure convolution_power(const AtomicMeasure& mu, int n, std::size_t cap) {
    if (n < 0) throw ValidationError("convolution power must be non-negative");
    double predicted = std::pow(static_cast<double>(mu.size()), n);
    if (predicted > static_cast<double>(cap)) {
        std::ostringstream os;
        os << "mu^{*" << n << "} has " << predicted << " atoms, above the cap of " << cap
           << "; use Monte Carlo";
        throw BudgetError(os.str());
    }
    AtomicMeasure acc = AtomicMeasure::dirac(GroupElement::identity());
    for (int i = 0; i < n; ++i) acc = convolve(acc, mu, 0.0, cap).measure;
    return acc;
}

AtomicMeasure symmetrize(const AtomicMeasure& mu) {
    std::vector<Atom> atoms;
    auto add = [&](const GroupElement& g, double w) {
        for (auto& a : atoms) {
            if (same_element(a.g, g)) {
                a.weight += w;
                return;
            }
        }
        atoms.push_back({g, w});
    };
    for (const auto& a : mu.atoms()) {
        add(a.g, 0.5 * a.weight);
        add(a.g.inverse(), 0.5 * a.weight);
    }
    return AtomicMeasure::from_unnormalized(std::move(atoms));
}

GroupElement sample_product(const AtomicMeasure& mu, int n, std::mt19937_64& rng) {
    if (n < 0) throw ValidationError("sample_product needs n >= 0");
    std::vector<double> w;
    w.reserve(mu.size());
    for (const auto& a : mu.atoms()) w.push_back(a.weight);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    ProductChain chain;
    for (int i = 0; i < n; ++i) chain.multiply_right(mu.atoms()[pick(rng)].g);
    return n == 0 ? GroupElement::identity() : chain.finish();
}

GroupElement sample_product(const AtomicMeasure& mu, int n, std::uint64_t seed) {
    auto rng = make_stream(seed, 0);
    return sample_product(mu, n, rng);
}

double moment(const AtomicMeasure& mu, int k) {
    if (k < 1 || k > 4) throw ValidationError("moment order must be in {1,2,3,4}");
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.weight * std::pow(cartan_norm(a.g), k);
    return s;
}

double support_radius(const AtomicMeasure& mu) {
    double r = 0.0;
    for (const auto& a : mu.atoms()) r = std::max(r, cartan_norm(a.g));
    return r;
}

double haar_ball_volume(double delta) {
    if (!(delta > 0.0) || delta >= 2.0) throw ValidationError("ball radius must lie in (0, 2)");
    const double tmax = 2.0 * std::acosh(0.5 * (1.0 + std::sqrt(1.0 + delta * delta)));
    struct P {
        double delta;
    } p{delta};
    gsl_function F;
    F.function = [](double t, void* vp) {
        const double d = static_cast<P*>(vp)->delta;
        const double c = (2.0 * std::cosh(t) + 2.0 - d * d) / (4.0 * std::cosh(0.5 * t));
        double len;
        if (c >= 1.0) len = 0.0;
        else if (c <= -1.0) len = 2.0 * kPi;
        else len = 2.0 * std::acos(c);
        return std::sinh(t) * len;
    };
    F.params = &p;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
    double result = 0.0, err = 0.0;
    gsl_integration_qags(&F, 0.0, tmax, 0.0, 1e-12, 200, ws, &result, &err);
    gsl_integration_workspace_free(ws);
    return result;
}

FlatteningEstimate flattening_l2(const AtomicMeasure& mu, int n, double delta, std::size_t samples,
                                 std::uint64_t seed) {
    if (samples < 10000) throw ValidationError("flattening_l2 needs at least 1e4 samples");
    FlatteningEstimate est;
    est.ball_volume = haar_ball_volume(delta);
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<std::size_t> hits(chunks, 0);
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = make_stream(seed, c);
        const std::size_t m = std::min(kChunk, samples - c * kChunk);
        std::size_t h = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const GroupElement g = sample_product(mu, n, rng);
            const GroupElement k = sample_product(mu, n, rng);
            if (frobenius_distance(g, k) < delta) ++h;
        }
        hits[c] = h;
    });
    std::size_t total = 0;
    for (auto h : hits) total += h;
    const double ns = static_cast<double>(samples);
    const double p = total / ns;
    est.collision_rate = p;
    if (total == 0) {
        est.upper_bound = true;
        est.value = std::sqrt(3.0 / ns / est.ball_volume);
        est.stderr_ = 0.0;
        return est;
    }
    est.value = std::sqrt(p / est.ball_volume);
    const double sp = std::sqrt(p * (1.0 - p) / ns);
    est.stderr_ = sp / (2.0 * std::sqrt(p * est.ball_volume));
    return est;
}

double flattening_exact_n1(const AtomicMeasure& mu, double delta) {
    double s = 0.0;
    for (const auto& x : mu.atoms())
        for (const auto& y : mu.atoms())
            if (frobenius_distance(x.g, y.g) < delta) s += x.weight * y.weight;
    return std::sqrt(s / haar_ball_volume(delta));
}

namespace {

GroupElement conj_by_rotation(const GroupElement& g, double phi) {
    const GroupElement k = GroupElement::rotation(phi);
    return k.inverse() * g * k;
}

// min over a > 0 of (p - a)^2 + (q - 1/a)^2
double diag_fit(double p, double q) {
    auto f = [&](double s) {
        const double a = std::exp(s);
        return (p - a) * (p - a) + (q - 1.0 / a) * (q - 1.0 / a);
    };
    double best_s = 0.0, best = f(0.0);
    for (int i = -40; i <= 40; ++i) {
        const double s = 0.2 * i;
        const double v = f(s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }
    const auto r = boost::math::tools::brent_find_minima(f, best_s - 0.2, best_s + 0.2, 52);
    return std::min(best, r.second);
}

}  // namespace

double distance_to_K(const GroupElement& g) {
    const double n2 = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d;
    const double m = std::hypot(g.a + g.d, g.c - g.b);
    return std::sqrt(std::max(0.0, n2 + 2.0 - 2.0 * m));
}

double distance_to_conj_A(const GroupElement& g, double phi) {
    const GroupElement h = conj_by_rotation(g, phi);
    return std::sqrt(h.b * h.b + h.c * h.c + diag_fit(h.a, h.d));
}

double distance_to_conj_N(const GroupElement& g, double phi) {
    const GroupElement h = conj_by_rotation(g, phi);
    return std::sqrt((h.a - 1.0) * (h.a - 1.0) + (h.d - 1.0) * (h.d - 1.0) + h.c * h.c);
}

double distance_to_conj_AN(const GroupElement& g, double phi) {
    const GroupElement h = conj_by_rotation(g, phi);
    return std::sqrt(h.c * h.c + diag_fit(h.a, h.d));
}

DiophantineReport subgroup_concentration(const AtomicMeasure& mu, int n, double delta,
                                         std::size_t samples, std::uint64_t seed,
                                         double c2_over_c1) {
    if (samples < 10000) throw ValidationError("subgroup_concentration needs at least 1e4 samples");
    if (!(delta > 0.0)) throw ValidationError("delta must be positive");
    constexpr int G = kConjugationGrid;
    // Per family: counts per conjugation angle (K uses slot 0 only).
    const std::size_t chunks = (samples + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> counts(chunks, std::vector<std::size_t>(3 * G + 1, 0));
    parallel_for(chunks, [&](std::size_t c) {
        auto rng = make_stream(seed, c);
        const std::size_t m = std::min(kChunk, samples - c * kChunk);
        auto& cnt = counts[c];
        for (std::size_t i = 0; i < m; ++i) {
            const GroupElement g = sample_product(mu, n, rng);
            if (distance_to_K(g) < delta) ++cnt[3 * G];
            for (int j = 0; j < G; ++j) {
                const double phi = kPi * j / G;
                if (distance_to_conj_A(g, phi) < delta) ++cnt[j];
                if (distance_to_conj_N(g, phi) < delta) ++cnt[G + j];
                if (distance_to_conj_AN(g, phi) < delta) ++cnt[2 * G + j];
            }
        }
    });
    std::vector<std::size_t> total(3 * G + 1, 0);
    for (const auto& cnt : counts)
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += cnt[i];
    const double ns = static_cast<double>(samples);
    auto family_max = [&](int offset) {
        std::size_t best = 0;
        for (int j = 0; j < G; ++j) best = std::max(best, total[offset + j]);
        return best / ns;
    };
    DiophantineReport rep;
    rep.n = n;
    rep.delta = delta;
    rep.family_mass["conj_A"] = family_max(0);
    rep.family_mass["conj_N"] = family_max(G);
    rep.family_mass["conj_AN"] = family_max(2 * G);
    rep.family_mass["K"] = total[3 * G] / ns;
    rep.threshold = std::pow(delta, c2_over_c1);
    double worst = 0.0;
    for (const auto& [name, m] : rep.family_mass) worst = std::max(worst, m);
    rep.pass = worst <= rep.threshold;
    return rep;
}

}  // namespace hyperlab
