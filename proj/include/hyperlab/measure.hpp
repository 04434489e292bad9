#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hyperlab/group.hpp"

namespace hyperlab {

struct Atom {
    GroupElement g;
    double weight;
};

inline constexpr std::size_t kAtomCap = 1'000'000;

class AtomicMeasure {
public:
    AtomicMeasure() = default;
    // Validates positivity and total mass 1 within 1e-12.
    explicit AtomicMeasure(std::vector<Atom> atoms);

    static AtomicMeasure dirac(const GroupElement& g);
    // Normalizes weights to sum 1.
    static AtomicMeasure from_unnormalized(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    // Content hash over the exact bit patterns of entries and weights.
    std::uint64_t hash() const;

private:
    std::vector<Atom> atoms_;
};

// Lie algebra generators: E rotation, F = diag(1/2, -1/2), X upper nilpotent.
GroupElement exp_generator(char letter, double s);
// Word such as "E", "-F" or "EF" mapped to the product of exp(+-eps * letter).
GroupElement word_element(const std::string& word, double eps);
AtomicMeasure generator_measure(const std::vector<std::string>& words, double eps);
// {exp(+-eps E), exp(+-eps F)} with weights 1/4.
AtomicMeasure default_measure(double eps = 0.3);
// Rotation-averaged surrogate nu_q * delta_{a_t} * nu_q with q equally spaced rotations.
AtomicMeasure bi_k_invariant_surrogate(double t, int q);
// Conjugate k mu k^{-1}.
AtomicMeasure conjugate(const AtomicMeasure& mu, const GroupElement& k);

struct ConvolveResult {
    AtomicMeasure measure;
    double dropped_mass = 0.0;
    std::size_t dropped_atoms = 0;
};

// Throws BudgetError when the product support exceeds cap.
ConvolveResult convolve(const AtomicMeasure& mu, const AtomicMeasure& nu,
                        double prune_threshold = 0.0, std::size_t cap = kAtomCap);
AtomicMeasure convolution_power(const AtomicMeasure& mu, int n, std::size_t cap = kAtomCap);

AtomicMeasure symmetrize(const AtomicMeasure& mu);

GroupElement sample_product(const AtomicMeasure& mu, int n, std::mt19937_64& rng);
GroupElement sample_product(const AtomicMeasure& mu, int n, std::uint64_t seed);

double moment(const AtomicMeasure& mu, int k);
double support_radius(const AtomicMeasure& mu);

// Haar volume of the Frobenius ball {g : |g - e|_F < delta}.
double haar_ball_volume(double delta);

struct FlatteningEstimate {
    double value = 0.0;        // sqrt(P[d < delta] / vol)
    double stderr_ = 0.0;
    bool upper_bound = false;  // no collisions: value is a 3/samples bound
    double collision_rate = 0.0;
    double ball_volume = 0.0;
};

FlatteningEstimate flattening_l2(const AtomicMeasure& mu, int n, double delta, std::size_t samples,
                                 std::uint64_t seed);
// Exact double sum at n = 1.
double flattening_exact_n1(const AtomicMeasure& mu, double delta);

struct DiophantineReport {
    int n = 0;
    double delta = 0.0;
    std::map<std::string, double> family_mass;
    double threshold = 0.0;  // delta^{c2/c1}
    bool pass = false;
};

// Frobenius distance from g to the subgroup families, minimized over the remaining
// parameters for one conjugation angle phi.
double distance_to_K(const GroupElement& g);
double distance_to_conj_A(const GroupElement& g, double phi);
double distance_to_conj_N(const GroupElement& g, double phi);
double distance_to_conj_AN(const GroupElement& g, double phi);

inline constexpr int kConjugationGrid = 64;

DiophantineReport subgroup_concentration(const AtomicMeasure& mu, int n, double delta,
                                         std::size_t samples, std::uint64_t seed,
                                         double c2_over_c1 = 0.2);

}  // namespace hyperlab
