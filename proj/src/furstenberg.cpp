#include "hyperlab/furstenberg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/parallel.hpp"

namespace hyperlab {

double StationaryDensity::value(double theta) const { return synthesize(coefficients, trunc, theta).real(); }

StationaryDensity stationary_density(const AtomicMeasure& mu, const FourierTruncation& trunc, const MatrixCache* cache) {
    if (trunc.space != ModeSpace::Omega) throw ValidationError("stationary density lives on Omega-modes");
    const auto T0 = assemble_transfer(mu, 0.0, trunc, OperatorKind::T0, cache);
    const CMatrix adj = T0.entries.adjoint();
    Eigen::ComplexEigenSolver<CMatrix> es(adj, true);
    if (es.info() != Eigen::Success) throw FixedPointError("eigensolver failed on T0*");
    const CVector& ev = es.eigenvalues();
    int best = 0;
    for (int k = 1; k < ev.size(); ++k)
        if (std::abs(ev[k] - 1.0) < std::abs(ev[best] - 1.0)) best = k;
    StationaryDensity out;
    out.trunc = trunc;
    out.eigenvalue_distance = std::abs(ev[best] - 1.0);
    if (out.eigenvalue_distance > 1e-6) {
        std::ostringstream os;
        os << "T0* has no eigenvalue within 1e-6 of 1 (closest at distance " << out.eigenvalue_distance << ")";
        throw FixedPointError(os.str());
    }
    for (int k = 0; k < ev.size(); ++k) {
        if (k != best && std::abs(ev[k] - 1.0) <= 1e-6) {
            throw FixedPointError("eigenvalue 1 of T0* is not simple at this truncation");
        }
    }
    CVector c = es.eigenvectors().col(best);
    const cplx c0 = c[trunc.index(0)];
    if (std::abs(c0) < 1e-14 * c.norm()) throw FixedPointError("fixed point of T0* has zero mass");
    c /= c0;
    out.coefficients = c;
    out.mass = c[trunc.index(0)].real();
    const int M = trunc.max_mode();
    for (int m = 0; m <= M; ++m)
        out.asymmetry = std::max(out.asymmetry, std::abs(c[trunc.index(m)] - std::conj(c[trunc.index(-m)])));
    const auto vals = synthesize_real_on_grid(c, trunc, 4 * trunc.nodes());
    out.positivity_min = *std::min_element(vals.begin(), vals.end());
    return out;
}

double stationarity_residual(const StationaryDensity& psi, const AtomicMeasure& mu, int test_count, std::uint64_t seed) {
    const FourierTruncation& tr = psi.trunc;
    const int M = tr.max_mode();
    const int L = 16 * tr.nodes();
    std::vector<double> psi_vals(L);
    for (int j = 0; j < L; ++j) psi_vals[j] = psi.value(kPi * j / L);
    std::vector<double> worst(static_cast<std::size_t>(test_count), 0.0);
    parallel_for(static_cast<std::size_t>(test_count), [&](std::size_t k) {
        auto rng = make_stream(seed, k);
        std::normal_distribution<double> nd;
        CVector phi = CVector::Zero(tr.dim());
        phi[tr.index(0)] = nd(rng);
        for (int m = 1; m <= M; ++m) {
            const cplx z(nd(rng), nd(rng));
            phi[tr.index(m)] = z;
            phi[tr.index(-m)] = std::conj(z);
        }
        phi /= phi.norm();
        double lhs = 0.0, rhs = 0.0;
        for (int j = 0; j < L; ++j) {
            const double th = kPi * j / L;
            double moved = 0.0;
            for (const auto& a : mu.atoms()) moved += a.weight * synthesize(phi, tr, boundary_action(a.g, th)).real();
            lhs += moved * psi_vals[j];
            rhs += synthesize(phi, tr, th).real() * psi_vals[j];
        }
        worst[k] = std::abs(lhs - rhs) / L;
    });
    return *std::max_element(worst.begin(), worst.end());
}

std::vector<double> dyadic_block_norms(const CVector& coeffs, const FourierTruncation& trunc) {
    const int M = trunc.max_mode();
    int lmax = 0;
    while ((1 << lmax) <= M) ++lmax;  // block lmax holds 2^{lmax-1} <= |m| <= M
    std::vector<double> sq(static_cast<std::size_t>(lmax) + 1, 0.0);
    for (int m = -M; m <= M; ++m) {
        const int a = std::abs(m);
        int l = 0;
        while ((1 << l) <= a) ++l;
        sq[l] += std::norm(coeffs[trunc.index(m)]);
    }
    for (auto& v : sq) v = std::sqrt(v);
    return sq;
}

DecayReport smoothness_report(const CVector& coeffs, const FourierTruncation& trunc) {
    DecayReport rep;
    rep.block_norms = dyadic_block_norms(coeffs, trunc);
    const int lmax = static_cast<int>(rep.block_norms.size()) - 1;
    if (lmax < 5) throw ValidationError("smoothness_report needs at least 5 dyadic blocks (N >= 32)");
    double high = 0.0;
    for (int l = 1; l <= lmax; ++l) high = std::max(high, rep.block_norms[l]);
    if (high <= 1e-12 * std::max(rep.block_norms[0], 1e-300)) {
        rep.infinite = true;
        rep.s = std::numeric_limits<double>::infinity();
        rep.m_class = std::numeric_limits<int>::max();
        return rep;
    }
    std::vector<double> x, y;
    for (int l = 2; l <= lmax - 1; ++l) {
        x.push_back(l);
        y.push_back(std::log2(std::max(rep.block_norms[l], 1e-300)));
    }
    const LineFit fit = fit_line(x, y);
    rep.s = -fit.slope - 1.0;
    rep.m_class = static_cast<int>(std::floor(rep.s - 0.5));
    return rep;
}

AgmonResult agmon_check(const CVector& coeffs, const FourierTruncation& trunc, double t) {
    const int M = trunc.max_mode();
    double l2 = 0.0, ht = 0.0;
    for (int m = -M; m <= M; ++m) {
        const double a = std::norm(coeffs[trunc.index(m)]);
        l2 += a;
        ht += std::pow(1.0 + static_cast<double>(m) * m, t) * a;
    }
    AgmonResult res;
    const double period = trunc.space == ModeSpace::Omega ? kPi : 2.0 * kPi;
    const int L = 16 * (2 * M + 1);
    for (int j = 0; j < L; ++j) res.sup = std::max(res.sup, std::abs(synthesize(coeffs, trunc, period * j / L)));
    res.rhs = std::sqrt(std::sqrt(l2) * std::sqrt(ht));
    res.ratio = res.rhs > 0.0 ? res.sup / res.rhs : 0.0;
    return res;
}

namespace {

std::vector<int> block_indices(int l, const FourierTruncation& trunc) {
    std::vector<int> idx;
    if (l == 0) {
        idx.push_back(trunc.index(0));
        return idx;
    }
    for (int m = -trunc.max_mode(); m <= trunc.max_mode(); ++m) {
        const int a = std::abs(m);
        if (a >= (1 << (l - 1)) && a < (1 << l)) idx.push_back(trunc.index(m));
    }
    return idx;
}

}  // namespace

double almost_orthogonality_probe(const GroupElement& g, int l1, int l2, const FourierTruncation& trunc) {
    if (trunc.space != ModeSpace::K) throw ValidationError("almost_orthogonality_probe uses K-modes");
    if (l1 < 0 || l2 < 0 || (1 << std::max(l1, l2)) > trunc.max_mode())
        throw ValidationError("almost_orthogonality_probe needs 2^{max(l1,l2)} <= N");
    const auto R = assemble_rho(g, 0.0, trunc);
    const auto rows = block_indices(l2, trunc);
    const auto cols = block_indices(l1, trunc);
    CMatrix block(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = R.entries(rows[i], cols[j]);
    return operator_norm(block) * std::ldexp(1.0, std::abs(l1 - l2));
}

PartialIntegration partial_integration(const CVector& c1, const CVector& c2, const FourierTruncation& trunc) {
    const int M = trunc.max_mode(), s = trunc.frequency();
    PartialIntegration out;
    out.lhs_c = 0.0;
    for (int m = -M; m <= M; ++m) {
        const double lam = static_cast<double>(s * m) * (s * m);
        out.lhs_c += c1[trunc.index(m)] * std::conj(lam * c2[trunc.index(m)]);
    }
    CVector d1(trunc.dim()), d2(trunc.dim());
    for (int m = -M; m <= M; ++m) {
        d1[trunc.index(m)] = cplx(0.0, s * m) * c1[trunc.index(m)];
        d2[trunc.index(m)] = cplx(0.0, s * m) * c2[trunc.index(m)];
    }
    const double period = trunc.space == ModeSpace::Omega ? kPi : 2.0 * kPi;
    const int L = 4 * (2 * M + 1);
    out.rhs_c = 0.0;
    for (int j = 0; j < L; ++j) {
        const double th = period * j / L;
        out.rhs_c += synthesize(d1, trunc, th) * std::conj(synthesize(d2, trunc, th));
    }
    out.rhs_c /= static_cast<double>(L);
    out.lhs = out.lhs_c.real();
    out.error = std::abs(out.lhs_c - out.rhs_c);
    return out;
}

HighModeCurve high_mode_decay_curve(const AtomicMeasure& mu, int N, const std::vector<int>& L_range,
                                    const MatrixCache* cache) {
    const auto k_trunc = FourierTruncation::k_modes(N);
    const auto o_trunc = FourierTruncation::omega(N);
    const auto S = assemble_transfer(mu, 0.0, k_trunc, OperatorKind::TransferPlus, cache);
    const auto T = assemble_transfer(mu, 0.0, o_trunc, OperatorKind::T0, cache);
    HighModeCurve curve;
    curve.L = L_range;
    curve.s0_plus.resize(L_range.size());
    curve.t0.resize(L_range.size());
    parallel_for(L_range.size(), [&](std::size_t i) {
        curve.s0_plus[i] = high_mode_norm(S, L_range[i]);
        curve.t0[i] = high_mode_norm(T, L_range[i]);
    });
    for (std::size_t i = 0; i < L_range.size(); ++i) {
        if (!curve.s0_plus_quarter && curve.s0_plus[i] <= 0.25) curve.s0_plus_quarter = L_range[i];
        if (!curve.s0_plus_half && curve.s0_plus[i] <= 0.5) curve.s0_plus_half = L_range[i];
        if (!curve.t0_quarter && curve.t0[i] <= 0.25) curve.t0_quarter = L_range[i];
        if (!curve.t0_half && curve.t0[i] <= 0.5) curve.t0_half = L_range[i];
    }
    return curve;
}

}  // namespace hyperlab
