#include "hyperlab/boundary.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/parallel.hpp"

namespace hyperlab {

const char* to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Rho: return "rho";
        case OperatorKind::Transfer: return "S_r";
        case OperatorKind::TransferPlus: return "S0_plus";
        case OperatorKind::T0: return "T0";
    }
    return "?";
}

const char* to_string(ModeSpace space) { return space == ModeSpace::Omega ? "omega" : "K"; }

void FourierTruncation::validate() const {
    if (N < 1) throw ValidationError("truncation N must be >= 1");
    if (Q < 8 * N) {
        std::ostringstream os;
        os << "aliasing guard violated: Q = " << Q << " < 8N = " << 8 * N;
        throw ValidationError(os.str());
    }
}

namespace {

// Analysis matrix A(n, j) = e^{-i s n theta_j} / nodes, cached per truncation.
std::shared_ptr<const CMatrix> analysis_matrix(const FourierTruncation& tr) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, std::shared_ptr<const CMatrix>> cache;
    const auto key = std::make_tuple(tr.N, tr.Q, static_cast<int>(tr.space));
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const int D = tr.dim(), J = tr.nodes(), M = tr.max_mode(), s = tr.frequency();
    auto A = std::make_shared<CMatrix>(D, J);
    for (int j = 0; j < J; ++j) {
        const double th = tr.node(j);
        for (int n = -M; n <= M; ++n) (*A)(n + M, j) = std::polar(1.0 / J, -s * n * th);
    }
    cache.emplace(key, A);
    return A;
}

// Adds weight * W(theta_j) * e^{i s m alpha(theta_j)} into row j of B.
void accumulate_atom(CMatrix& B, const FourierTruncation& tr, const GroupElement& g, double r, double weight,
                     bool koopman) {
    const int J = tr.nodes(), M = tr.max_mode(), s = tr.frequency();
    // rho_r(g) uses g^{-1} on the boundary; T0 composes with alpha_g.
    const GroupElement h = koopman ? g : g.inverse();
    for (int j = 0; j < J; ++j) {
        const double th = tr.node(j);
        const double c = std::cos(th), sn = std::sin(th);
        const double v1 = h.a * c + h.b * sn, v2 = h.c * c + h.d * sn;
        const double alpha = std::atan2(v2, v1);
        cplx w = weight;
        if (!koopman) {
            const double H = std::log(v1 * v1 + v2 * v2);
            w *= std::exp(cplx(-0.5 * H, -r * H));
        }
        const cplx z = std::polar(1.0, s * alpha);
        B(j, M) += w;
        cplx p = w;
        for (int m = 1; m <= M; ++m) {
            p *= z;
            B(j, M + m) += p;
        }
        const cplx zc = std::conj(z);
        p = w;
        for (int m = 1; m <= M; ++m) {
            p *= zc;
            B(j, M - m) += p;
        }
    }
}

CMatrix assemble_entries(const std::vector<Atom>& atoms, double r, const FourierTruncation& tr, bool koopman) {
    tr.validate();
    CMatrix B = CMatrix::Zero(tr.nodes(), tr.dim());
    for (const auto& a : atoms) accumulate_atom(B, tr, a.g, r, a.weight, koopman);
    const auto A = analysis_matrix(tr);
    return (*A) * B;
}

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr char kMagic[8] = {'H', 'L', 'C', 'A', 'C', 'H', 'E', '1'};

struct Eig {
    CVector values;
    CMatrix vectors;
};

Eig decompose(const CMatrix& m, bool vectors) {
    Eigen::ComplexEigenSolver<CMatrix> es(m, vectors);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
    Eig e;
    e.values = es.eigenvalues();
    if (vectors) e.vectors = es.eigenvectors();
    return e;
}

std::vector<int> order_by_modulus(const CVector& v) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
    return idx;
}

// Fills eta, eta', residuals and the sorted spectrum for eigenpair i.
SpectralSummary build_summary(const BoundaryOperatorMatrix& S, const Eig& e, int i) {
    SpectralSummary s;
    s.r = S.r;
    s.lambda = e.values[i];
    const auto order = order_by_modulus(e.values);
    s.eigenvalues.resize(e.values.size());
    for (std::size_t k = 0; k < order.size(); ++k) s.eigenvalues[k] = e.values[order[k]];
    double l2 = 0.0;
    for (int k = 0; k < e.values.size(); ++k)
        if (k != i) l2 = std::max(l2, std::abs(e.values[k]));
    s.lambda2_abs = l2;
    s.ess_proxy = l2;
    s.gap = std::abs(s.lambda) - l2;

    const FourierTruncation& tr = S.trunc;
    CVector eta = e.vectors.col(i);
    eta /= eta.norm();
    const cplx c0 = eta[tr.index(0)];
    if (std::abs(c0) > 0.0) eta *= std::conj(c0) / std::abs(c0);
    s.eta = eta;

    Eigen::PartialPivLU<CMatrix> lu(e.vectors);
    const CMatrix inv = lu.inverse();
    CVector left = inv.row(i).adjoint();  // left^H S = lambda left^H
    const cplx pairing = eta.adjoint() * left;  // eta^H eta' must equal 1
    if (std::abs(pairing) == 0.0) throw NumericalError("left and right eigenvectors are orthogonal");
    s.eta_prime = left / pairing;

    s.residual = (S.entries * s.eta - s.lambda * s.eta).norm();
    const CVector ep = s.eta_prime / s.eta_prime.norm();
    s.adjoint_residual = (S.entries.adjoint() * ep - std::conj(s.lambda) * ep).norm();
    return s;
}

double min_real_on_grid(const CVector& c, const FourierTruncation& tr) {
    const auto vals = synthesize_real_on_grid(c, tr, tr.nodes());
    return *std::min_element(vals.begin(), vals.end());
}

}  // namespace

CVector apply_rho(const GroupElement& g, double r, const FourierTruncation& tr, const CVector& v) {
    tr.validate();
    if (v.size() != tr.dim()) throw ValidationError("apply_rho: dimension mismatch");
    const int J = tr.nodes(), M = tr.max_mode(), s = tr.frequency();
    const GroupElement h = g.inverse();
    CVector out = CVector::Zero(tr.dim());
    std::vector<cplx> pw(tr.dim());
    for (int j = 0; j < J; ++j) {
        const double th = tr.node(j);
        const double c = std::cos(th), sn = std::sin(th);
        const double v1 = h.a * c + h.b * sn, v2 = h.c * c + h.d * sn;
        const double H = std::log(v1 * v1 + v2 * v2);
        const cplx z = std::polar(1.0, s * std::atan2(v2, v1));
        cplx val = v[M];
        cplx p = 1.0;
        for (int m = 1; m <= M; ++m) {
            p *= z;
            val += v[M + m] * p + v[M - m] * std::conj(p);
        }
        val *= std::exp(cplx(-0.5 * H, -r * H)) / static_cast<double>(J);
        const cplx y = std::polar(1.0, -s * th);
        out[M] += val;
        cplx q = 1.0;
        for (int n = 1; n <= M; ++n) {
            q *= y;
            out[M + n] += val * q;
            out[M - n] += val * std::conj(q);
        }
    }
    return out;
}

CVector rho_one(const GroupElement& g, double r, const FourierTruncation& tr) {
    CVector one = CVector::Zero(tr.dim());
    one[tr.index(0)] = 1.0;
    return apply_rho(g, r, tr, one);
}

BoundaryOperatorMatrix assemble_rho(const GroupElement& g, double r, const FourierTruncation& tr) {
    BoundaryOperatorMatrix out;
    out.entries = assemble_entries({{g, 1.0}}, r, tr, false);
    out.r = r;
    out.trunc = tr;
    out.kind = OperatorKind::Rho;
    return out;
}

std::uint64_t CacheKey::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    h = fnv_bytes(h, &measure_hash, sizeof measure_hash);
    const auto rb = std::bit_cast<std::uint64_t>(r);
    h = fnv_bytes(h, &rb, sizeof rb);
    const std::int32_t ints[4] = {N, Q, static_cast<std::int32_t>(kind), static_cast<std::int32_t>(space)};
    return fnv_bytes(h, ints, sizeof ints);
}

MatrixCache::MatrixCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

MatrixCache MatrixCache::from_env(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("HYPERLAB_CACHE_DIR"); env && *env) return MatrixCache(env);
    return MatrixCache(fallback);
}

std::filesystem::path MatrixCache::path_for(const CacheKey& key) const {
    std::ostringstream os;
    os << std::hex << key.digest() << ".bin";
    return dir_ / os.str();
}

CacheStatus MatrixCache::load(const CacheKey& key, CMatrix& out) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return CacheStatus::Miss;
    char magic[8];
    std::uint64_t digest = 0;
    std::int64_t rows = 0, cols = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&digest), sizeof digest);
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || std::memcmp(magic, kMagic, 8) != 0 || digest != key.digest() || rows <= 0 || cols <= 0 ||
        rows > 100000 || cols > 100000)
        return CacheStatus::Corrupt;
    CMatrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(cplx) * rows * cols));
    std::uint64_t checksum = 0;
    in.read(reinterpret_cast<char*>(&checksum), sizeof checksum);
    if (!in) return CacheStatus::Corrupt;
    if (fnv_bytes(0xcbf29ce484222325ull, m.data(), sizeof(cplx) * rows * cols) != checksum)
        return CacheStatus::Corrupt;
    out = std::move(m);
    return CacheStatus::Hit;
}

void MatrixCache::store(const CacheKey& key, const CMatrix& m) const {
    const auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return;
        const std::uint64_t digest = key.digest();
        const std::int64_t rows = m.rows(), cols = m.cols();
        out.write(kMagic, 8);
        out.write(reinterpret_cast<const char*>(&digest), sizeof digest);
        out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
        out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(cplx) * rows * cols));
        const std::uint64_t checksum = fnv_bytes(0xcbf29ce484222325ull, m.data(), sizeof(cplx) * rows * cols);
        out.write(reinterpret_cast<const char*>(&checksum), sizeof checksum);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, final_path, ec);
}

BoundaryOperatorMatrix assemble_transfer(const AtomicMeasure& mu, double r, const FourierTruncation& tr,
                                         OperatorKind kind, const MatrixCache* cache) {
    tr.validate();
    if (kind == OperatorKind::Rho) throw ValidationError("assemble_transfer: use assemble_rho for kind rho");
    if (kind == OperatorKind::Transfer && tr.space != ModeSpace::Omega)
        throw ValidationError("S_r acts on Omega-modes");
    if (kind == OperatorKind::TransferPlus && tr.space != ModeSpace::K)
        throw ValidationError("S0_plus acts on K-modes");
    BoundaryOperatorMatrix out;
    out.r = kind == OperatorKind::T0 ? 0.0 : r;
    out.trunc = tr;
    out.kind = kind;
    CacheKey key{mu.hash(), out.r, tr.N, tr.Q, kind, tr.space};
    if (cache && cache->load(key, out.entries) == CacheStatus::Hit) return out;
    out.entries = assemble_entries(mu.atoms(), out.r, tr, kind == OperatorKind::T0);
    if (cache) cache->store(key, out.entries);
    return out;
}

SpectralSummary spectral_summary(const BoundaryOperatorMatrix& S, const BoundaryOperatorMatrix* doubled) {
    if (S.kind != OperatorKind::Transfer && S.kind != OperatorKind::TransferPlus)
        throw ValidationError("spectral_summary expects a transfer operator");
    if (S.r != 0.0) throw ValidationError("spectral_summary is the r = 0 Perron case");
    const Eig e = decompose(S.entries, true);
    const auto order = order_by_modulus(e.values);
    const int top = order[0];
    const double sigma = std::abs(e.values[top]);
    if (order.size() > 1 && std::abs(e.values[order[1]]) > sigma - 1e-8) {
        std::ostringstream os;
        os.precision(12);
        os << "degenerate spectrum: top eigenvalue modulus " << sigma << " is not simple (next "
           << std::abs(e.values[order[1]]) << ")";
        throw DegenerateSpectrumError(os.str());
    }
    SpectralSummary s = build_summary(S, e, top);
    s.sigma = sigma;
    if (std::abs(s.lambda.imag()) > 1e-10 * sigma || s.lambda.real() <= 0.0)
        throw NumericalError("Perron eigenvalue at r = 0 is not real positive");
    if (s.residual > 1e-8 || s.adjoint_residual > 1e-8) {
        std::ostringstream os;
        os << "eigen residual too large: " << s.residual << " / " << s.adjoint_residual;
        throw NumericalError(os.str());
    }
    s.eta_min = min_real_on_grid(s.eta, S.trunc);
    s.eta_prime_min = min_real_on_grid(s.eta_prime, S.trunc);
    if (doubled) {
        const Eig e2 = decompose(doubled->entries, false);
        const auto o2 = order_by_modulus(e2.values);
        s.ess_change = std::abs(std::abs(e2.values[o2[1]]) - s.lambda2_abs);
        s.ess_stable = s.ess_change < 1e-4;
    }
    return s;
}

namespace {

int pick_by_overlap(const Eig& e, const CVector& prev) {
    int best = 0;
    double best_ov = -1.0;
    for (int k = 0; k < e.values.size(); ++k) {
        const double ov = std::abs(e.vectors.col(k).dot(prev)) / e.vectors.col(k).norm();
        if (ov > best_ov) {
            best_ov = ov;
            best = k;
        }
    }
    return best;
}

void check_isolated(const Eig& e, int i, double r) {
    for (int k = 0; k < e.values.size(); ++k) {
        if (k != i && std::abs(e.values[k] - e.values[i]) < 1e-8) {
            std::ostringstream os;
            os << "branch-tracking ambiguity at r = " << r << ": two eigenvalues within 1e-8";
            throw ContinuationError(os.str(), r);
        }
    }
}

}  // namespace

SpectralSummary tracked_summary(const BoundaryOperatorMatrix& S, const CVector& previous_eta, double sigma) {
    const Eig e = decompose(S.entries, true);
    const int i = pick_by_overlap(e, previous_eta);
    check_isolated(e, i, S.r);
    SpectralSummary s = build_summary(S, e, i);
    s.sigma = sigma;
    return s;
}

const LambdaPoint& LambdaCurve::at(double r) const {
    for (const auto& p : points)
        if (std::abs(p.r - r) < 1e-12) return p;
    std::ostringstream os;
    os << "lambda curve has no sample at r = " << r;
    throw ValidationError(os.str());
}

std::vector<double> default_lambda_grid(double h, double step, double r_max) {
    std::vector<double> pos = {h, 2 * h, 4 * h};
    for (int k = 1; k * step <= r_max + 1e-12; ++k) {
        const double r = k * step;
        if (r > 4 * h + 1e-12) pos.push_back(r);
    }
    std::vector<double> grid = {0.0};
    for (double r : pos) {
        grid.push_back(r);
        grid.push_back(-r);
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

LambdaCurve lambda_curve(const AtomicMeasure& mu, const std::vector<double>& r_grid, const FourierTruncation& tr,
                         const MatrixCache* cache, std::vector<SpectralSummary>* summaries) {
    std::vector<double> grid = r_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const auto zero_it = std::find(grid.begin(), grid.end(), 0.0);
    if (zero_it == grid.end()) throw ValidationError("lambda_curve grid must contain r = 0");
    const std::size_t i0 = static_cast<std::size_t>(zero_it - grid.begin());

    const std::size_t n = grid.size();
    std::vector<BoundaryOperatorMatrix> mats(n);
    std::vector<Eig> eigs(n);
    std::vector<double> norms(n);
    parallel_for(n, [&](std::size_t k) {
        mats[k] = assemble_transfer(mu, grid[k], tr, OperatorKind::Transfer, cache);
        if (k != i0) eigs[k] = decompose(mats[k].entries, true);
        norms[k] = operator_norm(mats[k].entries);
    });

    std::vector<SpectralSummary> sums(n);
    sums[i0] = spectral_summary(mats[i0]);
    const double sigma = sums[i0].sigma;

    auto track = [&](std::size_t from, std::size_t to) {
        const SpectralSummary& prev = sums[from];
        const int i = pick_by_overlap(eigs[to], prev.eta);
        check_isolated(eigs[to], i, grid[to]);
        SpectralSummary s = build_summary(mats[to], eigs[to], i);
        s.sigma = sigma;
        if (std::abs(s.lambda - prev.lambda) >= 0.5 * prev.gap) {
            std::ostringstream os;
            os << "grid too coarse for branch continuation at r = " << grid[to];
            throw ContinuationError(os.str(), grid[to]);
        }
        if (std::abs(s.lambda) >= sigma) {
            std::ostringstream os;
            os.precision(15);
            os << "|lambda(r)| = " << std::abs(s.lambda) << " >= sigma = " << sigma << " at r = " << grid[to];
            throw NumericalError(os.str());
        }
        sums[to] = std::move(s);
    };
    for (std::size_t k = i0 + 1; k < n; ++k) track(k - 1, k);
    for (std::size_t k = i0; k-- > 0;) track(k + 1, k);

    LambdaCurve curve;
    curve.sigma = sigma;
    for (std::size_t k = 0; k < n; ++k) {
        LambdaPoint p;
        p.r = grid[k];
        p.lambda = sums[k].lambda;
        p.gap = sums[k].gap;
        p.spectral_radius = std::abs(sums[k].eigenvalues[0]);
        p.norm = norms[k];
        curve.points.push_back(p);
        if (std::abs(p.r) >= 1.0) {
            curve.sup_rho_high = std::isnan(curve.sup_rho_high) ? p.spectral_radius
                                                                : std::max(curve.sup_rho_high, p.spectral_radius);
            curve.sup_norm_high = std::isnan(curve.sup_norm_high) ? p.norm : std::max(curve.sup_norm_high, p.norm);
        }
    }
    // Largest radius below 1 with gap >= gap(0)/2 on every grid point inside it.
    const double half_gap = 0.5 * sums[i0].gap;
    std::vector<double> radii;
    for (double r : grid)
        if (r > 0.0 && r < 1.0) radii.push_back(r);
    double delta0 = 0.0;
    for (double rad : radii) {
        bool ok = true;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(grid[k]) <= rad + 1e-12 && sums[k].gap < half_gap) ok = false;
        bool mirrored = std::find(grid.begin(), grid.end(), -rad) != grid.end();
        if (!ok || !mirrored) break;
        delta0 = rad;
    }
    curve.delta0 = delta0;
    if (summaries) *summaries = std::move(sums);
    return curve;
}

std::vector<RadiusPoint> radius_scan(const AtomicMeasure& mu, const std::vector<double>& r_grid,
                                     const FourierTruncation& tr, const MatrixCache* cache) {
    std::vector<RadiusPoint> out(r_grid.size());
    parallel_for(r_grid.size(), [&](std::size_t k) {
        const auto S = assemble_transfer(mu, r_grid[k], tr, OperatorKind::Transfer, cache);
        out[k] = {r_grid[k], spectral_radius(S.entries), operator_norm(S.entries)};
    });
    return out;
}

HessianResult hessian_at_zero(const LambdaCurve& curve, double h) {
    const double f0 = curve.at(0.0).lambda.real();
    const double fp1 = curve.at(h).lambda.real(), fm1 = curve.at(-h).lambda.real();
    const double fp2 = curve.at(2 * h).lambda.real(), fm2 = curve.at(-2 * h).lambda.real();
    const double second = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    HessianResult res;
    res.h = h;
    res.Q = -0.5 * second;
    res.c2 = 1.0 / f0;
    res.first_derivative = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    if (!(res.Q > 0.0)) {
        std::ostringstream os;
        os << "Hessian of lambda at 0 is not negative definite (Q = " << res.Q << ")";
        throw NumericalError(os.str());
    }
    return res;
}

CVector rank_one_project(const SpectralSummary& s, const CVector& phi) {
    if (phi.size() != s.eta.size()) throw ValidationError("rank_one_project: dimension mismatch");
    const cplx c = s.eta_prime.dot(phi);  // <phi, eta'> = eta'^H phi
    return c * s.eta;
}

double high_mode_norm(const BoundaryOperatorMatrix& S, int L) {
    const int M = S.trunc.max_mode();
    if (L < 1) throw ValidationError("high_mode_norm needs L >= 1");
    const int cut = 1 << (L - 1);
    if (cut > M) throw ValidationError("high_mode_norm: 2^{L-1} exceeds the truncation");
    std::vector<int> cols;
    for (int m = -M; m <= M; ++m)
        if (std::abs(m) >= cut) cols.push_back(S.trunc.index(m));
    CMatrix sub(S.entries.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = S.entries.col(cols[k]);
    return operator_norm(sub);
}

cplx synthesize(const CVector& c, const FourierTruncation& tr, double theta) {
    const int M = tr.max_mode(), s = tr.frequency();
    const cplx z = std::polar(1.0, s * theta);
    cplx val = c[M], p = 1.0;
    for (int m = 1; m <= M; ++m) {
        p *= z;
        val += c[M + m] * p + c[M - m] * std::conj(p);
    }
    return val;
}

std::vector<double> synthesize_real_on_grid(const CVector& c, const FourierTruncation& tr, int points) {
    std::vector<double> out(points);
    const double period = tr.space == ModeSpace::Omega ? kPi : 2.0 * kPi;
    for (int j = 0; j < points; ++j) out[j] = synthesize(c, tr, period * j / points).real();
    return out;
}

double spectral_radius(const CMatrix& m) {
    const Eig e = decompose(m, false);
    return e.values.cwiseAbs().maxCoeff();
}

double operator_norm(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m);
    return svd.singularValues()(0);
}

CMatrix matrix_power(const CMatrix& m, long n) {
    if (n < 0) throw ValidationError("matrix_power needs n >= 0");
    CMatrix result = CMatrix::Identity(m.rows(), m.cols());
    CMatrix base = m;
    while (n > 0) {
        if (n & 1) result = result * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    return result;
}

}  // namespace hyperlab
