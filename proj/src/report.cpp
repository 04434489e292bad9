#include "hyperlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hyperlab/boundary.hpp"
#include "hyperlab/errors.hpp"
#include "hyperlab/furstenberg.hpp"
#include "hyperlab/group.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/measure.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/spherical.hpp"

namespace hyperlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string short_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

std::string fixed2(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

// json cannot hold NaN; absent values become null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const GroupElement& g) { return json::array({json::array({g.a, g.b}), json::array({g.c, g.d})}); }

fs::path output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
    fs::path dir = opts.out_dir ? *opts.out_dir : cfg.output.directory;
    fs::create_directories(dir);
    return dir;
}

std::optional<MatrixCache> open_cache(const RunOptions& opts) {
    if (!opts.use_cache) return std::nullopt;
    return MatrixCache::from_env(opts.cache_fallback);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json measure_json(const AtomicMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({{"matrix", matrix_json(a.g)}, {"weight", a.weight}});
    std::ostringstream h;
    h << std::hex << std::setw(16) << std::setfill('0') << mu.hash();
    return {{"atoms", atoms}, {"hash", h.str()}, {"support_radius", support_radius(mu)}};
}

json operator_knobs(const OperatorSection& op) {
    return {{"N", op.N}, {"Q", op.Q}, {"r_max", op.r_max}, {"r_nodes", op.r_nodes}};
}

}  // namespace

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw ValidationError("csv row width does not match the header");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

void CsvTable::write(const fs::path& path) const { write_text(path, str()); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string render_svg(const PlotSpec& spec) {
    constexpr double W = 760, H = 440, ml = 80, mr = 190, mt = 40, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0) && (!spec.log_y || y > 0);
    };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12 * std::max(1.0, std::abs(y0))) {
        const double pad = std::max(0.5, 0.05 * std::abs(y0));
        y0 -= pad;
        y1 += pad;
    } else {
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (v - y0) / (y1 - y0) * ph; };

    auto ticks = [](double lo, double hi, bool log) {
        std::vector<double> t;
        if (log && hi - lo >= 1.0) {
            const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8)));
            for (int k = static_cast<int>(std::ceil(lo)); k <= std::floor(hi); k += step) t.push_back(k);
            return t;
        }
        const double raw = (hi - lo) / 6;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
            t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return t;
    };
    auto tick_label = [](double v, bool log) { return log ? short_number(std::pow(10.0, v)) : short_number(v); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(spec.title)
       << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(x0, x1, spec.log_x)) {
        const std::string X = fixed2(px(t));
        os << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X << "\" y2=\"" << mt + ph
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << X << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
           << tick_label(t, spec.log_x) << "</text>\n";
    }
    for (double t : ticks(y0, y1, spec.log_y)) {
        const std::string Y = fixed2(py(t));
        os << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << ml + pw << "\" y2=\"" << Y
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << Y << "\" text-anchor=\"end\" dominant-baseline=\"middle\">"
           << tick_label(t, spec.log_y) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label)
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
       << ")\">" << xml_escape(spec.y_label) << "</text>\n";
    for (std::size_t k = 0; k < spec.series.size(); ++k) {
        const auto& s = spec.series[k];
        const char* color = palette[k % 6];
        std::string pts;
        std::string marks;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            const std::string X = fixed2(px(tx(s.x[i]))), Y = fixed2(py(ty(s.y[i])));
            pts += X + ',' + Y + ' ';
            if (s.x.size() <= 40)
                marks += "<circle cx=\"" + X + "\" cy=\"" + Y + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
        }
        if (!pts.empty()) {
            pts.pop_back();
            os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts
               << "\"/>\n";
        }
        os << marks;
        const double ly = mt + 10 + 18 * k;
        os << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 32 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + pw + 38 << "\" y=\"" << ly << "\" dominant-baseline=\"middle\">"
           << xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    if (dynamic_cast<const BudgetError*>(&e)) return 4;
    return 1;
}

json cmd_decompose(const std::string& matrix_text, std::ostream& out) {
    GroupElement g = parse_matrix_text(matrix_text);
    const double det = g.det();
    json j;
    j["input"] = matrix_json(g);
    j["det"] = det;
    if (std::abs(det - 1.0) > 1e-12) {
        g = g.renormalized();  // throws InvalidElementError for det <= 0
        out << "notice: det = " << format_double(det) << ", matrix renormalized by 1/sqrt(det)\n";
        j["renormalized"] = true;
        j["matrix"] = matrix_json(g);
    } else {
        j["renormalized"] = false;
        j["matrix"] = matrix_json(g);
    }
    const IwasawaFactors iw = iwasawa(g);
    const CartanFactors ca = cartan(g);
    const double iw_err = max_entry_difference(iw.reconstruct(), g);
    const double ca_err = max_entry_difference(ca.reconstruct(), g);
    j["iwasawa"] = {{"theta", iw.theta}, {"H", iw.t}, {"x", iw.x}, {"reconstruction_error", iw_err}};
    j["cartan"] = {{"theta1", ca.theta1}, {"t", ca.t}, {"theta2", ca.theta2}, {"reconstruction_error", ca_err}};
    j["H"] = iwasawa_height(g);
    j["kappa"] = cartan_norm(g);
    out << "g          = [[" << format_double(g.a) << ", " << format_double(g.b) << "], [" << format_double(g.c)
        << ", " << format_double(g.d) << "]]\n";
    out << "Iwasawa    g = k_theta a_H n_x: theta = " << format_double(iw.theta) << ", H = " << format_double(iw.t)
        << ", x = " << format_double(iw.x) << "  (reconstruction error " << format_double(iw_err) << ")\n";
    out << "Cartan     g = k_theta1 a_t k_theta2: theta1 = " << format_double(ca.theta1)
        << ", t = " << format_double(ca.t) << ", theta2 = " << format_double(ca.theta2) << "  (reconstruction error "
        << format_double(ca_err) << ")\n";
    out << "H(g)       = " << format_double(iwasawa_height(g)) << "\n";
    out << "kappa(g)   = " << format_double(cartan_norm(g)) << "\n";
    return j;
}

json cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
    const auto& msec = cfg.require_measure();
    const auto& op = cfg.require_operator();
    const AtomicMeasure mu = build_measure(msec);
    const FourierTruncation tr = build_truncation(op);
    const fs::path dir = output_dir(cfg, opts);
    const auto cache = open_cache(opts);
    const MatrixCache* cp = cache ? &*cache : nullptr;
    Stopwatch clock;

    json j;
    j["command"] = "spectrum";
    j["knobs"] = {{"operator", operator_knobs(op)},
                  {"lambda_grid", {{"h", 0.005}, {"step", 0.05}, {"r_max", 0.95}}},
                  {"delta0_rule", "largest mirrored grid radius < 1 with gap >= gap(0)/2 inside it"},
                  {"hessian_step", 0.01},
                  {"continuation_step_limit", "gap/2"},
                  {"degeneracy_tolerance", 1e-8},
                  {"plancherel_constant", kPlancherelConstant},
                  {"prune_threshold", 0.0},
                  {"cache", cp ? cp->dir().string() : std::string("disabled")}};
    j["measure"] = measure_json(mu);

    const auto S0 = assemble_transfer(mu, 0.0, tr, OperatorKind::Transfer, cp);
    const auto S0d = assemble_transfer(mu, 0.0, FourierTruncation::omega(2 * tr.N, 2 * tr.Q), OperatorKind::Transfer, cp);
    SpectralSummary s;
    try {
        s = spectral_summary(S0, &S0d);
    } catch (const DegenerateSpectrumError& e) {
        // Measures supported on K land here: the spectrum sits on the unit circle.
        const double sigma = spectral_radius(S0.entries);
        j["degenerate"] = true;
        j["sigma"] = sigma;
        j["message"] = e.what();
        write_json(dir / "spectrum.json", j);
        out << "sigma = " << format_double(sigma) << " (top eigenvalue not simple; no branch to continue)\n";
        return j;
    }
    j["degenerate"] = false;

    const bool in_k = std::all_of(mu.atoms().begin(), mu.atoms().end(),
                                  [](const Atom& a) { return cartan_norm(a.g) < 1e-12; });
    j["supported_in_K"] = in_k;
    if (in_k) {
        // rho_r(k) is r-independent on K, so |lambda(r)| = sigma for every r and there is no branch to expand.
        j["sigma"] = s.sigma;
        j["lambda2_abs"] = s.lambda2_abs;
        j["gap"] = s.gap;
        j["eta_min"] = s.eta_min;
        write_json(dir / "spectrum.json", j);
        out << "sigma = " << format_double(s.sigma) << " (measure supported in K; lambda curve skipped)\n";
        return j;
    }

    std::vector<SpectralSummary> sums;
    const LambdaCurve curve = lambda_curve(mu, default_lambda_grid(), tr, cp, &sums);
    const HessianResult hess = hessian_at_zero(curve, 0.01);
    std::vector<double> high_r = {-16, -8, -4, -2, -1, 1, 2, 4, 8, 16};
    high_r.erase(std::remove_if(high_r.begin(), high_r.end(), [&](double r) { return std::abs(r) > op.r_max; }),
                 high_r.end());
    const auto scan = radius_scan(mu, high_r, tr, cp);

    j["sigma"] = s.sigma;
    j["lambda2_abs"] = s.lambda2_abs;
    j["gap"] = s.gap;
    j["ess_proxy"] = s.ess_proxy;
    j["ess_change_at_2N"] = s.ess_change;
    j["ess_stable"] = s.ess_stable;
    j["residual"] = s.residual;
    j["adjoint_residual"] = s.adjoint_residual;
    j["eta_min"] = s.eta_min;
    j["eta_prime_min"] = s.eta_prime_min;
    j["delta0"] = curve.delta0;
    j["hessian"] = {{"Q", hess.Q}, {"c2", hess.c2}, {"first_derivative", hess.first_derivative}, {"h", hess.h}};
    double sup_rho = 0.0, sup_norm = 0.0;
    json scan_j = json::array();
    for (const auto& p : scan) {
        sup_rho = std::max(sup_rho, p.spectral_radius);
        sup_norm = std::max(sup_norm, p.norm);
        scan_j.push_back({{"r", p.r}, {"spectral_radius", p.spectral_radius}, {"norm", p.norm}});
    }
    j["high_frequency_scan"] = scan_j;
    j["sup_spectral_radius_high"] = num(scan.empty() ? NAN : sup_rho);
    j["sup_norm_high"] = num(scan.empty() ? NAN : sup_norm);
    json top = json::array();
    for (int k = 0; k < std::min<int>(6, static_cast<int>(s.eigenvalues.size())); ++k)
        top.push_back({s.eigenvalues[k].real(), s.eigenvalues[k].imag()});
    j["leading_eigenvalues"] = top;

    CsvTable csv({"r", "re_lambda", "im_lambda", "abs_lambda", "gap", "spectral_radius", "norm"});
    PlotSeries abs_s{"|lambda(r)|", {}, {}}, gap_s{"gap(r)", {}, {}};
    for (const auto& p : curve.points) {
        csv.add_row({p.r, p.lambda.real(), p.lambda.imag(), std::abs(p.lambda), p.gap, p.spectral_radius, p.norm});
        abs_s.x.push_back(p.r);
        abs_s.y.push_back(std::abs(p.lambda));
        gap_s.x.push_back(p.r);
        gap_s.y.push_back(p.gap);
    }
    if (cfg.output.wants("csv")) csv.write(dir / "lambda_curve.csv");
    if (cfg.output.wants("svg"))
        write_text(dir / "lambda_curve.svg",
                   render_svg({"Perron branch of S_r", "r", "value", false, false, {abs_s, gap_s}}));
    write_json(dir / "spectrum.json", j);

    out << "sigma = " << format_double(s.sigma) << ", |lambda_2| = " << format_double(s.lambda2_abs)
        << ", gap = " << format_double(s.gap) << "\n";
    out << "delta0 = " << format_double(curve.delta0) << ", Q = " << format_double(hess.Q)
        << ", c2 = " << format_double(hess.c2) << "\n";
    out << "wrote " << (dir / "spectrum.json").string() << " (" << std::fixed << std::setprecision(1)
        << clock.seconds() << " s)\n";
    out.unsetf(std::ios::floatfield);
    return j;
}

json cmd_llt(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
    LLTConfig lc = build_llt_config(cfg);
    if (opts.no_mc) lc.use_mc = false;
    const fs::path dir = output_dir(cfg, opts);
    const auto cache = open_cache(opts);
    lc.cache = cache ? &*cache : nullptr;
    Stopwatch clock;

    const LLTLab lab(lc);
    const RhsLimit rhs = lab.rhs_limit();
    const ConvergenceReport rep = lab.run_convergence();

    json j;
    j["command"] = "llt";
    j["knobs"] = {{"operator", operator_knobs(cfg.require_operator())},
                  {"u_nodes", lc.u_nodes},
                  {"lambda_grid", {{"h", 0.005}, {"step", 0.05}, {"r_max", 0.95}}},
                  {"delta0_rule", "largest mirrored grid radius < 1 with gap >= gap(0)/2 inside it"},
                  {"plancherel_constant", kPlancherelConstant},
                  {"prune_threshold", 0.0},
                  {"atom_cap", kAtomCap},
                  {"mc_samples", lc.mc_samples},
                  {"seed", lc.seed},
                  {"mc_stream_rule", "(n << 32) | chunk, chunks of 4096 samples"},
                  {"use_mc", lc.use_mc},
                  {"cache", lc.cache ? lc.cache->dir().string() : std::string("disabled")}};
    j["config"] = to_json(cfg);
    j["sigma"] = lab.sigma();
    j["gap"] = lab.perron().gap;
    j["delta0"] = lab.delta0();
    j["hessian"] = {{"Q", lab.hessian().Q}, {"c2", lab.hessian().c2}};
    j["c_mu"] = lab.c_mu();
    j["f_l1_norm"] = lab.l1_norm();
    j["rhs_limit"] = {{"path_a", num(rhs.path_a)}, {"path_b", rhs.path_b}, {"relative_gap", num(rhs.relative_gap)}};
    j["fits"] = {{"error_slope", num(rep.error_slope.slope)},
                 {"error_slope_points", rep.error_slope.points},
                 {"residual_slope", num(rep.residual_slope.slope)},
                 {"high_frequency_rate", num(-rep.high_frequency_decay.slope)},
                 {"high_frequency_rate_raw", num(-rep.high_frequency_raw.slope)},
                 {"monotone_after_16", rep.monotone_after_16},
                 {"max_lhs_over_l1", rep.max_lhs_over_l1}};
    json refusals = json::array();
    for (const auto& r : rep.records)
        if (!r.exact_note.empty()) refusals.push_back({{"n", r.n}, {"reason", r.exact_note}});
    j["exact_refusals"] = refusals;

    CsvTable csv({"n", "lhs_fourier", "lhs_fourier_low", "lhs_fourier_high", "lhs_fourier_imag", "lhs_exact", "lhs_mc",
                  "mc_stderr", "rhs_limit", "err_fourier", "err_exact", "err_mc"});
    PlotSeries ef{"Fourier", {}, {}}, ee{"exact", {}, {}}, em{"Monte Carlo", {}, {}};
    for (const auto& r : rep.records) {
        const double exact = r.lhs_exact ? *r.lhs_exact : NAN;
        const double mc = r.lhs_mc ? r.lhs_mc->value : NAN;
        const double se = r.lhs_mc ? r.lhs_mc->stderr_ : NAN;
        csv.add_row({static_cast<double>(r.n), r.lhs_fourier.value, r.lhs_fourier.low, r.lhs_fourier.high,
                     r.lhs_fourier.imag, exact, mc, se, r.rhs_limit, r.err_fourier, r.err_exact, r.err_mc});
        if (r.n <= 0) continue;
        ef.x.push_back(r.n);
        ef.y.push_back(r.err_fourier);
        ee.x.push_back(r.n);
        ee.y.push_back(r.err_exact);
        em.x.push_back(r.n);
        em.y.push_back(r.err_mc);
    }
    CsvTable psi0({"t", "psi0"});
    for (int k = 0; k <= 80; ++k) {
        const double t = 0.05 * k;
        psi0.add_row({t, lab.psi_zero(GroupElement::diagonal(t))});
    }
    if (cfg.output.wants("csv")) {
        csv.write(dir / "llt_convergence.csv");
        psi0.write(dir / "psi0_profile.csv");
    }
    if (cfg.output.wants("svg"))
        write_text(dir / "llt_error.svg",
                   render_svg({"|lhs(n) - rhs| on log axes", "n", "error", true, true, {ef, ee, em}}));
    write_json(dir / "llt_fit.json", j);

    out << "rhs limit = " << format_double(rhs.path_b) << " (paths agree to " << format_double(rhs.relative_gap)
        << ")\n";
    for (const auto& r : rep.records) {
        out << "n = " << std::setw(4) << r.n << "  lhs_fourier = " << format_double(r.lhs_fourier.value);
        if (r.lhs_exact) out << "  exact = " << format_double(*r.lhs_exact);
        if (r.lhs_mc) out << "  mc = " << format_double(r.lhs_mc->value) << " +- " << format_double(r.lhs_mc->stderr_);
        if (!r.exact_note.empty()) out << "  [exact refused]";
        out << "\n";
    }
    out << "error slope = " << format_double(rep.error_slope.slope) << ", wrote " << (dir / "llt_fit.json").string()
        << " (" << std::fixed << std::setprecision(1) << clock.seconds() << " s)\n";
    out.unsetf(std::ios::floatfield);
    return j;
}

json cmd_furstenberg(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
    const auto& msec = cfg.require_measure();
    const auto& op = cfg.require_operator();
    const auto& fsec = cfg.require_furstenberg();
    const AtomicMeasure mu = build_measure(msec);
    const FourierTruncation tr = build_truncation(op);
    for (int L : fsec.L_range)
        if ((1 << (L - 1)) > op.N) throw ValidationError("furstenberg.L_range needs 2^{L-1} <= N");
    const fs::path dir = output_dir(cfg, opts);
    const auto cache = open_cache(opts);
    const MatrixCache* cp = cache ? &*cache : nullptr;
    Stopwatch clock;

    const StationaryDensity psi = stationary_density(mu, tr, cp);
    const double residual = stationarity_residual(psi, mu, fsec.test_count, fsec.seed);
    const DecayReport decay = smoothness_report(psi);
    const HighModeCurve hm = high_mode_decay_curve(mu, op.N, fsec.L_range, cp);

    auto opt_int = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
    json j;
    j["command"] = "furstenberg";
    j["knobs"] = {{"operator", operator_knobs(op)},
                  {"L_range", fsec.L_range},
                  {"test_count", fsec.test_count},
                  {"seed", fsec.seed},
                  {"fit_blocks", "l in [2, l_max - 1]"},
                  {"density_grid", 4 * tr.nodes()},
                  {"prune_threshold", 0.0}};
    j["measure"] = measure_json(mu);
    j["density"] = {{"eigenvalue_distance", psi.eigenvalue_distance},
                    {"mass", psi.mass},
                    {"positivity_min", psi.positivity_min},
                    {"asymmetry", psi.asymmetry},
                    {"stationarity_residual", residual}};
    j["smoothness"] = {{"s", num(decay.s)},
                       {"infinite", decay.infinite},
                       {"m_class", decay.infinite ? json("infinity") : json(decay.m_class)}};
    j["high_modes"] = {{"L", hm.L},
                       {"S0_plus", hm.s0_plus},
                       {"T0", hm.t0},
                       {"S0_plus_quarter_at", opt_int(hm.s0_plus_quarter)},
                       {"S0_plus_half_at", opt_int(hm.s0_plus_half)},
                       {"T0_quarter_at", opt_int(hm.t0_quarter)},
                       {"T0_half_at", opt_int(hm.t0_half)}};
    bool monotone = true;
    for (std::size_t k = 1; k < hm.t0.size(); ++k)
        if (hm.t0[k] > hm.t0[k - 1] + 1e-12) monotone = false;
    j["verdicts"] = {{"fixed_point", psi.eigenvalue_distance <= 1e-6},
                     {"positive_density", psi.positivity_min > 0.0},
                     {"stationary", residual <= 1e-8},
                     {"t0_high_modes_non_increasing", monotone}};

    const int points = 4 * tr.nodes();
    CsvTable dens({"theta", "psi"});
    PlotSeries ds{"psi_F", {}, {}};
    const auto vals = synthesize_real_on_grid(psi.coefficients, tr, points);
    for (int k = 0; k < points; ++k) {
        const double th = kPi * k / points;
        dens.add_row({th, vals[k]});
        ds.x.push_back(th);
        ds.y.push_back(vals[k]);
    }
    CsvTable dec({"l", "block_norm"});
    PlotSeries bs{"|P_l psi_F|", {}, {}};
    for (std::size_t l = 0; l < decay.block_norms.size(); ++l) {
        dec.add_row({static_cast<double>(l), decay.block_norms[l]});
        bs.x.push_back(static_cast<double>(l));
        bs.y.push_back(decay.block_norms[l]);
    }
    CsvTable hmc({"L", "S0_plus", "T0"});
    PlotSeries hs{"S0+ (K-modes)", {}, {}}, ht{"T0", {}, {}};
    for (std::size_t k = 0; k < hm.L.size(); ++k) {
        hmc.add_row({static_cast<double>(hm.L[k]), hm.s0_plus[k], hm.t0[k]});
        hs.x.push_back(hm.L[k]);
        hs.y.push_back(hm.s0_plus[k]);
        ht.x.push_back(hm.L[k]);
        ht.y.push_back(hm.t0[k]);
    }
    if (cfg.output.wants("csv")) {
        dens.write(dir / "furstenberg_density.csv");
        dec.write(dir / "fourier_decay.csv");
        hmc.write(dir / "highmode_decay.csv");
    }
    if (cfg.output.wants("svg")) {
        write_text(dir / "furstenberg_density.svg",
                   render_svg({"Stationary density on the boundary", "theta", "psi_F", false, false, {ds}}));
        write_text(dir / "fourier_decay.svg",
                   render_svg({"Dyadic block norms", "l", "norm", false, true, {bs}}));
        write_text(dir / "highmode_decay.svg",
                   render_svg({"High-mode operator norms", "L", "norm", false, false, {hs, ht}}));
    }
    write_json(dir / "furstenberg.json", j);

    out << "fixed point: |lambda - 1| = " << format_double(psi.eigenvalue_distance) << ", mass = "
        << format_double(psi.mass) << ", min density = " << format_double(psi.positivity_min) << "\n";
    out << "stationarity residual = " << format_double(residual) << " (seed " << fsec.seed << ")\n";
    out << "fitted s = " << format_double(decay.s) << "\n";
    out << "wrote " << (dir / "furstenberg.json").string() << " (" << std::fixed << std::setprecision(1)
        << clock.seconds() << " s)\n";
    out.unsetf(std::ios::floatfield);
    return j;
}

std::vector<SelftestRow> run_selftest(const RunOptions& opts, std::ostream& out) {
    std::vector<SelftestRow> rows;
    auto record = [&](const std::string& name, auto&& body) {
        SelftestRow row{name, false, ""};
        try {
            body(row);
        } catch (const std::exception& e) {
            row.pass = false;
            row.detail = std::string("exception: ") + e.what();
        }
        rows.push_back(row);
    };
    constexpr std::uint64_t kSeed = 20240611;

    record("decomposition round trips (2000 draws)", [&](SelftestRow& row) {
        auto rng = make_stream(kSeed, 1);
        std::uniform_real_distribution<double> ang(0.0, 2 * kPi), rad(0.0, 6.0);
        double worst = 0.0, ineq = -INFINITY;
        for (int i = 0; i < 2000; ++i) {
            const GroupElement g =
                GroupElement::rotation(ang(rng)) * GroupElement::diagonal(rad(rng)) * GroupElement::rotation(ang(rng));
            worst = std::max(worst, max_entry_difference(iwasawa(g).reconstruct(), g));
            worst = std::max(worst, max_entry_difference(cartan(g).reconstruct(), g));
            ineq = std::max(ineq, std::abs(iwasawa_height(g)) - cartan_norm(g));
        }
        row.pass = worst <= 1e-10 && ineq <= 1e-12;
        row.detail = "max error " + short_number(worst) + ", seed " + std::to_string(kSeed);
    });
    record("c-function identity on [0, 50]", [&](SelftestRow& row) {
        double worst = 0.0;
        for (int k = 0; k <= 500; ++k) {
            const double r = 0.1 * k;
            const double ref = kPi * r * std::tanh(kPi * r);
            worst = std::max(worst, std::abs(c_inverse_sq(r) - ref) / std::max(1.0, ref));
        }
        row.pass = worst <= 1e-10;
        row.detail = "max relative error " + short_number(worst);
    });
    record("spherical function phi_r(e) = 1, phi_0(a_1)", [&](SelftestRow& row) {
        const double e = std::abs(spherical_function(1.3, 0.0) - 1.0);
        const double a1 = std::abs(spherical_function(0.0, 1.0) - 0.940862159249);
        row.pass = e == 0.0 && a1 <= 1e-8;
        row.detail = "phi_0(a_1) error " + short_number(a1);
    });
    record("convolution keeps mass 1", [&](SelftestRow& row) {
        const AtomicMeasure mu2 = convolution_power(default_measure(0.3), 3);
        double mass = 0.0;
        for (const auto& a : mu2.atoms()) mass += a.weight;
        row.pass = std::abs(mass - 1.0) <= 1e-12 && mu2.size() == 64;
        row.detail = "mass " + format_double(mass);
    });
    record("Perron data at N = 16", [&](SelftestRow& row) {
        const auto tr = FourierTruncation::omega(16);
        const auto S = assemble_transfer(default_measure(0.3), 0.0, tr, OperatorKind::Transfer);
        const auto s = spectral_summary(S);
        row.pass = s.sigma < 1.0 && s.gap > 0.0 && s.eta_min > 0.0 && s.eta_prime_min > 0.0;
        row.detail = "sigma " + format_double(s.sigma);
    });
    record("stationary density at N = 16", [&](SelftestRow& row) {
        const auto psi = stationary_density(default_measure(0.3), FourierTruncation::omega(16));
        row.pass = std::abs(psi.mass - 1.0) <= 1e-12 && psi.positivity_min > 0.0 && psi.eigenvalue_distance <= 1e-6;
        row.detail = "min density " + short_number(psi.positivity_min);
    });
    record("Monte Carlo determinism across thread counts", [&](SelftestRow& row) {
        const AtomicMeasure mu = default_measure(0.3);
        const int saved = thread_count();
        std::vector<double> sums;
        for (int threads : {1, 4}) {
            set_thread_count(threads);
            std::vector<double> slot(64);
            parallel_for(slot.size(), [&](std::size_t k) {
                auto rng = make_stream(kSeed, k);
                slot[k] = sample_product(mu, 32, rng).a;
            });
            double acc = 0.0;
            for (double v : slot) acc += v;
            sums.push_back(acc);
        }
        set_thread_count(saved);
        row.pass = sums[0] == sums[1];
        row.detail = "seed " + std::to_string(kSeed) + ", streams 0..63";
    });
    record("matrix cache detects corruption", [&](SelftestRow& row) {
        const fs::path dir = fs::temp_directory_path() / "hyperlab-selftest-cache";
        fs::remove_all(dir);
        const MatrixCache cache(dir);
        const AtomicMeasure mu = default_measure(0.3);
        const auto tr = FourierTruncation::omega(4);
        const CacheKey key{mu.hash(), 0.25, tr.N, tr.Q, OperatorKind::Transfer, tr.space};
        const auto S = assemble_transfer(mu, 0.25, tr, OperatorKind::Transfer);
        cache.store(key, S.entries);
        CMatrix back;
        const bool hit = cache.load(key, back) == CacheStatus::Hit && back == S.entries;
        {
            std::fstream f(cache.path_for(key), std::ios::in | std::ios::out | std::ios::binary);
            f.seekp(-20, std::ios::end);
            f.put('\x5a');
        }
        const bool corrupt = cache.load(key, back) == CacheStatus::Corrupt;
        fs::remove_all(dir);
        row.pass = hit && corrupt;
        row.detail = std::string(hit ? "hit" : "miss") + " then " + (corrupt ? "corrupt detected" : "not detected");
    });
    record("circle partial integration", [&](SelftestRow& row) {
        const auto tr = FourierTruncation::omega(16);
        auto rng = make_stream(kSeed, 2);
        std::normal_distribution<double> nd;
        CVector c1(tr.dim()), c2(tr.dim());
        for (int k = 0; k < tr.dim(); ++k) {
            c1[k] = cplx(nd(rng), nd(rng));
            c2[k] = cplx(nd(rng), nd(rng));
        }
        const auto p = partial_integration(c1, c2, tr);
        row.pass = p.error <= 1e-10;
        row.detail = "error " + short_number(p.error) + ", seed " + std::to_string(kSeed);
    });
    (void)opts;

    std::size_t width = 0;
    for (const auto& r : rows) width = std::max(width, r.name.size());
    for (const auto& r : rows)
        out << (r.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << r.name << "  "
            << r.detail << "\n";
    out << std::right;
    return rows;
}

}  // namespace hyperlab
