#include "hyperlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hyperlab/errors.hpp"

namespace hyperlab {

using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("config field '") + key + "' has the wrong type");
    }
}

std::string renorm_notice(const std::string& where, double det) {
    std::ostringstream os;
    os.precision(17);
    os << "notice: " << where << " has det = " << det << "; renormalized by 1/sqrt(det)";
    return os.str();
}

GroupElement parse_point(const json& j, const char* matrix_key, const char* polar_key, const char* section,
                         std::vector<std::string>& notices) {
    if (j.contains(matrix_key)) {
        const GroupElement g = parse_matrix(j.at(matrix_key));
        if (!(g.det() > 0.0))
            throw ValidationError(std::string(section) + "." + matrix_key + " must have positive determinant");
        if (std::abs(g.det() - 1.0) > 1e-12) notices.push_back(renorm_notice(std::string(section) + "." + matrix_key, g.det()));
        return g.renormalized();
    }
    if (j.contains(polar_key)) {
        const json& p = j.at(polar_key);
        const double theta = get_or(p, "theta", 0.0), t = get_or(p, "t", 0.0);
        return GroupElement::rotation(theta) * GroupElement::diagonal(t);
    }
    return GroupElement::identity();
}

json matrix_json(const GroupElement& g) { return json::array({json::array({g.a, g.b}), json::array({g.c, g.d})}); }

}  // namespace

bool OutputSection::wants(const std::string& fmt) const {
    return std::find(formats.begin(), formats.end(), fmt) != formats.end();
}

const MeasureSection& ExperimentConfig::require_measure() const {
    if (!measure) throw ValidationError("config is missing the [measure] section");
    return *measure;
}
const OperatorSection& ExperimentConfig::require_operator() const {
    if (!op) throw ValidationError("config is missing the [operator] section");
    return *op;
}
const LLTSection& ExperimentConfig::require_llt() const {
    if (!llt) throw ValidationError("config is missing the [llt] section");
    return *llt;
}
const FurstenbergSection& ExperimentConfig::require_furstenberg() const {
    if (!furstenberg) throw ValidationError("config is missing the [furstenberg] section");
    return *furstenberg;
}

GroupElement parse_matrix(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 ||
        j[1].size() != 2)
        throw ValidationError("matrix must be written as [[a, b], [c, d]]");
    for (const auto& row : j)
        for (const auto& v : row)
            if (!v.is_number()) throw ValidationError("matrix entries must be numbers");
    return {j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>()};
}

GroupElement parse_matrix_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception&) {
        throw ValidationError("cannot parse matrix '" + text + "'; expected [[a,b],[c,d]]");
    }
    return parse_matrix(j);
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    ExperimentConfig cfg;
    if (doc.contains("measure")) {
        const json& j = doc.at("measure");
        MeasureSection m;
        m.eps = get_or(j, "eps", 0.3);
        m.symmetrize = get_or(j, "symmetrize", false);
        m.weights = get_or(j, "weights", std::vector<double>{});
        if (j.contains("atoms")) {
            for (const auto& a : j.at("atoms")) {
                m.atoms.push_back(parse_matrix(a.contains("matrix") ? a.at("matrix") : a));
                if (a.contains("weight")) m.weights.push_back(a.at("weight").get<double>());
            }
        } else if (j.contains("generators")) {
            m.words = j.at("generators").get<std::vector<std::string>>();
        } else {
            throw ValidationError("measure section needs 'atoms' or 'generators'");
        }
        if (!(m.eps > 0.0)) throw ValidationError("measure.eps must be positive");
        const std::size_t count = m.atoms.empty() ? m.words.size() : m.atoms.size();
        if (count == 0) throw ValidationError("measure has no atoms");
        if (!m.weights.empty() && m.weights.size() != count)
            throw ValidationError("measure.weights must match the number of atoms");
        for (double w : m.weights)
            if (!(w > 0.0)) throw ValidationError("measure weights must be positive");
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            const double det = m.atoms[i].det();
            if (!(det > 0.0)) throw ValidationError("measure atoms must have positive determinant");
            if (std::abs(det - 1.0) > 1e-12)
                cfg.notices.push_back(renorm_notice("measure atom " + std::to_string(i), det));
        }
        cfg.measure = m;
    }
    if (doc.contains("operator")) {
        const json& j = doc.at("operator");
        OperatorSection op;
        op.N = get_or(j, "N", op.N);
        op.Q = get_or(j, "Q", 8 * op.N);
        op.r_max = get_or(j, "r_max", op.r_max);
        op.r_nodes = get_or(j, "r_nodes", op.r_nodes);
        if (op.N < 1) throw ValidationError("operator.N must be >= 1");
        if (op.Q < 8 * op.N) throw ValidationError("operator.Q must be >= 8N (aliasing guard)");
        if (!(op.r_max > 0.0)) throw ValidationError("operator.r_max must be positive");
        if (op.r_nodes < 64) throw ValidationError("operator.r_nodes must be >= 64");
        cfg.op = op;
    }
    if (doc.contains("llt")) {
        const json& j = doc.at("llt");
        LLTSection l;
        if (j.contains("f")) {
            const json& f = j.at("f");
            l.f.kind = get_or(f, "kind", l.f.kind);
            l.f.width = get_or(f, "width", l.f.width);
            l.f.R = get_or(f, "R", l.f.R);
            l.f.center = parse_point(f, "center", "center_polar", "llt.f", cfg.notices);
        }
        if (l.f.kind != "gaussian" && l.f.kind != "bandlimited")
            throw ValidationError("llt.f.kind must be 'gaussian' or 'bandlimited'");
        if (!(l.f.width > 0.0)) throw ValidationError("llt.f.width must be positive");
        if (!(l.f.R > 0.0)) throw ValidationError("llt.f.R must be positive");
        l.x0 = parse_point(j, "x0", "x0_polar", "llt", cfg.notices);
        l.n_range = get_or(j, "n_range", l.n_range);
        l.mc_samples = get_or(j, "mc_samples", l.mc_samples);
        l.seed = get_or(j, "seed", l.seed);
        l.use_mc = get_or(j, "use_mc", l.use_mc);
        for (int n : l.n_range)
            if (n < 0) throw ValidationError("llt.n_range entries must be >= 0");
        if (l.use_mc && l.mc_samples < 10000) throw ValidationError("llt.mc_samples must be >= 10000");
        cfg.llt = l;
    }
    if (doc.contains("furstenberg")) {
        const json& j = doc.at("furstenberg");
        FurstenbergSection fs;
        fs.L_range = get_or(j, "L_range", fs.L_range);
        fs.test_count = get_or(j, "test_count", fs.test_count);
        fs.seed = get_or(j, "seed", fs.seed);
        for (int L : fs.L_range)
            if (L < 1) throw ValidationError("furstenberg.L_range entries must be >= 1");
        if (fs.test_count < 1) throw ValidationError("furstenberg.test_count must be >= 1");
        if (cfg.op)
            for (int L : fs.L_range)
                if ((1 << (L - 1)) > cfg.op->N) throw ValidationError("furstenberg.L_range exceeds 2^{L-1} <= N");
        cfg.furstenberg = fs;
    }
    if (doc.contains("output")) {
        const json& j = doc.at("output");
        cfg.output.directory = get_or(j, "directory", cfg.output.directory.string());
        cfg.output.formats = get_or(j, "formats", cfg.output.formats);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    if (cfg.measure) {
        json m;
        m["eps"] = cfg.measure->eps;
        m["symmetrize"] = cfg.measure->symmetrize;
        if (!cfg.measure->atoms.empty()) {
            json atoms = json::array();
            for (const auto& g : cfg.measure->atoms) atoms.push_back(matrix_json(g));
            m["atoms"] = atoms;
        } else {
            m["generators"] = cfg.measure->words;
        }
        if (!cfg.measure->weights.empty()) m["weights"] = cfg.measure->weights;
        j["measure"] = m;
    }
    if (cfg.op) j["operator"] = {{"N", cfg.op->N}, {"Q", cfg.op->Q}, {"r_max", cfg.op->r_max}, {"r_nodes", cfg.op->r_nodes}};
    if (cfg.llt) {
        const auto& l = *cfg.llt;
        j["llt"] = {{"f", {{"kind", l.f.kind}, {"width", l.f.width}, {"R", l.f.R}, {"center", matrix_json(l.f.center)}}},
                    {"x0", matrix_json(l.x0)},
                    {"n_range", l.n_range},
                    {"mc_samples", l.mc_samples},
                    {"seed", l.seed},
                    {"use_mc", l.use_mc}};
    }
    if (cfg.furstenberg)
        j["furstenberg"] = {{"L_range", cfg.furstenberg->L_range},
                            {"test_count", cfg.furstenberg->test_count},
                            {"seed", cfg.furstenberg->seed}};
    j["output"] = {{"directory", cfg.output.directory.string()}, {"formats", cfg.output.formats}};
    return j;
}

AtomicMeasure build_measure(const MeasureSection& m) {
    std::vector<Atom> atoms;
    const std::size_t count = m.atoms.empty() ? m.words.size() : m.atoms.size();
    for (std::size_t i = 0; i < count; ++i) {
        const GroupElement g = m.atoms.empty() ? word_element(m.words[i], m.eps) : m.atoms[i].renormalized();
        const double w = m.weights.empty() ? 1.0 : m.weights[i];
        atoms.push_back({g, w});
    }
    AtomicMeasure mu = AtomicMeasure::from_unnormalized(std::move(atoms));
    return m.symmetrize ? symmetrize(mu) : mu;
}

FourierTruncation build_truncation(const OperatorSection& op) {
    FourierTruncation tr = FourierTruncation::omega(op.N, op.Q);
    tr.validate();
    return tr;
}

TestFunctionX build_test_function(const TestFunctionSpec& spec, const FourierTruncation& trunc) {
    if (spec.kind == "gaussian") return TestFunctionX::gaussian_bump(spec.center, spec.width);
    CVector modes = CVector::Zero(trunc.dim());
    modes[trunc.index(0)] = 1.0;
    return bandlimited_bump(spec.R, modes, trunc);
}

LLTConfig build_llt_config(const ExperimentConfig& cfg) {
    const auto& op = cfg.require_operator();
    const auto& l = cfg.require_llt();
    LLTConfig c;
    c.measure = build_measure(cfg.require_measure());
    c.trunc = build_truncation(op);
    c.r_max = op.r_max;
    c.r_nodes = op.r_nodes;
    c.f = build_test_function(l.f, c.trunc);
    c.h0 = l.x0;
    c.n_range = l.n_range;
    c.mc_samples = l.mc_samples;
    c.seed = l.seed;
    c.use_mc = l.use_mc;
    return c;
}

}  // namespace hyperlab
