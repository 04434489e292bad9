#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hyperlab/group.hpp"
#include "hyperlab/llt.hpp"
#include "hyperlab/measure.hpp"

namespace hyperlab {

struct MeasureSection {
    std::vector<std::string> words;           // generator words, used when atoms is empty
    double eps = 0.3;
    std::vector<GroupElement> atoms;          // explicit matrices
    std::vector<double> weights;              // empty means uniform
    bool symmetrize = false;
};

struct OperatorSection {
    int N = 64;
    int Q = 512;
    double r_max = 20.0;
    int r_nodes = 128;
};

struct TestFunctionSpec {
    std::string kind = "gaussian";  // gaussian | bandlimited
    GroupElement center;
    double width = 0.7;
    double R = 3.0;
};

struct LLTSection {
    TestFunctionSpec f;
    GroupElement x0;
    std::vector<int> n_range = {1, 2, 4, 6, 8, 16, 32, 64, 128, 256};
    std::size_t mc_samples = 100000;
    std::uint64_t seed = 20240611;
    bool use_mc = true;
};

struct FurstenbergSection {
    std::vector<int> L_range = {1, 2, 3, 4, 5, 6};
    int test_count = 20;
    std::uint64_t seed = 7;
};

struct OutputSection {
    std::filesystem::path directory = "out";
    std::vector<std::string> formats = {"csv", "json", "svg"};
    bool wants(const std::string& fmt) const;
};

struct ExperimentConfig {
    std::optional<MeasureSection> measure;
    std::optional<OperatorSection> op;
    std::optional<LLTSection> llt;
    std::optional<FurstenbergSection> furstenberg;
    OutputSection output;
    std::vector<std::string> notices;  // e.g. renormalized non-unimodular matrices

    // Throws ValidationError naming the missing section.
    const MeasureSection& require_measure() const;
    const OperatorSection& require_operator() const;
    const LLTSection& require_llt() const;
    const FurstenbergSection& require_furstenberg() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Accepts [[a, b], [c, d]]. Returns the matrix as given; det checks are left to callers.
GroupElement parse_matrix(const nlohmann::json& j);
GroupElement parse_matrix_text(const std::string& text);

AtomicMeasure build_measure(const MeasureSection& m);
FourierTruncation build_truncation(const OperatorSection& op);
TestFunctionX build_test_function(const TestFunctionSpec& spec, const FourierTruncation& trunc);
LLTConfig build_llt_config(const ExperimentConfig& cfg);

}  // namespace hyperlab
