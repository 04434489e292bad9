#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hyperlab/config.hpp"

namespace hyperlab {

// Shortest round-trip form is not used: every double is written with 17 significant digits.
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> cells);
    std::string str() const;
    void write(const std::filesystem::path& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;
};

// Self-contained SVG line plot. Points that are non-finite, or non-positive on a log axis, are skipped.
std::string render_svg(const PlotSpec& spec);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

struct RunOptions {
    int threads = 0;  // 0 keeps the hardware default
    bool use_cache = true;
    bool no_mc = false;
    std::optional<std::filesystem::path> out_dir;  // overrides [output].directory
    std::filesystem::path cache_fallback = ".hyperlab-cache";
};

// 2 validation, 3 numerical, 4 budget, 1 anything else.
int exit_code_for(const std::exception& e);

// Each command writes its artifacts and returns the JSON summary it wrote.
nlohmann::json cmd_decompose(const std::string& matrix_text, std::ostream& out);
nlohmann::json cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out);
nlohmann::json cmd_llt(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out);
nlohmann::json cmd_furstenberg(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out);

struct SelftestRow {
    std::string name;
    bool pass = false;
    std::string detail;
};
// Invariant suite on small truncations. Seeds are echoed in the table.
std::vector<SelftestRow> run_selftest(const RunOptions& opts, std::ostream& out);

}  // namespace hyperlab
