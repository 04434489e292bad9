#include "doctest.h"

#include <sstream>

#include "hyperlab/errors.hpp"
#include "hyperlab/report.hpp"

using namespace hyperlab;
using nlohmann::json;

namespace {

json small_config() {
    return json::parse(R"({
        "measure": {"generators": ["E", "-E", "F", "-F"], "eps": 0.3},
        "operator": {"N": 16, "Q": 128, "r_max": 20.0, "r_nodes": 64},
        "furstenberg": {"L_range": [1, 2, 3, 4], "test_count": 5, "seed": 7}
    })");
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("hyperlab_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("cli_report") {
    TEST_CASE("missing section is named") {
        const auto cfg = parse_config(small_config());
        try {
            (void)cfg.require_llt();
            FAIL("expected a ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("[llt]") != std::string::npos);
        }
    }

    TEST_CASE("aliasing guard and field validation") {
        auto doc = small_config();
        doc["operator"]["Q"] = 100;
        CHECK_THROWS_AS(parse_config(doc), ValidationError);
        doc = small_config();
        doc["operator"]["N"] = "sixteen";
        CHECK_THROWS_AS(parse_config(doc), ValidationError);
        doc = small_config();
        doc["furstenberg"]["L_range"] = json::array({6});
        CHECK_THROWS_AS(parse_config(doc), ValidationError);
    }

    TEST_CASE("non-unimodular atoms are renormalized with a notice") {
        auto doc = small_config();
        doc["measure"] = json::parse(R"({"atoms": [[[2, 0], [0, 2]], [[1, 1], [0, 1]]]})");
        const auto cfg = parse_config(doc);
        REQUIRE(cfg.notices.size() == 1);
        CHECK(cfg.notices[0].find("det") != std::string::npos);
        const auto mu = build_measure(cfg.require_measure());
        for (const auto& a : mu.atoms()) CHECK(a.g.det() == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("csv and number formatting") {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(NAN) == "nan");
        CsvTable t({"n", "value"});
        t.add_row(std::vector<double>{1.0, 0.5});
        CHECK(t.str() == "n,value\n1,0.5\n");
        CHECK(t.rows() == 1);
    }

    TEST_CASE("svg is self-contained") {
        PlotSpec spec{"decay", "n", "err", true, true, {{"a", {1, 10, 100}, {1, 0.1, 0.0}}}};
        const auto svg = render_svg(spec);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("href") == std::string::npos);
        CHECK(svg.find("<script") == std::string::npos);
    }

    TEST_CASE("decompose") {
        std::ostringstream out;
        const auto j = cmd_decompose("[[2,0],[0,0.5]]", out);
        CHECK(j["iwasawa"]["H"].get<double>() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
        CHECK(out.str().find("notice") == std::string::npos);
        std::ostringstream out2;
        cmd_decompose("[[2,0],[0,2]]", out2);
        CHECK(out2.str().find("notice: det") != std::string::npos);
        std::ostringstream out3;
        CHECK_THROWS_AS(cmd_decompose("[[1,0],[0,-1]]", out3), InvalidElementError);
    }

    TEST_CASE("exit codes") {
        CHECK(exit_code_for(ValidationError("x")) == 2);
        CHECK(exit_code_for(InvalidElementError("x")) == 2);
        CHECK(exit_code_for(NumericalError("x")) == 3);
        CHECK(exit_code_for(ContinuationError("x", 0.5)) == 3);
        CHECK(exit_code_for(BudgetError("x")) == 4);
        CHECK(exit_code_for(std::runtime_error("x")) == 1);
    }

    TEST_CASE("spectrum of a K-supported measure reports the degenerate case") {
        auto doc = small_config();
        doc["measure"]["generators"] = json::array({"E", "-E"});
        const auto cfg = parse_config(doc);
        RunOptions opts;
        opts.use_cache = false;
        opts.out_dir = scratch_dir("spectrum_k");
        std::ostringstream out;
        const auto j = cmd_spectrum(cfg, opts, out);
        CHECK(j["supported_in_K"].get<bool>());
        CHECK(j["sigma"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::filesystem::exists(*opts.out_dir / "spectrum.json"));
    }

    TEST_CASE("furstenberg command writes its artifacts") {
        const auto cfg = parse_config(small_config());
        RunOptions opts;
        opts.use_cache = false;
        opts.out_dir = scratch_dir("furstenberg");
        std::ostringstream out;
        const auto j = cmd_furstenberg(cfg, opts, out);
        CHECK(j.contains("density"));
        for (const char* f : {"furstenberg.json", "furstenberg_density.csv", "fourier_decay.csv", "highmode_decay.csv"})
            CHECK(std::filesystem::exists(*opts.out_dir / f));
    }

    TEST_CASE("selftest passes") {
        RunOptions opts;
        opts.use_cache = false;
        std::ostringstream out;
        const auto rows = run_selftest(opts, out);
        CHECK(rows.size() == 9);
        for (const auto& r : rows) {
            INFO(r.name << ": " << r.detail);
            CHECK(r.pass);
        }
    }
}
