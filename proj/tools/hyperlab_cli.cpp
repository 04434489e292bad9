#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hyperlab/config.hpp"
#include "hyperlab/errors.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/report.hpp"

using namespace hyperlab;

int main(int argc, char** argv) {
    CLI::App app{"Random walks on SL(2,R): boundary operators, local limit experiments, stationary measures"};
    app.require_subcommand(1);

    RunOptions opts;
    bool no_cache = false;
    std::string out_dir;
    app.add_option("--threads", opts.threads, "Cap on worker threads (results do not depend on it)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--no-cache", no_cache, "Bypass the operator-matrix cache");
    app.add_option("--out", out_dir, "Output directory (overrides [output].directory)");

    std::string matrix;
    auto* decompose = app.add_subcommand("decompose", "Iwasawa and Cartan factors of a 2x2 matrix");
    decompose->add_option("matrix", matrix, "Matrix as [[a,b],[c,d]]")->required();

    std::string config_path;
    auto* spectrum = app.add_subcommand("spectrum", "Perron data and the lambda(r) branch");
    spectrum->add_option("config", config_path, "Experiment config (JSON)")->required();
    auto* llt = app.add_subcommand("llt", "Local limit convergence run");
    llt->add_option("config", config_path, "Experiment config (JSON)")->required();
    llt->add_flag("--no-mc", opts.no_mc, "Skip Monte Carlo sampling");
    auto* furst = app.add_subcommand("furstenberg", "Stationary density and Fourier decay");
    furst->add_option("config", config_path, "Experiment config (JSON)")->required();
    auto* selftest = app.add_subcommand("selftest", "Invariant suite with a pass/fail table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    opts.use_cache = !no_cache;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    if (opts.threads > 0) set_thread_count(opts.threads);

    try {
        if (*decompose) {
            cmd_decompose(matrix, std::cout);
        } else if (*selftest) {
            const auto rows = run_selftest(opts, std::cout);
            for (const auto& r : rows)
                if (!r.pass) return 1;
        } else {
            const ExperimentConfig cfg = load_config(config_path);
            for (const auto& n : cfg.notices) std::cout << n << "\n";
            if (*spectrum) cmd_spectrum(cfg, opts, std::cout);
            if (*llt) cmd_llt(cfg, opts, std::cout);
            if (*furst) cmd_furstenberg(cfg, opts, std::cout);
        }
    } catch (const ContinuationError& e) {
        std::cerr << "error: " << e.what() << " (offending r = " << e.r() << ")\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
