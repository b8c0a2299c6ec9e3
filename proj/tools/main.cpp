// Command-line front end: problem ingestion, dispatch, report emission.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nsvar/problem.hpp"

namespace {

nsvar::RunOptions make_options(int n, const std::vector<std::string>& tols, int64_t seed,
                               bool has_seed, bool csv, const std::string& clarke_radii,
                               int clarke_samples, int clarke_dirs) {
    nsvar::RunOptions opts;
    opts.grid_override = n;
    opts.write_csv = csv;
    if (has_seed) opts.seed_override = static_cast<uint64_t>(seed);
    for (const auto& kv : tols) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--tol expects name=value, got \"" + kv + "\"");
        opts.tol_overrides[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    if (!clarke_radii.empty()) {
        std::string rest = clarke_radii;
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            opts.clarke_radii.push_back(std::stod(rest.substr(0, comma)));
            rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
        }
    }
    opts.clarke_samples = clarke_samples;
    opts.clarke_dirs = clarke_dirs;
    return opts;
}

std::string default_out_dir() {
    const char* env = std::getenv("NSVAR_OUT");
    return env ? env : "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nsvar: checkers for conjugates, subdifferentials and sweeping processes on a grid"};
    app.require_subcommand(1);

    std::string path, out_dir = default_out_dir(), clarke_radii;
    std::vector<std::string> tols;
    int n = -1, clarke_samples = -1, clarke_dirs = -1;
    int64_t seed = 0;
    bool csv = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--n", n, "grid cell count override");
        cmd->add_option("--tol", tols, "tolerance override, name=value")->take_all();
        cmd->add_option("--seed", seed, "random seed override");
        cmd->add_option("--out", out_dir, "output directory (default $NSVAR_OUT or ./out)");
        cmd->add_flag("--csv", csv, "also write trajectory CSV files");
        cmd->add_option("--clarke-radii", clarke_radii, "comma-separated sampling radii");
        cmd->add_option("--clarke-samples", clarke_samples, "samples per radius");
        cmd->add_option("--clarke-dirs", clarke_dirs, "membership directions");
    };

    CLI::App* run = app.add_subcommand("run", "run a single problem file");
    run->add_option("file", path, "problem JSON file")->required();
    add_common(run);

    CLI::App* suite = app.add_subcommand("suite", "run every problem file in a directory");
    suite->add_option("dir", path, "directory of problem JSON files")->required();
    add_common(suite);

    CLI11_PARSE(app, argc, argv);

    const bool has_seed = run->count("--seed") > 0 || suite->count("--seed") > 0;
    nsvar::RunOptions opts;
    try {
        opts = make_options(n, tols, seed, has_seed, csv, clarke_radii, clarke_samples, clarke_dirs);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    if (run->parsed()) {
        const nsvar::RunOutcome outcome = nsvar::run_problem_file(path, out_dir, opts);
        if (outcome.exit_code == 2) {
            std::fprintf(stderr, "error: %s\n", outcome.diagnostic.c_str());
        } else {
            for (const auto& rep : outcome.reports)
                std::printf("%-28s residual %-12.6g tol %-10.4g %s\n", rep.kind.c_str(),
                            rep.residual, rep.tolerance, rep.pass ? "PASS" : "FAIL");
        }
        return outcome.exit_code;
    }

    const nsvar::SuiteOutcome outcome = nsvar::run_suite(path, out_dir, opts);
    std::printf("%s", outcome.summary_csv.c_str());
    return outcome.exit_code;
}
