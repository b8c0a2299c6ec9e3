#ifndef NSVAR_PROBLEM_HPP
#define NSVAR_PROBLEM_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsvar/report.hpp"

namespace nsvar {

// Flag-level overrides applied on top of the problem file.
struct RunOptions {
    int grid_override = -1;                       // --n
    std::map<std::string, double> tol_overrides;  // --tol name=val
    std::optional<uint64_t> seed_override;        // --seed
    bool write_csv = false;                       // --csv
    std::vector<double> clarke_radii;             // --clarke-radii
    int clarke_samples = -1;                      // --clarke-samples
    int clarke_dirs = -1;                         // --clarke-dirs
};

struct RunOutcome {
    int exit_code = 0;  // 0 all reports pass, 1 verification fail, 2 structural/oracle error
    std::string kind;
    std::vector<Report> reports;
    json report_payload;  // byte-stable given (file, seed)
    json manifest;        // includes wall time; not part of the stable payload
    std::map<std::string, std::string> csv_files;  // name -> contents
    std::string diagnostic;                        // set when exit_code == 2
};

// Validates the problem JSON, dispatches to the named module, and collects
// reports. Never throws for problem-level failures; they land in exit_code.
RunOutcome run_problem(const json& problem, const RunOptions& opts = {});

// Reads, runs, and writes report.json / manifest.json / CSVs under
// out_dir/<stem>/ (out_dir empty = no files written).
RunOutcome run_problem_file(const std::string& path, const std::string& out_dir,
                            const RunOptions& opts = {});

struct SuiteRow {
    std::string file;
    std::string kind;
    double residual = 0.0;
    double tolerance = 0.0;
    std::string verdict;  // pass | fail | error
    double runtime_s = 0.0;
};

struct SuiteOutcome {
    int exit_code = 0;
    std::vector<SuiteRow> rows;
    std::string summary_csv;
};

// Runs every *.json under dir (sorted), in parallel across files. Partial
// failures become error rows instead of aborting.
SuiteOutcome run_suite(const std::string& dir, const std::string& out_dir,
                       const RunOptions& opts = {});

uint64_t stable_hash(const std::string& payload);

}  // namespace nsvar

#endif
