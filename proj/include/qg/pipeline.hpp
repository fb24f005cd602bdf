#pragma once

#include <optional>
#include <string>

#include "qg/config_io.hpp"

namespace qg {

// Process exit codes shared by the pipeline stages and the CLI:
//   0  success - every checked contract held
//   1  contract failure - hypotheses or battery checks failed (reports written)
//   2  usage or configuration error
//   3  missing solve artifacts (asym stage without inline solving)
enum ExitCode : int {
    exit_ok = 0,
    exit_contract_failure = 1,
    exit_usage = 2,
    exit_missing_artifacts = 3,
};

struct RunResult {
    int exit_code = exit_ok;
    std::string message;             // one-line outcome for the console
    std::vector<std::string> files;  // artifacts written by the stage
};

struct PipelineOptions {
    std::string out_dir = "out";
    bool solve_inline = false;
    std::optional<Variant> variant;                 // overrides the config
    std::optional<NormSpec::Variant> norm_variant;  // overrides the config
    std::optional<int> N;                           // overrides solver.N
};

// Hypothesis report + admissibility check; exit 0 iff everything passes.
RunResult run_validate(const LabConfig& cfg, const PipelineOptions& opts);

// Solves the coefficient families, assembles every sector, dumps coefficient
// and probe CSVs, and fits the four coefficient envelopes.
RunResult run_solve(const LabConfig& cfg, const PipelineOptions& opts);

// The asymptotics pipeline: cocycle measurements, flatness fits (which gate
// the Cauchy-Heine extraction), growth classification, and the remainder
// bound check. Requires the solve artifact unless solve_inline is set.
RunResult run_asym(const LabConfig& cfg, const PipelineOptions& opts);

struct SelftestOptions {
    bool quick = false;        // reduced battery, wall-time budget ~10 s
    double gamma_scale = 1.0;  // != 1 perturbs the monomial reference in the
                               // identity battery (bug-injection fixture)
    std::string out_dir;       // empty: summary returned, no file written
};

// Identity battery plus the synthetic fit and classifier batteries; exit 0
// iff all contracts hold. The JSON summary lands in *json_text when given.
RunResult run_selftest(const SelftestOptions& opts, std::string* json_text = nullptr);

}  // namespace qg
