#pragma once

#include <string>

#include "qg/assemble.hpp"
#include "qg/asymptotics.hpp"
#include "qg/borel.hpp"
#include "qg/geometry.hpp"
#include "qg/problem.hpp"

namespace qg {

// Raised on unreadable files, malformed JSON, or schema violations. The
// message carries the config origin plus a line/field diagnostic.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// One experiment: the problem, its sectorial geometry, the solver and
// assembly resolution, and the asymptotics protocol. Loaded from a single
// JSON file (see docs/schema.md); every field has the documented default.
struct LabConfig {
    int schema_version = 1;
    std::string name;

    ProblemSpec problem;

    // Covering over the asymptotic parameter and companion sector for the
    // other variable; `variant` fixes which variable is which.
    GoodCovering covering;
    Sector companion;
    std::vector<Sector> borel;
    // Kernel-phase offsets (radians) applied around each covering direction
    // when choosing Laplace directions.
    std::vector<double> probe_offsets;
    Variant variant = Variant::eps_family;

    SolverOptions solver;
    AssembleOptions assemble;

    // Cocycle probe grid: `count` moduli from r_min to r_max along each
    // overlap bisector; open_upper nudges the last modulus inside the open
    // covering boundary.
    struct ProbeGrid {
        double r_min = 0.02;
        double r_max = 0.1;
        int count = 9;
        bool open_upper = true;
    } probe_grid;

    NormSpec norm;  // base is filled from `companion` at load time
    int ch_n_max = 16;
    RsOptions rs;

    // Raw file bytes; hashed into every report for provenance.
    std::string raw_text;
    std::string origin;  // path or "<inline>"

    // Phases per covering sector: direction + each probe offset.
    std::vector<std::vector<double>> probe_phases() const;
};

// Parses a config from text. `origin` names the source in diagnostics.
LabConfig parse_config(const std::string& text, const std::string& origin);

// Reads and parses a config file.
LabConfig load_config(const std::string& path);

}  // namespace qg
