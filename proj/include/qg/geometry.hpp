#pragma once

#include <limits>
#include <optional>

#include "qg/common.hpp"
#include "qg/poly.hpp"

namespace qg {

// Open sector with vertex at the origin:
//   { u != 0 : dist(arg u, direction) < half_opening, |u| < radius }.
// Unbounded sectors have radius = infinity.
struct Sector {
    double direction = 0.0;     // radians
    double half_opening = 0.0;  // radians, in (0, pi]
    double radius = std::numeric_limits<double>::infinity();

    bool bounded() const { return std::isfinite(radius); }
    bool contains_direction(double theta) const;
    bool contains(cplx u) const;
    void validate() const;
};

struct CoveringReport {
    bool pass = false;
    std::vector<std::string> violations;
    std::vector<double> witnesses;  // directions (radians) witnessing failures
};

// Checks the covering bullets on the angular arcs: at least two sectors,
// nonempty consecutive overlaps (cyclic), empty triple intersections of
// distinct members, and joint coverage of every direction. Decisions are
// made on arc endpoints and gap midpoints with a 1e-12 radian tolerance.
// Unbounded input throws std::invalid_argument.
CoveringReport is_good_covering(const std::vector<Sector>& sectors);

struct GoodCovering {
    std::vector<Sector> sectors;
    double punctured_disc_radius = 0.0;

    // Validating factory: the covering bullets plus
    // min_p radius_p >= punctured_disc_radius > 0.
    static GoodCovering make(std::vector<Sector> sectors, double punctured_disc_radius);
};

// All u with P(k u^k) = 0: companion-matrix eigenvalues of P (one Newton
// polish each), then the k-th roots of tau/k. Requires deg P >= 1 and
// P(0) != 0; returns k * deg(P) roots.
std::vector<cplx> roots_of_borel_symbol(const Poly& P, int k);

struct DirectionChoice {
    double gamma = 0.0;
    double margin = 0.0;  // cos(k (gamma - phase))
};

// Best Laplace direction in the sector's arc inset from both edges:
// maximizes cos(k (gamma - phase)) analytically (critical points
// phase + 2 pi j / k when inside the arc, else the better endpoint);
// near-ties break toward smaller gamma.
std::optional<DirectionChoice> try_choose_direction(const Sector& U, int k, double phase,
                                                    double inset = deg2rad(2.0));

// Same, but requires margin > min_margin and throws DirectionError otherwise.
DirectionChoice choose_direction(const Sector& U, int k, double phase,
                                 double inset = deg2rad(2.0), double min_margin = 0.0);

struct AdmissibleConfig {
    GoodCovering covering;      // over the asymptotic parameter (eps or t)
    Sector companion;           // bounded sector for the other variable
    std::vector<Sector> borel;  // unbounded u-sectors, one per covering sector
    int k = 1;
    double inset = deg2rad(2.0);
    std::vector<cplx> symbol_roots;
    std::vector<double> margins;          // per sector: worst probe-phase margin
    std::vector<std::vector<double>> probe_phases;  // phases used per sector
    double root_clearance = 0.0;          // min angular clearance root <-> sector arc
};

// Validates the full sectorial configuration: symbol roots must stay outside
// every unbounded Borel sector (std::invalid_argument naming the offender
// otherwise) and every (sector, probe phase) must admit a direction with
// positive margin (DirectionError naming sector and phase otherwise).
AdmissibleConfig build_admissible(const GoodCovering& covering, const Sector& companion,
                                  const std::vector<Sector>& borel, const Poly& P, int k,
                                  const std::vector<std::vector<double>>& probe_phases,
                                  double inset = deg2rad(2.0));

}  // namespace qg
