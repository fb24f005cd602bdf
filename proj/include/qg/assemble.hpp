#pragma once

#include <map>
#include <memory>
#include <tuple>

#include "qg/borel.hpp"
#include "qg/geometry.hpp"
#include "qg/laplace.hpp"

namespace qg {

// Which variable carries the sector covering: the eps-family solutions live
// on eps-sectors with t in a fixed companion sector, the t-family swaps the
// roles.
enum class Variant { eps_family, t_family };

// Builds and caches coefficient families (and disc stacks) per Laplace
// direction and eps. When the problem is structurally eps-independent the
// same family serves every eps. Single-threaded by design (determinism).
class FamilyProvider {
  public:
    FamilyProvider(ProblemSpec spec, SolverOptions opts);

    const ProblemSpec& spec() const { return spec_; }
    const SolverOptions& options() const { return opts_; }

    // The family along gamma at eps; p is bookkeeping recorded on first use.
    // An already-cached disc stack for this eps is attached automatically.
    std::shared_ptr<const CoefficientFamily> family(double gamma, int p, cplx eps);

    // The shrinking-disc stack at eps; rebuilt if cached directions miss any
    // of extra_directions. Attaches itself to cached families of that eps.
    std::shared_ptr<const DiscStack> disc(cplx eps,
                                          const std::vector<double>& extra_directions = {});

  private:
    cplx key_eps(cplx eps) const;

    ProblemSpec spec_;
    SolverOptions opts_;
    bool eps_independent_ = false;
    std::map<std::tuple<double, double, double>, std::shared_ptr<CoefficientFamily>> fams_;
    std::map<std::pair<double, double>, std::shared_ptr<const DiscStack>> discs_;
};

struct AssembleOptions {
    LaplaceOptions laplace;
    double R1 = 0.5;               // z-disc radius of the evaluation domain
    double inset = deg2rad(2.0);   // direction choice stays off the sector edges
    double min_margin = 0.05;      // required worst-case cosine margin
    // z-series truncation; <= 0 means "all family coefficients". Choosing
    // N_z below the family truncation leaves computed lookahead coefficients
    // for the remainder estimate.
    int N_z = 0;
};

// One Laplace direction serving a whole set of kernel phases (arg T values):
// maximizes the worst-case margin min_phase cos(k (gamma - phase)).
DirectionChoice choose_direction_for_phases(const Sector& U, int k,
                                            const std::vector<double>& phases,
                                            double inset = deg2rad(2.0),
                                            double min_margin = 0.0);

struct ProbeCache {
    cplx t, eps;
    std::vector<cplx> u_n;  // u_{p,n}(t, eps), n = 0..N
};

// Immutable after assemble(); evaluation members are free functions.
struct SectorialSolution {
    Variant variant = Variant::eps_family;
    int p = 0;
    int N = 0;          // family truncation (coefficients available)
    int N_z = 0;        // z-series truncation used by evaluate/pde_residual
    double R1 = 0.5;
    double gamma = 0.0; // Laplace direction
    double margin = 0.0;
    Sector t_dom;       // companion (eps variant) or covering sector p (t variant)
    Sector par_dom;     // covering sector p (eps variant) or companion (t variant)
    Sector borel;       // u-sector the direction was chosen in
    std::shared_ptr<FamilyProvider> provider;
    LaplaceOptions laplace;
    std::vector<ProbeCache> cache;
};

// Chooses the direction for sector p, solves the needed families, and caches
// u_{p,n} on the probe grid (every (t, eps) pair). Probes must lie in the
// declared domains.
SectorialSolution assemble(std::shared_ptr<FamilyProvider> provider,
                           const AdmissibleConfig& config, Variant variant, int p,
                           const std::vector<cplx>& t_probes,
                           const std::vector<cplx>& eps_probes,
                           const AssembleOptions& opts = {});

// u_{p,n}(t, eps) = Laplace transform of omega_n at T = eps t along gamma.
// Domain-checked against t_dom/par_dom.
cplx solution_coefficient(const SectorialSolution& sol, int n, cplx t, cplx eps);

struct EvalResult {
    cplx value{0.0, 0.0};
    double remainder = 0.0;  // dropped z-tail: computed lookahead terms plus
                             // a ratio-test extrapolation beyond the family
};

// Truncated series sum_{n<=N_z} u_{p,n}(t,eps) z^n/n!; z must lie in D_R1.
EvalResult evaluate(const SectorialSolution& sol, cplx t, cplx z, cplx eps);

struct PdeResidualReport {
    double residual = 0.0;      // |defect| / largest contributing term
    double largest_term = 0.0;  // the normalizer
    cplx defect{0.0, 0.0};      // LHS - RHS of the truncated series, raw
    double fd_check = 0.0;      // Borel identity vs finite differences, rel.
};

// Relative residual of the q-difference-differential equation at (t, z, eps):
// symbol side P(eps^k t^{k+1} d_t) d_z^S u against the dilated right-hand
// side; each t-derivative applied through the Borel identity (omega_n ->
// k u^k omega_n), plus a finite-difference cross-check of that identity.
PdeResidualReport pde_residual(const SectorialSolution& sol, cplx t, cplx z, cplx eps);

// Max deviation between cached probe values and fresh recomputation.
double cache_reproduction_error(const SectorialSolution& sol);

}  // namespace qg
