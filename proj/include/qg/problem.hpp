#pragma once

#include <map>

#include "qg/common.hpp"
#include "qg/poly.hpp"

namespace qg {

// One right-hand-side term
//   eps^Delta_l * c_l(z, eps) * t^l0 * ((eps^k t^(k+1) d_t)^l1 d_z^l2 u)(q^l3 t, z, eps)
// with c_l(z, eps) = sum_{h in I_l} c_{l,h}(eps) z^h, h >= 1.
struct MonomialTerm {
    int l0 = 0, l1 = 0, l2 = 0, l3 = 0;
    int Delta_l = 0;
    std::map<int, Poly> c;  // h -> c_{l,h}(eps)
};

// Cauchy data of the Borel problem: omega_j(u, eps) = sum_{h in J_j}
// p_{j,h}(eps) u^h for j < S, h >= 1.
struct CauchyData {
    std::map<int, std::map<int, Poly>> p;  // j -> h -> p_{j,h}(eps)
};

struct ProblemSpec {
    int k = 1;
    int S = 1;
    double q = 1.2;
    double eps0 = 0.1;
    Poly P;  // symbol polynomial, P(0) != 0
    std::vector<MonomialTerm> terms;
    CauchyData cauchy;
    double Delta = 0.5;  // quadratic-weight exponent
    double k1 = 1.0;     // log^2 envelope constant

    // True when no quantity depends on eps: all Delta_l == l0 and every
    // coefficient polynomial is constant. Coefficient families are then
    // shareable across eps.
    bool eps_independent() const;
    int max_l3() const;
    // min over (term, h) of S - l2 + h: index drop per recursion application.
    int sigma_min() const;
};

struct HypothesisLine {
    std::string id;
    bool pass = false;
    double slack = 0.0;  // >= 0 (or > 0 for strict lines) means pass
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisLine> lines;
    bool all_pass = false;
};

// Checks every structural and quantitative hypothesis the solver relies on;
// one line per check with its numeric slack.
HypothesisReport validate(const ProblemSpec& spec);

// Borel Cauchy polynomial in u at fixed eps: omega_j(u, eps).
Poly cauchy_u_poly(const ProblemSpec& spec, int j, cplx eps);

// Physical Cauchy data: phi_j(t, eps) = sum_h Gamma(h/k) p_{j,h}(eps) (eps t)^h.
cplx phi_eval(const ProblemSpec& spec, int j, cplx t, cplx eps);

// Coefficient maps between the Borel side (p_{j,h}) and the physical side
// (Gamma(h/k) p_{j,h}); exact inverses of each other.
std::map<int, std::map<int, Poly>> cauchy_to_physical(
    const std::map<int, std::map<int, Poly>>& borel_side, int k);
std::map<int, std::map<int, Poly>> physical_to_cauchy(
    const std::map<int, std::map<int, Poly>>& physical_side, int k);

}  // namespace qg
