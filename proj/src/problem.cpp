#include "qg/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qg/numerics.hpp"

namespace qg {

namespace {
bool poly_constant(const Poly& p) { return p.degree() <= 0; }

void push(HypothesisReport& rep, std::string id, bool pass, double slack, std::string detail) {
    rep.lines.push_back({std::move(id), pass, slack, std::move(detail)});
}
}  // namespace

bool ProblemSpec::eps_independent() const {
    for (const auto& t : terms) {
        if (t.Delta_l != t.l0) return false;
        for (const auto& [h, poly] : t.c)
            if (!poly_constant(poly)) return false;
    }
    for (const auto& [j, hs] : cauchy.p)
        for (const auto& [h, poly] : hs)
            if (!poly_constant(poly)) return false;
    return true;
}

int ProblemSpec::max_l3() const {
    int m = 0;
    for (const auto& t : terms) m = std::max(m, t.l3);
    return m;
}

int ProblemSpec::sigma_min() const {
    int m = std::numeric_limits<int>::max();
    for (const auto& t : terms)
        for (const auto& [h, poly] : t.c) m = std::min(m, S - t.l2 + h);
    return (m == std::numeric_limits<int>::max()) ? S : m;
}

HypothesisReport validate(const ProblemSpec& spec) {
    HypothesisReport rep;

    push(rep, "k_positive", spec.k >= 1, spec.k - 1, "Borel-Laplace order k >= 1");
    push(rep, "S_positive", spec.S >= 1, spec.S - 1, "Cauchy order S >= 1");
    push(rep, "q_above_one", spec.q > 1.0, spec.q - 1.0, "dilation base q > 1");
    push(rep, "eps0_positive", spec.eps0 > 0.0, spec.eps0, "parameter disc radius > 0");
    push(rep, "quadratic_weight", spec.Delta >= 0.5, spec.Delta - 0.5,
         "quadratic weight Delta >= 1/2");
    push(rep, "log_envelope_constant", spec.k1 > 0.0, spec.k1, "envelope constant k1 > 0");

    const double p0 = (spec.P.c.empty()) ? 0.0 : std::abs(spec.P.c[0]);
    push(rep, "symbol_nonzero_at_origin", p0 > 0.0, p0, "P(0) != 0");

    bool cauchy_ok = !spec.cauchy.p.empty();
    for (const auto& [j, hs] : spec.cauchy.p) {
        if (j < 0 || j >= spec.S) cauchy_ok = false;
        for (const auto& [h, poly] : hs)
            if (h < 1) cauchy_ok = false;
    }
    push(rep, "cauchy_vanishes_at_origin", cauchy_ok, cauchy_ok ? 1.0 : 0.0,
         "data indices 0 <= j < S and u-powers h >= 1 (omega_j(0) = 0)");

    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
        const MonomialTerm& t = spec.terms[i];
        std::ostringstream tag;
        tag << "term" << i;

        bool coeff_ok = !t.c.empty();
        for (const auto& [h, poly] : t.c)
            if (h < 1) coeff_ok = false;
        push(rep, tag.str() + ":coeff_vanishes_at_z0", coeff_ok, coeff_ok ? 1.0 : 0.0,
             "z-powers h >= 1 (c_l(0, eps) = 0)");

        push(rep, tag.str() + ":z_order_below_S", t.l2 < spec.S,
             static_cast<double>(spec.S - t.l2), "l2 < S");
        push(rep, tag.str() + ":shift_budget", spec.S >= t.l2 + t.l3,
             static_cast<double>(spec.S - t.l2 - t.l3), "S >= l2 + l3");
        push(rep, tag.str() + ":eps_weight_covers_t_power", t.Delta_l >= t.l0,
             static_cast<double>(t.Delta_l - t.l0), "Delta_l >= l0");

        const double D = spec.Delta;
        const double kd = static_cast<double>(spec.k);
        for (const auto& [h, poly] : t.c) {
            std::ostringstream ht;
            ht << tag.str() << ":h" << h;
            const double d1 =
                2.0 * (t.l2 - h) * D + t.l0 + kd * t.l1 - 2.0 * (spec.S - 1) * D;
            push(rep, ht.str() + ":borel_weight_positivity", d1 > 0.0, d1,
                 "2(l2-h)Delta + l0 + k l1 - 2(S-1)Delta > 0");

            const double lhs = D * std::max(0.0, 2.0 * (t.l2 - h) - 1.0) -
                               (t.l2 - h) * (t.l2 - h) * D;
            double rhs = std::numeric_limits<double>::infinity();
            for (int a : {spec.S - 1, spec.S})
                rhs = std::min(rhs, a * (t.l0 + kd * t.l1) - a * a * D);
            push(rep, ht.str() + ":pyramid_domination", lhs < rhs, rhs - lhs,
                 "Delta max{0, 2(l2-h)-1} - (l2-h)^2 Delta < min_{a in {S-1,S}} a(l0+k l1) - a^2 Delta");

            const double d3 = -2.0 * D * t.l3 + t.l0 + kd * t.l1;
            push(rep, ht.str() + ":dilation_weight_positivity", d3 > 0.0, d3,
                 "-2 Delta l3 + l0 + k l1 > 0");
        }

        const double budget = kd * spec.P.degree() -
                              (kd * t.l1 + t.l0 + 2.0 * spec.k1 * t.l3 * std::log(spec.q));
        push(rep, tag.str() + ":symbol_degree_budget", budget >= 0.0, budget,
             "k deg P >= k l1 + l0 + 2 k1 l3 log q");
    }

    rep.all_pass = true;
    for (const auto& l : rep.lines) rep.all_pass = rep.all_pass && l.pass;
    return rep;
}

Poly cauchy_u_poly(const ProblemSpec& spec, int j, cplx eps) {
    auto it = spec.cauchy.p.find(j);
    if (j < 0 || j >= spec.S)
        throw std::out_of_range("cauchy_u_poly: index j outside 0 <= j < S");
    Poly out;
    if (it == spec.cauchy.p.end()) return out;  // identically zero data
    int hmax = 0;
    for (const auto& [h, poly] : it->second) hmax = std::max(hmax, h);
    out.c.assign(hmax + 1, cplx{0.0, 0.0});
    for (const auto& [h, poly] : it->second) out.c[h] = poly.eval(eps);
    return out;
}

cplx phi_eval(const ProblemSpec& spec, int j, cplx t, cplx eps) {
    const Poly pj = cauchy_u_poly(spec, j, eps);
    const cplx T = eps * t;
    cplx acc{0.0, 0.0};
    cplx Th = T;  // T^h, starting at h = 1
    for (int h = 1; h < static_cast<int>(pj.c.size()); ++h) {
        if (pj.c[h] != cplx{0.0, 0.0})
            acc += gamma_real(static_cast<double>(h) / spec.k) * pj.c[h] * Th;
        Th *= T;
    }
    return acc;
}

std::map<int, std::map<int, Poly>> cauchy_to_physical(
    const std::map<int, std::map<int, Poly>>& borel_side, int k) {
    std::map<int, std::map<int, Poly>> out;
    for (const auto& [j, hs] : borel_side)
        for (const auto& [h, poly] : hs) {
            if (h < 1) throw std::invalid_argument("cauchy_to_physical: u-power h < 1");
            Poly scaled = poly;
            const double g = gamma_real(static_cast<double>(h) / k);
            for (auto& c : scaled.c) c *= g;
            out[j][h] = std::move(scaled);
        }
    return out;
}

std::map<int, std::map<int, Poly>> physical_to_cauchy(
    const std::map<int, std::map<int, Poly>>& physical_side, int k) {
    std::map<int, std::map<int, Poly>> out;
    for (const auto& [j, hs] : physical_side)
        for (const auto& [h, poly] : hs) {
            if (h < 1) throw std::invalid_argument("physical_to_cauchy: t-power h < 1");
            Poly scaled = poly;
            const double g = gamma_real(static_cast<double>(h) / k);
            for (auto& c : scaled.c) c /= g;
            out[j][h] = std::move(scaled);
        }
    return out;
}

}  // namespace qg
