#include "qg/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace qg {

namespace {
constexpr double kAngleTol = 1e-12;

// Arc on the circle as (start, length), start in [0, 2pi), 0 < length <= 2pi.
struct Arc {
    double start, len;
};

Arc sector_arc(const Sector& s) {
    return {wrap_angle(s.direction - s.half_opening), 2.0 * s.half_opening};
}

bool arc_covers(const Arc& a, double theta, double tol) {
    if (a.len >= 2.0 * pi - kAngleTol) {
        // Full circle minus one point: covered unless theta is that point.
        return wrap_angle(theta - a.start) > tol && wrap_angle(theta - a.start) < a.len - tol;
    }
    const double off = wrap_angle(theta - a.start);
    return off > tol && off < a.len - tol;
}

// Intersection of two open arcs: zero, one, or two components.
std::vector<Arc> arc_intersection(const Arc& a, const Arc& b) {
    std::vector<Arc> out;
    auto add = [&out](double start, double len) {
        if (len > kAngleTol) {
            for (const Arc& c : out)
                if (std::abs(c.start - start) <= kAngleTol && std::abs(c.len - len) <= kAngleTol)
                    return;
            out.push_back({start, len});
        }
    };
    const double off_b = wrap_angle(b.start - a.start);
    if (off_b < a.len - kAngleTol) add(b.start, std::min(a.len - off_b, b.len));
    const double off_a = wrap_angle(a.start - b.start);
    if (off_a < b.len - kAngleTol) add(a.start, std::min(b.len - off_a, a.len));
    return out;
}

double angular_distance(double x, double y) {
    double d = std::abs(wrap_angle(x - y));
    return std::min(d, 2.0 * pi - d);
}
}  // namespace

bool Sector::contains_direction(double theta) const {
    return angular_distance(theta, direction) < half_opening;
}

bool Sector::contains(cplx u) const {
    const double r = std::abs(u);
    if (!(r > 0.0) || r >= radius) return false;
    return contains_direction(std::arg(u));
}

void Sector::validate() const {
    if (!(half_opening > 0.0) || half_opening > pi)
        throw std::invalid_argument("Sector: half_opening must lie in (0, pi]");
    if (!(radius > 0.0)) throw std::invalid_argument("Sector: radius must be positive");
    if (!std::isfinite(direction)) throw std::invalid_argument("Sector: direction not finite");
}

CoveringReport is_good_covering(const std::vector<Sector>& sectors) {
    CoveringReport rep;
    for (const Sector& s : sectors) {
        s.validate();
        if (!s.bounded())
            throw std::invalid_argument("is_good_covering: sectors must be bounded");
    }
    const int m = static_cast<int>(sectors.size());
    if (m < 2) {
        rep.violations.push_back("fewer than two sectors");
        return rep;
    }
    std::vector<Arc> arcs;
    arcs.reserve(m);
    for (const Sector& s : sectors) arcs.push_back(sector_arc(s));

    // Consecutive overlaps (cyclic) must be nonempty.
    for (int i = 0; i < m; ++i) {
        const int j = (i + 1) % m;
        if (arc_intersection(arcs[i], arcs[j]).empty()) {
            std::ostringstream os;
            os << "sectors " << i << " and " << j << " (consecutive) do not overlap";
            rep.violations.push_back(os.str());
            rep.witnesses.push_back(wrap_angle(arcs[i].start + arcs[i].len));
        }
    }

    // Every triple intersection of distinct members must be empty.
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const auto ij = arc_intersection(arcs[i], arcs[j]);
            if (ij.empty()) continue;
            for (int l = j + 1; l < m; ++l)
                for (const Arc& c : ij) {
                    const auto ijl = arc_intersection(c, arcs[l]);
                    if (!ijl.empty()) {
                        std::ostringstream os;
                        os << "sectors " << i << ", " << j << ", " << l << " intersect jointly";
                        rep.violations.push_back(os.str());
                        rep.witnesses.push_back(
                            wrap_angle(ijl.front().start + 0.5 * ijl.front().len));
                    }
                }
        }

    // The arcs must jointly cover every direction. Coverage is piecewise
    // constant between endpoints, so endpoints and gap midpoints decide it.
    std::vector<double> events;
    for (const Arc& a : arcs) {
        events.push_back(a.start);
        events.push_back(wrap_angle(a.start + a.len));
    }
    std::sort(events.begin(), events.end());
    auto covered = [&arcs](double theta, double tol) {
        for (const Arc& a : arcs)
            if (arc_covers(a, theta, tol)) return true;
        return false;
    };
    const std::size_t ne = events.size();
    for (std::size_t i = 0; i < ne; ++i) {
        const double e0 = events[i];
        const double e1 = (i + 1 < ne) ? events[i + 1] : events[0] + 2.0 * pi;
        // endpoint itself (isolated uncovered points)
        if (!covered(e0, kAngleTol)) {
            rep.violations.push_back("direction not covered (sector endpoint)");
            rep.witnesses.push_back(e0);
        }
        // midpoint of the interval up to the next endpoint
        if (e1 - e0 > 4.0 * kAngleTol) {
            const double mid = wrap_angle(0.5 * (e0 + e1));
            if (!covered(mid, kAngleTol)) {
                rep.violations.push_back("direction not covered (gap)");
                rep.witnesses.push_back(mid);
            }
        }
    }

    rep.pass = rep.violations.empty();
    return rep;
}

GoodCovering GoodCovering::make(std::vector<Sector> sectors, double punctured_disc_radius) {
    CoveringReport rep = is_good_covering(sectors);
    if (!(punctured_disc_radius > 0.0))
        rep.violations.push_back("punctured_disc_radius must be positive");
    for (const Sector& s : sectors)
        if (s.radius < punctured_disc_radius) {
            rep.violations.push_back(
                "sector radius below punctured_disc_radius (union is not a punctured "
                "neighborhood of 0)");
            break;
        }
    if (!rep.violations.empty()) {
        std::ostringstream os;
        os << "not a good covering:";
        for (const auto& v : rep.violations) os << " [" << v << "]";
        throw std::invalid_argument(os.str());
    }
    GoodCovering g;
    g.sectors = std::move(sectors);
    g.punctured_disc_radius = punctured_disc_radius;
    return g;
}

std::vector<cplx> roots_of_borel_symbol(const Poly& P, int k) {
    if (k < 1) throw std::invalid_argument("roots_of_borel_symbol: k < 1");
    const int deg = P.degree();
    if (deg < 1) throw std::invalid_argument("roots_of_borel_symbol: deg P < 1");
    if (std::abs(P.c[0]) == 0.0)
        throw std::invalid_argument("roots_of_borel_symbol: P(0) = 0 violates the hypotheses");

    // Companion matrix of the monic normalization of P.
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -P.c[i] / P.c[deg];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("roots_of_borel_symbol: eigensolver failed");

    std::vector<cplx> taus;
    taus.reserve(deg);
    for (int i = 0; i < deg; ++i) {
        cplx t = es.eigenvalues()(i);
        const cplx dp = P.deriv_eval(t);  // one Newton polish
        if (std::abs(dp) > 0.0) {
            const cplx step = P.eval(t) / dp;
            if (std::abs(step) < 0.5 * (1.0 + std::abs(t))) t -= step;
        }
        taus.push_back(t);
    }

    std::vector<cplx> roots;
    roots.reserve(static_cast<std::size_t>(k) * deg);
    for (const cplx& tau : taus) {
        const cplx w = tau / static_cast<double>(k);
        const double rho = std::pow(std::abs(w), 1.0 / k);
        const double base = std::arg(w) / k;
        for (int j = 0; j < k; ++j)
            roots.push_back(std::polar(rho, base + 2.0 * pi * j / k));
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
        const double aa = wrap_angle(std::arg(a)), ab = wrap_angle(std::arg(b));
        if (std::abs(aa - ab) > 1e-14) return aa < ab;
        return std::abs(a) < std::abs(b);
    });
    return roots;
}

std::optional<DirectionChoice> try_choose_direction(const Sector& U, int k, double phase,
                                                    double inset) {
    U.validate();
    if (k < 1) throw std::invalid_argument("try_choose_direction: k < 1");
    if (inset < 0.0) throw std::invalid_argument("try_choose_direction: negative inset");
    const double lo = U.direction - U.half_opening + inset;
    const double hi = U.direction + U.half_opening - inset;
    if (!(lo <= hi)) return std::nullopt;

    // Shift phase by whole turns so the candidate critical points are
    // enumerated near the arc.
    std::vector<double> cand{lo, hi};
    const double period = 2.0 * pi / k;
    const long j_lo = static_cast<long>(std::ceil((lo - phase) / period - 1e-12));
    const long j_hi = static_cast<long>(std::floor((hi - phase) / period + 1e-12));
    for (long j = j_lo; j <= j_hi; ++j) cand.push_back(phase + j * period);

    std::sort(cand.begin(), cand.end());
    DirectionChoice best{0.0, -2.0};
    for (double g : cand) {
        if (g < lo - 1e-15 || g > hi + 1e-15) continue;
        const double m = std::cos(k * (g - phase));
        if (m > best.margin + 1e-12) best = {g, m};  // ties keep the smaller gamma
    }
    if (best.margin <= -1.5) return std::nullopt;
    return best;
}

DirectionChoice choose_direction(const Sector& U, int k, double phase, double inset,
                                 double min_margin) {
    const auto c = try_choose_direction(U, k, phase, inset);
    if (!c || !(c->margin > min_margin)) {
        std::ostringstream os;
        os << "no Laplace direction with positive margin in sector at "
           << rad2deg(U.direction) << " deg for phase " << rad2deg(phase) << " deg";
        throw DirectionError(os.str(), phase);
    }
    return *c;
}

AdmissibleConfig build_admissible(const GoodCovering& covering, const Sector& companion,
                                  const std::vector<Sector>& borel, const Poly& P, int k,
                                  const std::vector<std::vector<double>>& probe_phases,
                                  double inset) {
    companion.validate();
    if (!companion.bounded())
        throw std::invalid_argument("build_admissible: companion sector must be bounded");
    if (borel.size() != covering.sectors.size())
        throw std::invalid_argument("build_admissible: need one Borel sector per covering sector");
    if (probe_phases.size() != borel.size())
        throw std::invalid_argument("build_admissible: need one probe-phase list per sector");
    for (const Sector& u : borel) {
        u.validate();
        if (u.bounded())
            throw std::invalid_argument("build_admissible: Borel sectors must be unbounded");
    }

    AdmissibleConfig cfg;
    cfg.covering = covering;
    cfg.companion = companion;
    cfg.borel = borel;
    cfg.k = k;
    cfg.inset = inset;
    cfg.probe_phases = probe_phases;
    cfg.symbol_roots = roots_of_borel_symbol(P, k);

    cfg.root_clearance = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < borel.size(); ++p) {
        for (const cplx& r : cfg.symbol_roots) {
            const double clearance = angular_distance(std::arg(r), borel[p].direction) -
                                     borel[p].half_opening;
            if (clearance <= 0.0) {
                std::ostringstream os;
                os << "build_admissible: symbol root at arg " << rad2deg(std::arg(r))
                   << " deg lies inside Borel sector " << p;
                throw std::invalid_argument(os.str());
            }
            cfg.root_clearance = std::min(cfg.root_clearance, clearance);
        }
    }

    for (std::size_t p = 0; p < borel.size(); ++p) {
        double worst = 1.0;
        for (double phase : probe_phases[p]) {
            const DirectionChoice c = choose_direction(borel[p], k, phase, inset, 0.0);
            worst = std::min(worst, c.margin);
        }
        if (probe_phases[p].empty())
            throw std::invalid_argument("build_admissible: empty probe-phase list");
        cfg.margins.push_back(worst);
    }
    return cfg;
}

}  // namespace qg
