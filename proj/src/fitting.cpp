#include "qg/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace qg {

DominationFit fit_domination_line(const std::vector<std::pair<double, double>>& pts,
                                  double intercept_cap, double slope_cap) {
    if (pts.empty()) throw std::domain_error("fit_domination_line: no samples");

    // Only the per-x maximum can be active.
    std::map<double, double> top;
    double y_scale = 0.0;
    for (const auto& [x, y] : pts) {
        auto it = top.find(x);
        if (it == top.end())
            top[x] = y;
        else
            it->second = std::max(it->second, y);
        y_scale = std::max(y_scale, std::abs(y));
    }
    const double feas_tol = 1e-12 * (1.0 + y_scale);
    std::vector<std::pair<double, double>> red(top.begin(), top.end());

    auto slack_of = [&](double a, double b) {
        double s = 0.0;
        for (const auto& [x, y] : pts) s += a + b * x - y;
        return s;
    };

    double best_a = 0.0, best_b = 0.0, best_slack = 0.0;
    if (red.size() == 1) {
        best_a = red[0].second - 0.0 * red[0].first;
        best_b = 0.0;
        best_slack = slack_of(best_a, best_b);
    } else {
        bool found = false;
        for (std::size_t i = 0; i < red.size(); ++i)
            for (std::size_t j = i + 1; j < red.size(); ++j) {
                double b = (red[j].second - red[i].second) / (red[j].first - red[i].first);
                double a = red[i].second - b * red[i].first;
                bool ok = true;
                for (const auto& [x, y] : red)
                    if (y > a + b * x + feas_tol) {
                        ok = false;
                        break;
                    }
                if (!ok) continue;
                double s = slack_of(a, b);
                if (!found || s < best_slack) {
                    found = true;
                    best_a = a;
                    best_b = b;
                    best_slack = s;
                }
            }
        if (!found) {  // collinear-degenerate fallback: flat line through the max
            for (const auto& [x, y] : red) best_a = std::max(best_a, y);
            best_b = 0.0;
            best_slack = slack_of(best_a, best_b);
        }
    }

    DominationFit fit;
    fit.capped = best_a > intercept_cap || best_b > slope_cap;
    if (fit.capped) {
        double b = std::min(best_b, slope_cap);
        double a_needed = -std::numeric_limits<double>::infinity();
        for (const auto& [x, y] : red) a_needed = std::max(a_needed, y - b * x);
        double a = std::min(a_needed, intercept_cap);
        fit.intercept = a;
        fit.slope = b;
    } else {
        fit.intercept = best_a;
        fit.slope = best_b;
    }
    fit.total_slack = slack_of(fit.intercept, fit.slope);
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : red) v = std::max(v, y - fit.intercept - fit.slope * x);
    fit.violation = v;
    return fit;
}

namespace {

struct LinFit {
    double a = 0.0, b = 0.0, sse = 0.0, sst = 0.0;
};

// Least squares of y on (1, t).
LinFit lsq2(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < n; ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    double det = n * stt - st * st;
    LinFit f;
    if (std::abs(det) < 1e-300) {
        f.a = sy / n;
        f.b = 0.0;
    } else {
        f.b = (n * sty - st * sy) / det;
        f.a = (sy - f.b * st) / n;
    }
    double ym = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - f.a - f.b * t[i];
        f.sse += r * r;
        f.sst += (y[i] - ym) * (y[i] - ym);
    }
    return f;
}

FlatnessFit flatness_from(const std::vector<std::pair<double, double>>& xy, double k,
                          const LinFit& f) {
    FlatnessFit out;
    out.k = k;
    out.A = std::exp(f.a);
    out.B = -f.b;
    out.r2 = (f.sst < 1e-28) ? (f.sse < 1e-28 ? 1.0 : 0.0) : 1.0 - f.sse / f.sst;
    out.n_samples = static_cast<int>(xy.size());
    out.x_min = xy.front().first;
    out.x_max = xy.front().first;
    for (const auto& [x, y] : xy) {
        out.x_min = std::min(out.x_min, x);
        out.x_max = std::max(out.x_max, x);
    }
    // Flat means the exponential factor genuinely decays across the range.
    double efolds = out.B * (std::pow(out.x_min, -k) - std::pow(out.x_max, -k));
    out.flat = out.B > 0.0 && out.r2 >= 0.99 && efolds >= 2.0;
    return out;
}

std::pair<std::vector<double>, std::vector<double>> flatness_design(
    const std::vector<std::pair<double, double>>& xy, double k) {
    std::vector<double> t, y;
    t.reserve(xy.size());
    y.reserve(xy.size());
    for (const auto& [x, v] : xy) {
        t.push_back(std::pow(x, -k));
        y.push_back(std::log(v));
    }
    return {std::move(t), std::move(y)};
}

void validate_flatness_input(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 4)
        throw std::invalid_argument("fit_exponential_flatness: need at least 4 samples");
    for (const auto& [x, y] : xy) {
        if (!(x > 0.0))
            throw std::domain_error("fit_exponential_flatness: sample scale x must be > 0");
        if (!(y > 0.0))
            throw std::domain_error("fit_exponential_flatness: magnitudes must be > 0");
    }
}

}  // namespace

FlatnessFit fit_exponential_flatness(const std::vector<std::pair<double, double>>& xy,
                                     double k) {
    validate_flatness_input(xy);
    auto [t, y] = flatness_design(xy, k);
    return flatness_from(xy, k, lsq2(t, y));
}

FlatnessFit fit_exponential_flatness_free_k(const std::vector<std::pair<double, double>>& xy,
                                            double k_lo, double k_hi) {
    validate_flatness_input(xy);
    if (!(k_lo > 0.0) || !(k_hi > k_lo))
        throw std::invalid_argument("fit_exponential_flatness_free_k: bad k range");
    auto sse_at = [&](double k) {
        auto [t, y] = flatness_design(xy, k);
        return lsq2(t, y).sse;
    };
    double lo = std::log(k_lo), hi = std::log(k_hi);
    double best_k = k_lo, best_sse = std::numeric_limits<double>::infinity();
    for (int round = 0; round < 3; ++round) {
        const int m = 96;
        int best_i = 0;
        for (int i = 0; i <= m; ++i) {
            double k = std::exp(lo + (hi - lo) * i / m);
            double s = sse_at(k);
            if (s < best_sse) {
                best_sse = s;
                best_k = k;
                best_i = i;
            }
        }
        double cell = (hi - lo) / m;
        double c = std::log(best_k);
        lo = std::max(std::log(k_lo), c - cell);
        hi = std::min(std::log(k_hi), c + cell);
        (void)best_i;
    }
    auto [t, y] = flatness_design(xy, best_k);
    return flatness_from(xy, best_k, lsq2(t, y));
}

MixedBoundFit check_mixed_bound(const std::vector<MixedBoundSample>& samples, int k, double q,
                                double log_a_cap, double log_b_cap) {
    if (k < 1) throw std::invalid_argument("check_mixed_bound: k must be >= 1");
    if (!(q >= 1.0)) throw std::invalid_argument("check_mixed_bound: q must be >= 1");
    std::vector<std::pair<double, double>> pts;
    std::map<int, bool> n_seen;
    std::map<double, bool> x_seen;
    for (const MixedBoundSample& s : samples) {
        if (s.N < 1)
            throw std::invalid_argument("check_mixed_bound: N must be >= 1 (Gamma(N/k))");
        if (!(s.x > 0.0)) throw std::domain_error("check_mixed_bound: scale x must be > 0");
        n_seen[s.N] = true;
        x_seen[s.x] = true;
        if (!(s.y > 1e-280)) continue;  // zero magnitudes satisfy any bound
        double Y = std::log(s.y) - std::lgamma(static_cast<double>(s.N) / k) -
                   0.5 * s.N * s.N * std::log(q) - s.N * std::log(s.x);
        pts.emplace_back(static_cast<double>(s.N), Y);
    }
    if (n_seen.size() < 3 || x_seen.size() < 4)
        throw std::invalid_argument(
            "check_mixed_bound: need samples spanning >= 3 orders N and >= 4 scales x");

    MixedBoundFit out;
    if (pts.empty()) {
        out.degenerate_zero = true;
        out.pass = true;
        return out;
    }
    DominationFit fit = fit_domination_line(pts, log_a_cap, log_b_cap);
    out.A = std::exp(fit.intercept);
    out.B = std::exp(fit.slope);
    out.violation = fit.violation;
    out.total_slack = fit.total_slack;
    out.pass = fit.violation <= 1e-9;
    return out;
}

namespace {

struct ModelFit {
    Eigen::VectorXd coef;
    double rms = 0.0;
};

ModelFit fit_model(const std::vector<double>& ns, const std::vector<double>& ys,
                   bool mixed) {
    const int m = static_cast<int>(ns.size());
    const int cols = mixed ? 4 : 3;
    Eigen::MatrixXd X(m, cols);
    Eigen::VectorXd Y(m);
    for (int i = 0; i < m; ++i) {
        double n = ns[i];
        X(i, 0) = 1.0;
        X(i, 1) = n;
        X(i, 2) = std::lgamma(n + 1.0);
        if (mixed) X(i, 3) = 0.5 * n * n;
        Y(i) = ys[i];
    }
    ModelFit f;
    f.coef = X.colPivHouseholderQr().solve(Y);
    double sse = (X * f.coef - Y).squaredNorm();
    f.rms = std::sqrt(sse / m);
    return f;
}

}  // namespace

GrowthClassification classify_growth(const std::vector<double>& magnitudes, double margin,
                                     std::uint64_t seed, int bootstrap) {
    std::vector<double> ns, ys;
    for (std::size_t n = 0; n < magnitudes.size(); ++n) {
        double m = magnitudes[n];
        if (!(m > 0.0) || !std::isfinite(m)) continue;  // zeros skipped, indices kept
        ns.push_back(static_cast<double>(n));
        ys.push_back(std::log(m));
    }
    if (ns.size() < 8)
        throw std::invalid_argument("classify_growth: fewer than 8 nonzero magnitudes");

    ModelFit g = fit_model(ns, ys, false);
    ModelFit mx = fit_model(ns, ys, true);

    GrowthClassification out;
    out.n_used = static_cast<int>(ns.size());
    out.resid_g = g.rms;
    out.resid_m = mx.rms;

    // The models are nested: require the mixed model to win by the margin AND
    // produce a genuine q > 1 before claiming mixed growth.
    bool mixed_wins = mx.rms * margin < g.rms && mx.coef(3) > 0.0;
    bool use_mixed = mixed_wins;
    const ModelFit& chosen = use_mixed ? mx : g;
    out.s = chosen.coef(2);
    if (use_mixed) out.qhat = std::exp(mx.coef(3));

    if (chosen.rms > 1.0) {
        out.verdict = GrowthClassification::Verdict::ambiguous;
    } else if (use_mixed) {
        out.verdict = GrowthClassification::Verdict::mixed;
    } else if (std::abs(out.s) < 0.1) {
        out.verdict = GrowthClassification::Verdict::convergent;
    } else {
        out.verdict = GrowthClassification::Verdict::gevrey;
    }

    // Bootstrap error bars by resampling sample indices.
    if (bootstrap > 0) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, ns.size() - 1);
        std::vector<double> s_draws, q_draws;
        for (int b = 0; b < bootstrap; ++b) {
            std::vector<double> bn, by;
            bn.reserve(ns.size());
            by.reserve(ns.size());
            for (std::size_t i = 0; i < ns.size(); ++i) {
                std::size_t j = pick(rng);
                bn.push_back(ns[j]);
                by.push_back(ys[j]);
            }
            ModelFit bf = fit_model(bn, by, use_mixed);
            if (!bf.coef.allFinite()) continue;
            s_draws.push_back(bf.coef(2));
            if (use_mixed) q_draws.push_back(std::exp(bf.coef(3)));
        }
        auto stddev = [](const std::vector<double>& v) {
            if (v.size() < 2) return 0.0;
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= v.size();
            double ss = 0.0;
            for (double x : v) ss += (x - mean) * (x - mean);
            return std::sqrt(ss / (v.size() - 1));
        };
        out.s_err = stddev(s_draws);
        out.qhat_err = stddev(q_draws);
    }

    std::ostringstream os;
    os << "rms(G)=" << g.rms << " rms(M)=" << mx.rms << " margin=" << margin
       << " log_qhat=" << mx.coef(3);
    out.detail = os.str();
    return out;
}

}  // namespace qg
