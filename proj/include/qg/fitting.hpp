#pragma once

#include <cstdint>
#include <utility>

#include "qg/common.hpp"

namespace qg {

// Smallest-total-slack line a + b*x lying on or above every point (one-sided
// L1 domination). The exact LP optimum passes through two support points;
// found by pair enumeration. When the optimum exceeds the caps, the capped
// line is reported with its (positive) violation.
struct DominationFit {
    double intercept = 0.0;
    double slope = 0.0;
    double total_slack = 0.0;
    double violation = 0.0;  // max (y - line); <= 0 whenever caps don't bind
    bool capped = false;
};
DominationFit fit_domination_line(const std::vector<std::pair<double, double>>& pts,
                                  double intercept_cap, double slope_cap);

// Model y = A exp(-B / x^k): linear least squares of log y on (1, x^{-k}).
struct FlatnessFit {
    double A = 0.0;
    double B = 0.0;
    double r2 = 0.0;
    double k = 0.0;         // exponent used (fitted in the free-k variant)
    bool flat = false;      // B > 0, r2 >= 0.99, and >= 2 e-foldings of decay
    double x_min = 0.0, x_max = 0.0;
    int n_samples = 0;
};
FlatnessFit fit_exponential_flatness(const std::vector<std::pair<double, double>>& xy,
                                     double k);
// 1-D search over k (coarse log grid plus refinement) minimizing the residual.
FlatnessFit fit_exponential_flatness_free_k(const std::vector<std::pair<double, double>>& xy,
                                            double k_lo = 0.25, double k_hi = 4.0);

// One truncated-remainder (or coefficient-norm) sample: magnitude y observed
// at order N and scale x (|eps| or |t|).
struct MixedBoundSample {
    int N = 1;
    double x = 0.0;
    double y = 0.0;
};

// Feasibility fit of y <= A * B^N * Gamma(N/k) * q^(N^2/2) * x^N over all
// samples, by domination fit on the log form. q = 1 turns the same machinery
// into the plain Gevrey-shaped bound.
struct MixedBoundFit {
    double A = 0.0;
    double B = 0.0;
    double violation = 0.0;
    double total_slack = 0.0;
    bool pass = false;
    bool degenerate_zero = false;  // all magnitudes at (numerical) zero
};
MixedBoundFit check_mixed_bound(const std::vector<MixedBoundSample>& samples, int k, double q,
                                double log_a_cap = 18.42,   // log 1e8
                                double log_b_cap = 9.21);   // log 1e4

// Growth classifier for |a_n|: least squares of log|a_n| against
//   model G: c0 + c1 n + s log n!
//   model M: c0 + c1 n + s log n! + (n^2/2) log qhat.
// The models are nested, so the mixed verdict requires M to beat G by the
// residual margin; the G-side verdict is "convergent" when |s| < 0.1.
struct GrowthClassification {
    enum class Verdict { convergent, gevrey, mixed, ambiguous } verdict =
        Verdict::ambiguous;
    double s = 0.0;
    double s_err = 0.0;       // bootstrap standard error
    double qhat = 0.0;        // only meaningful for the mixed verdict
    double qhat_err = 0.0;
    double resid_g = 0.0;     // rms log-residuals of the two models
    double resid_m = 0.0;
    int n_used = 0;
    std::string detail;
};
GrowthClassification classify_growth(const std::vector<double>& magnitudes,
                                     double margin = 10.0, std::uint64_t seed = 12345,
                                     int bootstrap = 200);

}  // namespace qg
