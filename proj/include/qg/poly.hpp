#pragma once

#include "qg/common.hpp"

namespace qg {

// Polynomial with complex coefficients in ascending order: c[0] + c[1] x + ...
struct Poly {
    std::vector<cplx> c;

    Poly() = default;
    explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {}
    Poly(std::initializer_list<cplx> coeffs) : c(coeffs) {}

    int degree() const {
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
            if (c[i] != cplx{0.0, 0.0}) return i;
        return -1;  // zero polynomial
    }

    cplx eval(cplx x) const {
        cplx acc{0.0, 0.0};
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * x + c[i];
        return acc;
    }

    cplx deriv_eval(cplx x) const {
        cplx acc{0.0, 0.0};
        for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i)
            acc = acc * x + static_cast<double>(i) * c[i];
        return acc;
    }

    // Magnitude scale sum_i |c_i| |x|^i, used for small-divisor floors.
    double scale_at(double ax) const {
        double acc = 0.0;
        double p = 1.0;
        for (const cplx& ci : c) {
            acc += std::abs(ci) * p;
            p *= ax;
        }
        return acc;
    }

    bool is_zero() const { return degree() < 0; }
};

}  // namespace qg
