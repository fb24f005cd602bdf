#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qg {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / pi; }

// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double a) {
    double w = std::fmod(a, 2.0 * pi);
    if (w < 0.0) w += 2.0 * pi;
    return w;
}

// Raised when a quadrature or recursion point lands too close to a root of
// the Borel symbol P(k u^k).
struct SmallDivisorError : std::runtime_error {
    cplx point;
    SmallDivisorError(const std::string& msg, cplx u)
        : std::runtime_error(msg), point(u) {}
};

// Raised when an integrand is needed beyond the sampled range of a ray.
struct RayRangeError : std::out_of_range {
    double needed_radius;
    RayRangeError(const std::string& msg, double r)
        : std::out_of_range(msg), needed_radius(r) {}
};

// Raised when no Laplace direction with a positive cosine margin exists.
struct DirectionError : std::runtime_error {
    double phase;
    DirectionError(const std::string& msg, double ph)
        : std::runtime_error(msg), phase(ph) {}
};

// FNV-1a 64-bit hash, used to stamp reports with config provenance.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hash_hex(std::uint64_t h);

// Fixed 15-significant-digit formatting used by every CSV/JSON emitter.
std::string fmt_g15(double x);

}  // namespace qg
