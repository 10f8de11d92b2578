#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace semilab {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// Thrown when a caller violates a documented precondition.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Aggregates every violated hypothesis found while checking an experiment
// description, so the caller sees the full list at once.
struct ValidationError : std::runtime_error {
    std::vector<std::string> items;
    explicit ValidationError(std::vector<std::string> v)
        : std::runtime_error(join(v)), items(std::move(v)) {}
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "experiment validation failed:";
        for (const auto& it : v) s += "\n  - " + it;
        return s;
    }
};

// Numerical guard rail tripped during a run (mass drift, boundary contamination).
struct GuardError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sq(double x) { return x * x; }

inline double norm2(std::span<const double> v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Small deterministic generator for property tests and derivative checks.
// splitmix64; quality is plenty for sampling test points.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [a, b)
    double uniform(double a, double b) {
        return a + (b - a) * (next() >> 11) * 0x1.0p-53;
    }
};

}  // namespace semilab
