#pragma once

#include <array>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semilab/common.hpp"

namespace semilab {

// Uniform periodic grid on the box [-L1, L1) x ... with N points per axis.
//
// Conventions used throughout:
//   grid points    x_j   = -L + j * (2L/N)
//   freq lattice   xi_k  = pi*k/L,  k = -N/2 .. N/2-1   (per axis)
//   forward        F(xi) ~ int f(x) e^{-i xi.x} dx      (cell-volume weighted)
//   inverse        f(x)  = (2pi)^-d sum F(xi) e^{+i xi.x} dxi^d
// so Parseval reads |f|_L2^2 = (2pi)^-d sum |F|^2 dxi^d.
struct Grid {
    int dim = 1;
    std::array<int, 2> n{8, 1};
    std::array<double, 2> half_len{1.0, 1.0};

    static Grid make(const std::vector<int>& n, const std::vector<double>& half_len);

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n[a]);
        return s;
    }
    double dx(int axis) const { return 2.0 * half_len[axis] / n[axis]; }
    double cell_volume() const {
        double v = 1;
        for (int a = 0; a < dim; ++a) v *= dx(a);
        return v;
    }
    double dxi(int axis) const { return pi / half_len[axis]; }
    double point(int axis, int j) const { return -half_len[axis] + j * dx(axis); }
    // natural (FFT) index -> signed lattice index
    int signed_index(int axis, int k_nat) const {
        return k_nat < n[axis] / 2 ? k_nat : k_nat - n[axis];
    }
    double freq(int axis, int k_nat) const {
        return dxi(axis) * signed_index(axis, k_nat);
    }
    double nyquist(int axis) const { return pi * n[axis] / (2.0 * half_len[axis]); }

    void decode(std::size_t idx, int* j) const {
        if (dim == 1) {
            j[0] = static_cast<int>(idx);
        } else {
            j[0] = static_cast<int>(idx) / n[1];
            j[1] = static_cast<int>(idx) % n[1];
        }
    }

    bool operator==(const Grid& o) const {
        if (dim != o.dim) return false;
        for (int a = 0; a < dim; ++a)
            if (n[a] != o.n[a] || half_len[a] != o.half_len[a]) return false;
        return true;
    }
};

// Complex scalar field sampled on a grid, row-major over axes.
struct Field {
    Grid grid;
    std::vector<cplx> v;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), v(g.size()) {}
    Field(const Grid& g, std::vector<cplx> values);

    std::size_t size() const { return v.size(); }
    void check_finite(const char* where) const;
};

// Fourier-side view of a field. Coefficients are stored in FFT natural order
// but hold the true lattice values F(xi_k) of the convention above.
struct FreqField {
    Grid grid;
    std::vector<cplx> c;
};

FreqField to_frequency(const Field& f);
Field to_physical(const FreqField& F);

// Applies the Fourier multiplier m(xi) (exact, band-limited action).
Field apply_multiplier(const Field& f, const std::function<cplx(std::span<const double>)>& m);
// Fast path for a precomputed table in natural order.
Field apply_multiplier_table(const Field& f, std::span<const cplx> table);
// Evaluates a multiplier on the lattice; throws naming the offending xi on NaN.
std::vector<cplx> multiplier_table(const Grid& g,
                                   const std::function<cplx(std::span<const double>)>& m);

// Band-limited evaluation of f at grid points translated by +shift.
Field fourier_interpolate(const Field& f, std::span<const double> shift);

enum class CutoffShape { Sharp, Smooth };
// Zeroes (Sharp) or damps by chi(|xi|/K) (Smooth) all lattice modes beyond K.
Field low_pass(const Field& f, double K, CutoffShape shape = CutoffShape::Sharp);

double l2_norm(const Field& f);
// Conjugate-linear in the second argument.
cplx inner(const Field& f, const Field& g);
Field add(const Field& f, const Field& g);
Field scale(const Field& f, cplx c);
Field multiply_by_function(const Field& f, const std::function<double(std::span<const double>)>& fn);
Field multiply_pointwise(const Field& f, std::span<const cplx> w);

// L2 mass restricted to a region given by a point predicate.
double region_mass(const Field& f, const std::function<bool(std::span<const double>)>& inside);

// Flat binary serialization: u64 d, u64 N per axis, f64 L per axis, then
// interleaved re/im f64, all little-endian, row-major.
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);

// Raw unnormalized DFT used by grid ops and the Wigner transform.
// sign = -1 forward, +1 backward. Thread-safe; plans are cached.
void dft(const Grid& g, const cplx* in, cplx* out, int sign);
void dft_1d(int n, const cplx* in, cplx* out, int sign);

}  // namespace semilab
