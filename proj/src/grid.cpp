#include "semilab/grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semilab/cutoff.hpp"

namespace semilab {

Grid Grid::make(const std::vector<int>& n, const std::vector<double>& half_len) {
    if (n.empty() || n.size() > 2 || n.size() != half_len.size())
        throw ContractError("Grid: dimension must be 1 or 2 with matching N and L lists");
    Grid g;
    g.dim = static_cast<int>(n.size());
    for (int a = 0; a < g.dim; ++a) {
        if (n[a] < 8 || !std::has_single_bit(static_cast<unsigned>(n[a])))
            throw ContractError("Grid: N must be a power of two >= 8");
        if (!(half_len[a] > 0)) throw ContractError("Grid: L must be positive");
        g.n[a] = n[a];
        g.half_len[a] = half_len[a];
    }
    return g;
}

Field::Field(const Grid& g, std::vector<cplx> values) : grid(g), v(std::move(values)) {
    if (v.size() != g.size()) throw ContractError("Field: value count does not match grid");
}

void Field::check_finite(const char* where) const {
    for (const cplx& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw ContractError(std::string(where) + ": field has non-finite entries");
}

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* op) {
    if (!(a == b)) throw ContractError(std::string(op) + ": grid mismatch");
}

// (-1)^(sum of signed lattice indices); relates the DFT exponent
// e^{-2pi i jk/N} to e^{-i xi_k x_j} on the centered box.
double centering_sign(const Grid& g, std::size_t idx) {
    int j[2] = {0, 0};
    g.decode(idx, j);
    int s = 0;
    for (int a = 0; a < g.dim; ++a) s += g.signed_index(a, j[a]);
    return (s & 1) ? -1.0 : 1.0;
}

}  // namespace

FreqField to_frequency(const Field& f) {
    FreqField F{f.grid, std::vector<cplx>(f.size())};
    dft(f.grid, f.v.data(), F.c.data(), -1);
    const double w = f.grid.cell_volume();
    for (std::size_t i = 0; i < F.c.size(); ++i) F.c[i] *= w * centering_sign(f.grid, i);
    return F;
}

Field to_physical(const FreqField& F) {
    Field f(F.grid);
    std::vector<cplx> tmp(F.c.size());
    double w = 1.0;
    for (int a = 0; a < F.grid.dim; ++a) w *= F.grid.dxi(a) / (2.0 * pi);
    for (std::size_t i = 0; i < tmp.size(); ++i) tmp[i] = F.c[i] * centering_sign(F.grid, i);
    dft(F.grid, tmp.data(), f.v.data(), +1);
    for (cplx& z : f.v) z *= w;
    return f;
}

std::vector<cplx> multiplier_table(const Grid& g,
                                   const std::function<cplx(std::span<const double>)>& m) {
    std::vector<cplx> table(g.size());
    double xi[2];
    int k[2];
    for (std::size_t i = 0; i < table.size(); ++i) {
        g.decode(i, k);
        for (int a = 0; a < g.dim; ++a) xi[a] = g.freq(a, k[a]);
        cplx val = m(std::span<const double>(xi, g.dim));
        if (!std::isfinite(val.real()) || !std::isfinite(val.imag())) {
            char buf[128];
            if (g.dim == 1)
                std::snprintf(buf, sizeof buf, "multiplier is not finite at xi = %.17g", xi[0]);
            else
                std::snprintf(buf, sizeof buf, "multiplier is not finite at xi = (%.17g, %.17g)",
                              xi[0], xi[1]);
            throw ContractError(buf);
        }
        table[i] = val;
    }
    return table;
}

Field apply_multiplier_table(const Field& f, std::span<const cplx> table) {
    if (table.size() != f.size()) throw ContractError("apply_multiplier: table size mismatch");
    Field out(f.grid);
    std::vector<cplx> hat(f.size());
    dft(f.grid, f.v.data(), hat.data(), -1);
    for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= table[i];
    dft(f.grid, hat.data(), out.v.data(), +1);
    const double inv = 1.0 / static_cast<double>(f.size());
    for (cplx& z : out.v) z *= inv;
    return out;
}

Field apply_multiplier(const Field& f, const std::function<cplx(std::span<const double>)>& m) {
    return apply_multiplier_table(f, multiplier_table(f.grid, m));
}

Field fourier_interpolate(const Field& f, std::span<const double> shift) {
    if (static_cast<int>(shift.size()) != f.grid.dim)
        throw ContractError("fourier_interpolate: shift dimension mismatch");
    const Grid& g = f.grid;
    std::array<double, 2> s{0, 0};
    for (int a = 0; a < g.dim; ++a) s[a] = shift[a];
    return apply_multiplier(f, [&](std::span<const double> xi) {
        double phase = 0;
        for (std::size_t a = 0; a < xi.size(); ++a) phase += xi[a] * s[a];
        return std::polar(1.0, phase);
    });
}

Field low_pass(const Field& f, double K, CutoffShape shape) {
    if (!(K > 0)) throw ContractError("low_pass: K must be positive");
    return apply_multiplier(f, [&](std::span<const double> xi) -> cplx {
        double r = norm2(xi);
        if (shape == CutoffShape::Sharp) return r > K ? 0.0 : 1.0;
        return chi_radial(r / K);
    });
}

double l2_norm(const Field& f) {
    double s = 0;
    for (const cplx& z : f.v) s += std::norm(z);
    return std::sqrt(s * f.grid.cell_volume());
}

cplx inner(const Field& f, const Field& g) {
    require_same_grid(f.grid, g.grid, "inner");
    cplx s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.v[i] * std::conj(g.v[i]);
    return s * f.grid.cell_volume();
}

Field add(const Field& f, const Field& g) {
    require_same_grid(f.grid, g.grid, "add");
    Field out = f;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += g.v[i];
    return out;
}

Field scale(const Field& f, cplx c) {
    Field out = f;
    for (cplx& z : out.v) z *= c;
    return out;
}

Field multiply_by_function(const Field& f,
                           const std::function<double(std::span<const double>)>& fn) {
    Field out = f;
    double x[2];
    int j[2];
    for (std::size_t i = 0; i < out.size(); ++i) {
        f.grid.decode(i, j);
        for (int a = 0; a < f.grid.dim; ++a) x[a] = f.grid.point(a, j[a]);
        out.v[i] *= fn(std::span<const double>(x, f.grid.dim));
    }
    return out;
}

Field multiply_pointwise(const Field& f, std::span<const cplx> w) {
    if (w.size() != f.size()) throw ContractError("multiply_pointwise: size mismatch");
    Field out = f;
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= w[i];
    return out;
}

double region_mass(const Field& f, const std::function<bool(std::span<const double>)>& inside) {
    double s = 0;
    double x[2];
    int j[2];
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.grid.decode(i, j);
        for (int a = 0; a < f.grid.dim; ++a) x[a] = f.grid.point(a, j[a]);
        if (inside(std::span<const double>(x, f.grid.dim))) s += std::norm(f.v[i]);
    }
    return s * f.grid.cell_volume();
}

namespace {

void put_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}
void put_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}

}  // namespace

void write_field(const std::string& path, const Field& f) {
    static_assert(std::endian::native == std::endian::little,
                  "field serialization assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("write_field: cannot open " + path);
    put_u64(os, static_cast<std::uint64_t>(f.grid.dim));
    for (int a = 0; a < f.grid.dim; ++a) put_u64(os, static_cast<std::uint64_t>(f.grid.n[a]));
    for (int a = 0; a < f.grid.dim; ++a) put_f64(os, f.grid.half_len[a]);
    for (const cplx& z : f.v) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
    }
}

Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("read_field: cannot open " + path);
    auto get_u64 = [&] {
        std::uint64_t v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto get_f64 = [&] {
        double v;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    int d = static_cast<int>(get_u64());
    std::vector<int> n(d);
    std::vector<double> L(d);
    for (int a = 0; a < d; ++a) n[a] = static_cast<int>(get_u64());
    for (int a = 0; a < d; ++a) L[a] = get_f64();
    Field f(Grid::make(n, L));
    for (cplx& z : f.v) {
        double re = get_f64();
        double im = get_f64();
        z = {re, im};
    }
    if (!is) throw ContractError("read_field: truncated file " + path);
    return f;
}

}  // namespace semilab
