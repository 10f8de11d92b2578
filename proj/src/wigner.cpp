#include "semilab/wigner.hpp"

#include <cmath>

#include "semilab/cutoff.hpp"

namespace semilab {

TestFunction TestFunction::bump(int dim, double width, double amplitude) {
    return {ProfileSpec::Kind::Bump, dim, Eigen::VectorXd::Zero(dim), width, amplitude};
}
TestFunction TestFunction::bump_at(const Eigen::VectorXd& center, double width, double amplitude) {
    return {ProfileSpec::Kind::Bump, static_cast<int>(center.size()), center, width, amplitude};
}
TestFunction TestFunction::gaussian(int dim, double width, double amplitude) {
    return {ProfileSpec::Kind::Gaussian, dim, Eigen::VectorXd::Zero(dim), width, amplitude};
}

double TestFunction::eval(std::span<const double> x) const {
    double v = amplitude;
    for (int i = 0; i < dim; ++i) {
        double s = (x[i] - center[i]) / width;
        v *= kind == ProfileSpec::Kind::Bump ? envelope_kernel_bump(s) : envelope_kernel_gauss(s);
    }
    return v;
}

std::function<double(std::span<const double>)> TestFunction::fn() const {
    TestFunction t = *this;
    return [t](std::span<const double> x) { return t.eval(x); };
}

std::vector<double> WignerSlice::position_marginal() const {
    const int N = n();
    std::vector<double> out(N, 0.0);
    for (int j = 0; j < N; ++j) {
        double s = 0;
        for (int q = 0; q < N; ++q) s += value(j, q);
        out[j] = s * dxi();
    }
    return out;
}

std::vector<double> WignerSlice::momentum_marginal() const {
    const int N = n();
    std::vector<double> out(N, 0.0);
    for (int q = 0; q < N; ++q) {
        double s = 0;
        for (int j = 0; j < N; ++j) s += value(j, q);
        out[q] = s * xgrid.dx(0);
    }
    return out;
}

void WignerSlice::write(const std::string& path) const {
    Grid g2 = Grid::make({n(), n()}, {xgrid.half_len[0], xgrid.half_len[0] / eps});
    Field f(g2);
    for (std::size_t i = 0; i < w.size(); ++i) f.v[i] = w[i];
    write_field(path, f);
}

// W(x, xi) = (2pi)^-1 int f(x - eps v/2) conj f(x + eps v/2) e^{i xi v} dv
// discretized on v_m = m * 2L/(N eps) so that the xi output lattice is the
// eps-rescaled frequency lattice and both marginal identities hold exactly
// for band-limited periodic f.
WignerSlice wigner_transform(const Field& f, double eps) {
    if (f.grid.dim != 1) throw ContractError("wigner_transform: d = 1 only");
    if (!(eps > 0)) throw ContractError("wigner_transform: eps must be positive");
    const Grid& g = f.grid;
    const int N = g.n[0];
    const double L = g.half_len[0];
    const double dv = 2.0 * L / (N * eps);

    // G[j*N + m_nat] = f(x_j - eps v_m / 2) conj f(x_j + eps v_m / 2)
    std::vector<cplx> G(static_cast<std::size_t>(N) * N);
    double shift[1];
    for (int m_nat = 0; m_nat < N; ++m_nat) {
        const double v = dv * g.signed_index(0, m_nat);
        shift[0] = -0.5 * eps * v;
        Field fm = fourier_interpolate(f, shift);
        shift[0] = +0.5 * eps * v;
        Field fp = fourier_interpolate(f, shift);
        for (int j = 0; j < N; ++j)
            G[static_cast<std::size_t>(j) * N + m_nat] = fm.v[j] * std::conj(fp.v[j]);
    }

    WignerSlice slice;
    slice.xgrid = g;
    slice.eps = eps;
    slice.w.resize(G.size());
    const double scale = dv / (2.0 * pi);
    std::vector<cplx> row(N);
    for (int j = 0; j < N; ++j) {
        // sum_m G e^{+2pi i q m / N}: backward DFT in the separation variable
        dft_1d(N, G.data() + static_cast<std::size_t>(j) * N, row.data(), +1);
        for (int q = 0; q < N; ++q) {
            cplx val = row[q] * scale;
            slice.max_imag_residue = std::max(slice.max_imag_residue, std::abs(val.imag()));
            slice.w[static_cast<std::size_t>(j) * N + q] = val.real();
        }
    }
    return slice;
}

ManifoldSplit ManifoldSplit::point(const Eigen::VectorXd& xi0) {
    return {0, static_cast<int>(xi0.size()), xi0};
}
ManifoldSplit ManifoldSplit::manifold(int r, int p, const Eigen::VectorXd& xi0pp) {
    if (xi0pp.size() != p) throw ContractError("ManifoldSplit: xi0'' must lie in R^p");
    return {r, p, xi0pp};
}

ScalarFn scalar_one() { return {}; }

ScalarFn scalar_from(const TestFunction& t) {
    return {t.fn(), t.sup(), false};
}

EtaFn eta_one() { return {}; }

EtaFn eta_chi_over(double R) {
    EtaFn e;
    e.is_one = false;
    e.f = [R](std::span<const double> eta) { return chi_radial(norm2(eta) / R); };
    e.sup = 1.0;
    e.boundary = [](std::span<const double>) { return 0.0; };
    e.R0 = 2.0 * R;
    return e;
}

EtaFn eta_one_minus_chi_over(double R) {
    EtaFn e;
    e.is_one = false;
    e.f = [R](std::span<const double> eta) { return 1.0 - chi_radial(norm2(eta) / R); };
    e.sup = 1.0;
    e.boundary = [](std::span<const double>) { return 1.0; };
    e.R0 = 2.0 * R;
    return e;
}

TwoMicroSymbol symbol_position(const ManifoldSplit& split, int dim, const TestFunction& phi) {
    return symbol_product(split, dim, scalar_from(phi), scalar_one(), eta_one());
}

TwoMicroSymbol symbol_product(const ManifoldSplit& split, int dim, ScalarFn phi, ScalarFn psi,
                              EtaFn rho) {
    TwoMicroSymbol a;
    a.dim = dim;
    a.split = split;
    a.terms.push_back({std::move(phi), std::move(psi), std::move(rho)});
    return a;
}

double TwoMicroSymbol::sup_bound() const {
    double s = 0;
    for (const auto& t : terms) s += t.phi.sup * t.psi.sup * t.rho.sup;
    return s;
}

bool TwoMicroSymbol::eta_independent() const {
    for (const auto& t : terms)
        if (!t.rho.is_one) return false;
    return true;
}

double TwoMicroSymbol::eval(std::span<const double> x, std::span<const double> xi,
                            std::span<const double> eta) const {
    double s = 0;
    for (const auto& t : terms) {
        double v = 1.0;
        if (!t.phi.is_one) v *= t.phi.f(x);
        if (!t.psi.is_one) v *= t.psi.f(xi);
        if (!t.rho.is_one) v *= t.rho.f(eta);
        s += v;
    }
    return s;
}

TwoMicroSymbol apply_cutoffs(const TwoMicroSymbol& a, const CutoffParams& c, CutoffKind which) {
    if (!(c.R >= 1) || !(c.delta > 0))
        throw ContractError("apply_cutoffs: need R >= 1 and delta > 0");
    TwoMicroSymbol out = a;
    const int r = a.split.r;
    const Eigen::VectorXd xi0pp = a.split.xi0pp;
    const double delta = c.delta, R = c.R;
    for (auto& t : out.terms) {
        auto base_psi = t.psi;
        t.psi.is_one = false;
        t.psi.sup = base_psi.sup;
        t.psi.f = [base_psi, xi0pp, r, delta](std::span<const double> xi) {
            double off = 0;
            for (int i = 0; i < xi0pp.size(); ++i) off += sq(xi[r + i] - xi0pp[i]);
            double v = chi_radial(std::sqrt(off) / delta);
            return v * (base_psi.is_one ? 1.0 : base_psi.f(xi));
        };
        auto base_rho = t.rho;
        t.rho.is_one = false;
        t.rho.sup = base_rho.sup;
        if (which == CutoffKind::Inner) {
            t.rho.f = [base_rho, R](std::span<const double> eta) {
                return chi_radial(norm2(eta) / R) * (base_rho.is_one ? 1.0 : base_rho.f(eta));
            };
            t.rho.boundary = [](std::span<const double>) { return 0.0; };
            t.rho.R0 = std::max(2.0 * R, base_rho.R0);
        } else {
            t.rho.f = [base_rho, R](std::span<const double> eta) {
                return (1.0 - chi_radial(norm2(eta) / R)) *
                       (base_rho.is_one ? 1.0 : base_rho.f(eta));
            };
            t.rho.boundary = base_rho.is_one
                                 ? std::function<double(std::span<const double>)>(
                                       [](std::span<const double>) { return 1.0; })
                                 : base_rho.boundary;
            t.rho.R0 = std::max(2.0 * R, base_rho.R0);
        }
    }
    return out;
}

CompiledTwoMicro compile_symbol(const TwoMicroSymbol& a, const Grid& g, double eps) {
    if (a.dim != g.dim) throw ContractError("two_micro: symbol dimension mismatch");
    if (a.split.r + a.split.p != a.dim)
        throw ContractError("two_micro: split r + p must equal the dimension");
    CompiledTwoMicro c{g, eps, {}};
    for (const auto& t : a.terms) {
        CompiledTwoMicro::Term ct;
        ct.phi_one = t.phi.is_one;
        ct.mult_one = t.psi.is_one && t.rho.is_one;
        if (!ct.phi_one) {
            ct.phi.resize(g.size());
            double x[2];
            int j[2];
            for (std::size_t i = 0; i < ct.phi.size(); ++i) {
                g.decode(i, j);
                for (int ax = 0; ax < g.dim; ++ax) x[ax] = g.point(ax, j[ax]);
                ct.phi[i] = t.phi.f(std::span<const double>(x, g.dim));
            }
        }
        if (!ct.mult_one) {
            // combined multiplier psi(eps zeta) rho((eps zeta'' - xi0'')/eps)
            ct.mult = multiplier_table(g, [&](std::span<const double> zeta) -> cplx {
                double xi[2], eta[2];
                for (int i = 0; i < g.dim; ++i) xi[i] = eps * zeta[i];
                for (int i = 0; i < a.split.p; ++i)
                    eta[i] = (xi[a.split.r + i] - a.split.xi0pp[i]) / eps;
                double v = 1.0;
                if (!t.psi.is_one) v *= t.psi.f(std::span<const double>(xi, g.dim));
                if (!t.rho.is_one) v *= t.rho.f(std::span<const double>(eta, a.split.p));
                return v;
            });
        }
        c.terms.push_back(std::move(ct));
    }
    return c;
}

cplx CompiledTwoMicro::expect(const Field& f) const {
    if (!(f.grid == grid)) throw ContractError("two_micro expect: grid mismatch");
    cplx total = 0;
    for (const auto& t : terms) {
        if (t.phi_one && t.mult_one) {
            total += inner(f, f);
        } else if (t.mult_one) {
            double s = 0;
            for (std::size_t i = 0; i < f.size(); ++i) s += t.phi[i] * std::norm(f.v[i]);
            total += s * grid.cell_volume();
        } else if (t.phi_one) {
            total += inner(apply_multiplier_table(f, t.mult), f);
        } else {
            // 1/2 [ (M(phi f), f) + (phi M f, f) ]
            Field pf = f;
            for (std::size_t i = 0; i < pf.size(); ++i) pf.v[i] *= t.phi[i];
            Field mpf = apply_multiplier_table(pf, t.mult);
            Field mf = apply_multiplier_table(f, t.mult);
            cplx s1 = inner(mpf, f);
            cplx s2 = 0;
            for (std::size_t i = 0; i < f.size(); ++i)
                s2 += t.phi[i] * mf.v[i] * std::conj(f.v[i]);
            s2 *= grid.cell_volume();
            total += 0.5 * (s1 + s2);
        }
    }
    return total;
}

cplx two_micro_expect(const Field& f, const TwoMicroSymbol& a, double eps) {
    return compile_symbol(a, f.grid, eps).expect(f);
}

cplx expect_op(const Field& f, const TwoMicroSymbol& a, double eps) {
    if (!a.eta_independent())
        throw ContractError("expect_op: symbol must be independent of eta");
    return two_micro_expect(f, a, eps);
}

cplx expect_op_wigner(const Field& f, const TwoMicroSymbol& a, double eps) {
    if (f.grid.dim != 1) throw ContractError("expect_op_wigner: d = 1 only");
    if (!a.eta_independent())
        throw ContractError("expect_op_wigner: symbol must be independent of eta");
    WignerSlice W = wigner_transform(f, eps);
    const int N = W.n();
    double acc = 0;
    for (int j = 0; j < N; ++j) {
        double x[1] = {f.grid.point(0, j)};
        for (int q = 0; q < N; ++q) {
            double xi[1] = {W.xi(q)};
            double aval = 0;
            for (const auto& t : a.terms) {
                double v = 1.0;
                if (!t.phi.is_one) v *= t.phi.f(std::span<const double>(x, 1));
                if (!t.psi.is_one) v *= t.psi.f(std::span<const double>(xi, 1));
                aval += v;
            }
            acc += aval * W.value(j, q);
        }
    }
    return acc * f.grid.dx(0) * W.dxi();
}

cplx time_averaged_functional(const EvolutionResult& snaps, const TwoMicroSymbol& a,
                              const TimeWindow& w, double eps, const WindowWeight& weight) {
    if (snaps.snaps.empty()) throw ContractError("time_averaged_functional: no snapshots");
    if (snaps.snaps.front().t > w.a + 1e-9 || snaps.snaps.back().t < w.b - 1e-9)
        throw ContractError("time_averaged_functional: window exceeds the snapshot range");
    CompiledTwoMicro c = compile_symbol(a, snaps.snaps.front().u.grid, eps);
    cplx sum = 0;
    bool have_prev = false;
    double t_prev = 0;
    cplx v_prev = 0;
    for (const Snapshot& s : snaps.snaps) {
        if (s.t < w.a - 1e-9 || s.t > w.b + 1e-9) continue;
        cplx v = weight(w, s.t) * c.expect(s.u);
        if (have_prev) sum += 0.5 * (s.t - t_prev) * (v + v_prev);
        t_prev = s.t;
        v_prev = v;
        have_prev = true;
    }
    return sum;
}

bool two_micro_resolution_ok(const Grid& g, double eps, const CutoffParams& c) {
    for (int a = 0; a < g.dim; ++a) {
        double dz = g.dxi(a);
        if (dz > c.R / 4.0) return false;             // eta lattice vs R cutoff
        if (dz > c.delta / (4.0 * eps)) return false; // zeta lattice vs delta cutoff
    }
    return true;
}

}  // namespace semilab
