#include "semilab/propagator.hpp"

#include <cmath>

#include "semilab/cutoff.hpp"

namespace semilab {

namespace {

// lambda(eps xi)/eps^2 on the lattice, natural order
std::vector<double> scaled_symbol_table(const Grid& g, const SymbolSpec& sym, double eps) {
    if (sym.dimension != g.dim)
        throw ContractError("evolve: symbol dimension does not match the grid");
    std::vector<double> tab(g.size());
    double xi[2];
    int k[2];
    const double inv_eps2 = 1.0 / (eps * eps);
    for (std::size_t i = 0; i < tab.size(); ++i) {
        g.decode(i, k);
        for (int a = 0; a < g.dim; ++a) xi[a] = eps * g.freq(a, k[a]);
        tab[i] = sym.eval(std::span<const double>(xi, g.dim)) * inv_eps2;
    }
    return tab;
}

// 1/2 H xi . xi on the lattice
std::vector<double> quadratic_form_table(const Grid& g, const Eigen::MatrixXd& H) {
    if (H.rows() != g.dim || H.cols() != g.dim)
        throw ContractError("profile_evolve: H dimension does not match the grid");
    if (!H.isApprox(H.transpose(), 1e-12))
        throw ContractError("profile_evolve: H must be symmetric");
    std::vector<double> tab(g.size());
    int k[2];
    for (std::size_t i = 0; i < tab.size(); ++i) {
        g.decode(i, k);
        Eigen::VectorXd xi(g.dim);
        for (int a = 0; a < g.dim; ++a) xi[a] = g.freq(a, k[a]);
        tab[i] = 0.5 * xi.dot(H * xi);
    }
    return tab;
}

std::vector<cplx> phase_table(const std::vector<double>& gen, double t) {
    std::vector<cplx> m(gen.size());
    for (std::size_t i = 0; i < gen.size(); ++i) m[i] = std::polar(1.0, -t * gen[i]);
    return m;
}

// Exact-in-time evolution for a pure Fourier-multiplier generator: every
// snapshot is computed directly from u0.
void multiplier_evolve_cb(const Field& u0, const std::vector<double>& gen, const TimeWindow& w,
                          const SnapshotFn& cb) {
    w.check();
    u0.check_finite("evolve");
    for (int j = 0; j <= w.n_steps; ++j) {
        const double t = w.a + j * w.dt();
        if (j == 0) {
            cb(0, t, u0);
        } else {
            Field u = apply_multiplier_table(u0, phase_table(gen, t - w.a));
            cb(j, t, u);
        }
    }
}

void strang_like_evolve_cb(const Field& u0, const std::vector<double>& gen,
                           const PotentialSpec& V, const TimeWindow& w, const SnapshotFn& cb) {
    w.check();
    u0.check_finite("evolve");
    const double dt = w.dt();
    if (dt * V.sup_abs > 0.1 + 1e-12) {
        throw ContractError("strang_evolve: dt * |V|_inf exceeds 0.1; need n_steps >= " +
                            std::to_string(strang_min_steps(V, w)));
    }
    const Grid& g = u0.grid;
    std::vector<cplx> kin = phase_table(gen, dt);
    std::vector<cplx> half_pot(g.size());
    {
        double x[2];
        int j[2];
        for (std::size_t i = 0; i < half_pot.size(); ++i) {
            g.decode(i, j);
            for (int a = 0; a < g.dim; ++a) x[a] = g.point(a, j[a]);
            half_pot[i] = std::polar(1.0, -0.5 * dt * V.eval(std::span<const double>(x, g.dim)));
        }
    }
    Field u = u0;
    cb(0, w.a, u);
    for (int j = 1; j <= w.n_steps; ++j) {
        u = multiply_pointwise(u, half_pot);
        u = apply_multiplier_table(u, kin);
        u = multiply_pointwise(u, half_pot);
        cb(j, w.a + j * dt, u);
    }
}

EvolutionResult collect(EvolveMethod method, const TimeWindow& w,
                        const std::function<void(const SnapshotFn&)>& run) {
    EvolutionResult res;
    res.method = method;
    double norm0 = -1;
    run([&](int step, double t, const Field& u) {
        if (step % w.snapshot_stride == 0 || step == w.n_steps) {
            double nu = l2_norm(u);
            if (norm0 < 0) norm0 = nu;
            res.snaps.push_back({t, u});
            res.drift.push_back(std::abs(nu - norm0) / norm0);
        }
    });
    return res;
}

}  // namespace

double WindowWeight::operator()(const TimeWindow& w, double t) const {
    if (kind == Kind::Indicator) return (t >= w.a - 1e-12 && t <= w.b + 1e-12) ? 1.0 : 0.0;
    // smooth bump supported on (a, b), equal to 1 on the middle half
    const double s = (t - w.a) / (w.b - w.a);
    if (s <= 0 || s >= 1) return 0.0;
    return chi_radial(1.0 + 2.0 * std::abs(s - 0.5));
}

double EvolutionResult::max_drift() const {
    double m = 0;
    for (double d : drift) m = std::max(m, d);
    return m;
}

void free_evolve_cb(const Field& u0, const SymbolSpec& sym, double eps, const TimeWindow& w,
                    const SnapshotFn& cb) {
    if (!(eps > 0)) throw ContractError("free_evolve: eps must be positive");
    multiplier_evolve_cb(u0, scaled_symbol_table(u0.grid, sym, eps), w, cb);
}

EvolutionResult free_evolve(const Field& u0, const SymbolSpec& sym, double eps,
                            const TimeWindow& w) {
    return collect(EvolveMethod::ExactFree, w,
                   [&](const SnapshotFn& cb) { free_evolve_cb(u0, sym, eps, w, cb); });
}

Field propagate_free(const Field& u0, const SymbolSpec& sym, double eps, double dt) {
    if (!(eps > 0)) throw ContractError("propagate_free: eps must be positive");
    return apply_multiplier_table(u0, phase_table(scaled_symbol_table(u0.grid, sym, eps), dt));
}

void strang_evolve_cb(const Field& u0, const SymbolSpec& sym, const PotentialSpec& V, double eps,
                      const TimeWindow& w, const SnapshotFn& cb) {
    if (!(eps > 0)) throw ContractError("strang_evolve: eps must be positive");
    strang_like_evolve_cb(u0, scaled_symbol_table(u0.grid, sym, eps), V, w, cb);
}

EvolutionResult strang_evolve(const Field& u0, const SymbolSpec& sym, const PotentialSpec& V,
                              double eps, const TimeWindow& w) {
    return collect(EvolveMethod::Strang, w, [&](const SnapshotFn& cb) {
        strang_evolve_cb(u0, sym, V, eps, w, cb);
    });
}

void profile_evolve_cb(const Field& theta0, const Eigen::MatrixXd& H, const PotentialSpec& V,
                       const TimeWindow& w, const SnapshotFn& cb) {
    auto gen = quadratic_form_table(theta0.grid, H);
    if (V.is_zero())
        multiplier_evolve_cb(theta0, gen, w, cb);
    else
        strang_like_evolve_cb(theta0, gen, V, w, cb);
}

EvolutionResult profile_evolve(const Field& theta0, const Eigen::MatrixXd& H,
                               const PotentialSpec& V, const TimeWindow& w) {
    return collect(V.is_zero() ? EvolveMethod::ExactFree : EvolveMethod::Strang, w,
                   [&](const SnapshotFn& cb) { profile_evolve_cb(theta0, H, V, w, cb); });
}

EvolutionResult heisenberg_rank1_evolve(const Field& theta0, const SymbolSpec& sym,
                                        const Eigen::VectorXd& xprime,
                                        const Eigen::VectorXd& xiprime, const PotentialSpec& V,
                                        const TimeWindow& w) {
    const CriticalSet& cs = sym.critical_set;
    if (cs.kind != CriticalSet::Kind::AffineManifold)
        throw ContractError("heisenberg_rank1_evolve: symbol critical set is not a manifold");
    if (theta0.grid.dim != cs.p)
        throw ContractError("heisenberg_rank1_evolve: theta grid dimension must equal p");
    if (xprime.size() != cs.r || xiprime.size() != cs.r)
        throw ContractError("heisenberg_rank1_evolve: x', xi' must lie in R^r");
    if (std::abs(l2_norm(theta0) - 1.0) > 1e-6)
        throw ContractError("heisenberg_rank1_evolve: theta0 must be normalized");

    // Hessian block in the xi'' directions at (xi', xi0'')
    std::vector<double> xi(sym.dimension);
    for (int i = 0; i < cs.r; ++i) xi[i] = xiprime[i];
    for (int i = 0; i < cs.p; ++i) xi[cs.r + i] = cs.xi0pp[i];
    Eigen::MatrixXd Hfull = hess_symbol(sym, xi);
    Eigen::MatrixXd Hblock = Hfull.bottomRightCorner(cs.p, cs.p);

    PotentialSpec Vslice = V;
    if (!V.is_zero()) {
        const int r = cs.r;
        auto base = V.eval;
        Eigen::VectorXd xp = xprime;
        Vslice.eval = [base, xp, r](std::span<const double> y) {
            std::vector<double> x(r + y.size());
            for (int i = 0; i < r; ++i) x[i] = xp[i];
            for (std::size_t i = 0; i < y.size(); ++i) x[r + i] = y[i];
            return base(x);
        };
    }
    return profile_evolve(theta0, Hblock, Vslice, w);
}

double trace_against_multiplication(const Field& theta, const Eigen::VectorXd& xprime,
                                    const std::function<double(std::span<const double>)>& phi) {
    const Grid& g = theta.grid;
    double s = 0;
    std::vector<double> x(xprime.size() + g.dim);
    for (int i = 0; i < xprime.size(); ++i) x[i] = xprime[i];
    int j[2];
    for (std::size_t i = 0; i < theta.size(); ++i) {
        g.decode(i, j);
        for (int a = 0; a < g.dim; ++a) x[xprime.size() + a] = g.point(a, j[a]);
        s += phi(x) * std::norm(theta.v[i]);
    }
    return s * g.cell_volume();
}

int strang_min_steps(const PotentialSpec& V, const TimeWindow& w) {
    return std::max(1, static_cast<int>(std::ceil((w.b - w.a) * V.sup_abs / 0.1)));
}

}  // namespace semilab
