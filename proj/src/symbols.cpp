#include "semilab/symbols.hpp"

#include <cmath>

namespace semilab {

namespace {

void require_dim(const SymbolSpec& sym, std::span<const double> xi, const char* op) {
    if (static_cast<int>(xi.size()) != sym.dimension)
        throw ContractError(std::string(op) + ": xi dimension does not match the symbol");
}

Eigen::VectorXd to_vec(std::span<const double> xi) {
    Eigen::VectorXd v(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) v[i] = xi[i];
    return v;
}

CriticalPoint make_point(Eigen::VectorXd loc, const Eigen::MatrixXd& hess, double tol = 1e-12) {
    CriticalPoint cp;
    cp.location = std::move(loc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    for (int i = 0; i < hess.rows(); ++i) {
        if (std::abs(es.eigenvalues()[i]) <= tol)
            cp.kernel_basis.push_back(es.eigenvectors().col(i));
        else
            ++cp.hessian_rank;
    }
    return cp;
}

}  // namespace

double eval_symbol(const SymbolSpec& sym, std::span<const double> xi) {
    require_dim(sym, xi, "eval_symbol");
    return sym.eval(xi);
}

Eigen::VectorXd grad_symbol(const SymbolSpec& sym, std::span<const double> xi) {
    require_dim(sym, xi, "grad_symbol");
    return sym.grad(xi);
}

Eigen::MatrixXd hess_symbol(const SymbolSpec& sym, std::span<const double> xi) {
    require_dim(sym, xi, "hess_symbol");
    return sym.hess(xi);
}

Classification classify_critical(const SymbolSpec& sym, std::span<const double> xi0, double tol) {
    require_dim(sym, xi0, "classify_critical");
    if (!(tol > 0)) throw ContractError("classify_critical: tol must be positive");
    Classification out;
    if (grad_symbol(sym, xi0).norm() > tol) {
        out.kind = Classification::Kind::NotCritical;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess_symbol(sym, xi0));
    for (int i = 0; i < sym.dimension; ++i)
        if (std::abs(es.eigenvalues()[i]) <= tol)
            out.kernel_basis.push_back(es.eigenvectors().col(i));
    out.kind = out.kernel_basis.empty() ? Classification::Kind::NonDegenerate
                                        : Classification::Kind::Degenerate;
    return out;
}

PotentialSpec potential_zero() {
    PotentialSpec p;
    p.kind = PotentialSpec::Kind::Zero;
    p.eval = [](std::span<const double>) { return 0.0; };
    p.sup_abs = 0.0;
    p.name = "zero";
    return p;
}

PotentialSpec potential_gaussian_bump(const Eigen::VectorXd& center, double width, double height) {
    if (!(width > 0)) throw ContractError("gaussian_bump: width must be positive");
    PotentialSpec p;
    p.kind = PotentialSpec::Kind::GaussianBump;
    p.eval = [center, width, height](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += sq(x[i] - center[i]);
        return height * std::exp(-s / (2 * width * width));
    };
    p.sup_abs = std::abs(height);
    p.name = "gaussian_bump";
    return p;
}

double gaussian_bump_mass_outside_box(const Eigen::VectorXd& center, double width, double height,
                                      const std::vector<double>& half_len) {
    // product of per-axis integrals of exp(-(x-c)^2/(2w^2))
    double total = 1.0, inside = 1.0;
    for (std::size_t a = 0; a < half_len.size(); ++a) {
        const double s = width * std::sqrt(2.0);
        total *= std::sqrt(2.0 * pi) * width;
        double lo = (-half_len[a] - center[a]) / s;
        double hi = (half_len[a] - center[a]) / s;
        inside *= std::sqrt(pi) * width / std::sqrt(2.0) *
                  (std::erf(hi) - std::erf(lo));
    }
    return std::abs(height) * (total - inside);
}

PotentialSpec potential_cosine(const std::vector<double>& amplitudes,
                               const std::vector<double>& half_len) {
    if (amplitudes.size() != half_len.size())
        throw ContractError("cosine potential: one amplitude per axis required");
    PotentialSpec p;
    p.kind = PotentialSpec::Kind::Cosine;
    std::vector<double> k(half_len.size());
    for (std::size_t a = 0; a < k.size(); ++a) k[a] = pi / half_len[a];
    p.eval = [amplitudes, k](std::span<const double> x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += amplitudes[i] * std::cos(k[i] * x[i]);
        return s;
    };
    p.sup_abs = 0;
    for (double a : amplitudes) p.sup_abs += std::abs(a);
    p.name = "cosine";
    return p;
}

SymbolSpec builtin_symbol(const std::string& tag, const SymbolParams& params) {
    const int d = params.dimension;
    SymbolSpec s;
    s.dimension = d;
    s.name = tag;

    if (tag == "iso_quadratic") {
        s.order = 2;
        s.eval = [](std::span<const double> xi) {
            double v = 0;
            for (double x : xi) v += x * x;
            return v;
        };
        s.grad = [](std::span<const double> xi) { return Eigen::VectorXd(2.0 * to_vec(xi)); };
        s.hess = [d](std::span<const double>) {
            return Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(d, d));
        };
        s.critical_set.kind = CriticalSet::Kind::FinitePoints;
        s.critical_set.points = {make_point(Eigen::VectorXd::Zero(d),
                                            2.0 * Eigen::MatrixXd::Identity(d, d))};
        return s;
    }
    if (tag == "shifted_quadratic") {
        if (params.xi0.size() != d)
            throw ContractError("shifted_quadratic: xi0 must have the symbol dimension");
        Eigen::VectorXd c = params.xi0;
        s.order = 2;
        s.eval = [c](std::span<const double> xi) {
            double v = 0;
            for (int i = 0; i < c.size(); ++i) v += sq(xi[i] - c[i]);
            return v;
        };
        s.grad = [c](std::span<const double> xi) {
            return Eigen::VectorXd(2.0 * (to_vec(xi) - c));
        };
        s.hess = [d](std::span<const double>) {
            return Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(d, d));
        };
        s.critical_set.kind = CriticalSet::Kind::FinitePoints;
        s.critical_set.points = {make_point(c, 2.0 * Eigen::MatrixXd::Identity(d, d))};
        return s;
    }
    if (tag == "quartic_degenerate") {
        // sum_{i<d} xi_i^2 + xi_d^4; in d=1 this is the pure quartic xi^4
        s.order = 4;
        s.eval = [d](std::span<const double> xi) {
            double v = 0;
            for (int i = 0; i + 1 < d; ++i) v += sq(xi[i]);
            return v + sq(sq(xi[d - 1]));
        };
        s.grad = [d](std::span<const double> xi) {
            Eigen::VectorXd g(d);
            for (int i = 0; i + 1 < d; ++i) g[i] = 2 * xi[i];
            g[d - 1] = 4 * xi[d - 1] * sq(xi[d - 1]);
            return g;
        };
        s.hess = [d](std::span<const double> xi) {
            Eigen::MatrixXd h = 2.0 * Eigen::MatrixXd::Identity(d, d);
            h(d - 1, d - 1) = 12 * sq(xi[d - 1]);
            return h;
        };
        Eigen::MatrixXd h0 = 2.0 * Eigen::MatrixXd::Identity(d, d);
        h0(d - 1, d - 1) = 0;
        s.critical_set.kind = CriticalSet::Kind::FinitePoints;
        s.critical_set.points = {make_point(Eigen::VectorXd::Zero(d), h0)};
        return s;
    }
    if (tag == "double_well_1d") {
        if (d != 1) throw ContractError("double_well_1d is one-dimensional");
        s.order = 4;
        s.eval = [](std::span<const double> xi) { return sq(sq(xi[0]) - 1.0); };
        s.grad = [](std::span<const double> xi) {
            Eigen::VectorXd g(1);
            g[0] = 4.0 * xi[0] * (sq(xi[0]) - 1.0);
            return g;
        };
        s.hess = [](std::span<const double> xi) {
            Eigen::MatrixXd h(1, 1);
            h(0, 0) = 12.0 * sq(xi[0]) - 4.0;
            return h;
        };
        s.critical_set.kind = CriticalSet::Kind::FinitePoints;
        for (double x : {-1.0, 0.0, 1.0}) {
            Eigen::VectorXd loc(1);
            loc[0] = x;
            Eigen::MatrixXd h(1, 1);
            h(0, 0) = 12.0 * x * x - 4.0;
            s.critical_set.points.push_back(make_point(loc, h));
        }
        return s;
    }
    if (tag == "manifold_quadratic") {
        // lambda(xi) = |xi''|^2 over the split xi = (xi', xi'') in R^r x R^p
        const int p = params.p;
        if (p <= 0 || p > d) throw ContractError("manifold_quadratic: need 0 < p <= d");
        const int r = d - p;
        s.order = 2;
        s.eval = [r, d](std::span<const double> xi) {
            double v = 0;
            for (int i = r; i < d; ++i) v += sq(xi[i]);
            return v;
        };
        s.grad = [r, d](std::span<const double> xi) {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
            for (int i = r; i < d; ++i) g[i] = 2 * xi[i];
            return g;
        };
        s.hess = [r, d](std::span<const double>) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
            for (int i = r; i < d; ++i) h(i, i) = 2;
            return h;
        };
        s.critical_set.kind = CriticalSet::Kind::AffineManifold;
        s.critical_set.r = r;
        s.critical_set.p = p;
        s.critical_set.xi0pp = Eigen::VectorXd::Zero(p);
        return s;
    }
    throw ContractError("unknown symbol tag: " + tag);
}

std::vector<std::string> builtin_symbol_tags() {
    return {"iso_quadratic", "shifted_quadratic", "quartic_degenerate", "double_well_1d",
            "manifold_quadratic"};
}

DerivativeCheck check_derivatives(const SymbolSpec& sym, int n_points, double radius,
                                  std::uint64_t seed) {
    const double h = 1e-5;
    Rng rng(seed);
    DerivativeCheck out;
    const int d = sym.dimension;
    std::vector<double> xi(d), xp(d), xm(d);
    for (int pt = 0; pt < n_points; ++pt) {
        for (int i = 0; i < d; ++i) xi[i] = rng.uniform(-radius, radius);
        Eigen::VectorXd g = grad_symbol(sym, xi);
        Eigen::MatrixXd H = hess_symbol(sym, xi);
        double gscale = std::max(g.norm(), 1.0);
        double hscale = std::max(H.norm(), 1.0);
        for (int i = 0; i < d; ++i) {
            xp = xi;
            xm = xi;
            xp[i] += h;
            xm[i] -= h;
            double fd = (sym.eval(xp) - sym.eval(xm)) / (2 * h);
            out.max_grad_rel_err = std::max(out.max_grad_rel_err, std::abs(fd - g[i]) / gscale);
            Eigen::VectorXd gd = (sym.grad(xp) - sym.grad(xm)) / (2 * h);
            for (int j = 0; j < d; ++j)
                out.max_hess_rel_err =
                    std::max(out.max_hess_rel_err, std::abs(gd[j] - H(i, j)) / hscale);
        }
    }
    return out;
}

double growth_constant(const SymbolSpec& sym, double radius, int n_points, std::uint64_t seed) {
    Rng rng(seed);
    const int d = sym.dimension;
    std::vector<double> xi(d);
    double worst = 0;
    for (int pt = 0; pt < n_points; ++pt) {
        for (int i = 0; i < d; ++i) xi[i] = rng.uniform(-radius, radius);
        double w = std::pow(1.0 + norm2(xi), -sym.order);
        worst = std::max(worst, std::abs(sym.eval(xi)) * w);
        worst = std::max(worst, grad_symbol(sym, xi).norm() * w);
        worst = std::max(worst, hess_symbol(sym, xi).norm() * w);
    }
    return worst;
}

}  // namespace semilab
