#include "semilab/predictions.hpp"

#include <cmath>

#include "semilab/cutoff.hpp"

namespace semilab {

namespace {

// trapezoid in t of Xi(t) * int phi |u(t)|^2 dx over the window
double windowed_density_average(const EvolutionResult& evo, const TestFunction& phi,
                                const TimeWindow& w) {
    WindowWeight weight;
    TrapezoidAccumulator acc;
    for (const Snapshot& s : evo.snaps) {
        double m = 0;
        const Grid& g = s.u.grid;
        double x[2];
        int j[2];
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            g.decode(i, j);
            for (int a = 0; a < g.dim; ++a) x[a] = g.point(a, j[a]);
            m += phi.eval(std::span<const double>(x, g.dim)) * std::norm(s.u.v[i]);
        }
        acc.add(s.t, weight(w, s.t) * m * g.cell_volume());
    }
    return acc.sum;
}

double initial_mass_sq(const DataFamily& fam) {
    double n = analytic_l2_norm(fam, 1e-3);  // carriers drop out of the norm
    return n * n;
}

PredictedLimit make_limit(double value, PredictedLimit::Tag tag, std::string prov,
                          bool equality, const TestFunction& phi, const TimeWindow& w,
                          double mass_sq) {
    if (value < -1e-12) throw ContractError("PredictedLimit: negative limit value");
    double budget = (w.b - w.a) * phi.sup() * mass_sq;
    if (value > budget * (1.0 + 1e-9))
        throw ContractError("PredictedLimit: value exceeds the mass budget");
    return {std::max(value, 0.0), tag, std::move(prov), equality};
}

}  // namespace

std::string tag_name(PredictedLimit::Tag tag) {
    switch (tag) {
        case PredictedLimit::Tag::DispersedZero: return "dispersed_zero";
        case PredictedLimit::Tag::ProfileDensity: return "profile_density";
        case PredictedLimit::Tag::PointMass: return "point_mass";
        case PredictedLimit::Tag::ManifoldProfile: return "manifold_profile";
        case PredictedLimit::Tag::ManifoldPointMass: return "manifold_point_mass";
    }
    return "?";
}

PredictedLimit predict_isolated(const DataFamily& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, const TestFunction& phi,
                                const TimeWindow& w, const Grid& g) {
    if (sym.critical_set.kind != CriticalSet::Kind::FinitePoints)
        throw ContractError("predict_isolated: symbol must declare finitely many critical points");
    w.check();

    bool all_nondegenerate = true;
    for (const CriticalPoint& cp : sym.critical_set.points)
        if (!cp.kernel_basis.empty()) all_nondegenerate = false;
    const bool equality = all_nondegenerate || satisfies_concentration_criterion(fam);

    double total = 0;
    bool any = false;
    for (const CriticalPoint& cp : sym.critical_set.points) {
        auto limit = weak_limit_profile(fam, cp.location, g);
        if (!limit) continue;
        any = true;
        std::vector<double> loc(cp.location.data(), cp.location.data() + cp.location.size());
        Eigen::MatrixXd H = hess_symbol(sym, loc);
        EvolutionResult evo = profile_evolve(*limit, H, V, w);
        total += windowed_density_average(evo, phi, w);
    }
    double mass_sq = initial_mass_sq(fam);
    if (!any)
        return make_limit(0.0, PredictedLimit::Tag::DispersedZero,
                          "every weak limit at a critical carrier vanishes, the windowed "
                          "local mass tends to zero",
                          equality, phi, w, mass_sq);
    return make_limit(total, PredictedLimit::Tag::ProfileDensity,
                      "sum over critical carriers of the window average of |profile(t)|^2 "
                      "against phi, profile evolved by the effective equation",
                      equality, phi, w, mass_sq);
}

PredictedLimit predict_degenerate(const DataFamily& fam, const SymbolSpec& sym,
                                  const TestFunction& phi, const TimeWindow& w, const Grid& g) {
    const auto* f = std::get_if<ShiftedDegenerate>(&fam);
    if (!f) throw ContractError("predict_degenerate: family must be shifted_degenerate");
    if (!(f->beta > 2.0 / 3.0))
        throw ContractError("predict_degenerate: requires beta > 2/3");
    w.check();

    std::vector<double> loc(f->xi0.data(), f->xi0.data() + f->xi0.size());
    Classification cls = classify_critical(sym, loc);
    if (cls.kind == Classification::Kind::NotCritical)
        throw ContractError("predict_degenerate: xi0 is not a critical point of the symbol");
    Eigen::MatrixXd H = hess_symbol(sym, loc);
    if ((H * f->omega0).norm() > 1e-10)
        throw ContractError("predict_degenerate: omega0 must lie in the Hessian kernel at xi0");

    double mass_sq = 1.0;
    if (f->alpha == 0.0) {
        Field theta(g);
        double x[2];
        int j[2];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            g.decode(i, j);
            for (int a = 0; a < g.dim; ++a) x[a] = g.point(a, j[a]);
            theta.v[i] = f->theta.eval(std::span<const double>(x, g.dim));
        }
        EvolutionResult evo = profile_evolve(theta, H, potential_zero(), w);
        return make_limit(windowed_density_average(evo, phi, w),
                          PredictedLimit::Tag::ProfileDensity,
                          "window average of the freely spreading envelope "
                          "|exp(-it/2 Hess D.D) theta|^2 against phi",
                          true, phi, w, mass_sq);
    }
    std::vector<double> origin(g.dim, 0.0);
    double value = (w.b - w.a) * phi.eval(origin);  // |theta| = 1
    return make_limit(value, PredictedLimit::Tag::PointMass,
                      "(b-a) phi(0) |theta|^2, all mass concentrates at the origin",
                      true, phi, w, mass_sq);
}

PredictedLimit predict_manifold(const DataFamily& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, const TestFunction& phi,
                                const TimeWindow& w, const Grid& g) {
    const CriticalSet& cs = sym.critical_set;
    if (cs.kind != CriticalSet::Kind::AffineManifold)
        throw ContractError("predict_manifold: symbol critical set must be an affine manifold");
    w.check();

    // the p-dimensional sub-grid carrying the operator evolution
    std::vector<int> np;
    std::vector<double> Lp;
    for (int a = cs.r; a < g.dim; ++a) {
        np.push_back(g.n[a]);
        Lp.push_back(g.half_len[a]);
    }
    Grid gp = Grid::make(np, Lp);

    if (const auto* f = std::get_if<ManifoldConcentrating>(&fam)) {
        if (f->theta.dim != cs.p || f->phi.dim != cs.r)
            throw ContractError("predict_manifold: family split does not match the symbol");
        Field theta(gp);
        double y[2];
        int j[2];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            gp.decode(i, j);
            for (int a = 0; a < gp.dim; ++a) y[a] = gp.point(a, j[a]);
            theta.v[i] = f->theta.eval(std::span<const double>(y, gp.dim));
        }
        EvolutionResult evo = heisenberg_rank1_evolve(theta, sym, f->z0, f->zeta0, V, w);
        WindowWeight weight;
        TrapezoidAccumulator acc;
        auto phi_fn = phi.fn();
        for (const Snapshot& s : evo.snaps)
            acc.add(s.t, weight(w, s.t) * trace_against_multiplication(s.u, f->z0, phi_fn));
        // nu^0 carries |phi_profile|^2 = 1 (normalized); M_t has unit trace
        return make_limit(acc.sum, PredictedLimit::Tag::ManifoldProfile,
                          "|phi_prof|^2 x window average of Tr[m_phi M_t] along the "
                          "rank-one operator evolution at (z0, zeta0)",
                          true, phi, w, 1.0);
    }
    if (const auto* f = std::get_if<ManifoldShifted>(&fam)) {
        if (f->theta.dim != cs.p || f->phi.dim != cs.r)
            throw ContractError("predict_manifold: family split does not match the symbol");
        if (!V.is_zero())
            throw ContractError("predict_manifold: shifted manifold data requires V = 0");
        if (!(f->beta > 2.0 / 3.0))
            throw ContractError("predict_manifold: requires beta > 2/3");
        // Hessian transverse block must annihilate omega0 at (xi0', xi0'')
        std::vector<double> loc(g.dim);
        for (int i = 0; i < cs.r; ++i) loc[i] = f->xi0p[i];
        for (int i = 0; i < cs.p; ++i) loc[cs.r + i] = cs.xi0pp[i];
        Eigen::MatrixXd Hpp = hess_symbol(sym, loc).bottomRightCorner(cs.p, cs.p);
        if ((Hpp * f->omega0).norm() > 1e-10)
            throw ContractError("predict_manifold: omega0 must lie in the transverse Hessian "
                                "kernel at (xi0', xi0'')");

        WindowWeight weight;
        auto phi_fn = phi.fn();
        if (f->alpha == 0.0) {
            // density |phi_prof(x')|^2 |theta(t, x'')|^2 with theta evolved
            // by the transverse profile equation
            Field theta(gp);
            double y[2];
            int j[2];
            for (std::size_t i = 0; i < theta.size(); ++i) {
                gp.decode(i, j);
                for (int a = 0; a < gp.dim; ++a) y[a] = gp.point(a, j[a]);
                theta.v[i] = f->theta.eval(std::span<const double>(y, gp.dim));
            }
            EvolutionResult evo = profile_evolve(theta, Hpp, potential_zero(), w);
            // r-dimensional quadrature of |phi_prof|^2 phi(x', .) on the sub-grid
            std::vector<int> nr;
            std::vector<double> Lr;
            for (int a = 0; a < cs.r; ++a) {
                nr.push_back(g.n[a]);
                Lr.push_back(g.half_len[a]);
            }
            Grid gr = Grid::make(nr, Lr);
            TrapezoidAccumulator acc;
            for (const Snapshot& s : evo.snaps) {
                double m = 0;
                double xp[2];
                int jr[2];
                std::vector<double> x(g.dim);
                for (std::size_t ir = 0; ir < gr.size(); ++ir) {
                    gr.decode(ir, jr);
                    for (int a = 0; a < cs.r; ++a) {
                        xp[a] = gr.point(a, jr[a]);
                        x[a] = xp[a];
                    }
                    double wprof = sq(f->phi.eval(std::span<const double>(xp, cs.r)));
                    int jp[2];
                    for (std::size_t ip = 0; ip < gp.size(); ++ip) {
                        gp.decode(ip, jp);
                        for (int a = 0; a < cs.p; ++a) x[cs.r + a] = gp.point(a, jp[a]);
                        m += wprof * phi.eval(x) * std::norm(s.u.v[ip]) * gp.cell_volume();
                    }
                }
                acc.add(s.t, weight(w, s.t) * m * gr.cell_volume());
            }
            return make_limit(acc.sum, PredictedLimit::Tag::ManifoldProfile,
                              "window average of |phi_prof(x')|^2 |theta(t,x'')|^2 against phi",
                              true, phi, w, 1.0);
        }
        // alpha != 0: (b-a) |theta|^2 int |phi_prof(x')|^2 phi(x', 0) dx'
        std::vector<int> nr;
        std::vector<double> Lr;
        for (int a = 0; a < cs.r; ++a) {
            nr.push_back(g.n[a]);
            Lr.push_back(g.half_len[a]);
        }
        Grid gr = Grid::make(nr, Lr);
        double m = 0;
        double xp[2];
        int jr[2];
        std::vector<double> x(g.dim, 0.0);
        for (std::size_t ir = 0; ir < gr.size(); ++ir) {
            gr.decode(ir, jr);
            for (int a = 0; a < cs.r; ++a) {
                xp[a] = gr.point(a, jr[a]);
                x[a] = xp[a];
            }
            for (int a = 0; a < cs.p; ++a) x[cs.r + a] = 0.0;
            m += sq(f->phi.eval(std::span<const double>(xp, cs.r))) * phi.eval(x);
        }
        double value = (w.b - w.a) * m * gr.cell_volume();
        return make_limit(value, PredictedLimit::Tag::ManifoldPointMass,
                          "(b-a) |theta|^2 int |phi_prof(x')|^2 phi(x',0) dx', transverse "
                          "mass concentrates on {x'' = 0}",
                          true, phi, w, 1.0);
    }
    throw ContractError("predict_manifold: family must be a manifold datum");
}

std::string predict_support(const SymbolSpec& sym) {
    const CriticalSet& cs = sym.critical_set;
    if (cs.kind == CriticalSet::Kind::None)
        return "momentum support: empty (no critical points; all mass disperses)";
    if (cs.kind == CriticalSet::Kind::FinitePoints) {
        std::string s = "momentum support: {";
        for (std::size_t i = 0; i < cs.points.size(); ++i) {
            if (i) s += ", ";
            s += "(";
            for (int k = 0; k < cs.points[i].location.size(); ++k) {
                if (k) s += ",";
                char buf[32];
                std::snprintf(buf, sizeof buf, "%g", cs.points[i].location[k]);
                s += buf;
            }
            s += ")";
        }
        return s + "}";
    }
    std::string s = "momentum support: affine manifold {xi'' = (";
    for (int k = 0; k < cs.xi0pp.size(); ++k) {
        if (k) s += ",";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", cs.xi0pp[k]);
        s += buf;
    }
    return s + ")} of codimension " + std::to_string(cs.p);
}

RankOneConsistency rank_one_consistency_rhs(const DataFamily& fam, const SymbolSpec& sym,
                                 const PotentialSpec& V, const TwoMicroSymbol& a,
                                 const TimeWindow& w, double R, const Grid& g) {
    if (sym.critical_set.kind != CriticalSet::Kind::FinitePoints)
        throw ContractError("rank_one_consistency_rhs: isolated critical points required");
    w.check();

    // locate the critical carrier with a nonzero weak limit
    const CriticalPoint* target = nullptr;
    std::optional<Field> limit;
    for (const CriticalPoint& cp : sym.critical_set.points) {
        auto l = weak_limit_profile(fam, cp.location, g);
        if (l) {
            target = &cp;
            limit = std::move(l);
            break;
        }
    }
    if (!target) return {0.0, true};

    // freeze a at xi = xi0 and cut off the scale-1 frequency at R
    Eigen::VectorXd xi0 = target->location;
    TwoMicroSymbol a0R;
    a0R.dim = a.dim;
    a0R.split = ManifoldSplit::point(Eigen::VectorXd::Zero(a.dim));
    for (const auto& t : a.terms) {
        TwoMicroTerm nt;
        nt.phi = t.phi;
        double psi_at_xi0 = 1.0;
        if (!t.psi.is_one) {
            std::vector<double> loc(xi0.data(), xi0.data() + xi0.size());
            psi_at_xi0 = t.psi.f(loc);
        }
        nt.psi = scalar_one();
        auto base_rho = t.rho;
        nt.rho.is_one = false;
        nt.rho.sup = base_rho.sup * std::abs(psi_at_xi0);
        nt.rho.f = [base_rho, psi_at_xi0, R](std::span<const double> zeta) {
            double v = psi_at_xi0 * chi_radial(norm2(zeta) / R);
            return v * (base_rho.is_one ? 1.0 : base_rho.f(zeta));
        };
        nt.rho.R0 = std::max(2.0 * R, base_rho.R0);
        nt.rho.boundary = [](std::span<const double>) { return 0.0; };
        a0R.terms.push_back(std::move(nt));
    }

    std::vector<double> loc(xi0.data(), xi0.data() + xi0.size());
    Eigen::MatrixXd H = hess_symbol(sym, loc);
    EvolutionResult evo = profile_evolve(*limit, H, V, w);
    cplx val = time_averaged_functional(evo, a0R, w, 1.0);
    return {val.real(), false};
}

}  // namespace semilab
