#pragma once

#include <Eigen/Dense>

#include "semilab/grid.hpp"
#include "semilab/initial_data.hpp"
#include "semilab/propagator.hpp"

namespace semilab {

// Unnormalized bump/gaussian test function (sup = amplitude), product form.
struct TestFunction {
    ProfileSpec::Kind kind = ProfileSpec::Kind::Bump;
    int dim = 1;
    Eigen::VectorXd center;
    double width = 1.0;
    double amplitude = 1.0;

    static TestFunction bump(int dim, double width, double amplitude = 1.0);
    static TestFunction bump_at(const Eigen::VectorXd& center, double width,
                                double amplitude = 1.0);
    static TestFunction gaussian(int dim, double width, double amplitude = 1.0);

    double eval(std::span<const double> x) const;
    double sup() const { return std::abs(amplitude); }
    std::function<double(std::span<const double>)> fn() const;
};

// Discrete Wigner slice over (x, xi) for d = 1. The xi lattice is the
// eps-rescaled frequency lattice xi_q = eps * pi * q / L, so the momentum
// marginal lands on the semiclassical variable directly:
//   sum_q W(x_j, xi_q) dxi          = |f(x_j)|^2
//   sum_j W(x_j, xi_q) dx           = |F(xi_q/eps)|^2 / (2 pi eps)
struct WignerSlice {
    Grid xgrid;
    double eps = 1.0;
    std::vector<double> w;  // row-major [j * N + q_nat]
    double max_imag_residue = 0.0;

    int n() const { return xgrid.n[0]; }
    double dxi() const { return eps * pi / xgrid.half_len[0]; }
    double xi(int q_nat) const { return dxi() * xgrid.signed_index(0, q_nat); }
    double value(int j, int q_nat) const { return w[static_cast<std::size_t>(j) * n() + q_nat]; }
    std::vector<double> position_marginal() const;
    std::vector<double> momentum_marginal() const;
    // Field-format dump: d=2 header with axis 2 describing the xi lattice.
    void write(const std::string& path) const;
};

WignerSlice wigner_transform(const Field& f, double eps);

// Factored test symbol a(x, xi, eta) = sum_i phi_i(x) psi_i(xi) rho_i(eta)
// over the split xi = (xi', xi'') in R^r x R^p, eta = (xi'' - xi0'')/eps.
struct ScalarFn {
    std::function<double(std::span<const double>)> f;
    double sup = 1.0;
    bool is_one = true;
};
struct EtaFn {
    std::function<double(std::span<const double>)> f;
    double sup = 1.0;
    bool is_one = true;
    // homogeneous boundary value: f(eta) = boundary(eta/|eta|) for |eta| > R0
    std::function<double(std::span<const double>)> boundary;
    double R0 = 0.0;
};
struct TwoMicroTerm {
    ScalarFn phi, psi;
    EtaFn rho;
};
struct ManifoldSplit {
    int r = 0, p = 1;
    Eigen::VectorXd xi0pp;
    static ManifoldSplit point(const Eigen::VectorXd& xi0);  // r=0, p=d
    static ManifoldSplit manifold(int r, int p, const Eigen::VectorXd& xi0pp);
};
struct TwoMicroSymbol {
    int dim = 1;
    ManifoldSplit split;
    std::vector<TwoMicroTerm> terms;

    double sup_bound() const;
    bool eta_independent() const;
    double eval(std::span<const double> x, std::span<const double> xi,
                std::span<const double> eta) const;
};

ScalarFn scalar_one();
ScalarFn scalar_from(const TestFunction& t);
EtaFn eta_one();
EtaFn eta_chi_over(double R);            // chi(|eta|/R): vanishes at infinity
EtaFn eta_one_minus_chi_over(double R);  // 1 - chi(|eta|/R): 1 at infinity

TwoMicroSymbol symbol_position(const ManifoldSplit& split, int dim, const TestFunction& phi);
TwoMicroSymbol symbol_product(const ManifoldSplit& split, int dim, ScalarFn phi, ScalarFn psi,
                              EtaFn rho);

struct CutoffParams {
    double R = 4.0;
    double delta = 0.5;
};
enum class CutoffKind { Outer, Inner };
// Outer: a * chi((xi''-xi0'')/delta) (1 - chi(eta/R)); inner: same with chi(eta/R).
TwoMicroSymbol apply_cutoffs(const TwoMicroSymbol& a, const CutoffParams& c, CutoffKind which);

// Symbol compiled against one (grid, eps): the xi and eta factors merge into
// one Fourier multiplier, leaving a single operator-ordering symmetrization
// with the x factor:  op = 1/2 (M phi + phi M).
struct CompiledTwoMicro {
    Grid grid;
    double eps;
    struct Term {
        bool phi_one, mult_one;
        std::vector<double> phi;   // on grid points
        std::vector<cplx> mult;    // on the frequency lattice
    };
    std::vector<Term> terms;
    cplx expect(const Field& f) const;
};
CompiledTwoMicro compile_symbol(const TwoMicroSymbol& a, const Grid& g, double eps);

// (op_eps^#(a) f, f): semiclassical pairing through the symmetrized rule.
cplx two_micro_expect(const Field& f, const TwoMicroSymbol& a, double eps);

// Restriction to eta-independent symbols (plain semiclassical pairing).
cplx expect_op(const Field& f, const TwoMicroSymbol& a, double eps);
// d=1 exact alternative route through the Wigner slice: int a W dx dxi.
cplx expect_op_wigner(const Field& f, const TwoMicroSymbol& a, double eps);

// I^eps(a, Xi): trapezoid quadrature of t -> Xi(t) (op^#(a) u(t), u(t)).
cplx time_averaged_functional(const EvolutionResult& snaps, const TwoMicroSymbol& a,
                              const TimeWindow& w, double eps,
                              const WindowWeight& weight = {});

// Lattice must resolve the delta- and R-cutoff scales.
bool two_micro_resolution_ok(const Grid& g, double eps, const CutoffParams& c);

// Incremental trapezoid rule for streaming time averages.
struct TrapezoidAccumulator {
    double sum = 0;
    bool have_prev = false;
    double t_prev = 0, v_prev = 0;
    void add(double t, double v) {
        if (have_prev) sum += 0.5 * (t - t_prev) * (v + v_prev);
        t_prev = t;
        v_prev = v;
        have_prev = true;
    }
};

}  // namespace semilab
