#include <doctest.h>

#include "oracles.hpp"
#include "semilab/cutoff.hpp"
#include "semilab/wigner.hpp"

using namespace semilab;
using namespace semilab::testing;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

struct MarginalErr {
    double pos, mom;
};

MarginalErr marginal_errors(const Field& f, double eps) {
    WignerSlice W = wigner_transform(f, eps);
    const Grid& g = f.grid;
    const int N = g.n[0];

    auto pos = W.position_marginal();
    double pos_err = 0, pos_scale = 0;
    for (int j = 0; j < N; ++j) {
        pos_err = std::max(pos_err, std::abs(pos[j] - std::norm(f.v[j])));
        pos_scale = std::max(pos_scale, std::norm(f.v[j]));
    }

    FreqField F = to_frequency(f);
    auto mom = W.momentum_marginal();
    double mom_err = 0, mom_scale = 0;
    for (int q = 0; q < N; ++q) {
        double want = std::norm(F.c[q]) / (2 * pi * eps);
        mom_err = std::max(mom_err, std::abs(mom[q] - want));
        mom_scale = std::max(mom_scale, want);
    }
    return {pos_err / pos_scale, mom_err / mom_scale};
}

}  // namespace

TEST_CASE("wigner marginals reproduce position and momentum densities") {
    Grid g = Grid::make({512}, {12.0});
    const double eps = 0.1;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    DataFamily tw = TwoWave{ProfileSpec::gaussian(1, 1.0), ProfileSpec::gaussian(1, 0.8),
                            vec1(0.5), vec1(1.0)};
    DataFamily cs = CoherentState{ProfileSpec::gaussian(1, 1.0), vec1(0.0), vec1(1.0)};
    DataFamily sd = ShiftedDegenerate{ProfileSpec::gaussian(1, 0.7), vec1(0.0), vec1(1.0),
                                      0.0, 0.75};
    for (const DataFamily& fam : {pw, tw, cs, sd}) {
        Field f = sample_data(fam, eps, g);
        MarginalErr e = marginal_errors(f, eps);
        CAPTURE(family_name(fam));
        CHECK(e.pos < 1e-10);
        CHECK(e.mom < 1e-10);
    }
}

TEST_CASE("wigner slice is real and concentrates a coherent state at (x0, xi0)") {
    Grid g = Grid::make({1024}, {12.0});
    const double eps = 0.05, x0 = 0.5, xi0 = 1.0;
    DataFamily cs = CoherentState{ProfileSpec::gaussian(1, 1.0), vec1(x0), vec1(xi0)};
    Field f = sample_data(cs, eps, g);
    WignerSlice W = wigner_transform(f, eps);
    CHECK(W.max_imag_residue < 1e-12);

    // peak location within one cell of (x0, xi0)
    int jmax = 0, qmax = 0;
    double best = -1e300;
    for (int j = 0; j < W.n(); ++j)
        for (int q = 0; q < W.n(); ++q)
            if (W.value(j, q) > best) {
                best = W.value(j, q);
                jmax = j;
                qmax = q;
            }
    CHECK(std::abs(g.point(0, jmax) - x0) <= g.dx(0) + 1e-12);
    CHECK(std::abs(W.xi(qmax) - xi0) <= W.dxi() + 1e-12);

    // closed-form gaussian wigner function:
    // (pi eps)^-1 e^{-(x-x0)^2/s^2 - s^2 (xi-xi0)^2/eps^2}, s = sqrt(eps)
    const double s2 = eps;
    double worst = 0;
    for (int j = 0; j < W.n(); j += 7) {
        double x = g.point(0, j);
        for (int q = 0; q < W.n(); q += 7) {
            double xi = W.xi(q);
            double want = std::exp(-sq(x - x0) / s2 - s2 * sq(xi - xi0) / sq(eps)) / (pi * eps);
            worst = std::max(worst, std::abs(W.value(j, q) - want));
        }
    }
    CHECK(worst / (1.0 / (pi * eps)) < 1e-8);

    Grid g2 = Grid::make({16, 16}, {2.0, 2.0});
    Field f2(g2);
    CHECK_THROWS_AS(wigner_transform(f2, 0.1), ContractError);
}

TEST_CASE("expect_op: multiplication and multiplier symbols have exact pairings") {
    Grid g = Grid::make({1024}, {12.0});
    const double eps = 0.05;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    Field f = sample_data(pw, eps, g);
    ManifoldSplit split = ManifoldSplit::point(vec1(0.0));

    TestFunction phi = TestFunction::bump(1, 1.5);
    TwoMicroSymbol a_phi = symbol_position(split, 1, phi);
    double direct = 0;
    for (int j = 0; j < g.n[0]; ++j) {
        double x[1] = {g.point(0, j)};
        direct += phi.eval(std::span<const double>(x, 1)) * std::norm(f.v[j]);
    }
    direct *= g.dx(0);
    CHECK(std::abs(expect_op(f, a_phi, eps) - direct) < 1e-12);

    // pure multiplier: (2 pi eps)^-1 sum psi(eps zeta) |F|^2 dxi
    ScalarFn psi;
    psi.is_one = false;
    psi.sup = 1.0;
    psi.f = [](std::span<const double> xi) { return std::exp(-sq(xi[0] - 1.0)); };
    TwoMicroSymbol a_psi = symbol_product(split, 1, scalar_one(), psi, eta_one());
    FreqField F = to_frequency(f);
    double want = 0;
    for (int k = 0; k < g.n[0]; ++k) {
        double xi[1] = {eps * g.freq(0, k)};
        want += psi.f(std::span<const double>(xi, 1)) * std::norm(F.c[k]);
    }
    want *= g.dxi(0) / (2 * pi);
    CHECK(std::abs(expect_op(f, a_psi, eps) - want) < 1e-11);

    TwoMicroSymbol a_eta = symbol_product(split, 1, scalar_one(), scalar_one(),
                                          eta_chi_over(4.0));
    CHECK_THROWS_AS(expect_op(f, a_eta, eps), ContractError);
}

TEST_CASE("symmetrized and wigner-pairing routes agree to O(eps^2)") {
    Grid g = Grid::make({2048}, {12.0});
    ManifoldSplit split = ManifoldSplit::point(vec1(0.0));
    ScalarFn psi;
    psi.is_one = false;
    psi.sup = 1.0;
    psi.f = [](std::span<const double> xi) { return std::exp(-sq(xi[0] - 0.8) / 2.0); };
    TwoMicroSymbol a = symbol_product(split, 1, scalar_from(TestFunction::bump(1, 1.2)), psi,
                                      eta_one());

    std::vector<double> diffs;
    for (double eps : {0.2, 0.1, 0.05}) {
        DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
        Field f = sample_data(pw, eps, g);
        double sym_route = expect_op(f, a, eps).real();
        double wig_route = expect_op_wigner(f, a, eps).real();
        diffs.push_back(std::abs(sym_route - wig_route));
    }
    double slope = std::log2(diffs[0] / diffs[1]);
    double slope2 = std::log2(diffs[1] / diffs[2]);
    CHECK(slope > 1.6);
    CHECK(slope < 2.4);
    CHECK(slope2 > 1.6);
    CHECK(slope2 < 2.4);
}

TEST_CASE("eta-independent two-micro pairing equals the plain pairing") {
    Grid g = Grid::make({1024}, {12.0});
    const double eps = 0.05;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    Field f = sample_data(pw, eps, g);
    TwoMicroSymbol a = symbol_position(ManifoldSplit::point(vec1(1.0)), 1,
                                       TestFunction::bump(1, 1.5));
    CHECK(std::abs(two_micro_expect(f, a, eps) - expect_op(f, a, eps)) < 1e-14);
}

TEST_CASE("two-micro pairing resolves the carrier concentration rate") {
    Grid g = Grid::make({4096}, {16.0});
    const double xi0 = 1.0;
    ManifoldSplit split = ManifoldSplit::point(vec1(xi0));
    TestFunction phi = TestFunction::bump(1, 1.5);
    ProfileSpec theta = ProfileSpec::gaussian(1, 1.0);

    // the carrier's eta-content is the envelope spectrum, which R = 4
    // captures up to an e^{-16}-size tail: the inner weight tends to the full
    // local mass, the complementary weight to zero
    TwoMicroSymbol a_in = symbol_product(split, 1, scalar_from(phi), scalar_one(),
                                         eta_chi_over(4.0));
    TwoMicroSymbol a_out = symbol_product(split, 1, scalar_from(phi), scalar_one(),
                                          eta_one_minus_chi_over(4.0));
    double want = 0;
    for (int j = 0; j < g.n[0]; ++j) {
        double x[1] = {g.point(0, j)};
        want += phi.eval(std::span<const double>(x, 1)) *
                sq(theta.eval(std::span<const double>(x, 1)));
    }
    want *= g.dx(0);

    double prev_in = 1e300;
    double vout_last = 0;
    for (double eps : {0.2, 0.05, 0.0125}) {
        DataFamily pw = PlaneWaveModulated{theta, vec1(xi0)};
        Field f = sample_data(pw, eps, g);
        double vin = two_micro_expect(f, a_in, eps).real();
        vout_last = std::abs(two_micro_expect(f, a_out, eps).real());
        CHECK(std::abs(vin - want) < prev_in + 1e-7);  // floor: the spectral tail
        prev_in = std::abs(vin - want);
    }
    CHECK(prev_in < 1e-4);
    CHECK(vout_last < 1e-6);
}

TEST_CASE("pairings of real factored symbols are real and uniformly bounded") {
    Grid g = Grid::make({1024}, {12.0});
    ManifoldSplit split = ManifoldSplit::point(vec1(1.0));
    TwoMicroSymbol a = symbol_product(split, 1, scalar_from(TestFunction::bump(1, 1.0)),
                                      scalar_one(), eta_chi_over(4.0));
    a = apply_cutoffs(a, {4.0, 0.5}, CutoffKind::Inner);
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
        DataFamily tw = TwoWave{ProfileSpec::gaussian(1, 1.0), ProfileSpec::gaussian(1, 0.8),
                                vec1(0.5), vec1(1.0)};
        Field f = sample_data(tw, eps, g);
        cplx v = two_micro_expect(f, a, eps);
        CHECK(std::abs(v.imag()) < 1e-10);
        CHECK(std::abs(v) <= a.sup_bound() * 1.05 * sq(l2_norm(f)));
    }
}

TEST_CASE("cutoff partition: outer + inner equals the delta-localized symbol") {
    ManifoldSplit split = ManifoldSplit::point(vec1(1.0));
    TwoMicroSymbol a = symbol_product(split, 1, scalar_from(TestFunction::bump(1, 1.0)),
                                      scalar_one(), eta_chi_over(16.0));
    CutoffParams c{4.0, 0.5};
    TwoMicroSymbol outer = apply_cutoffs(a, c, CutoffKind::Outer);
    TwoMicroSymbol inner = apply_cutoffs(a, c, CutoffKind::Inner);

    Rng rng(23);
    TwoMicroSymbol flat = symbol_position(split, 1, TestFunction::bump(1, 1.0));
    TwoMicroSymbol fo = apply_cutoffs(flat, c, CutoffKind::Outer);
    for (int trial = 0; trial < 200; ++trial) {
        double x[1] = {rng.uniform(-2, 2)};
        double xi[1] = {rng.uniform(0, 2)};
        double eta[1] = {rng.uniform(-12, 12)};
        std::span<const double> xs(x, 1), xis(xi, 1), etas(eta, 1);
        double lhs = outer.eval(xs, xis, etas) + inner.eval(xs, xis, etas);
        double rhs = a.eval(xs, xis, etas) * chi_radial(std::abs(xi[0] - 1.0) / c.delta);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        // outer of an eta-independent symbol vanishes inside |eta| <= R
        double eta_in[1] = {rng.uniform(-c.R, c.R)};
        CHECK(fo.eval(xs, xis, std::span<const double>(eta_in, 1)) == 0.0);
    }

    // inner with R beyond the band is the plain delta cutoff on a grid
    Grid g = Grid::make({1024}, {12.0});
    const double eps = 0.05;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    Field f = sample_data(pw, eps, g);
    TwoMicroSymbol huge = apply_cutoffs(flat, {1e9, c.delta}, CutoffKind::Inner);
    TwoMicroSymbol delta_only = flat;
    for (auto& t : delta_only.terms) {
        t.psi.is_one = false;
        double delta = c.delta;
        Eigen::VectorXd xi0 = split.xi0pp;
        t.psi.f = [delta, xi0](std::span<const double> xi) {
            return chi_radial(std::abs(xi[0] - xi0[0]) / delta);
        };
    }
    CHECK(std::abs(two_micro_expect(f, huge, eps) - two_micro_expect(f, delta_only, eps)) <
          1e-12);
}

TEST_CASE("time-averaged functional: stationary flow and linearity") {
    Grid g = Grid::make({512}, {12.0});
    const double eps = 0.1;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    Field u0 = sample_data(pw, eps, g);

    SymbolSpec zero;
    zero.dimension = 1;
    zero.order = 1;
    zero.eval = [](std::span<const double>) { return 0.0; };
    zero.grad = [](std::span<const double>) { return Eigen::VectorXd::Zero(1).eval(); };
    zero.hess = [](std::span<const double>) { return Eigen::MatrixXd::Zero(1, 1).eval(); };

    TimeWindow w{0.0, 1.0, 16, 1};
    EvolutionResult evo = free_evolve(u0, zero, eps, w);

    ManifoldSplit split = ManifoldSplit::point(vec1(1.0));
    TwoMicroSymbol a1 = symbol_position(split, 1, TestFunction::bump(1, 1.0));
    TwoMicroSymbol a2 = symbol_product(split, 1, scalar_from(TestFunction::gaussian(1, 2.0)),
                                       scalar_one(), eta_chi_over(4.0));
    cplx v1 = time_averaged_functional(evo, a1, w, eps);
    CHECK(std::abs(v1 - (w.b - w.a) * two_micro_expect(u0, a1, eps)) < 1e-10);

    TwoMicroSymbol sum = a1;
    sum.terms.push_back(a2.terms[0]);
    cplx vsum = time_averaged_functional(evo, sum, w, eps);
    cplx v2 = time_averaged_functional(evo, a2, w, eps);
    CHECK(std::abs(vsum - v1 - v2) < 1e-10);

    TimeWindow wide{0.0, 2.0, 16, 1};
    CHECK_THROWS_AS(time_averaged_functional(evo, a1, wide, eps), ContractError);
}

TEST_CASE("outer-cutoff functionals are near-invariant under the limit flow") {
    // composing the symbol with (x, eta) -> (x + s H eta/|eta|, eta) changes
    // the functional by O(delta) + O(1/R) + O(eps); a refined parameter
    // triple must beat a coarse one
    Grid g = Grid::make({4096}, {16.0});
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    const double xi0 = 1.0;
    const double hess = 8.0;  // lambda'' at xi0 = 1
    const double s = 0.3;
    ManifoldSplit split = ManifoldSplit::point(vec1(xi0));
    TestFunction phi = TestFunction::gaussian(1, 2.0);

    auto flowed_functional = [&](double eps, double R, double delta, bool compose) {
        // d = 1: eta/|eta| = sign(eta), so split the symbol by the sign of eta
        TwoMicroSymbol a;
        a.dim = 1;
        a.split = split;
        for (double sign : {1.0, -1.0}) {
            TwoMicroTerm t;
            double shift = compose ? s * hess * sign : 0.0;
            TestFunction moved = phi;
            moved.center = vec1(-shift);  // phi(x + shift)
            t.phi = scalar_from(moved);
            t.psi.is_one = false;
            t.psi.f = [xi0, delta](std::span<const double> xi) {
                return chi_radial(std::abs(xi[0] - xi0) / delta);
            };
            t.rho.is_one = false;
            t.rho.f = [R, sign](std::span<const double> eta) {
                double half = eta[0] * sign > 0 ? 1.0 : 0.0;
                return (1.0 - chi_radial(std::abs(eta[0]) / R)) * half;
            };
            t.rho.R0 = 2 * R;
            t.rho.boundary = [sign](std::span<const double> eta) {
                return eta[0] * sign > 0 ? 1.0 : 0.0;
            };
            a.terms.push_back(std::move(t));
        }
        DataFamily sd = ShiftedDegenerate{ProfileSpec::gaussian(1, 1.0), vec1(xi0), vec1(1.0),
                                          0.0, 0.25};
        Field u0 = sample_data(sd, eps, g);
        TimeWindow w{0.0, 0.5, 32, 1};
        EvolutionResult evo = free_evolve(u0, dw, eps, w);
        return time_averaged_functional(evo, a, w, eps).real();
    };

    auto gap = [&](double eps, double R, double delta) {
        return std::abs(flowed_functional(eps, R, delta, true) -
                        flowed_functional(eps, R, delta, false));
    };
    double coarse = gap(0.05, 2.0, 1.0);
    double fine = gap(0.0125, 6.0, 0.5);
    CHECK(fine < coarse);
    CHECK(fine < 0.1);
}

TEST_CASE("eta factors are constant along rays beyond their threshold") {
    Rng rng(31);
    for (const EtaFn& e : {eta_chi_over(3.0), eta_one_minus_chi_over(3.0)}) {
        for (int trial = 0; trial < 100; ++trial) {
            double r = rng.uniform(e.R0 + 0.1, 4 * e.R0);
            double sgn = rng.uniform(-1, 1) > 0 ? 1.0 : -1.0;
            double eta[1] = {sgn * r};
            double dir[1] = {sgn};
            CHECK(e.f(std::span<const double>(eta, 1)) ==
                  doctest::Approx(e.boundary(std::span<const double>(dir, 1))).epsilon(1e-14));
        }
    }
}
