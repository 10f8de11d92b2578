#include <doctest.h>

#include "oracles.hpp"
#include "semilab/predictions.hpp"

using namespace semilab;
using namespace semilab::testing;

namespace {

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

const TimeWindow kWindow{0.0, 1.0, 64, 1};

}  // namespace

TEST_CASE("two-wave limit: the critical branch's spreading profile mass") {
    // independent oracle: the closed-form spreading gaussian |u(t,x)|^2 with
    // H = lambda''(1) = 8, integrated against phi by Simpson in x and t
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    Grid g = Grid::make({1024}, {24.0});
    TestFunction phi = TestFunction::bump(1, 1.0);
    DataFamily tw = TwoWave{ProfileSpec::gaussian(1, 1.0), ProfileSpec::gaussian(1, 1.0),
                            vec1(0.5), vec1(1.0)};

    double oracle = simpson(
        [&](double t) {
            return simpson(
                [&](double x) {
                    double xv[1] = {x};
                    return phi.eval(std::span<const double>(xv, 1)) *
                           gaussian_free_density(8.0, 1.0, 0.0, t, x);
                },
                -1.0, 1.0, 400);
        },
        0.0, 1.0, 256);

    PredictedLimit p = predict_isolated(tw, dw, potential_zero(), phi, kWindow, g);
    CHECK(p.tag == PredictedLimit::Tag::ProfileDensity);
    CHECK(p.equality);
    CHECK(p.value == doctest::Approx(oracle).epsilon(5e-4));
}

TEST_CASE("coherent states and noncritical carriers disperse to zero") {
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    Grid g = Grid::make({512}, {16.0});
    TestFunction phi = TestFunction::bump(1, 1.0);

    DataFamily cs = CoherentState{ProfileSpec::gaussian(1, 1.0), vec1(0.0), vec1(1.0)};
    PredictedLimit pc = predict_isolated(cs, dw, potential_zero(), phi, kWindow, g);
    CHECK(pc.value == 0.0);
    CHECK(pc.tag == PredictedLimit::Tag::DispersedZero);
    CHECK(pc.equality);  // all critical points of the double well are nondegenerate

    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(0.5)};
    PredictedLimit pp = predict_isolated(pw, dw, potential_zero(), phi, kWindow, g);
    CHECK(pp.value == 0.0);

    SymbolSpec iso = builtin_symbol("iso_quadratic", {2, {}, 1});
    CHECK_THROWS_AS(predict_isolated(cs, builtin_symbol("manifold_quadratic", {2, {}, 1}),
                                     potential_zero(), phi, kWindow, g),
                    ContractError);
    (void)iso;
}

TEST_CASE("a degenerate critical point without the concentration criterion "
          "downgrades the claim to a lower bound") {
    SymbolSpec quartic = builtin_symbol("quartic_degenerate", {1, {}, 1});
    Grid g = Grid::make({512}, {16.0});
    TestFunction phi = TestFunction::bump(1, 1.0);

    DataFamily cs = CoherentState{ProfileSpec::gaussian(1, 1.0), vec1(0.0), vec1(0.0)};
    PredictedLimit pc = predict_isolated(cs, quartic, potential_zero(), phi, kWindow, g);
    CHECK(!pc.equality);

    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(0.0)};
    PredictedLimit pp = predict_isolated(pw, quartic, potential_zero(), phi, kWindow, g);
    CHECK(pp.equality);  // plane waves pass the concentration criterion
}

TEST_CASE("mass budget and monotonicity in phi") {
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    Grid g = Grid::make({1024}, {24.0});
    DataFamily tw = TwoWave{ProfileSpec::gaussian(1, 1.0), ProfileSpec::gaussian(1, 1.0),
                            vec1(0.5), vec1(1.0)};

    TestFunction small = TestFunction::bump(1, 1.0, 0.5);
    TestFunction big = TestFunction::bump(1, 1.0, 1.0);
    PredictedLimit ps = predict_isolated(tw, dw, potential_zero(), small, kWindow, g);
    PredictedLimit pb = predict_isolated(tw, dw, potential_zero(), big, kWindow, g);
    CHECK(ps.value <= pb.value);

    // strictly below the total mass: the noncritical branch is dispersed
    double total = sq(analytic_l2_norm(tw, 0.0125));
    CHECK(pb.value < (kWindow.b - kWindow.a) * big.sup() * total * 0.9);
}

TEST_CASE("identical phase-space data can have different limits") {
    // plane wave at the critical carrier vs the eps^beta-shifted variant:
    // same semiclassical datum, limits differ (profile mass vs zero)
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    Grid g = Grid::make({1024}, {24.0});
    TestFunction phi = TestFunction::bump(1, 1.0);

    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    DataFamily shifted = ShiftedDegenerate{ProfileSpec::gaussian(1, 1.0), vec1(1.0), vec1(1.0),
                                           0.0, 0.5};
    PredictedLimit a = predict_isolated(pw, dw, potential_zero(), phi, kWindow, g);
    PredictedLimit b = predict_isolated(shifted, dw, potential_zero(), phi, kWindow, g);
    CHECK(a.value > 0.1);
    CHECK(b.value == 0.0);
}

TEST_CASE("degenerate shifted data: stationary profile at alpha = 0") {
    SymbolSpec quartic = builtin_symbol("quartic_degenerate", {1, {}, 1});
    Grid g = Grid::make({512}, {16.0});
    TestFunction phi = TestFunction::bump(1, 1.0);
    ProfileSpec theta = ProfileSpec::gaussian(1, 0.5);

    DataFamily sd = ShiftedDegenerate{theta, vec1(0.0), vec1(1.0), 0.0, 0.75};
    PredictedLimit p = predict_degenerate(sd, quartic, phi, kWindow, g);
    // Hess(0) = 0 so the envelope never moves: (b-a) int phi |theta|^2
    double want = simpson(
        [&](double x) {
            double xv[1] = {x};
            return phi.eval(std::span<const double>(xv, 1)) * sq(theta.eval(xv));
        },
        -1.0, 1.0, 2000);
    CHECK(p.value == doctest::Approx(want).epsilon(1e-6));
    CHECK(p.tag == PredictedLimit::Tag::ProfileDensity);
}

TEST_CASE("degenerate shifted data: point mass at alpha > 0") {
    SymbolSpec quartic = builtin_symbol("quartic_degenerate", {1, {}, 1});
    Grid g = Grid::make({512}, {16.0});
    TestFunction phi = TestFunction::bump(1, 0.5);
    DataFamily sd = ShiftedDegenerate{ProfileSpec::gaussian(1, 0.5), vec1(0.0), vec1(1.0),
                                      0.3, 0.69};
    PredictedLimit p = predict_degenerate(sd, quartic, phi, kWindow, g);
    CHECK(p.value == doctest::Approx((kWindow.b - kWindow.a) * phi.amplitude));
    CHECK(p.tag == PredictedLimit::Tag::PointMass);

    // phi vanishing near the origin kills the point mass
    TestFunction away = TestFunction::bump_at(vec1(3.0), 0.5);
    CHECK(predict_degenerate(sd, quartic, away, kWindow, g).value == 0.0);

    // hypothesis violations
    DataFamily bad_beta = ShiftedDegenerate{ProfileSpec::gaussian(1, 0.5), vec1(0.0), vec1(1.0),
                                            0.3, 0.5};
    CHECK_THROWS_AS(predict_degenerate(bad_beta, quartic, phi, kWindow, g), ContractError);
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    DataFamily not_kernel = ShiftedDegenerate{ProfileSpec::gaussian(1, 0.5), vec1(1.0),
                                              vec1(1.0), 0.0, 0.75};
    CHECK_THROWS_AS(predict_degenerate(not_kernel, dw, phi, kWindow, g), ContractError);
}

TEST_CASE("manifold limit: concentrating data against the transverse spreading profile") {
    SymbolParams mp;
    mp.dimension = 2;
    mp.p = 1;
    SymbolSpec m = builtin_symbol("manifold_quadratic", mp);
    Grid g = Grid::make({64, 256}, {2.0, 20.0});

    const double sigma = 0.7;
    DataFamily mc = ManifoldConcentrating{ProfileSpec::gaussian(1, sigma),
                                          ProfileSpec::gaussian(1, 1.6), vec1(0.0), vec1(1.0),
                                          0.5};
    TestFunction phi;
    phi.kind = ProfileSpec::Kind::Bump;
    phi.dim = 2;
    phi.center = Eigen::VectorXd::Zero(2);
    phi.width = 2.0;
    phi.amplitude = 1.0;

    PredictedLimit p = predict_manifold(mc, m, potential_zero(), phi, kWindow, g);

    // independent oracle: Hess block = 2, 1-d spreading gaussian at x' = 0
    double oracle = simpson(
        [&](double t) {
            return simpson(
                [&](double y) {
                    double xv[2] = {0.0, y};
                    return phi.eval(std::span<const double>(xv, 2)) *
                           gaussian_free_density(2.0, sigma, 0.0, t, y);
                },
                -2.0, 2.0, 400);
        },
        0.0, 1.0, 256);
    CHECK(p.value == doctest::Approx(oracle).epsilon(5e-4));
    CHECK(p.tag == PredictedLimit::Tag::ManifoldProfile);
}

namespace {

// lambda(xi) = xi_2^4: critical manifold {xi_2 = 0} whose transverse Hessian
// vanishes on it, the deficient-rank setting of the shifted manifold data
SymbolSpec transverse_quartic_2d() {
    SymbolSpec s;
    s.dimension = 2;
    s.order = 4;
    s.name = "transverse_quartic";
    s.eval = [](std::span<const double> xi) { return sq(sq(xi[1])); };
    s.grad = [](std::span<const double> xi) {
        Eigen::VectorXd out(2);
        out << 0.0, 4.0 * xi[1] * sq(xi[1]);
        return out;
    };
    s.hess = [](std::span<const double> xi) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        h(1, 1) = 12.0 * sq(xi[1]);
        return h;
    };
    s.critical_set.kind = CriticalSet::Kind::AffineManifold;
    s.critical_set.r = 1;
    s.critical_set.p = 1;
    s.critical_set.xi0pp = Eigen::VectorXd::Zero(1);
    return s;
}

}  // namespace

TEST_CASE("manifold limit: shifted data produce the transverse point mass") {
    SymbolSpec m = transverse_quartic_2d();
    Grid g = Grid::make({128, 128}, {4.0, 16.0});

    ProfileSpec phi_prof = ProfileSpec::bump(1, 0.8);
    DataFamily ms = ManifoldShifted{ProfileSpec::gaussian(1, 0.7), phi_prof, vec1(1.0),
                                    vec1(1.0), 0.3, 0.69};
    TestFunction phi;
    phi.kind = ProfileSpec::Kind::Bump;
    phi.dim = 2;
    phi.center = Eigen::VectorXd::Zero(2);
    phi.width = 1.5;
    phi.amplitude = 1.0;

    PredictedLimit p = predict_manifold(ms, m, potential_zero(), phi, kWindow, g);
    double want = simpson(
        [&](double xp) {
            double xv[2] = {xp, 0.0};
            double pv[1] = {xp};
            return sq(phi_prof.eval(std::span<const double>(pv, 1))) *
                   phi.eval(std::span<const double>(xv, 2));
        },
        -0.8, 0.8, 2000);
    CHECK(p.value == doctest::Approx(want).epsilon(1e-4));
    CHECK(p.tag == PredictedLimit::Tag::ManifoldPointMass);

    // a test function supported away from {x'' = 0} sees nothing
    TestFunction away;
    away.kind = ProfileSpec::Kind::Bump;
    away.dim = 2;
    away.center = Eigen::VectorXd(2);
    away.center << 0.0, 5.0;
    away.width = 1.0;
    CHECK(predict_manifold(ms, m, potential_zero(), away, kWindow, g).value ==
          doctest::Approx(0.0));

    // alpha = 0: the transverse envelope stays put (zero transverse Hessian),
    // so the limit is the static density |phi_prof(x') theta(x'')|^2
    ProfileSpec theta = ProfileSpec::gaussian(1, 0.7);
    DataFamily ms0 = ManifoldShifted{theta, phi_prof, vec1(1.0), vec1(1.0), 0.0, 0.75};
    PredictedLimit p0 = predict_manifold(ms0, m, potential_zero(), phi, kWindow, g);
    double want0 = simpson(
        [&](double xp) {
            double pv[1] = {xp};
            double wp = sq(phi_prof.eval(std::span<const double>(pv, 1)));
            return wp * simpson(
                            [&](double y) {
                                double xv[2] = {xp, y};
                                double tv[1] = {y};
                                return phi.eval(std::span<const double>(xv, 2)) *
                                       sq(theta.eval(std::span<const double>(tv, 1)));
                            },
                            -3.0, 3.0, 400);
        },
        -0.8, 0.8, 400);
    CHECK(p0.value == doctest::Approx(want0).epsilon(1e-4));
    CHECK(p0.tag == PredictedLimit::Tag::ManifoldProfile);
}

TEST_CASE("support prediction lists the critical set") {
    CHECK(predict_support(builtin_symbol("iso_quadratic", {1, {}, 1})) ==
          "momentum support: {(0)}");
    CHECK(predict_support(builtin_symbol("double_well_1d", {1, {}, 1})) ==
          "momentum support: {(-1), (0), (1)}");
    SymbolParams mp;
    mp.dimension = 2;
    mp.p = 1;
    std::string s = predict_support(builtin_symbol("manifold_quadratic", mp));
    CHECK(s.find("affine manifold") != std::string::npos);
    CHECK(s.find("codimension 1") != std::string::npos);
}

TEST_CASE("rank-one consistency right-hand side") {
    SymbolSpec dw = builtin_symbol("double_well_1d", {1, {}, 1});
    Grid g = Grid::make({1024}, {24.0});
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};

    // multiplication-only symbol: equals the windowed profile density average
    TestFunction phi = TestFunction::bump(1, 1.0);
    TwoMicroSymbol a = symbol_position(ManifoldSplit::point(vec1(0.0)), 1, phi);
    RankOneConsistency mt =
        rank_one_consistency_rhs(pw, dw, potential_zero(), a, kWindow, 1e9, g);
    CHECK(!mt.zero_weak_limit);
    PredictedLimit p = predict_isolated(pw, dw, potential_zero(), phi, kWindow, g);
    CHECK(mt.value == doctest::Approx(p.value).epsilon(1e-10));

    // unit symbol with R beyond the band: (b-a) |weak limit|^2 by unitarity
    TwoMicroSymbol unit = symbol_product(ManifoldSplit::point(vec1(0.0)), 1, scalar_one(),
                                         scalar_one(), eta_one());
    RankOneConsistency mt1 = rank_one_consistency_rhs(pw, dw, potential_zero(), unit, kWindow, 1e9, g);
    CHECK(mt1.value == doctest::Approx(kWindow.b - kWindow.a).epsilon(1e-9));

    // zero weak limit flags and returns zero
    DataFamily cs = CoherentState{ProfileSpec::gaussian(1, 1.0), vec1(0.0), vec1(1.0)};
    RankOneConsistency mt0 = rank_one_consistency_rhs(cs, dw, potential_zero(), a, kWindow, 4.0, g);
    CHECK(mt0.zero_weak_limit);
    CHECK(mt0.value == 0.0);
}
