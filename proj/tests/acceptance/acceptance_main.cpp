// Acceptance suite: runs every headline check at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero on any failure.
//
// Usage: acceptance [config_dir]   (default: ./configs)
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "semilab/cutoff.hpp"
#include "semilab/experiments.hpp"

using namespace semilab;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] %02d %-28s %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

Eigen::VectorXd vec1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

std::string g_config_dir = "configs";

ExperimentConfig load_config(const std::string& name) {
    return ExperimentConfig::from_map(parse_config_file(g_config_dir + "/" + name));
}

int worker_threads() { return 4; }

const std::vector<double> kSchedule{0.2, 0.1, 0.05, 0.025, 0.0125, 0.00625};

// --- 1: mass conservation across the catalog --------------------------------

Field sample_on_auto_grid(const DataFamily& fam, double eps, const std::vector<double>& L,
                          Grid* out_grid) {
    Grid g = Grid::make(required_n(fam, eps, L), L);
    *out_grid = g;
    return sample_data(fam, eps, g);
}

void criterion_unitarity() {
    struct Combo {
        std::string label;
        SymbolSpec sym;
        DataFamily fam;
        std::vector<double> L;
    };
    SymbolParams p1{1, {}, 1};
    SymbolParams p1s{1, vec1(1.0), 1};
    SymbolParams p2m{2, {}, 1};
    ProfileSpec g1 = ProfileSpec::gaussian(1, 1.0);
    std::vector<Combo> combos;
    combos.push_back({"iso+plane_wave", builtin_symbol("iso_quadratic", p1),
                      PlaneWaveModulated{g1, vec1(1.0)}, {16.0}});
    combos.push_back({"shifted+coherent", builtin_symbol("shifted_quadratic", p1s),
                      CoherentState{g1, vec1(0.0), vec1(1.0)}, {16.0}});
    combos.push_back({"quartic+shifted_degenerate", builtin_symbol("quartic_degenerate", p1),
                      ShiftedDegenerate{ProfileSpec::gaussian(1, 0.5), vec1(0.0), vec1(1.0),
                                        0.0, 0.75},
                      {16.0}});
    combos.push_back({"double_well+two_wave", builtin_symbol("double_well_1d", p1),
                      TwoWave{g1, g1, vec1(0.5), vec1(1.0)}, {16.0}});
    combos.push_back({"manifold+concentrating", builtin_symbol("manifold_quadratic", p2m),
                      ManifoldConcentrating{ProfileSpec::gaussian(1, 0.7),
                                            ProfileSpec::bump(1, 2.0), vec1(0.0), vec1(1.0),
                                            0.5},
                      {2.0, 16.0}});
    combos.push_back({"manifold+shifted", builtin_symbol("manifold_quadratic", p2m),
                      ManifoldShifted{ProfileSpec::gaussian(1, 0.7), ProfileSpec::bump(1, 0.8),
                                      vec1(1.0), vec1(1.0), 0.0, 0.75},
                      {2.0, 16.0}});

    double worst_free = 0, worst_strang = 0;
    std::string worst_at = "-";
    bool pass = true;
    for (const Combo& c : combos) {
        for (double eps : kSchedule) {
            Grid g;
            Field u0 = sample_on_auto_grid(c.fam, eps, c.L, &g);
            TimeWindow w{0.0, 1.0, 64, 8};
            double df = free_evolve(u0, c.sym, eps, w).max_drift();
            std::vector<double> amps(c.L.size(), 1.0);
            PotentialSpec V = potential_cosine(amps, c.L);
            double ds = strang_evolve(u0, c.sym, V, eps, w).max_drift();
            if (df > worst_free) {
                worst_free = df;
                worst_at = c.label + fmt(" eps=%g", eps);
            }
            worst_strang = std::max(worst_strang, ds);
            if (df >= 1e-13 || ds >= 1e-10) pass = false;
        }
    }
    report(1, "mass conservation", pass,
           fmt("max drift free %.2e (<1e-13), strang %.2e (<1e-10), worst at %s", worst_free,
               worst_strang, worst_at.c_str()));
}

// --- 2: wigner marginal identities ------------------------------------------

void criterion_wigner_marginals() {
    Grid g = Grid::make({2048}, {16.0});
    ProfileSpec g1 = ProfileSpec::gaussian(1, 1.0);
    std::vector<std::pair<std::string, DataFamily>> fams = {
        {"plane_wave", PlaneWaveModulated{g1, vec1(1.0)}},
        {"two_wave", TwoWave{g1, ProfileSpec::gaussian(1, 0.8), vec1(0.5), vec1(1.0)}},
        {"coherent_state", CoherentState{g1, vec1(0.0), vec1(1.0)}},
        {"shifted_degenerate",
         ShiftedDegenerate{ProfileSpec::gaussian(1, 0.7), vec1(0.0), vec1(1.0), 0.0, 0.75}},
    };
    double worst = 0;
    std::string worst_at = "-";
    for (const auto& [name, fam] : fams) {
        for (double eps : {0.05, 0.0125}) {
            Field f = sample_data(fam, eps, g);
            WignerSlice W = wigner_transform(f, eps);
            auto pos = W.position_marginal();
            double perr = 0, pscale = 0;
            for (int j = 0; j < g.n[0]; ++j) {
                perr = std::max(perr, std::abs(pos[j] - std::norm(f.v[j])));
                pscale = std::max(pscale, std::norm(f.v[j]));
            }
            FreqField F = to_frequency(f);
            auto mom = W.momentum_marginal();
            double merr = 0, mscale = 0;
            for (int q = 0; q < g.n[0]; ++q) {
                double want = std::norm(F.c[q]) / (2 * pi * eps);
                merr = std::max(merr, std::abs(mom[q] - want));
                mscale = std::max(mscale, want);
            }
            double rel = std::max(perr / pscale, merr / mscale);
            if (rel > worst) {
                worst = rel;
                worst_at = name + fmt(" eps=%g", eps);
            }
        }
    }
    report(2, "wigner marginals (N=2048)", worst < 1e-10,
           fmt("max relative marginal error %.2e (<1e-10) at %s", worst, worst_at.c_str()));
}

// --- helpers for table-driven criteria --------------------------------------

struct TableOutcome {
    ResultTable table;
    bool all_valid = true;
    bool gap_monotone = true;
};

TableOutcome run_table(const ExperimentConfig& cfg, int threads = 1) {
    TableOutcome out;
    out.table = run_convergence(cfg, threads);
    double prev = 1e300;
    for (const ResultRow& r : out.table.rows) {
        if (!r.valid) out.all_valid = false;
        if (r.gap) {
            if (*r.gap > prev) out.gap_monotone = false;
            prev = *r.gap;
        }
    }
    return out;
}

// --- 3: non-dispersion at a nondegenerate critical point --------------------

void criterion_two_wave() {
    TableOutcome out = run_table(load_config("twowave.cfg"), worker_threads());
    const ResultRow& last = out.table.rows.back();
    double rel = *last.gap / *last.predicted;
    bool pass = out.all_valid && out.gap_monotone && rel < 0.05;
    report(3, "two-wave profile limit", pass,
           fmt("gap monotone=%d, final gap %.3g = %.2f%% of predicted %.6g (<5%%)",
               out.gap_monotone, *last.gap, 100 * rel, *last.predicted));
}

// --- 4: coherent states disperse --------------------------------------------

void criterion_coherent() {
    TableOutcome out = run_table(load_config("coherent.cfg"), worker_threads());
    double first = out.table.rows.front().measured;
    double smallest = out.table.rows.back().measured;
    double ratio = smallest / first;
    bool pass = out.all_valid && ratio < 0.10;
    report(4, "coherent-state dispersion", pass,
           fmt("measured %.4g -> %.4g, ratio %.1f%% (<10%%), rows valid=%d", first, smallest,
               100 * ratio, out.all_valid));
}

// --- 5, 6: degenerate shifted data ------------------------------------------

void criterion_degenerate_profile() {
    TableOutcome out = run_table(load_config("degenerate_profile.cfg"), worker_threads());
    const ResultRow& last = out.table.rows.back();
    double rel = *last.gap / *last.predicted;
    bool pass = out.all_valid && out.gap_monotone && rel < 0.05;
    report(5, "degenerate data, alpha = 0", pass,
           fmt("gap monotone=%d, final %.6g vs %.6g (%.3f%% < 5%%)", out.gap_monotone,
               last.measured, *last.predicted, 100 * rel));
}

void criterion_degenerate_point_mass() {
    TableOutcome out = run_table(load_config("degenerate_point_mass.cfg"), worker_threads());
    const ResultRow& last = out.table.rows.back();
    double rel = *last.gap / *last.predicted;
    bool pass = out.all_valid && out.gap_monotone && rel < 0.07;
    report(6, "degenerate data, point mass", pass,
           fmt("gap monotone=%d, final %.6g vs %.6g (%.2f%% < 7%%)", out.gap_monotone,
               last.measured, *last.predicted, 100 * rel));
}

// --- 7: concentration criterion separation ----------------------------------

void criterion_separation() {
    Grid g = Grid::make({4096}, {16.0});
    const double R = 4.0, delta = 0.5, eps = 0.00625;
    DataFamily pw = PlaneWaveModulated{ProfileSpec::gaussian(1, 1.0), vec1(1.0)};
    double v_pw = concentration_criterion(pw, vec1(1.0), eps, R, delta, g);
    DataFamily sd = ShiftedDegenerate{ProfileSpec::gaussian(1, 1.0), vec1(0.0), vec1(1.0),
                                      0.0, 0.25};
    double v_sd = concentration_criterion(sd, vec1(0.0), eps, R, delta, g);
    bool pass = v_pw < 0.05 && v_sd > 0.9;
    report(7, "criterion separation", pass,
           fmt("plane wave %.2e (<0.05), shifted %.4f (>0.9) at eps=%g, R=4, delta=0.5", v_pw,
               v_sd, eps));
}

// --- 8: rank-one operator consistency ----------------------------------------

void criterion_mt_consistency() {
    TableOutcome out = run_table(load_config("rank_one.cfg"), worker_threads());
    const ResultRow& last = out.table.rows.back();
    double rel = *last.gap / *last.predicted;
    bool pass = out.all_valid && out.gap_monotone && rel < 0.05;
    report(8, "rank-one consistency", pass,
           fmt("gap monotone=%d, |lhs-rhs| %.3g = %.4f%% of rhs (<5%%)", out.gap_monotone,
               *last.gap, 100 * rel));
}

// --- 9: affine critical manifold ---------------------------------------------

void criterion_manifold() {
    TableOutcome out = run_table(load_config("manifold.cfg"), 1);
    const ResultRow& last = out.table.rows.back();
    double rel = *last.gap / *last.predicted;
    bool pass = out.all_valid && rel < 0.07;
    report(9, "critical manifold (d=2)", pass,
           fmt("measured %.6g vs predicted %.6g at eps=%g (%.2f%% < 7%%)", last.measured,
               *last.predicted, last.eps, 100 * rel));
}

// --- 10: smoothing blowup -----------------------------------------------------

void criterion_smoothing() {
    ExperimentConfig cfg = load_config("smoothing.cfg");
    const auto* fam = std::get_if<PlaneWaveModulated>(&cfg.family);
    SmoothingGridPolicy policy{cfg.box_half_len, cfg.grid_n};
    SmoothingReport rep = blowup_exponent(*fam, cfg.symbol, cfg.potential, cfg.smoothing_s,
                                          cfg.smoothing_delta, cfg.smoothing_ball, cfg.epsilons,
                                          policy, cfg.window);
    bool pass = rep.slope && std::abs(*rep.slope + 1.0) < 0.1;
    report(10, "smoothing blowup slope", pass,
           fmt("fitted slope %.4f (want -1 +- 0.1), residual %.3g", rep.slope.value_or(0.0),
               rep.residual.value_or(-1.0)));
}

// --- 11: strang self-convergence ----------------------------------------------

void criterion_strang_order() {
    Grid g = Grid::make({256}, {8.0});
    SymbolSpec iso = builtin_symbol("iso_quadratic", {1, {}, 1});
    PotentialSpec V = potential_cosine({1.0}, {8.0});
    ProfileSpec prof = ProfileSpec::gaussian(1, 1.0);
    Field u0(g);
    for (int j = 0; j < g.n[0]; ++j) {
        double x[1] = {g.point(0, j)};
        u0.v[j] = prof.eval(std::span<const double>(x, 1));
    }
    auto final_state = [&](int n) {
        TimeWindow w{0.0, 1.0, n, n};
        return strang_evolve(u0, iso, V, 1.0, w).snaps.back().u;
    };
    Field ref = final_state(128);
    auto err = [&](const Field& u) {
        Field d(u.grid);
        for (std::size_t i = 0; i < u.size(); ++i) d.v[i] = u.v[i] - ref.v[i];
        return l2_norm(d);
    };
    double order = std::log2(err(final_state(16)) / err(final_state(32)));
    report(11, "strang order", std::abs(order - 2.0) < 0.1,
           fmt("observed order %.3f against the dt/8 reference (want 2.0 +- 0.1)", order));
}

// --- 12: property suite summary ------------------------------------------------

void criterion_properties() {
    bool pass = true;
    std::string note;

    // derivative consistency across the catalog
    double worst = 0;
    for (const std::string& tag : builtin_symbol_tags()) {
        SymbolParams p;
        p.dimension = tag == "double_well_1d" ? 1 : 2;
        p.p = 1;
        if (tag == "shifted_quadratic") {
            p.xi0 = Eigen::VectorXd(2);
            p.xi0 << 0.5, -1.0;
        }
        DerivativeCheck chk = check_derivatives(builtin_symbol(tag, p));
        worst = std::max({worst, chk.max_grad_rel_err, chk.max_hess_rel_err});
    }
    if (worst > 1e-6) {
        pass = false;
        note += fmt("derivative err %.2e; ", worst);
    }

    // cutoff support properties
    bool chi_ok = chi_radial(1.0) == 1.0 && chi_radial(2.0) == 0.0;
    for (double r = 0; r <= 3.0; r += 1.0 / 64) {
        double v = chi_radial(r);
        if (v < 0 || v > 1) chi_ok = false;
    }
    if (!chi_ok) {
        pass = false;
        note += "chi support broken; ";
    }

    // cutoff partition identity on sampled points
    ManifoldSplit split = ManifoldSplit::point(vec1(1.0));
    TwoMicroSymbol a = symbol_product(split, 1, scalar_from(TestFunction::bump(1, 1.0)),
                                      scalar_one(), eta_chi_over(16.0));
    CutoffParams c{4.0, 0.5};
    TwoMicroSymbol outer = apply_cutoffs(a, c, CutoffKind::Outer);
    TwoMicroSymbol inner = apply_cutoffs(a, c, CutoffKind::Inner);
    Rng rng(5);
    double worst_part = 0;
    for (int i = 0; i < 500; ++i) {
        double x[1] = {rng.uniform(-2, 2)}, xi[1] = {rng.uniform(0, 2)},
               eta[1] = {rng.uniform(-12, 12)};
        std::span<const double> xs(x, 1), xis(xi, 1), es(eta, 1);
        double lhs = outer.eval(xs, xis, es) + inner.eval(xs, xis, es);
        double rhs = a.eval(xs, xis, es) * chi_radial(std::abs(xi[0] - 1.0) / c.delta);
        worst_part = std::max(worst_part, std::abs(lhs - rhs));
    }
    if (worst_part > 1e-12) {
        pass = false;
        note += fmt("partition identity err %.2e; ", worst_part);
    }

    // determinism: identical config, identical bytes
    ExperimentConfig small = load_config("twowave_small.cfg");
    std::string csv1 = table_to_csv(run_convergence(small, 1), RuntimeMode::None);
    std::string csv2 = table_to_csv(run_convergence(small, 2), RuntimeMode::None);
    if (csv1 != csv2) {
        pass = false;
        note += "determinism broken; ";
    }

    if (note.empty())
        note = fmt("derivatives %.1e, chi support, partition %.1e, byte determinism", worst,
                   worst_part);
    report(12, "property suites", pass, note);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_config_dir = argv[1];
    auto t0 = std::chrono::steady_clock::now();
    try {
        criterion_unitarity();
        criterion_wigner_marginals();
        criterion_two_wave();
        criterion_coherent();
        criterion_degenerate_profile();
        criterion_degenerate_point_mass();
        criterion_separation();
        criterion_mt_consistency();
        criterion_manifold();
        criterion_smoothing();
        criterion_strang_order();
        criterion_properties();
    } catch (const std::exception& e) {
        std::printf("[FAIL] -- acceptance aborted: %s\n", e.what());
        return 1;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d/12 criteria passed in %.1f s\n", 12 - g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
