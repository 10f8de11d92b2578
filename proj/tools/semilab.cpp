// semilab: declarative experiment runner for semiclassical dispersive
// evolutions on periodic grids. Subcommands read a flat config file plus
// repeatable --set overrides and write CSV tables / binary states.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "semilab/experiments.hpp"

using namespace semilab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string dump_state;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file");
    cmd->add_option("--set", args.overrides, "override: section.key=value");
    cmd->add_option("--out", args.out_path, "output CSV path");
    cmd->add_option("--dump-state", args.dump_state, "binary state output path");
    cmd->add_option("--threads", args.threads, "worker threads (env SEMILAB_THREADS)");
}

ExperimentConfig load(const CommonArgs& args) {
    ConfigMap cfg =
        args.config_path.empty() ? ConfigMap{} : parse_config_file(args.config_path);
    for (const std::string& ov : args.overrides) apply_override(cfg, ov);
    ExperimentConfig e = ExperimentConfig::from_map(cfg);
    if (!args.out_path.empty()) e.out_table = args.out_path;
    if (!args.dump_state.empty()) e.out_state = args.dump_state;
    return e;
}

double pick_epsilon(const ExperimentConfig& cfg) {
    if (cfg.run_epsilon > 0) return cfg.run_epsilon;
    if (cfg.epsilons.empty()) throw ContractError("no epsilon available: set run.epsilon");
    return cfg.epsilons.front();
}

int run_table(const CommonArgs& args, ObservableKind force_obs, bool force_no_oracle) {
    ExperimentConfig cfg = load(args);
    cfg.observable = force_obs;
    if (force_no_oracle) cfg.oracle = OracleKind::None;
    ResultTable table = run_convergence(cfg, thread_count_from_env(args.threads));
    std::string csv = table_to_csv(table, cfg.runtime_mode);
    if (!cfg.out_table.empty()) {
        write_table_csv(table, cfg.out_table, cfg.runtime_mode);
        write_table_meta(table, cfg.out_table);
        std::printf("wrote %s (config %s)\n", cfg.out_table.c_str(), table.config_hash.c_str());
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    if (table.any_invalid()) {
        for (const ResultRow& r : table.rows)
            if (!r.valid)
                std::fprintf(stderr, "INVALID row eps=%g: %s\n", r.eps, r.guard_note.c_str());
        return kExitGuard;
    }
    return 0;
}

int cmd_converge(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    return run_table(args, cfg.observable, false);
}

int cmd_defect(const CommonArgs& args) {
    return run_table(args, ObservableKind::PositionDensity, true);
}

int cmd_twomicro(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    bool keep_oracle = cfg.oracle == OracleKind::RankOneConsistency;
    return run_table(args, ObservableKind::TwoMicro, !keep_oracle);
}

int cmd_smoothing(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    const auto* fam = std::get_if<PlaneWaveModulated>(&cfg.family);
    if (!fam)
        throw ValidationError({"smoothing: family must be plane_wave at a critical carrier"});
    SmoothingGridPolicy policy{cfg.box_half_len, cfg.grid_n};
    SmoothingReport report =
        blowup_exponent(*fam, cfg.symbol, cfg.potential, cfg.smoothing_s, cfg.smoothing_delta,
                        cfg.smoothing_ball, cfg.epsilons, policy, cfg.window);
    std::string out = "epsilon,S,fitted_slope,residual\r\n";
    for (const auto& [eps, S] : report.values) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\r\n", eps, S,
                      report.slope.value_or(0.0), report.residual.value_or(0.0));
        out += buf;
    }
    if (!cfg.out_table.empty()) {
        std::ofstream os(cfg.out_table, std::ios::binary);
        os << out;
        std::printf("wrote %s\n", cfg.out_table.c_str());
    } else {
        std::fputs(out.c_str(), stdout);
    }
    return 0;
}

int cmd_predict(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::vector<std::string> bad = validate(cfg);
    if (!bad.empty()) throw ValidationError(bad);
    Grid g = grid_for(cfg, cfg.epsilons.back());
    PredictedLimit p = predict_for(cfg, g);
    std::printf("%.17g\n%s: %s\n", p.value, tag_name(p.tag).c_str(), p.provenance.c_str());
    if (!p.equality) std::printf("note: lower bound only (degenerate critical point present)\n");
    return 0;
}

int cmd_evolve(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::vector<std::string> bad = validate(cfg);
    if (!bad.empty()) throw ValidationError(bad);
    double eps = pick_epsilon(cfg);
    Grid g = grid_for(cfg, eps);
    Field u0 = sample_data(cfg.family, eps, g);
    EvolutionResult evo = cfg.potential.is_zero()
                              ? free_evolve(u0, cfg.symbol, eps, cfg.window)
                              : strang_evolve(u0, cfg.symbol, cfg.potential, eps, cfg.window);
    double drift = evo.max_drift();
    std::string shape = std::to_string(g.n[0]);
    if (g.dim == 2) shape += "x" + std::to_string(g.n[1]);
    std::printf("eps=%g grid=%s steps=%d mass_drift=%.3g\n", eps, shape.c_str(),
                cfg.window.n_steps, drift);
    if (!cfg.out_state.empty()) {
        write_field(cfg.out_state, evo.snaps.back().u);
        std::printf("wrote %s\n", cfg.out_state.c_str());
    }
    double bound = cfg.potential.is_zero() ? 1e-13 : 1e-10;
    if (drift > bound) {
        std::fprintf(stderr, "mass drift %.3g exceeds %.1g\n", drift, bound);
        return kExitGuard;
    }
    return 0;
}

int cmd_wigner(const CommonArgs& args) {
    ExperimentConfig cfg = load(args);
    std::vector<std::string> bad = validate(cfg);
    if (!bad.empty()) throw ValidationError(bad);
    double eps = pick_epsilon(cfg);
    Grid g = grid_for(cfg, eps);
    if (g.dim != 1) throw ValidationError({"wigner: slices are available in d = 1 only"});
    Field u = sample_data(cfg.family, eps, g);
    if (cfg.wigner_time != 0.0) {
        TimeWindow w{0.0, cfg.wigner_time, cfg.window.n_steps, cfg.window.n_steps};
        u = cfg.potential.is_zero()
                ? propagate_free(u, cfg.symbol, eps, cfg.wigner_time)
                : strang_evolve(u, cfg.symbol, cfg.potential, eps, w).snaps.back().u;
    }
    WignerSlice W = wigner_transform(u, eps);
    if (!cfg.out_state.empty()) {
        W.write(cfg.out_state);
        std::printf("wrote %s\n", cfg.out_state.c_str());
    }
    std::vector<double> pos = W.position_marginal();
    std::vector<double> mom = W.momentum_marginal();
    std::string out = "x,position_marginal,xi,momentum_marginal\r\n";
    for (int j = 0; j < W.n(); ++j) {
        int q = (j + W.n() / 2) % W.n();  // ascending xi order
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\r\n", g.point(0, j), pos[j],
                      W.xi(q), mom[q]);
        out += buf;
    }
    std::string path = cfg.out_table.empty() ? "wigner_marginals.csv" : cfg.out_table;
    std::ofstream os(path, std::ios::binary);
    os << out;
    std::printf("wrote %s (imag residue %.3g)\n", path.c_str(), W.max_imag_residue);
    return 0;
}

int cmd_list_catalog() {
    std::printf("symbols:\n");
    std::printf("  iso_quadratic            |xi|^2, critical point 0 (nondegenerate)\n");
    std::printf("  shifted_quadratic        |xi - xi0|^2 (symbol.xi0)\n");
    std::printf("  quartic_degenerate       sum_{i<d} xi_i^2 + xi_d^4, degenerate at 0\n");
    std::printf("  double_well_1d           (xi^2-1)^2, critical points {-1, 0, 1}\n");
    std::printf("  manifold_quadratic       |xi''|^2, critical manifold {xi'' = 0} (symbol.p)\n");
    std::printf("potentials: zero | gaussian_bump(center,width,height) | cosine(amplitudes)\n");
    std::printf("families:\n");
    std::printf("  plane_wave               theta(x) e^{i xi0.x/eps}\n");
    std::printf("  two_wave                 theta1 e^{i xi1.x/eps} + theta2 e^{i xi2.x/eps}\n");
    std::printf("  coherent_state           eps^{-d/4} theta((x-x0)/sqrt(eps)) e^{i xi0.x/eps}\n");
    std::printf("  shifted_degenerate       eps^{-ad/2} theta(x/eps^a) e^{i x.(xi0+eps^b w0)/eps}\n");
    std::printf("  manifold_concentrating   eps^{-ar/2} phi((x'-z0)/eps^a) theta(x'') e^{i x'.zeta0/eps}\n");
    std::printf("  manifold_shifted         eps^{-ap/2} theta(x''/eps^a) phi(x') e^{i(x'.xi0' + eps^b x''.w0)/eps}\n");
    std::printf("profiles: gaussian(width,center) | bump(width,center), L2-normalized\n");
    std::printf("observables: position_density | two_micro (cutoff inner|outer, R, delta) | "
                "smoothing (s, ball, delta_t)\n");
    std::printf("oracles: none | isolated | degenerate | manifold | mt_consistency\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for semiclassical dispersion on periodic grids"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string mode;
    for (const char* name : {"evolve", "defect", "wigner", "twomicro", "smoothing", "predict",
                             "converge", "list-catalog"}) {
        CLI::App* cmd = app.add_subcommand(name);
        if (std::string(name) != "list-catalog") add_common(cmd, args);
        cmd->callback([&mode, name] { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);
    try {
        if (mode == "converge") return cmd_converge(args);
        if (mode == "defect") return cmd_defect(args);
        if (mode == "twomicro") return cmd_twomicro(args);
        if (mode == "smoothing") return cmd_smoothing(args);
        if (mode == "predict") return cmd_predict(args);
        if (mode == "evolve") return cmd_evolve(args);
        if (mode == "wigner") return cmd_wigner(args);
        if (mode == "list-catalog") return cmd_list_catalog();
    } catch (const ValidationError& err) {
        std::fprintf(stderr, "%s\n", err.what());
        return kExitValidation;
    } catch (const GuardError& err) {
        std::fprintf(stderr, "guard: %s\n", err.what());
        return kExitGuard;
    } catch (const ContractError& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitValidation;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
