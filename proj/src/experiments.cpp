#include "semilab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "semilab/cutoff.hpp"

namespace semilab {

const char* kCodeVersion = "semilab 1.0.0";

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

Eigen::VectorXd parse_vec(const std::string& v) {
    auto lst = parse_list(v);
    Eigen::VectorXd out(lst.size());
    for (std::size_t i = 0; i < lst.size(); ++i) out[i] = lst[i];
    return out;
}

const std::string* find(const ConfigMap& cfg, const std::string& key) {
    auto it = cfg.find(key);
    return it == cfg.end() ? nullptr : &it->second;
}

std::string get_str(const ConfigMap& cfg, const std::string& key, const std::string& dflt) {
    const std::string* v = find(cfg, key);
    return v ? *v : dflt;
}

double get_num(const ConfigMap& cfg, const std::string& key, double dflt) {
    const std::string* v = find(cfg, key);
    return v ? std::stod(*v) : dflt;
}

ProfileSpec parse_profile(const ConfigMap& cfg, const std::string& prefix, int dim) {
    std::string kind = get_str(cfg, prefix + ".kind", "gaussian");
    double width = get_num(cfg, prefix + ".width", 1.0);
    Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
    if (const std::string* c = find(cfg, prefix + ".center")) center = parse_vec(*c);
    if (center.size() != dim) throw ContractError(prefix + ": center dimension mismatch");
    if (kind == "gaussian") return ProfileSpec::gaussian(dim, width, center);
    if (kind == "bump") return ProfileSpec::bump(dim, width, center);
    throw ContractError(prefix + ": unknown profile kind '" + kind + "'");
}

TestFunction parse_test_function(const ConfigMap& cfg, const std::string& prefix, int dim) {
    TestFunction t;
    std::string kind = get_str(cfg, prefix + ".kind", "bump");
    t.kind = kind == "gaussian" ? ProfileSpec::Kind::Gaussian : ProfileSpec::Kind::Bump;
    if (kind != "gaussian" && kind != "bump")
        throw ContractError(prefix + ": unknown test-function kind '" + kind + "'");
    t.dim = dim;
    t.width = get_num(cfg, prefix + ".width", 1.0);
    t.amplitude = get_num(cfg, prefix + ".amplitude", 1.0);
    t.center = Eigen::VectorXd::Zero(dim);
    if (const std::string* c = find(cfg, prefix + ".center")) t.center = parse_vec(*c);
    if (t.center.size() != dim) throw ContractError(prefix + ": center dimension mismatch");
    return t;
}

DataFamily parse_family(const ConfigMap& cfg, int dim) {
    std::string variant = get_str(cfg, "family.variant", "plane_wave");
    if (variant == "plane_wave") {
        PlaneWaveModulated f;
        f.theta = parse_profile(cfg, "family.theta", dim);
        f.xi0 = parse_vec(get_str(cfg, "family.xi0", "1"));
        return f;
    }
    if (variant == "two_wave") {
        TwoWave f;
        f.theta1 = parse_profile(cfg, "family.theta1", dim);
        f.theta2 = parse_profile(cfg, "family.theta2", dim);
        f.xi1 = parse_vec(get_str(cfg, "family.xi1", "0.5"));
        f.xi2 = parse_vec(get_str(cfg, "family.xi2", "1"));
        return f;
    }
    if (variant == "coherent_state") {
        CoherentState f;
        f.theta = parse_profile(cfg, "family.theta", dim);
        f.x0 = Eigen::VectorXd::Zero(dim);
        if (const std::string* c = find(cfg, "family.x0")) f.x0 = parse_vec(*c);
        f.xi0 = parse_vec(get_str(cfg, "family.xi0", "1"));
        return f;
    }
    if (variant == "shifted_degenerate") {
        ShiftedDegenerate f;
        f.theta = parse_profile(cfg, "family.theta", dim);
        f.xi0 = parse_vec(get_str(cfg, "family.xi0", "0"));
        f.omega0 = parse_vec(get_str(cfg, "family.omega0", "1"));
        f.alpha = get_num(cfg, "family.alpha", 0.0);
        f.beta = get_num(cfg, "family.beta", 0.75);
        return f;
    }
    if (variant == "manifold_concentrating") {
        ManifoldConcentrating f;
        Eigen::VectorXd zeta0 = parse_vec(get_str(cfg, "family.zeta0", "1"));
        int r = static_cast<int>(zeta0.size());
        f.phi = parse_profile(cfg, "family.phi", r);
        f.theta = parse_profile(cfg, "family.theta", dim - r);
        f.zeta0 = zeta0;
        f.z0 = Eigen::VectorXd::Zero(r);
        if (const std::string* c = find(cfg, "family.z0")) f.z0 = parse_vec(*c);
        f.alpha = get_num(cfg, "family.alpha", 0.5);
        return f;
    }
    if (variant == "manifold_shifted") {
        ManifoldShifted f;
        Eigen::VectorXd xi0p = parse_vec(get_str(cfg, "family.xi0p", "1"));
        int r = static_cast<int>(xi0p.size());
        f.phi = parse_profile(cfg, "family.phi", r);
        f.theta = parse_profile(cfg, "family.theta", dim - r);
        f.xi0p = xi0p;
        f.omega0 = parse_vec(get_str(cfg, "family.omega0", "1"));
        f.alpha = get_num(cfg, "family.alpha", 0.0);
        f.beta = get_num(cfg, "family.beta", 0.75);
        return f;
    }
    throw ContractError("unknown family variant '" + variant + "'");
}

// eta-band component near the critical set: the content whose group velocity
// stays bounded as eps -> 0 and whose wrap-around would corrupt the window.
std::vector<cplx> band_mask(const Grid& g, const SymbolSpec& sym, double eps, double band_k) {
    const CriticalSet& cs = sym.critical_set;
    return multiplier_table(g, [&](std::span<const double> zeta) -> cplx {
        double dist = 0;
        if (cs.kind == CriticalSet::Kind::FinitePoints) {
            dist = 1e300;
            for (const CriticalPoint& cp : cs.points) {
                double d2 = 0;
                for (int a = 0; a < g.dim; ++a) d2 += sq(zeta[a] - cp.location[a] / eps);
                dist = std::min(dist, std::sqrt(d2));
            }
        } else if (cs.kind == CriticalSet::Kind::AffineManifold) {
            double d2 = 0;
            for (int i = 0; i < cs.p; ++i) d2 += sq(zeta[cs.r + i] - cs.xi0pp[i] / eps);
            dist = std::sqrt(d2);
        } else {
            return 0.0;
        }
        return chi_radial(dist / band_k);
    });
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ContractError("config line " + std::to_string(lineno) +
                                ": expected 'section.key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ContractError("config line " + std::to_string(lineno) + ": empty key or value");
        cfg[key] = val;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ContractError("cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(ConfigMap& cfg, const std::string& key_eq_value) {
    std::size_t eq = key_eq_value.find('=');
    if (eq == std::string::npos) throw ContractError("--set expects key=value");
    cfg[trim(key_eq_value.substr(0, eq))] = trim(key_eq_value.substr(eq + 1));
}

std::string canonical_config(const ConfigMap& cfg) {
    std::string out;
    for (const auto& [k, v] : cfg) out += k + "=" + v + "\n";
    return out;
}

std::string config_hash(const ConfigMap& cfg) {
    std::string c = canonical_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig ExperimentConfig::from_map(const ConfigMap& cfg) {
    ExperimentConfig e;
    e.raw = cfg;

    e.box_half_len = parse_list(get_str(cfg, "grid.L", "16"));
    const int dim = static_cast<int>(e.box_half_len.size());
    std::string n_str = get_str(cfg, "grid.N", "auto");
    if (n_str != "auto") {
        std::vector<int> n;
        for (double x : parse_list(n_str)) n.push_back(static_cast<int>(x));
        if (static_cast<int>(n.size()) == 1 && dim == 2) n.push_back(n[0]);
        e.grid_n = n;
    }

    SymbolParams sp;
    sp.dimension = dim;
    if (const std::string* v = find(cfg, "symbol.xi0")) sp.xi0 = parse_vec(*v);
    sp.p = static_cast<int>(get_num(cfg, "symbol.p", 1));
    e.symbol = builtin_symbol(get_str(cfg, "symbol.tag", "iso_quadratic"), sp);

    std::string pot = get_str(cfg, "potential.tag", "zero");
    if (pot == "zero") {
        e.potential = potential_zero();
    } else if (pot == "cosine") {
        auto amps = parse_list(get_str(cfg, "potential.amplitudes", "1"));
        e.potential = potential_cosine(amps, e.box_half_len);
    } else if (pot == "gaussian_bump") {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
        if (const std::string* v = find(cfg, "potential.center")) c = parse_vec(*v);
        e.potential = potential_gaussian_bump(c, get_num(cfg, "potential.width", 1.0),
                                              get_num(cfg, "potential.height", 1.0));
    } else {
        throw ContractError("unknown potential tag '" + pot + "'");
    }

    e.family = parse_family(cfg, dim);
    e.epsilons = parse_list(get_str(cfg, "schedule.epsilons", "0.2,0.1,0.05,0.025,0.0125,0.00625"));

    e.window.a = get_num(cfg, "window.a", 0.0);
    e.window.b = get_num(cfg, "window.b", 1.0);
    e.window.n_steps = static_cast<int>(get_num(cfg, "window.n_steps", 128));
    e.window.snapshot_stride = static_cast<int>(get_num(cfg, "window.stride", 1));

    std::string obs = get_str(cfg, "observable.kind", "position_density");
    if (obs == "position_density") e.observable = ObservableKind::PositionDensity;
    else if (obs == "two_micro") e.observable = ObservableKind::TwoMicro;
    else if (obs == "smoothing") e.observable = ObservableKind::Smoothing;
    else throw ContractError("unknown observable kind '" + obs + "'");

    e.phi = parse_test_function(cfg, "observable.phi", dim);
    e.cutoff.R = get_num(cfg, "observable.R", 4.0);
    e.cutoff.delta = get_num(cfg, "observable.delta", 0.5);
    std::string ck = get_str(cfg, "observable.cutoff", "none");
    if (ck == "inner") e.cutoff_kind = CutoffKind::Inner;
    else if (ck == "outer") e.cutoff_kind = CutoffKind::Outer;
    else if (ck != "none") throw ContractError("unknown cutoff kind '" + ck + "'");

    e.smoothing_s = get_num(cfg, "observable.s", 0.5);
    e.smoothing_ball.center = Eigen::VectorXd::Zero(dim);
    if (const std::string* v = find(cfg, "observable.ball_center"))
        e.smoothing_ball.center = parse_vec(*v);
    e.smoothing_ball.radius = get_num(cfg, "observable.ball_radius", 1.0);
    e.smoothing_delta = get_num(cfg, "observable.delta_t", 0.5);

    std::string oracle = get_str(cfg, "oracle.kind", "none");
    if (oracle == "none") e.oracle = OracleKind::None;
    else if (oracle == "isolated") e.oracle = OracleKind::Isolated;
    else if (oracle == "degenerate") e.oracle = OracleKind::Degenerate;
    else if (oracle == "manifold") e.oracle = OracleKind::Manifold;
    else if (oracle == "rank_one") e.oracle = OracleKind::RankOneConsistency;
    else throw ContractError("unknown oracle kind '" + oracle + "'");

    e.guard.boundary_threshold = get_num(cfg, "guard.boundary_threshold", 1e-6);
    e.guard.band_k = get_num(cfg, "guard.band_k", 8.0);
    e.guard.monitor_stride = static_cast<int>(get_num(cfg, "guard.monitor_stride", 8));
    e.guard.mass_drift_free = get_num(cfg, "guard.mass_drift_free", 1e-13);
    e.guard.mass_drift_strang = get_num(cfg, "guard.mass_drift_strang", 1e-10);

    std::string rt = get_str(cfg, "output.runtime", "wall");
    e.runtime_mode = rt == "none" ? RuntimeMode::None : RuntimeMode::Wall;
    e.out_table = get_str(cfg, "output.table", "");
    e.out_state = get_str(cfg, "output.state", "");
    e.run_epsilon = get_num(cfg, "run.epsilon", 0.0);
    e.wigner_time = get_num(cfg, "wigner.time", 0.0);
    return e;
}

Grid grid_for(const ExperimentConfig& cfg, double eps) {
    std::vector<int> n = cfg.grid_n ? *cfg.grid_n : required_n(cfg.family, eps, cfg.box_half_len);
    return Grid::make(n, cfg.box_half_len);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> bad;
    const int dim = static_cast<int>(cfg.box_half_len.size());

    if (cfg.epsilons.empty()) bad.push_back("schedule: the epsilon list is empty");
    for (std::size_t i = 0; i + 1 < cfg.epsilons.size(); ++i)
        if (cfg.epsilons[i] <= cfg.epsilons[i + 1]) {
            bad.push_back("schedule: epsilons must be strictly decreasing");
            break;
        }
    for (double e : cfg.epsilons)
        if (!(e > 0)) {
            bad.push_back("schedule: epsilons must be positive");
            break;
        }
    if (!(cfg.window.a < cfg.window.b))
        bad.push_back("window: need a < b for the averaging interval");
    if (cfg.window.n_steps < 1) bad.push_back("window: need n_steps >= 1");

    if (cfg.symbol.dimension != dim)
        bad.push_back("symbol: dimension does not match the grid box");
    if (family_dim(cfg.family) != dim)
        bad.push_back("family: dimension does not match the grid box");

    bool sched_ok = !cfg.epsilons.empty() && cfg.symbol.dimension == dim &&
                    family_dim(cfg.family) == dim && cfg.window.a < cfg.window.b;
    for (std::size_t i = 0; sched_ok && i < cfg.epsilons.size(); ++i)
        if (!(cfg.epsilons[i] > 0) ||
            (i + 1 < cfg.epsilons.size() && cfg.epsilons[i] <= cfg.epsilons[i + 1]))
            sched_ok = false;

    const double eps_min = sched_ok ? cfg.epsilons.back() : 0.0;

    if (sched_ok) {
        try {
            // family parameter ranges (alpha, beta, normalization)
            sample_data(cfg.family, cfg.epsilons.front(),
                        Grid::make(required_n(cfg.family, cfg.epsilons.front(), cfg.box_half_len),
                                   cfg.box_half_len));
        } catch (const ContractError& err) {
            bad.push_back(std::string("family: ") + err.what());
        }
    }

    // grid resolves the smallest eps
    if (sched_ok && cfg.grid_n) {
        std::vector<int> need = required_n(cfg.family, eps_min, cfg.box_half_len);
        for (int a = 0; a < dim; ++a)
            if ((*cfg.grid_n)[a] < need[a]) {
                std::string msg = "grid: N = (";
                for (int b = 0; b < dim; ++b)
                    msg += std::to_string((*cfg.grid_n)[b]) + (b + 1 < dim ? "," : ")");
                msg += " does not resolve the carrier at eps = " + std::to_string(eps_min) +
                       "; need (";
                for (int b = 0; b < dim; ++b)
                    msg += std::to_string(need[b]) + (b + 1 < dim ? "," : ")");
                bad.push_back(msg);
                break;
            }
    }

    // initial mass must sit inside the half box for every scheduled eps
    // (analytic per-axis bound through the product structure of each family)
    for (double eps : sched_ok ? cfg.epsilons : std::vector<double>{}) {
        std::vector<double> half = cfg.box_half_len;
        double mass_out = 0;
        std::visit(
            [&](const auto& f) {
                using T = std::decay_t<decltype(f)>;
                std::vector<double> zero(dim, 0.0);
                if constexpr (std::is_same_v<T, PlaneWaveModulated>) {
                    mass_out = f.theta.mass_outside_half_box(half, zero, 1.0);
                } else if constexpr (std::is_same_v<T, TwoWave>) {
                    mass_out = f.theta1.mass_outside_half_box(half, zero, 1.0) +
                               f.theta2.mass_outside_half_box(half, zero, 1.0);
                } else if constexpr (std::is_same_v<T, CoherentState>) {
                    std::vector<double> x0(f.x0.data(), f.x0.data() + f.x0.size());
                    mass_out = f.theta.mass_outside_half_box(half, x0, std::sqrt(eps));
                } else if constexpr (std::is_same_v<T, ShiftedDegenerate>) {
                    mass_out =
                        f.theta.mass_outside_half_box(half, zero, std::pow(eps, f.alpha));
                } else if constexpr (std::is_same_v<T, ManifoldConcentrating>) {
                    std::vector<double> half_r(half.begin(), half.begin() + f.phi.dim);
                    std::vector<double> half_p(half.begin() + f.phi.dim, half.end());
                    std::vector<double> z0(f.z0.data(), f.z0.data() + f.z0.size());
                    std::vector<double> zp(f.theta.dim, 0.0);
                    mass_out = f.phi.mass_outside_half_box(half_r, z0, std::pow(eps, f.alpha)) +
                               f.theta.mass_outside_half_box(half_p, zp, 1.0);
                } else if constexpr (std::is_same_v<T, ManifoldShifted>) {
                    std::vector<double> half_r(half.begin(), half.begin() + f.phi.dim);
                    std::vector<double> half_p(half.begin() + f.phi.dim, half.end());
                    std::vector<double> zr(f.phi.dim, 0.0);
                    std::vector<double> zp(f.theta.dim, 0.0);
                    mass_out = f.phi.mass_outside_half_box(half_r, zr, 1.0) +
                               f.theta.mass_outside_half_box(half_p, zp, std::pow(eps, f.alpha));
                }
            },
            cfg.family);
        if (mass_out >= 1e-10) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "grid: initial datum at eps = %g leaves mass %.3g outside the half box "
                          "[-L/2, L/2)^d (policy requires < 1e-10)",
                          eps, mass_out);
            bad.push_back(buf);
            break;
        }
    }

    // potential admissibility on the periodic box
    if (cfg.potential.kind == PotentialSpec::Kind::GaussianBump) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
        if (const std::string* v = find(cfg.raw, "potential.center")) c = parse_vec(*v);
        double w = get_num(cfg.raw, "potential.width", 1.0);
        double h = get_num(cfg.raw, "potential.height", 1.0);
        if (gaussian_bump_mass_outside_box(c, w, h, cfg.box_half_len) >= 1e-12)
            bad.push_back("potential: gaussian bump has mass >= 1e-12 outside the box; it would "
                          "wrap around the periodic domain");
    }

    // Strang step-size constraint
    if (!cfg.potential.is_zero()) {
        int need = strang_min_steps(cfg.potential, cfg.window);
        if (cfg.window.n_steps < need)
            bad.push_back("window: dt |V|_inf > 0.1; Strang splitting needs n_steps >= " +
                          std::to_string(need));
    }

    // family / symbol hypothesis compatibility for the selected oracle
    const bool dims_ok = cfg.symbol.dimension == dim && family_dim(cfg.family) == dim;
    const CriticalSet& cs = cfg.symbol.critical_set;
    if (dims_ok && (cfg.oracle == OracleKind::Isolated || cfg.oracle == OracleKind::RankOneConsistency)) {
        if (cs.kind != CriticalSet::Kind::FinitePoints)
            bad.push_back("oracle: isolated-point prediction needs a symbol with finitely many "
                          "critical points");
        if (const auto* f = std::get_if<TwoWave>(&cfg.family)) {
            std::vector<double> x1(f->xi1.data(), f->xi1.data() + f->xi1.size());
            std::vector<double> x2(f->xi2.data(), f->xi2.data() + f->xi2.size());
            if (classify_critical(cfg.symbol, x2).kind == Classification::Kind::NotCritical)
                bad.push_back("two_wave: xi2 must be a critical point of the symbol");
            if (classify_critical(cfg.symbol, x1).kind != Classification::Kind::NotCritical)
                bad.push_back("two_wave: xi1 must not be a critical point of the symbol");
        }
    }
    if (dims_ok && cfg.oracle == OracleKind::Degenerate) {
        const auto* f = std::get_if<ShiftedDegenerate>(&cfg.family);
        if (!f) {
            bad.push_back("oracle: degenerate prediction needs the shifted_degenerate family");
        } else {
            if (!cfg.potential.is_zero())
                bad.push_back("shifted_degenerate oracle: requires V = 0");
            if (!(f->beta > 2.0 / 3.0))
                bad.push_back("shifted_degenerate oracle: requires beta > 2/3");
            std::vector<double> loc(f->xi0.data(), f->xi0.data() + f->xi0.size());
            if (classify_critical(cfg.symbol, loc).kind == Classification::Kind::NotCritical) {
                bad.push_back("shifted_degenerate: xi0 must be a critical point of the symbol");
            } else {
                Eigen::MatrixXd H = hess_symbol(cfg.symbol, loc);
                if ((H * f->omega0).norm() > 1e-10)
                    bad.push_back("shifted_degenerate: omega0 must lie in ker Hess(xi0)");
            }
        }
    }
    if (dims_ok && cfg.oracle == OracleKind::Manifold) {
        if (cs.kind != CriticalSet::Kind::AffineManifold) {
            bad.push_back("oracle: manifold prediction needs an affine critical manifold");
        } else {
            // equality requires the transverse Hessian of full rank p
            std::vector<double> loc(dim, 0.0);
            for (int i = 0; i < cs.p; ++i) loc[cs.r + i] = cs.xi0pp[i];
            Eigen::MatrixXd H = hess_symbol(cfg.symbol, loc);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            int rank = 0;
            for (int i = 0; i < dim; ++i)
                if (std::abs(es.eigenvalues()[i]) > 1e-10) ++rank;
            bool shifted = std::holds_alternative<ManifoldShifted>(cfg.family);
            if (rank != cs.p && !shifted)
                bad.push_back("manifold oracle: the Hessian rank on the critical manifold must "
                              "equal the codimension p for the equality claim");
            bool is_manifold_family = std::holds_alternative<ManifoldConcentrating>(cfg.family) ||
                                      shifted;
            if (!is_manifold_family)
                bad.push_back("manifold oracle: family must concentrate on the critical manifold");
        }
    }

    // two-micro cutoff resolution at the smallest eps
    if (sched_ok && cfg.observable == ObservableKind::TwoMicro) {
        Grid g = grid_for(cfg, eps_min);
        if (!two_micro_resolution_ok(g, eps_min, cfg.cutoff))
            bad.push_back("observable: the frequency lattice does not resolve the R/delta "
                          "cutoff scales at the smallest eps");
    }

    // smoothing ball placement
    if (cfg.observable == ObservableKind::Smoothing) {
        if (cfg.oracle != OracleKind::None)
            bad.push_back("observable: the smoothing norm has no closed-form oracle; "
                          "use oracle.kind = none");
        for (int a = 0; a < dim; ++a)
            if (std::abs(cfg.smoothing_ball.center[a]) + cfg.smoothing_ball.radius >=
                cfg.box_half_len[a]) {
                bad.push_back("observable: the smoothing ball touches the periodic boundary");
                break;
            }
        if (!(cfg.smoothing_delta > cfg.window.a) || cfg.smoothing_delta > cfg.window.b)
            bad.push_back("observable: the smoothing time delta must lie inside the window");
    }
    return bad;
}

namespace {

struct RowOutcome {
    ResultRow row;
};

ResultRow run_row(const ExperimentConfig& cfg, double eps) {
    auto t0 = std::chrono::steady_clock::now();
    ResultRow row;
    row.eps = eps;

    Grid g = grid_for(cfg, eps);
    Field u0 = sample_data(cfg.family, eps, g);
    const double mass0_sq = sq(l2_norm(u0));

    // shell of the outermost 10% per axis, tested on the eta-band component
    auto in_shell = [&](std::span<const double> x) {
        for (std::size_t a = 0; a < x.size(); ++a)
            if (std::abs(x[a]) >= 0.9 * g.half_len[a]) return true;
        return false;
    };
    std::vector<cplx> mask = band_mask(g, cfg.symbol, eps, cfg.guard.band_k);

    // observable accumulators
    CompiledTwoMicro compiled;
    std::vector<cplx> frac_mult;
    if (cfg.observable == ObservableKind::Smoothing) {
        double s = cfg.smoothing_s;
        frac_mult = multiplier_table(g, [&](std::span<const double> xi) -> cplx {
            return std::pow(norm2(xi), s);
        });
    } else {
        TwoMicroSymbol a = cfg.symbol.critical_set.kind == CriticalSet::Kind::AffineManifold
                               ? symbol_position(
                                     ManifoldSplit::manifold(cfg.symbol.critical_set.r,
                                                             cfg.symbol.critical_set.p,
                                                             cfg.symbol.critical_set.xi0pp),
                                     g.dim, cfg.phi)
                               : symbol_position(
                                     ManifoldSplit::point(Eigen::VectorXd::Zero(g.dim)), g.dim,
                                     cfg.phi);
        if (cfg.observable == ObservableKind::TwoMicro && cfg.cutoff_kind) {
            // re-center the point split on the nearest critical carrier so the
            // delta cutoff selects it
            if (cfg.symbol.critical_set.kind == CriticalSet::Kind::FinitePoints) {
                const CriticalPoint* best = nullptr;
                for (const CriticalPoint& cp : cfg.symbol.critical_set.points) {
                    auto wl = weak_limit_profile(cfg.family, cp.location, g);
                    if (wl) best = &cp;
                }
                if (best) a.split = ManifoldSplit::point(best->location);
            }
            a = apply_cutoffs(a, cfg.cutoff, *cfg.cutoff_kind);
        }
        compiled = compile_symbol(a, g, eps);
    }

    WindowWeight weight;
    TrapezoidAccumulator acc;
    double max_band_shell = 0;
    auto observe = [&](int step, double t, const Field& u) {
        if (cfg.observable == ObservableKind::Smoothing) {
            if (t <= cfg.smoothing_delta + 1e-9) {
                Field v = apply_multiplier_table(u, frac_mult);
                auto in_ball = [&](std::span<const double> x) {
                    double r2 = 0;
                    for (std::size_t a = 0; a < x.size(); ++a)
                        r2 += sq(x[a] - cfg.smoothing_ball.center[a]);
                    return r2 <= sq(cfg.smoothing_ball.radius);
                };
                acc.add(t, region_mass(v, in_ball));
            }
        } else {
            acc.add(t, weight(cfg.window, t) * compiled.expect(u).real());
        }
        if (step % cfg.guard.monitor_stride == 0 || step == cfg.window.n_steps) {
            Field slow = apply_multiplier_table(u, mask);
            max_band_shell = std::max(max_band_shell, region_mass(slow, in_shell) / mass0_sq);
        }
    };

    double max_drift = 0;
    double norm0 = l2_norm(u0);
    auto with_drift = [&](int step, double t, const Field& u) {
        max_drift = std::max(max_drift, std::abs(l2_norm(u) - norm0) / norm0);
        observe(step, t, u);
    };

    if (cfg.potential.is_zero())
        free_evolve_cb(u0, cfg.symbol, eps, cfg.window, with_drift);
    else
        strang_evolve_cb(u0, cfg.symbol, cfg.potential, eps, cfg.window, with_drift);

    row.measured = acc.sum;

    const double drift_bound =
        cfg.potential.is_zero() ? cfg.guard.mass_drift_free : cfg.guard.mass_drift_strang;
    if (max_drift > drift_bound) {
        row.valid = false;
        char buf[96];
        std::snprintf(buf, sizeof buf, "mass drift %.3g exceeds %.1g", max_drift, drift_bound);
        row.guard_note = buf;
    }
    if (max_band_shell > cfg.guard.boundary_threshold) {
        row.valid = false;
        char buf[112];
        std::snprintf(buf, sizeof buf, "boundary band mass %.3g exceeds %.1g", max_band_shell,
                      cfg.guard.boundary_threshold);
        row.guard_note += row.guard_note.empty() ? buf : std::string("; ") + buf;
    }

    // oracle value on this row's grid so both sides share discretization bias
    switch (cfg.oracle) {
        case OracleKind::None:
            break;
        case OracleKind::Isolated:
            row.predicted =
                predict_isolated(cfg.family, cfg.symbol, cfg.potential, cfg.phi, cfg.window, g)
                    .value;
            break;
        case OracleKind::Degenerate:
            row.predicted =
                predict_degenerate(cfg.family, cfg.symbol, cfg.phi, cfg.window, g).value;
            break;
        case OracleKind::Manifold:
            row.predicted =
                predict_manifold(cfg.family, cfg.symbol, cfg.potential, cfg.phi, cfg.window, g)
                    .value;
            break;
        case OracleKind::RankOneConsistency: {
            TwoMicroSymbol base = symbol_position(
                ManifoldSplit::point(Eigen::VectorXd::Zero(g.dim)), g.dim, cfg.phi);
            row.predicted = rank_one_consistency_rhs(cfg.family, cfg.symbol, cfg.potential, base,
                                               cfg.window, cfg.cutoff.R, g)
                                .value;
            break;
        }
    }
    if (row.predicted) row.gap = std::abs(row.measured - *row.predicted);

    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

}  // namespace

bool ResultTable::any_invalid() const {
    for (const ResultRow& r : rows)
        if (!r.valid) return true;
    return false;
}

ResultTable run_convergence(const ExperimentConfig& cfg, int threads) {
    std::vector<std::string> bad = validate(cfg);
    if (!bad.empty()) throw ValidationError(bad);

    ResultTable table;
    table.config_hash = config_hash(cfg.raw);
    table.code_version = kCodeVersion;
    table.has_oracle = cfg.oracle != OracleKind::None;
    table.rows.resize(cfg.epsilons.size());

    threads = std::max(1, threads);
    if (threads == 1) {
        for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
            table.rows[i] = run_row(cfg, cfg.epsilons[i]);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= cfg.epsilons.size()) return;
                    table.rows[i] = run_row(cfg, cfg.epsilons[i]);
                }
            });
        for (auto& th : pool) th.join();
    }
    return table;
}

PredictedLimit predict_for(const ExperimentConfig& cfg, const Grid& g) {
    switch (cfg.oracle) {
        case OracleKind::Isolated:
            return predict_isolated(cfg.family, cfg.symbol, cfg.potential, cfg.phi, cfg.window, g);
        case OracleKind::Degenerate:
            return predict_degenerate(cfg.family, cfg.symbol, cfg.phi, cfg.window, g);
        case OracleKind::Manifold:
            return predict_manifold(cfg.family, cfg.symbol, cfg.potential, cfg.phi, cfg.window, g);
        case OracleKind::RankOneConsistency: {
            TwoMicroSymbol base = symbol_position(
                ManifoldSplit::point(Eigen::VectorXd::Zero(g.dim)), g.dim, cfg.phi);
            RankOneConsistency mt = rank_one_consistency_rhs(cfg.family, cfg.symbol, cfg.potential, base,
                                                  cfg.window, cfg.cutoff.R, g);
            PredictedLimit out;
            out.value = mt.value;
            out.tag = PredictedLimit::Tag::ProfileDensity;
            out.provenance = mt.zero_weak_limit
                                 ? "rank-one consistency: zero weak limit, value 0"
                                 : "rank-one consistency: window average of the scale-1 cutoff "
                                   "pairing along the effective profile evolution";
            return out;
        }
        case OracleKind::None:
            break;
    }
    throw ContractError("predict: no oracle selected in the config");
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string table_to_csv(const ResultTable& table, RuntimeMode mode) {
    std::string out;
    const bool status_col = table.any_invalid();
    out += "epsilon,measured";
    if (table.has_oracle) out += ",predicted,gap";
    out += ",runtime_s";
    if (status_col) out += ",status";
    out += "\r\n";
    for (const ResultRow& r : table.rows) {
        out += fmt17(r.eps) + "," + fmt17(r.measured);
        if (table.has_oracle) {
            out += "," + (r.predicted ? fmt17(*r.predicted) : std::string(""));
            out += "," + (r.gap ? fmt17(*r.gap) : std::string(""));
        }
        out += "," + (mode == RuntimeMode::Wall ? fmt17(r.runtime_s) : std::string("0"));
        if (status_col) out += std::string(",") + (r.valid ? "ok" : "INVALID");
        out += "\r\n";
    }
    return out;
}

void write_table_csv(const ResultTable& table, const std::string& path, RuntimeMode mode) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open output table " + path);
    os << table_to_csv(table, mode);
}

void write_table_meta(const ResultTable& table, const std::string& path) {
    std::ofstream os(path + ".meta", std::ios::binary);
    if (!os) throw ContractError("cannot open metadata file " + path + ".meta");
    os << "config_hash=" << table.config_hash << "\n"
       << "code_version=" << table.code_version << "\n";
}

int thread_count_from_env(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("SEMILAB_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

}  // namespace semilab
