#include "semilab/smoothing.hpp"

#include <cmath>

namespace semilab {

double smoothing_norm(const EvolutionResult& snaps, double s, const Ball& B, double delta) {
    if (!(s >= 0)) throw ContractError("smoothing_norm: s must be nonnegative");
    if (snaps.snaps.empty()) throw ContractError("smoothing_norm: no snapshots");
    if (snaps.snaps.back().t < delta - 1e-9)
        throw ContractError("smoothing_norm: delta exceeds the snapshot range");

    const Grid& g = snaps.snaps.front().u.grid;
    if (B.center.size() != g.dim) throw ContractError("smoothing_norm: ball dimension mismatch");
    for (int a = 0; a < g.dim; ++a) {
        if (std::abs(B.center[a]) + B.radius >= g.half_len[a])
            throw ContractError("smoothing_norm: ball touches the periodic boundary");
    }

    auto frac_mult = multiplier_table(g, [&](std::span<const double> xi) -> cplx {
        return std::pow(norm2(xi), s);
    });
    auto in_ball = [&](std::span<const double> x) {
        double r2 = 0;
        for (std::size_t a = 0; a < x.size(); ++a) r2 += sq(x[a] - B.center[a]);
        return r2 <= sq(B.radius);
    };

    double sum = 0;
    bool have_prev = false;
    double t_prev = 0, v_prev = 0;
    for (const Snapshot& snap : snaps.snaps) {
        if (snap.t > delta + 1e-9) break;
        Field v = apply_multiplier_table(snap.u, frac_mult);
        double val = region_mass(v, in_ball);
        if (have_prev) sum += 0.5 * (snap.t - t_prev) * (val + v_prev);
        t_prev = snap.t;
        v_prev = val;
        have_prev = true;
    }
    return sum;
}

std::pair<double, double> fit_loglog(const std::vector<std::pair<double, double>>& values) {
    const int n = static_cast<int>(values.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [eps, S] : values) {
        double x = std::log(eps), y = std::log(S);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double icept = (sy - slope * sx) / n;
    double rss = 0;
    for (const auto& [eps, S] : values) rss += sq(std::log(S) - slope * std::log(eps) - icept);
    return {slope, std::sqrt(rss / n)};
}

SmoothingReport blowup_exponent(const PlaneWaveModulated& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, double s, double delta, const Ball& B,
                                const std::vector<double>& eps_list,
                                const SmoothingGridPolicy& grid_policy, const TimeWindow& w) {
    if (eps_list.size() < 2) throw ContractError("blowup_exponent: need at least 2 eps points");
    std::vector<double> loc(fam.xi0.data(), fam.xi0.data() + fam.xi0.size());
    Classification cls = classify_critical(sym, loc);
    if (cls.kind == Classification::Kind::NotCritical)
        throw ContractError("blowup_exponent: the carrier must be a critical point");
    if (fam.xi0.norm() <= 1e-12)
        throw ContractError("blowup_exponent: the critical carrier must be nonzero");

    SmoothingReport report;
    report.s = s;
    report.delta = delta;
    report.ball = B;
    DataFamily dfam = fam;
    for (double eps : eps_list) {
        std::vector<int> n = grid_policy.n ? *grid_policy.n
                                           : required_n(dfam, eps, grid_policy.half_len);
        Grid g = Grid::make(n, grid_policy.half_len);
        Field u0 = sample_data(dfam, eps, g);
        EvolutionResult evo = strang_evolve(u0, sym, V, eps, w);
        report.values.push_back({eps, smoothing_norm(evo, s, B, delta)});
    }

    double emin = report.values.front().first, emax = emin;
    for (const auto& [eps, S] : report.values) {
        emin = std::min(emin, eps);
        emax = std::max(emax, eps);
    }
    if (report.values.size() >= 4 && emax / emin >= 10.0) {
        auto [slope, res] = fit_loglog(report.values);
        report.slope = slope;
        report.residual = res;
    }
    return report;
}

}  // namespace semilab
