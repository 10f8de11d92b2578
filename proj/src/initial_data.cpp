#include "semilab/initial_data.hpp"

#include <bit>
#include <cmath>

#include "semilab/cutoff.hpp"

namespace semilab {

namespace {

// one-axis integrals of the bump transition kernel h(s) = exp(1 - 1/(1-s^2))
constexpr double kBumpL2 = 0.9833808129127184;       // int h^2
constexpr double kGaussSpectralCut = 6.5;            // e^{-k^2 w^2/2} ~ 7e-10 at k = 6.5/w
constexpr double kBumpSpectralCut = 25.0;            // |h_hat| / |h_hat(0)| ~ 3e-3 at k = 25/w

double bump_kernel(double s) { return envelope_kernel_bump(s); }
double gauss_kernel(double s) { return envelope_kernel_gauss(s); }

// Per-axis envelope of a family term: data ~ prod_axis kernel((x-center)/width)
struct AxisEnvelope {
    ProfileSpec::Kind kind;
    double center;
    double width;          // physical width after concentration scaling
    double spectral_cut;   // physical spectral halfwidth
};

double axis_mass_inside(const AxisEnvelope& e, double half) {
    // fraction of the axis L2 mass inside [-half, half)
    if (e.kind == ProfileSpec::Kind::Bump)
        return (e.center - e.width >= -half && e.center + e.width <= half) ? 1.0 : 0.0;
    // |kernel|^2 = exp(-s^2): c.d.f. via erf
    const double w = e.width;
    double lo = (-half - e.center) / w;
    double hi = (half - e.center) / w;
    return 0.5 * (std::erf(hi) - std::erf(lo));
}

}  // namespace

double envelope_kernel_gauss(double s) { return std::exp(-0.5 * s * s); }

double envelope_kernel_bump(double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

ProfileSpec ProfileSpec::gaussian(int dim, double width, const Eigen::VectorXd& center) {
    if (!(width > 0) || center.size() != dim) throw ContractError("profile: bad parameters");
    return {Kind::Gaussian, dim, center, width};
}
ProfileSpec ProfileSpec::gaussian(int dim, double width) {
    return gaussian(dim, width, Eigen::VectorXd::Zero(dim));
}
ProfileSpec ProfileSpec::bump(int dim, double width, const Eigen::VectorXd& center) {
    if (!(width > 0) || center.size() != dim) throw ContractError("profile: bad parameters");
    return {Kind::Bump, dim, center, width};
}
ProfileSpec ProfileSpec::bump(int dim, double width) {
    return bump(dim, width, Eigen::VectorXd::Zero(dim));
}

double ProfileSpec::eval(std::span<const double> x) const {
    double v = 1.0;
    if (kind == Kind::Gaussian) {
        const double amp = std::pow(std::sqrt(pi) * width, -0.5);
        for (int i = 0; i < dim; ++i) v *= amp * gauss_kernel((x[i] - center[i]) / width);
    } else {
        const double amp = 1.0 / std::sqrt(width * kBumpL2);
        for (int i = 0; i < dim; ++i) v *= amp * bump_kernel((x[i] - center[i]) / width);
    }
    return v;
}

double ProfileSpec::spectral_halfwidth() const {
    return (kind == Kind::Gaussian ? kGaussSpectralCut : kBumpSpectralCut) / width;
}

double ProfileSpec::mass_outside_half_box(std::span<const double> half_len,
                                          std::span<const double> shift, double scale) const {
    double inside = 1.0;
    for (int i = 0; i < dim; ++i) {
        AxisEnvelope e{kind, shift[i] + scale * center[i], scale * width, 0};
        inside *= axis_mass_inside(e, half_len[i] / 2.0);
    }
    return 1.0 - inside;
}

namespace {

struct FamilyTerm {
    std::vector<AxisEnvelope> axes;     // per grid axis
    std::vector<double> carrier;        // per-axis carrier frequency (already /eps)
};

std::vector<AxisEnvelope> envelope_of(const ProfileSpec& p, double shift_scale,
                                      const Eigen::VectorXd* shift, double scale) {
    std::vector<AxisEnvelope> out(p.dim);
    for (int i = 0; i < p.dim; ++i) {
        double c = scale * p.center[i] + (shift ? shift_scale * (*shift)[i] : 0.0);
        out[i] = {p.kind, c, scale * p.width, p.spectral_halfwidth() / scale};
    }
    return out;
}

void append(std::vector<AxisEnvelope>& dst, const std::vector<AxisEnvelope>& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

std::vector<FamilyTerm> family_terms(const DataFamily& fam, double eps) {
    std::vector<FamilyTerm> terms;
    if (auto* f = std::get_if<PlaneWaveModulated>(&fam)) {
        FamilyTerm t;
        t.axes = envelope_of(f->theta, 0, nullptr, 1.0);
        for (int i = 0; i < f->xi0.size(); ++i) t.carrier.push_back(f->xi0[i] / eps);
        terms.push_back(std::move(t));
    } else if (auto* f = std::get_if<TwoWave>(&fam)) {
        for (int j = 0; j < 2; ++j) {
            FamilyTerm t;
            const ProfileSpec& th = j == 0 ? f->theta1 : f->theta2;
            const Eigen::VectorXd& xi = j == 0 ? f->xi1 : f->xi2;
            t.axes = envelope_of(th, 0, nullptr, 1.0);
            for (int i = 0; i < xi.size(); ++i) t.carrier.push_back(xi[i] / eps);
            terms.push_back(std::move(t));
        }
    } else if (auto* f = std::get_if<CoherentState>(&fam)) {
        FamilyTerm t;
        t.axes = envelope_of(f->theta, 1.0, &f->x0, std::sqrt(eps));
        for (int i = 0; i < f->xi0.size(); ++i) t.carrier.push_back(f->xi0[i] / eps);
        terms.push_back(std::move(t));
    } else if (auto* f = std::get_if<ShiftedDegenerate>(&fam)) {
        FamilyTerm t;
        t.axes = envelope_of(f->theta, 0, nullptr, std::pow(eps, f->alpha));
        for (int i = 0; i < f->xi0.size(); ++i)
            t.carrier.push_back((f->xi0[i] + std::pow(eps, f->beta) * f->omega0[i]) / eps);
        terms.push_back(std::move(t));
    } else if (auto* f = std::get_if<ManifoldConcentrating>(&fam)) {
        FamilyTerm t;
        t.axes = envelope_of(f->phi, 1.0, &f->z0, std::pow(eps, f->alpha));
        append(t.axes, envelope_of(f->theta, 0, nullptr, 1.0));
        for (int i = 0; i < f->zeta0.size(); ++i) t.carrier.push_back(f->zeta0[i] / eps);
        for (int i = 0; i < f->theta.dim; ++i) t.carrier.push_back(0.0);
        terms.push_back(std::move(t));
    } else if (auto* f = std::get_if<ManifoldShifted>(&fam)) {
        FamilyTerm t;
        t.axes = envelope_of(f->phi, 0, nullptr, 1.0);
        append(t.axes, envelope_of(f->theta, 0, nullptr, std::pow(eps, f->alpha)));
        for (int i = 0; i < f->xi0p.size(); ++i) t.carrier.push_back(f->xi0p[i] / eps);
        for (int i = 0; i < f->omega0.size(); ++i)
            t.carrier.push_back(std::pow(eps, f->beta) * f->omega0[i] / eps);
        terms.push_back(std::move(t));
    }
    return terms;
}

void check_family_parameters(const DataFamily& fam) {
    if (auto* f = std::get_if<ShiftedDegenerate>(&fam)) {
        if (f->alpha < 0 || f->alpha >= 1 || f->beta <= 0 || f->beta >= 1 ||
            f->alpha + f->beta >= 1)
            throw ContractError(
                "shifted_degenerate: need alpha in [0,1), beta in (0,1), alpha + beta < 1");
    } else if (auto* f = std::get_if<ManifoldConcentrating>(&fam)) {
        if (f->alpha <= 0 || f->alpha >= 1)
            throw ContractError("manifold_concentrating: need alpha in (0,1)");
    } else if (auto* f = std::get_if<ManifoldShifted>(&fam)) {
        if (f->alpha < 0 || f->alpha >= 1 || f->beta <= 0 || f->beta >= 1)
            throw ContractError("manifold_shifted: need alpha in [0,1), beta in (0,1)");
        if (std::abs(f->omega0.norm() - 1.0) > 1e-12)
            throw ContractError("manifold_shifted: omega0 must be a unit vector");
    }
}

cplx family_value(const DataFamily& fam, double eps, std::span<const double> x) {
    if (auto* f = std::get_if<PlaneWaveModulated>(&fam)) {
        double ph = 0;
        for (int i = 0; i < f->xi0.size(); ++i) ph += f->xi0[i] * x[i];
        return f->theta.eval(x) * std::polar(1.0, ph / eps);
    }
    if (auto* f = std::get_if<TwoWave>(&fam)) {
        double p1 = 0, p2 = 0;
        for (int i = 0; i < f->xi1.size(); ++i) {
            p1 += f->xi1[i] * x[i];
            p2 += f->xi2[i] * x[i];
        }
        return f->theta1.eval(x) * std::polar(1.0, p1 / eps) +
               f->theta2.eval(x) * std::polar(1.0, p2 / eps);
    }
    if (auto* f = std::get_if<CoherentState>(&fam)) {
        const int d = f->theta.dim;
        const double rs = std::sqrt(eps);
        double y[2], ph = 0;
        for (int i = 0; i < d; ++i) {
            y[i] = (x[i] - f->x0[i]) / rs;
            ph += f->xi0[i] * x[i];
        }
        return std::pow(eps, -d / 4.0) * f->theta.eval(std::span<const double>(y, d)) *
               std::polar(1.0, ph / eps);
    }
    if (auto* f = std::get_if<ShiftedDegenerate>(&fam)) {
        const int d = f->theta.dim;
        const double s = std::pow(eps, f->alpha);
        const double shift = std::pow(eps, f->beta);
        double y[2], ph = 0;
        for (int i = 0; i < d; ++i) {
            y[i] = x[i] / s;
            ph += (f->xi0[i] + shift * f->omega0[i]) * x[i];
        }
        return std::pow(s, -d / 2.0) * f->theta.eval(std::span<const double>(y, d)) *
               std::polar(1.0, ph / eps);
    }
    if (auto* f = std::get_if<ManifoldConcentrating>(&fam)) {
        const int r = f->phi.dim;
        const double s = std::pow(eps, f->alpha);
        double yp[2], ph = 0;
        for (int i = 0; i < r; ++i) {
            yp[i] = (x[i] - f->z0[i]) / s;
            ph += f->zeta0[i] * x[i];
        }
        return std::pow(s, -r / 2.0) * f->phi.eval(std::span<const double>(yp, r)) *
               f->theta.eval(x.subspan(r)) * std::polar(1.0, ph / eps);
    }
    auto* f = std::get_if<ManifoldShifted>(&fam);
    const int r = f->phi.dim, p = f->theta.dim;
    const double s = std::pow(eps, f->alpha);
    const double shift = std::pow(eps, f->beta);
    double ypp[2], ph = 0;
    for (int i = 0; i < r; ++i) ph += f->xi0p[i] * x[i];
    for (int i = 0; i < p; ++i) {
        ypp[i] = x[r + i] / s;
        ph += shift * f->omega0[i] * x[r + i];
    }
    return std::pow(s, -p / 2.0) * f->phi.eval(x.first(r)) *
           f->theta.eval(std::span<const double>(ypp, p)) * std::polar(1.0, ph / eps);
}

int pow2_at_least(double x) {
    int n = 8;
    while (n < x && n < (1 << 24)) n *= 2;
    return n;
}

// Simpson quadrature of kernel1((s-c1)/w1) kernel2((s-c2)/w2) e^{i q s}
cplx axis_cross_integral(const AxisEnvelope& e1, const AxisEnvelope& e2, double q) {
    auto kernel = [](const AxisEnvelope& e, double s) {
        double t = (s - e.center) / e.width;
        return e.kind == ProfileSpec::Kind::Bump ? bump_kernel(t) : gauss_kernel(t);
    };
    const double tail = 7.0;
    double lo = std::min(e1.center - tail * e1.width, e2.center - tail * e2.width);
    double hi = std::max(e1.center + tail * e1.width, e2.center + tail * e2.width);
    // enough points to resolve the carrier beat
    int n = 1 << 12;
    while (n < 10.0 * std::abs(q) * (hi - lo) / (2 * pi) && n < (1 << 20)) n *= 2;
    const double h = (hi - lo) / n;
    cplx acc = 0;
    for (int i = 0; i <= n; ++i) {
        double s = lo + i * h;
        double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wgt * kernel(e1, s) * kernel(e2, s) * std::polar(1.0, q * s);
    }
    return acc * (h / 3.0);
}

}  // namespace

std::string family_name(const DataFamily& fam) {
    static const char* names[] = {"plane_wave",           "two_wave",
                                  "coherent_state",       "shifted_degenerate",
                                  "manifold_concentrating", "manifold_shifted"};
    return names[fam.index()];
}

int family_dim(const DataFamily& fam) {
    return std::visit(
        [](const auto& f) -> int {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, ManifoldConcentrating>)
                return f.phi.dim + f.theta.dim;
            else if constexpr (std::is_same_v<T, ManifoldShifted>)
                return f.phi.dim + f.theta.dim;
            else if constexpr (std::is_same_v<T, TwoWave>)
                return f.theta1.dim;
            else
                return f.theta.dim;
        },
        fam);
}

std::vector<double> carrier_frequencies(const DataFamily& fam, double eps) {
    std::vector<double> out(family_dim(fam), 0.0);
    for (const FamilyTerm& t : family_terms(fam, eps))
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::max(out[i], std::abs(t.carrier[i]));
    return out;
}

std::vector<int> required_n(const DataFamily& fam, double eps,
                            const std::vector<double>& half_len) {
    const int d = family_dim(fam);
    if (static_cast<int>(half_len.size()) != d)
        throw ContractError("required_n: box dimension does not match the family");
    std::vector<int> n(d, 8);
    for (const FamilyTerm& t : family_terms(fam, eps)) {
        for (int i = 0; i < d; ++i) {
            // Nyquist must clear the carrier plus 1.5x the envelope spectrum
            double need = (2.0 * half_len[i] / pi) *
                          (std::abs(t.carrier[i]) + 1.5 * t.axes[i].spectral_cut);
            // and the concentration scale must span at least 4 cells
            double cells = 8.0 * half_len[i] / t.axes[i].width;
            n[i] = std::max(n[i], pow2_at_least(std::max(need, cells)));
        }
    }
    return n;
}

double analytic_l2_norm(const DataFamily& fam, double eps) {
    if (auto* f = std::get_if<TwoWave>(&fam)) {
        // |u|^2 = 2 + 2 Re prod_axis cross_i, profiles are normalized products
        auto terms = family_terms(fam, eps);
        cplx cross = 1.0;
        for (std::size_t i = 0; i < terms[0].axes.size(); ++i)
            cross *= axis_cross_integral(terms[0].axes[i], terms[1].axes[i],
                                         terms[0].carrier[i] - terms[1].carrier[i]);
        double a1 = 1.0, a2 = 1.0;  // normalization amplitudes
        for (int i = 0; i < f->theta1.dim; ++i) {
            a1 *= f->theta1.kind == ProfileSpec::Kind::Gaussian
                      ? std::pow(std::sqrt(pi) * f->theta1.width, -0.5)
                      : 1.0 / std::sqrt(f->theta1.width * kBumpL2);
            a2 *= f->theta2.kind == ProfileSpec::Kind::Gaussian
                      ? std::pow(std::sqrt(pi) * f->theta2.width, -0.5)
                      : 1.0 / std::sqrt(f->theta2.width * kBumpL2);
        }
        return std::sqrt(2.0 + 2.0 * (a1 * a2 * cross).real());
    }
    return 1.0;  // all single-envelope families are L2-normalized by scaling
}

Field sample_data(const DataFamily& fam, double eps, const Grid& g) {
    check_family_parameters(fam);
    if (!(eps > 0)) throw ContractError("sample_data: eps must be positive");
    if (family_dim(fam) != g.dim)
        throw ContractError("sample_data: family dimension does not match the grid");

    std::vector<double> half(g.dim);
    for (int a = 0; a < g.dim; ++a) half[a] = g.half_len[a];
    std::vector<int> need = required_n(fam, eps, half);
    for (int a = 0; a < g.dim; ++a) {
        if (g.n[a] < need[a]) {
            std::string msg = "sample_data: grid does not resolve the datum; need N >= (";
            for (int b = 0; b < g.dim; ++b) msg += std::to_string(need[b]) + (b + 1 < g.dim ? "," : ")");
            throw ContractError(msg);
        }
    }

    Field u(g);
    double x[2];
    int j[2];
    for (std::size_t i = 0; i < u.size(); ++i) {
        g.decode(i, j);
        for (int a = 0; a < g.dim; ++a) x[a] = g.point(a, j[a]);
        u.v[i] = family_value(fam, eps, std::span<const double>(x, g.dim));
    }

    const double analytic = analytic_l2_norm(fam, eps);
    const double discrete = l2_norm(u);
    if (std::abs(discrete - analytic) > 0.01 * analytic)
        throw ContractError("sample_data: discrete mass " + std::to_string(discrete) +
                            " deviates from the analytic norm " + std::to_string(analytic) +
                            " by more than 1%");
    return u;
}

std::optional<Field> weak_limit_profile(const DataFamily& fam, const Eigen::VectorXd& xi,
                                        const Grid& g) {
    const ProfileSpec* prof = nullptr;
    if (auto* f = std::get_if<PlaneWaveModulated>(&fam)) {
        if ((xi - f->xi0).norm() <= 1e-12) prof = &f->theta;
    } else if (auto* f = std::get_if<TwoWave>(&fam)) {
        if ((xi - f->xi1).norm() <= 1e-12) prof = &f->theta1;
        else if ((xi - f->xi2).norm() <= 1e-12) prof = &f->theta2;
    }
    // coherent, shifted and manifold families all have vanishing weak limits
    if (!prof) return std::nullopt;
    Field out(g);
    double x[2];
    int j[2];
    for (std::size_t i = 0; i < out.size(); ++i) {
        g.decode(i, j);
        for (int a = 0; a < g.dim; ++a) x[a] = g.point(a, j[a]);
        out.v[i] = prof->eval(std::span<const double>(x, g.dim));
    }
    return out;
}

bool satisfies_concentration_criterion(const DataFamily& fam) {
    return std::holds_alternative<PlaneWaveModulated>(fam) || std::holds_alternative<TwoWave>(fam);
}

OscillationTable check_eps_oscillating(const DataFamily& fam, const std::vector<double>& eps_list,
                                       const std::vector<double>& R_list, const Grid& g) {
    if (eps_list.empty() || R_list.empty())
        throw ContractError("check_eps_oscillating: empty parameter lists");
    OscillationTable table;
    double eps_min = eps_list[0];
    std::vector<std::pair<double, double>> at_min(R_list.size());
    for (double eps : eps_list) {
        eps_min = std::min(eps_min, eps);
        Field u = sample_data(fam, eps, g);
        FreqField F = to_frequency(u);
        double total = 0;
        for (const cplx& z : F.c) total += std::norm(z);
        for (std::size_t ri = 0; ri < R_list.size(); ++ri) {
            const double cut = R_list[ri] / eps;
            double tail = 0;
            double xi[2];
            int k[2];
            for (std::size_t i = 0; i < F.c.size(); ++i) {
                g.decode(i, k);
                for (int a = 0; a < g.dim; ++a) xi[a] = g.freq(a, k[a]);
                if (norm2(std::span<const double>(xi, g.dim)) > cut) tail += std::norm(F.c[i]);
            }
            double frac = tail / total;
            table.rows.push_back({eps, R_list[ri], frac});
            if (eps == eps_min) at_min[ri] = {R_list[ri], frac};
        }
    }
    // rebuild the proxy for the actual smallest eps (lists need not be sorted)
    for (auto& row : table.rows)
        if (row.eps == eps_min)
            for (auto& pr : at_min)
                if (pr.first == row.R) pr.second = row.tail_fraction;
    table.limsup_proxy = std::move(at_min);
    return table;
}

double concentration_criterion_field(const Field& u0, const Eigen::VectorXd& xi, double eps, double R,
                                double delta) {
    if (!(delta > 0) || !(R >= 1))
        throw ContractError("concentration_criterion: need delta > 0 and R >= 1");
    Field w = apply_multiplier(u0, [&](std::span<const double> zeta) -> cplx {
        double off = 0;
        for (std::size_t a = 0; a < zeta.size(); ++a) off += sq(eps * zeta[a] - xi[a]);
        off = std::sqrt(off);
        return (1.0 - chi_radial(off / (eps * R))) * chi_radial(off / delta);
    });
    return l2_norm(w);
}

double concentration_criterion(const DataFamily& fam, const Eigen::VectorXd& xi, double eps, double R,
                          double delta, const Grid& g) {
    return concentration_criterion_field(sample_data(fam, eps, g), xi, eps, R, delta);
}

}  // namespace semilab
