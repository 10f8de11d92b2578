#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

#include "semilab/grid.hpp"
#include "semilab/symbols.hpp"

namespace semilab {

// Sup-normalized envelope kernels: gauss e^{-s^2/2}, bump exp(1 - 1/(1-s^2)).
double envelope_kernel_gauss(double s);
double envelope_kernel_bump(double s);

// Envelope profile with an analytic formula. Gaussian profiles are
// L2-normalized in closed form; bump profiles (compact support, radius =
// width) carry a normalization constant fixed from a one-time quadrature of
// the transition kernel exp(1 - 1/(1-s^2)).
struct ProfileSpec {
    enum class Kind { Gaussian, Bump };
    Kind kind = Kind::Gaussian;
    int dim = 1;
    Eigen::VectorXd center;  // size dim
    double width = 1.0;

    static ProfileSpec gaussian(int dim, double width, const Eigen::VectorXd& center);
    static ProfileSpec gaussian(int dim, double width);
    static ProfileSpec bump(int dim, double width, const Eigen::VectorXd& center);
    static ProfileSpec bump(int dim, double width);

    double eval(std::span<const double> x) const;  // normalized, |.|_L2 = 1
    // Frequency beyond which the spectrum is negligible for grid sizing.
    double spectral_halfwidth() const;
    // L2 mass outside the box [-L/2, L/2)^d when centered by `shift` and
    // scaled by `scale` (profile((x - shift)/scale) with L2-preserving factor).
    double mass_outside_half_box(std::span<const double> half_len,
                                 std::span<const double> shift, double scale) const;
};

// e^{i xi0.x/eps} theta(x)
struct PlaneWaveModulated {
    ProfileSpec theta;
    Eigen::VectorXd xi0;
};

// theta1 e^{i xi1.x/eps} + theta2 e^{i xi2.x/eps}
struct TwoWave {
    ProfileSpec theta1, theta2;
    Eigen::VectorXd xi1, xi2;
};

// eps^{-d/4} theta((x - x0)/sqrt(eps)) e^{i xi0.x/eps}
struct CoherentState {
    ProfileSpec theta;
    Eigen::VectorXd x0, xi0;
};

// eps^{-alpha d/2} theta(x/eps^alpha) e^{i x.(xi0 + eps^beta omega0)/eps},
// alpha in [0,1), beta in (0,1), alpha + beta < 1
struct ShiftedDegenerate {
    ProfileSpec theta;
    Eigen::VectorXd xi0, omega0;
    double alpha = 0.0, beta = 0.75;
};

// eps^{-alpha r/2} phi((x'-z0)/eps^alpha) theta(x'') e^{i x'.zeta0/eps}
struct ManifoldConcentrating {
    ProfileSpec theta;  // on R^p
    ProfileSpec phi;    // on R^r
    Eigen::VectorXd z0, zeta0;
    double alpha = 0.5;
};

// eps^{-alpha p/2} theta(x''/eps^alpha) phi(x') e^{i(x'.xi0' + eps^beta x''.omega0)/eps}
struct ManifoldShifted {
    ProfileSpec theta;  // on R^p
    ProfileSpec phi;    // on R^r
    Eigen::VectorXd xi0p;    // in R^r
    Eigen::VectorXd omega0;  // unit vector in R^p
    double alpha = 0.0, beta = 0.75;
};

using DataFamily = std::variant<PlaneWaveModulated, TwoWave, CoherentState, ShiftedDegenerate,
                                ManifoldConcentrating, ManifoldShifted>;

std::string family_name(const DataFamily& fam);
int family_dim(const DataFamily& fam);

// Pointwise evaluation of the family formula at parameter eps. Refuses with
// the required per-axis N when the carrier or the concentration scale is not
// resolved, and checks the discrete mass against the analytic norm (1%).
Field sample_data(const DataFamily& fam, double eps, const Grid& g);

// Exact L2 norm of the continuum datum. The TwoWave cross term is evaluated
// by an independent fine quadrature at the given eps.
double analytic_l2_norm(const DataFamily& fam, double eps);

// Per-axis minimal N on the box `half_len` resolving the carrier plus 1.5x
// the profile spectral width, and giving >= 4 cells per concentration scale.
std::vector<int> required_n(const DataFamily& fam, double eps,
                            const std::vector<double>& half_len);

// Largest |carrier frequency| per axis at parameter eps (for grid sizing).
std::vector<double> carrier_frequencies(const DataFamily& fam, double eps);

// Analytic weak limit of e^{-i xi.x/eps} u0^eps; nullopt encodes the zero limit.
std::optional<Field> weak_limit_profile(const DataFamily& fam, const Eigen::VectorXd& xi,
                                        const Grid& g);

// Whether the family satisfies the iterated-cutoff criterion that upgrades the
// defect-measure lower bound to an equality at degenerate critical points.
bool satisfies_concentration_criterion(const DataFamily& fam);

struct OscillationRow {
    double eps, R, tail_fraction;
};
struct OscillationTable {
    std::vector<OscillationRow> rows;  // one row per (eps, R)
    // tail at the smallest eps for each R: the limsup proxy
    std::vector<std::pair<double, double>> limsup_proxy;
};

// Fraction of |u0^eps|^2-mass at lattice frequencies |xi| > R/eps.
OscillationTable check_eps_oscillating(const DataFamily& fam, const std::vector<double>& eps_list,
                                       const std::vector<double>& R_list, const Grid& g);

// || (1-chi)((eps D - xi)/(eps R)) chi((eps D - xi)/delta) u0^eps ||_L2
double concentration_criterion(const DataFamily& fam, const Eigen::VectorXd& xi, double eps, double R,
                          double delta, const Grid& g);
double concentration_criterion_field(const Field& u0, const Eigen::VectorXd& xi, double eps, double R,
                                double delta);

}  // namespace semilab
