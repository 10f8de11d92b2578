#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semilab/common.hpp"

namespace semilab {

// Critical point of a dispersion symbol with its Hessian structure.
struct CriticalPoint {
    Eigen::VectorXd location;
    int hessian_rank = 0;
    std::vector<Eigen::VectorXd> kernel_basis;  // orthonormal basis of ker Hess
};

struct CriticalSet {
    enum class Kind { None, FinitePoints, AffineManifold };
    Kind kind = Kind::None;
    std::vector<CriticalPoint> points;  // FinitePoints
    // AffineManifold {xi'' = xi0''} with xi = (xi', xi'') in R^r x R^p
    int r = 0, p = 0;
    Eigen::VectorXd xi0pp;
};

// Closed-form dispersion symbol with exact derivatives.
struct SymbolSpec {
    int dimension = 1;
    double order = 2.0;  // growth exponent N
    std::string name;
    std::function<double(std::span<const double>)> eval;
    std::function<Eigen::VectorXd(std::span<const double>)> grad;
    std::function<Eigen::MatrixXd(std::span<const double>)> hess;
    CriticalSet critical_set;
};

double eval_symbol(const SymbolSpec& sym, std::span<const double> xi);
Eigen::VectorXd grad_symbol(const SymbolSpec& sym, std::span<const double> xi);
Eigen::MatrixXd hess_symbol(const SymbolSpec& sym, std::span<const double> xi);

struct Classification {
    enum class Kind { NotCritical, NonDegenerate, Degenerate };
    Kind kind;
    std::vector<Eigen::VectorXd> kernel_basis;  // Degenerate only
};

// NotCritical iff |grad| > tol; otherwise eigendecompose the Hessian and
// collect eigenvectors with |eigenvalue| <= tol as the kernel.
Classification classify_critical(const SymbolSpec& sym, std::span<const double> xi0,
                                 double tol = 1e-8);

// Bounded smooth potential with a catalog tag.
struct PotentialSpec {
    enum class Kind { Zero, GaussianBump, Cosine };
    Kind kind = Kind::Zero;
    std::function<double(std::span<const double>)> eval;
    double sup_abs = 0.0;
    std::string name;
    bool is_zero() const { return kind == Kind::Zero; }
};

PotentialSpec potential_zero();
// height * exp(-|x-center|^2 / (2 width^2))
PotentialSpec potential_gaussian_bump(const Eigen::VectorXd& center, double width, double height);
// sum_i a_i cos(pi x_i / L_i): exactly periodic on the grid box
PotentialSpec potential_cosine(const std::vector<double>& amplitudes,
                               const std::vector<double>& half_len);
// Mass of a gaussian bump outside the box [-L,L)^d; admissibility requires < 1e-12.
double gaussian_bump_mass_outside_box(const Eigen::VectorXd& center, double width, double height,
                                      const std::vector<double>& half_len);

struct SymbolParams {
    int dimension = 1;
    Eigen::VectorXd xi0;  // shifted_quadratic
    int p = 1;            // manifold_quadratic codimension
};

// Catalog: iso_quadratic, shifted_quadratic, quartic_degenerate,
// double_well_1d, manifold_quadratic.
SymbolSpec builtin_symbol(const std::string& tag, const SymbolParams& params = {});
std::vector<std::string> builtin_symbol_tags();

// Finite-difference consistency checks of grad/hess against eval (A1 sanity).
struct DerivativeCheck {
    double max_grad_rel_err = 0;
    double max_hess_rel_err = 0;
};
DerivativeCheck check_derivatives(const SymbolSpec& sym, int n_points = 20,
                                  double radius = 10.0, std::uint64_t seed = 7);

// max over samples of |d^a lambda(xi)| / (1+|xi|)^order for |a| <= 2,
// sampled on |xi| <= radius.
double growth_constant(const SymbolSpec& sym, double radius = 100.0, int n_points = 200,
                       std::uint64_t seed = 11);

}  // namespace semilab
