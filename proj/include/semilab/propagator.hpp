#pragma once

#include <Eigen/Dense>
#include <functional>

#include "semilab/grid.hpp"
#include "semilab/symbols.hpp"

namespace semilab {

// Averaging window [a, b] discretized into n_steps uniform steps. Snapshots
// are taken every snapshot_stride steps (plus the endpoints).
struct TimeWindow {
    double a = 0.0;
    double b = 1.0;
    int n_steps = 64;
    int snapshot_stride = 1;

    double dt() const { return (b - a) / n_steps; }
    void check() const {
        if (!(a < b)) throw ContractError("TimeWindow: need a < b");
        if (n_steps < 1 || snapshot_stride < 1)
            throw ContractError("TimeWindow: need n_steps >= 1 and snapshot_stride >= 1");
    }
};

// Indicator of [a,b] by default; optional smooth bump variant.
struct WindowWeight {
    enum class Kind { Indicator, SmoothBump };
    Kind kind = Kind::Indicator;
    double operator()(const TimeWindow& w, double t) const;
};

enum class EvolveMethod { ExactFree, Strang };

struct Snapshot {
    double t;
    Field u;
};

struct EvolutionResult {
    EvolveMethod method;
    std::vector<Snapshot> snaps;
    std::vector<double> drift;  // per-snapshot ||u(t)|| - ||u0||, relative
    double max_drift() const;
};

// Called at every step time t_j = a + j dt, j = 0..n_steps, with the state.
using SnapshotFn = std::function<void(int step, double t, const Field& u)>;

// u(t) = exp(-i (t-a) lambda(eps D)/eps^2) u0: one multiplier per snapshot,
// no time-stepping error. u0 is the state at t = w.a.
void free_evolve_cb(const Field& u0, const SymbolSpec& sym, double eps, const TimeWindow& w,
                    const SnapshotFn& cb);
EvolutionResult free_evolve(const Field& u0, const SymbolSpec& sym, double eps,
                            const TimeWindow& w);

// Single exact free step by dt (dt may be negative).
Field propagate_free(const Field& u0, const SymbolSpec& sym, double eps, double dt);

// Strang splitting for i eps^2 d_t u = lambda(eps D) u + eps^2 V u, i.e.
//   u -> e^{-i dt V/2} e^{-i dt lambda(eps D)/eps^2} e^{-i dt V/2} u
// per step. Kinetic and potential sub-flows are exact, so the only error is
// the second-order splitting commutator. Enforces dt * |V|_inf <= 0.1.
void strang_evolve_cb(const Field& u0, const SymbolSpec& sym, const PotentialSpec& V, double eps,
                      const TimeWindow& w, const SnapshotFn& cb);
EvolutionResult strang_evolve(const Field& u0, const SymbolSpec& sym, const PotentialSpec& V,
                              double eps, const TimeWindow& w);

// Effective profile equation i d_t u = 1/2 H D.D u + V u.
void profile_evolve_cb(const Field& theta0, const Eigen::MatrixXd& H, const PotentialSpec& V,
                       const TimeWindow& w, const SnapshotFn& cb);
EvolutionResult profile_evolve(const Field& theta0, const Eigen::MatrixXd& H,
                               const PotentialSpec& V, const TimeWindow& w);

// Rank-one reduction of the Heisenberg evolution over an affine critical
// manifold: evolves theta on the R^p grid by
//   i d_t theta = 1/2 Hess_{xi''} lambda(xi', xi0'') D_y.D_y theta + V(x', .) theta,
// so that M_t = |theta(t)><theta(t)| solves the operator equation.
EvolutionResult heisenberg_rank1_evolve(const Field& theta0, const SymbolSpec& sym,
                                        const Eigen::VectorXd& xprime,
                                        const Eigen::VectorXd& xiprime, const PotentialSpec& V,
                                        const TimeWindow& w);

// Tr[m_phi M_t] for the rank-one M_t given by theta: int phi(x', y) |theta(y)|^2 dy.
double trace_against_multiplication(const Field& theta, const Eigen::VectorXd& xprime,
                                    const std::function<double(std::span<const double>)>& phi);

// Minimal admissible n_steps for the Strang constraint dt |V|_inf <= 0.1.
int strang_min_steps(const PotentialSpec& V, const TimeWindow& w);

}  // namespace semilab
