#pragma once

#include <Eigen/Dense>
#include <optional>

#include "semilab/initial_data.hpp"
#include "semilab/propagator.hpp"

namespace semilab {

struct Ball {
    Eigen::VectorXd center;
    double radius = 1.0;
};

// S = int_0^delta || |D|^s u(t) ||^2_{L2(B)} dt: |D|^s acts as the
// non-semiclassical multiplier |xi|^s, restriction by the sharp indicator
// of B, trapezoid quadrature over the snapshots in [0, delta].
double smoothing_norm(const EvolutionResult& snaps, double s, const Ball& B, double delta);

struct SmoothingReport {
    std::vector<std::pair<double, double>> values;  // (eps, S)
    std::optional<double> slope;     // log-log fit, present when >= 4 points span a decade
    std::optional<double> residual;  // rms residual of the fit
    double s = 0.5, delta = 0.5;
    Ball ball;
};

struct SmoothingGridPolicy {
    std::vector<double> half_len;
    std::optional<std::vector<int>> n;  // auto-sized from the family when absent
};

// Runs the evolution per eps for plane-wave data at a nonzero critical
// carrier and fits the growth exponent of S(eps).
SmoothingReport blowup_exponent(const PlaneWaveModulated& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, double s, double delta, const Ball& B,
                                const std::vector<double>& eps_list,
                                const SmoothingGridPolicy& grid_policy, const TimeWindow& w);

// least squares for log S = slope * log eps + c; returns (slope, rms residual)
std::pair<double, double> fit_loglog(const std::vector<std::pair<double, double>>& values);

}  // namespace semilab
