#pragma once

#include "semilab/initial_data.hpp"
#include "semilab/propagator.hpp"
#include "semilab/wigner.hpp"

namespace semilab {

// Closed-form limit of the windowed position-density average, with the
// formula that produced it.
struct PredictedLimit {
    enum class Tag {
        DispersedZero,
        ProfileDensity,
        PointMass,
        ManifoldProfile,
        ManifoldPointMass
    };
    double value = 0.0;
    Tag tag = Tag::DispersedZero;
    std::string provenance;
    // False when only the lower-bound inequality is guaranteed (degenerate
    // critical point present and the datum fails the concentration criterion).
    bool equality = true;
};

std::string tag_name(PredictedLimit::Tag tag);

// Limit for countable critical sets: sum over critical carriers of the
// window-averaged effective-profile density against phi. The profile of each
// carrier evolves under i d_t u = 1/2 Hess(xi) D.D u + V u on the given grid.
PredictedLimit predict_isolated(const DataFamily& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, const TestFunction& phi,
                                const TimeWindow& w, const Grid& g);

// Shifted concentrating data at a degenerate critical point (V = 0 required):
// alpha = 0 gives the stationary-profile density, alpha != 0 the point mass
// (b-a) phi(0) |theta|^2.
PredictedLimit predict_degenerate(const DataFamily& fam, const SymbolSpec& sym,
                                  const TestFunction& phi, const TimeWindow& w, const Grid& g);

// Affine critical manifold: rank-one operator evolution paired against
// multiplication by phi, weighted by the concentration measure of the datum.
PredictedLimit predict_manifold(const DataFamily& fam, const SymbolSpec& sym,
                                const PotentialSpec& V, const TestFunction& phi,
                                const TimeWindow& w, const Grid& g);

// The only admissible momentum support of the phase-space limit: R^d x Lambda.
std::string predict_support(const SymbolSpec& sym);

// Independent right-hand side for the rank-one consistency check:
//   int Xi(t) (op_1(A_R^0) u(t), u(t)) dt,  A_R^0(x, zeta) = a(x, xi0, zeta) chi(|zeta|/R),
// where u solves the effective profile equation from the weak limit at the
// critical carrier xi0 of the datum.
struct RankOneConsistency {
    double value = 0.0;
    bool zero_weak_limit = false;
};
RankOneConsistency rank_one_consistency_rhs(const DataFamily& fam, const SymbolSpec& sym,
                                 const PotentialSpec& V, const TwoMicroSymbol& a,
                                 const TimeWindow& w, double R, const Grid& g);

}  // namespace semilab
