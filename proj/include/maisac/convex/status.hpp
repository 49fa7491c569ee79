#pragma once

#include <string>

namespace maisac::convex {

/// Outcome of an embedded solver call.
struct SolveStatus {
    enum class Kind { Optimal, Infeasible, MaxIterations, NumericalFailure };

    Kind kind = Kind::NumericalFailure;
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;   // relative complementarity / gap measure
    double objective = 0.0;      // in the caller's orientation
    double dual_objective = 0.0; // same orientation; bounds the optimum

    bool ok() const { return kind == Kind::Optimal; }
};

inline const char* to_string(SolveStatus::Kind k) {
    switch (k) {
        case SolveStatus::Kind::Optimal: return "optimal";
        case SolveStatus::Kind::Infeasible: return "infeasible";
        case SolveStatus::Kind::MaxIterations: return "max_iterations";
        case SolveStatus::Kind::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

}  // namespace maisac::convex
