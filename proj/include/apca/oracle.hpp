#pragma once

#include "apca/dataset.hpp"
#include "apca/types.hpp"

#include <cstdint>
#include <vector>

namespace apca {

struct OracleConfig {
    double step_size_min = 1e-14;
    double step_size_max = 1.0;
    int max_outer_iters = 4000;
    /// The inner maximization is quadratic and solved exactly by least
    /// squares, so a single inner pass suffices; kept for diagnostics.
    int inner_adversary_iters = 1;
    /// Stop when the relative objective change per outer step falls below this.
    double convergence_tol = 1e-10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Iterative reference solver: gradient descent on (W, A) with backtracking
/// line search, the adversary refit to its exact best response every step.
/// Initialized from the PCA solution of the stacked data plus seeded noise.
struct OracleResult {
    Matrix primary_loadings;  // W, d_x x l
    Matrix encoder;           // A, l x (d_x + d_y)
    Matrix adversary;         // D, d_y x l
    std::vector<double> objective_trace;
    bool converged = false;

    double objective() const { return objective_trace.back(); }
};

/// Expects a centered dataset (no intercept in the model).
OracleResult solve_minimax(const Dataset& centered, Index n_factors, double mu,
                           const OracleConfig& config = {});

struct AdversaryRefit {
    Matrix adversary;  // D_best, d_y x l
    double residual;   // ||Y - D_best S||_F^2
};

/// Best-response adversary for fixed factors: least squares of Y on S.
/// Rank deficiency is handled by the minimal-norm solution.
AdversaryRefit refit_adversary(const Matrix& factors, const Matrix& concomitant);

} // namespace apca
