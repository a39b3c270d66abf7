#include "apca/oracle.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace apca {

namespace {

// Objective of the outer minimization with the adversary at its best
// response: ||X - W S||_F^2 - mu * min_D ||Y - D S||_F^2,  S = A Z.
double outer_objective(const Matrix& x, const Matrix& y, const Matrix& z, double mu,
                       const Matrix& w, const Matrix& a, Matrix* best_adversary = nullptr) {
    const Matrix s = a * z;
    AdversaryRefit adv = refit_adversary(s, y);
    if (best_adversary) *best_adversary = adv.adversary;
    return (x - w * s).squaredNorm() - mu * adv.residual;
}

void add_noise(Matrix& m, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) m(i, j) += normal(rng);
}

} // namespace

void OracleConfig::validate() const {
    if (step_size_min <= 0.0 || step_size_max <= 0.0 || step_size_min > step_size_max)
        throw DataError("oracle step sizes must be positive with min <= max");
    if (max_outer_iters < 1 || inner_adversary_iters < 1)
        throw DataError("oracle iteration counts must be at least 1");
    if (convergence_tol <= 0.0) throw DataError("oracle convergence tolerance must be positive");
}

OracleResult solve_minimax(const Dataset& centered, Index n_factors, double mu,
                           const OracleConfig& config) {
    centered.validate();
    config.validate();
    if (mu < 0.0) throw DataError("adversarial strength mu must be nonnegative");
    const Index dx = centered.d_primary();
    const Index dy = centered.d_concomitant();
    const Index max_l = std::min(dx + dy, centered.n_samples());
    if (n_factors < 1 || n_factors > max_l)
        throw DimensionMismatch("n_factors must lie in [1, min(d_x + d_y, N)]");

    const Matrix& x = centered.primary;
    const Matrix& y = centered.concomitant;
    const Matrix z = centered.stacked();

    // PCA warm start: V = A^T = leading left singular vectors of Z.
    Eigen::BDCSVD<Matrix> svd(z, Eigen::ComputeThinU);
    const Matrix p = svd.matrixU().leftCols(n_factors);
    Matrix a = p.transpose();
    Matrix w = p.topRows(dx);
    std::mt19937_64 rng(config.seed);
    add_noise(a, rng, 1e-2);
    add_noise(w, rng, 1e-2);

    OracleResult result;
    double obj = outer_objective(x, y, z, mu, w, a, &result.adversary);
    result.objective_trace.push_back(obj);

    double step = config.step_size_max;
    for (int iter = 0; iter < config.max_outer_iters; ++iter) {
        const Matrix s = a * z;
        const Matrix primary_resid = x - w * s;               // at current iterate
        const Matrix adv_resid = y - result.adversary * s;    // at best-response D

        const Matrix grad_w = -2.0 * primary_resid * s.transpose();
        const Matrix grad_a = -2.0 * w.transpose() * primary_resid * z.transpose() +
                              2.0 * mu * result.adversary.transpose() * adv_resid * z.transpose();
        const double grad_sq = grad_w.squaredNorm() + grad_a.squaredNorm();
        if (grad_sq == 0.0) {
            result.converged = true;
            break;
        }

        // Backtracking Armijo search; the step is allowed to regrow between
        // iterations so one flat region does not pin it at the floor.
        double eta = std::min(config.step_size_max, step * 2.0);
        double candidate_obj = 0.0;
        Matrix w_new, a_new, d_new;
        bool accepted = false;
        while (eta >= config.step_size_min) {
            w_new = w - eta * grad_w;
            a_new = a - eta * grad_a;
            candidate_obj = outer_objective(x, y, z, mu, w_new, a_new, &d_new);
            if (candidate_obj <= obj - 1e-4 * eta * grad_sq) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            // No descent direction at the smallest step: stationary to
            // working precision.
            result.converged = true;
            break;
        }

        w = std::move(w_new);
        a = std::move(a_new);
        result.adversary = std::move(d_new);
        step = eta;
        result.objective_trace.push_back(candidate_obj);
        const double change = std::abs(obj - candidate_obj);
        obj = candidate_obj;
        if (change <= config.convergence_tol * (1.0 + std::abs(obj))) {
            result.converged = true;
            break;
        }
    }

    result.primary_loadings = std::move(w);
    result.encoder = std::move(a);
    return result;
}

AdversaryRefit refit_adversary(const Matrix& factors, const Matrix& concomitant) {
    if (factors.cols() != concomitant.cols())
        throw DimensionMismatch("factors and concomitant data have different sample counts");
    AdversaryRefit out;
    // min_D ||Y - D S||_F^2  <=>  S^T D^T ~= Y^T, minimal-norm solution.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(factors.transpose());
    out.adversary = cod.solve(concomitant.transpose()).transpose();
    out.residual = (concomitant - out.adversary * factors).squaredNorm();
    return out;
}

} // namespace apca
