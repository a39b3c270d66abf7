#pragma once

#include "apca/dataset.hpp"
#include "apca/types.hpp"

namespace apca {

/// How the "l largest" eigenvalues of the augmented matrix are ranked.
enum class EigenOrder { real_part, magnitude };

struct FitConfig {
    /// Ridge added to ZZ^T before inversion when forming the projector.
    /// Negative means the scaled default 1e-10 * trace(ZZ^T) / (d_x + d_y);
    /// zero requests the exact inverse and fails on singular ZZ^T.
    double ridge = -1.0;
    EigenOrder order = EigenOrder::real_part;
    /// Accept eigenvalues with |Im| <= imag_tol * (1 + |Re|).
    double imag_tol = 1e-8;
    /// Relative cutoff for pseudo-inverses in the encoder recovery.
    double pinv_rtol = 1e-10;
};

/// The assembled eigensystem behind the analytic fit:
///   B = [ Z Z^T      -mu* Z Y^T      ]
///       [ Y Z^T      -mu* Y P_Z Y^T  ],   mu* = mu + 1,
/// with P_Z = Z^T (Z Z^T)^-1 Z the projector onto the row space of Z.
/// Eigenpairs are sorted by the configured order, descending; they are kept
/// complex here because B is not symmetric, and realified only on selection.
struct AugmentedSystem {
    Matrix b_matrix;                // (d_x + 2 d_y) square
    Matrix projector;               // P_Z, N x N
    Eigen::VectorXcd eigenvalues;   // sorted descending
    Eigen::MatrixXcd eigenvectors;  // columns aligned with eigenvalues
    Index split_index = 0;          // d_x + d_y: e_i = [v_i; d_i] splits here
};

/// Expects a centered dataset. Throws SingularGram when ZZ^T is singular and
/// ridge == 0, DimensionMismatch on invalid input.
AugmentedSystem build_augmented_system(const Dataset& centered, double mu, double ridge);

/// Fitted adversarial factor model. Immutable after construction: the encoder
/// A maps centered stacked data to factors, W reconstructs the primary block,
/// D is the adversary's best linear read-out of the concomitant block, and
/// V = [W; D] stacks both.
class ApcaModel {
public:
    const Matrix& encoder() const { return encoder_; }            // l x (d_x + d_y)
    const Matrix& primary_loadings() const { return w_; }         // d_x x l
    const Matrix& adversary_loadings() const { return d_; }       // d_y x l
    const Matrix& joint_loadings() const { return v_; }           // (d_x + d_y) x l
    double mu() const { return mu_; }
    double mu_star() const { return mu_ + 1.0; }
    Index n_factors() const { return l_; }
    const Vector& center_primary() const { return center_primary_; }
    const Vector& center_concomitant() const { return center_concomitant_; }
    /// The l selected eigenvalues of B, for diagnostics.
    const Vector& eigenvalues() const { return eigenvalues_; }

    Index d_primary() const { return w_.rows(); }
    Index d_concomitant() const { return d_.rows(); }

    /// Assembles a model from stored parts, re-checking the invariants.
    /// Used by fit() and by deserialization.
    static ApcaModel from_parts(Matrix encoder, Matrix primary_loadings,
                                Matrix adversary_loadings, double mu, Index n_factors,
                                Vector center_primary, Vector center_concomitant,
                                Vector eigenvalues);

private:
    ApcaModel() = default;

    Matrix encoder_, w_, d_, v_;
    double mu_ = 0.0;
    Index l_ = 0;
    Vector center_primary_, center_concomitant_;
    Vector eigenvalues_;
};

/// Closed-form fit: centers the data, selects the l leading eigenvectors of
/// the augmented matrix, normalizes each loading block v_i to unit norm, and
/// recovers the encoder from the stationarity condition
///   (V^T V - mu* D^T D) A (Z Z^T) = (V^T Z - mu* D^T Y) Z^T
/// solved with pseudo-inverses.
ApcaModel fit(const Dataset& data, Index n_factors, double mu, const FitConfig& config = {});

/// Factors S = A * Z_centered, l x N. Centering uses the model's stored means.
Matrix encode(const ApcaModel& model, const Dataset& data);

/// X_hat = W * S + center_primary, d_x x N.
Matrix reconstruct_primary(const ApcaModel& model, const Matrix& factors);

/// Y_hat = D * S + center_concomitant, d_y x N.
Matrix predict_concomitant(const ApcaModel& model, const Matrix& factors);

struct ObjectiveValue {
    double total;          // primary_term - mu * adversary_term
    double primary_term;   // ||X - W A Z||_F^2
    double adversary_term; // ||Y - D A Z||_F^2
};

ObjectiveValue objective_value(const ApcaModel& model, const Dataset& data);

/// Plain mean-centered PCA by SVD; the mu = 0 baseline.
struct PcaModel {
    Matrix loadings;        // d x k, orthonormal columns
    Vector mean;            // d
    Vector singular_values; // all min(d, N) values, descending
    Index k = 0;
};

PcaModel pca_fit(const Matrix& block, Index k);
Matrix pca_transform(const PcaModel& model, const Matrix& block);    // k x N scores
Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores); // d x N

namespace detail {

/// Symmetric pseudo-inverse with eigenvalues below rtol * max|eig| dropped.
/// Throws DegenerateEncoder when nothing survives the cutoff.
Matrix pinv_sym(const Matrix& m, double rtol);

/// Encoder recovery for fixed loadings; exposed for tests.
Matrix recover_encoder(const Matrix& joint_loadings, const Matrix& adversary_loadings,
                       double mu_star, const Matrix& z_centered, const Matrix& y_centered,
                       double pinv_rtol);

} // namespace detail

} // namespace apca
