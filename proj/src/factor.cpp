#include "apca/factor.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

namespace apca {

namespace {

double resolve_ridge(double requested, const Matrix& gram) {
    if (requested >= 0.0) return requested;
    return 1e-10 * gram.trace() / static_cast<double>(gram.rows());
}

// Shared eigensystem assembly; the N x N projector is materialized only by
// build_augmented_system, everything else works through the Gram matrices.
struct CoreSystem {
    Matrix gram;       // Z Z^T
    Matrix cross;      // Z Y^T
    Matrix gram_inv;   // (Z Z^T + ridge I)^-1
    Matrix b;          // augmented matrix
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    double ridge = 0.0;
};

void sort_eigenpairs(Eigen::VectorXcd& values, Eigen::MatrixXcd& vectors, EigenOrder order) {
    const Index m = values.size();
    std::vector<Index> idx(static_cast<std::size_t>(m));
    std::iota(idx.begin(), idx.end(), Index{0});
    auto better = [&](Index a, Index b) {
        const auto va = values[a];
        const auto vb = values[b];
        if (order == EigenOrder::real_part) {
            if (va.real() != vb.real()) return va.real() > vb.real();
            return std::abs(va) > std::abs(vb);
        }
        if (std::abs(va) != std::abs(vb)) return std::abs(va) > std::abs(vb);
        return va.real() > vb.real();
    };
    std::stable_sort(idx.begin(), idx.end(), better);

    Eigen::VectorXcd sv(m);
    Eigen::MatrixXcd svec(vectors.rows(), m);
    for (Index i = 0; i < m; ++i) {
        sv[i] = values[idx[static_cast<std::size_t>(i)]];
        svec.col(i) = vectors.col(idx[static_cast<std::size_t>(i)]);
    }
    values = std::move(sv);
    vectors = std::move(svec);
}

// A negative ridge requests the scaled default.
CoreSystem assemble_core(const Dataset& centered, double mu, double ridge, EigenOrder order) {
    centered.validate();
    if (mu < 0.0) throw DataError("adversarial strength mu must be nonnegative");

    const Index dx = centered.d_primary();
    const Index dy = centered.d_concomitant();
    const Matrix z = centered.stacked();
    const Matrix& y = centered.concomitant;

    CoreSystem core;
    core.gram = z * z.transpose();
    core.cross = z * y.transpose();
    core.ridge = ridge = resolve_ridge(ridge, core.gram);

    Eigen::SelfAdjointEigenSolver<Matrix> ges(core.gram);
    const Vector lam = ges.eigenvalues();
    const double lam_max = lam.cwiseAbs().maxCoeff();
    if (ridge == 0.0 && (lam_max == 0.0 || lam.minCoeff() <= 1e-12 * lam_max))
        throw SingularGram("Z Z^T is singular; supply a positive ridge");
    Vector inv_lam(lam.size());
    for (Index i = 0; i < lam.size(); ++i)
        inv_lam[i] = 1.0 / (std::max(lam[i], 0.0) + ridge);
    core.gram_inv = ges.eigenvectors() * inv_lam.asDiagonal() * ges.eigenvectors().transpose();

    const double mu_star = mu + 1.0;
    const Matrix y_pz_yt = core.cross.transpose() * core.gram_inv * core.cross;

    const Index dim = dx + 2 * dy;
    core.b.setZero(dim, dim);
    core.b.topLeftCorner(dx + dy, dx + dy) = core.gram;
    core.b.topRightCorner(dx + dy, dy) = -mu_star * core.cross;
    core.b.bottomLeftCorner(dy, dx + dy) = core.cross.transpose();
    core.b.bottomRightCorner(dy, dy) = -mu_star * y_pz_yt;

    Eigen::EigenSolver<Matrix> es(core.b);
    if (es.info() != Eigen::Success)
        throw Error("eigendecomposition of the augmented matrix did not converge");
    core.values = es.eigenvalues();
    core.vectors = es.eigenvectors();
    sort_eigenpairs(core.values, core.vectors, order);
    return core;
}

Vector phase_aligned_real_part(const Eigen::VectorXcd& evec) {
    Index dom = 0;
    evec.cwiseAbs().maxCoeff(&dom);
    const std::complex<double> phase = evec[dom] / std::abs(evec[dom]);
    return (evec / phase).real();
}

// The l leading eigenvectors realified, one column each, plus their
// eigenvalue real parts. Exactly real spectra pass the strict imaginary
// tolerance; eigenvalues that are numerically zero relative to the spectrum
// scale may appear as noise-split conjugate pairs, whose real invariant span
// {Re e, Im e} is taken instead (those directions receive no encoder weight
// downstream). Anything else is a genuine ComplexSpectrum failure.
std::pair<Matrix, Vector> select_leading(const CoreSystem& core, Index n_factors,
                                         double imag_tol) {
    const Index dim = core.vectors.rows();
    // Non-normality amplifies rounding noise on the zero cluster by roughly
    // sqrt(eps * ||B||), so the "numerically zero" band is much wider than
    // machine precision. Directions inside it carry no usable variance.
    const double scale = core.values.cwiseAbs().maxCoeff();
    const double null_band = 1e-4 * std::max(scale, 1.0);

    Matrix columns(dim, n_factors);
    Vector values(n_factors);
    Index col = 0, i = 0;
    while (col < n_factors) {
        if (i >= core.values.size())
            throw DegenerateEncoder("augmented matrix offers too few usable eigenvectors");
        const std::complex<double> lambda = core.values[i];
        const double abs_im = std::abs(lambda.imag());
        const bool numerically_null = std::abs(lambda) <= null_band;

        if (abs_im <= imag_tol * (1.0 + std::abs(lambda.real()))) {
            const Eigen::VectorXcd& evec = core.vectors.col(i);
            Index dom = 0;
            evec.cwiseAbs().maxCoeff(&dom);
            const std::complex<double> phase = evec[dom] / std::abs(evec[dom]);
            const Eigen::VectorXcd rotated = evec / phase;
            if (!numerically_null && rotated.imag().norm() > imag_tol * rotated.norm())
                throw ComplexSpectrum("selected eigenvector is not real to tolerance");
            columns.col(col) = rotated.real();
            values[col] = lambda.real();
            ++col;
            ++i;
            continue;
        }

        if (!numerically_null)
            throw ComplexSpectrum("selected eigenvalue has imaginary part " +
                                  std::to_string(abs_im));

        const bool paired = i + 1 < core.values.size() &&
                            std::abs(core.values[i + 1] - std::conj(lambda)) <=
                                1e-8 * (1.0 + std::abs(lambda));
        if (paired) {
            columns.col(col) = core.vectors.col(i).real();
            values[col] = lambda.real();
            ++col;
            if (col < n_factors) {
                columns.col(col) = core.vectors.col(i).imag();
                values[col] = lambda.real();
                ++col;
            }
            i += 2;
        } else {
            columns.col(col) = phase_aligned_real_part(core.vectors.col(i));
            values[col] = lambda.real();
            ++col;
            ++i;
        }
    }
    return {std::move(columns), std::move(values)};
}

// Unit-normalizes the loading block of each column and fixes its sign.
void normalize_loading_blocks(Matrix& columns, Index split) {
    for (Index c = 0; c < columns.cols(); ++c) {
        const double vnorm = columns.col(c).head(split).norm();
        if (vnorm <= 1e-12 * columns.col(c).norm())
            throw DegenerateEncoder("selected eigenvector has a vanishing loading block");
        columns.col(c) /= vnorm;
        Index vi = 0;
        columns.col(c).head(split).cwiseAbs().maxCoeff(&vi);
        if (columns(vi, c) < 0.0) columns.col(c) = -columns.col(c);
    }
}

void check_factor_shape(const ApcaModel& model, const Matrix& factors) {
    if (factors.rows() != model.n_factors())
        throw DimensionMismatch("factor matrix row count does not match model");
}

Matrix centered_stack(const ApcaModel& model, const Dataset& data) {
    if (data.d_primary() != model.d_primary() || data.d_concomitant() != model.d_concomitant())
        throw DimensionMismatch("dataset block dimensions do not match model");
    Matrix z(model.d_primary() + model.d_concomitant(), data.n_samples());
    z.topRows(model.d_primary()) = data.primary.colwise() - model.center_primary();
    z.bottomRows(model.d_concomitant()) = data.concomitant.colwise() - model.center_concomitant();
    return z;
}

} // namespace

AugmentedSystem build_augmented_system(const Dataset& centered, double mu, double ridge) {
    if (ridge < 0.0) throw DataError("ridge must be nonnegative");
    CoreSystem core = assemble_core(centered, mu, ridge, EigenOrder::real_part);
    AugmentedSystem sys;
    sys.b_matrix = std::move(core.b);
    const Matrix z = centered.stacked();
    sys.projector = z.transpose() * core.gram_inv * z;
    sys.eigenvalues = std::move(core.values);
    sys.eigenvectors = std::move(core.vectors);
    sys.split_index = centered.d_primary() + centered.d_concomitant();
    return sys;
}

ApcaModel ApcaModel::from_parts(Matrix encoder, Matrix primary_loadings,
                                Matrix adversary_loadings, double mu, Index n_factors,
                                Vector center_primary, Vector center_concomitant,
                                Vector eigenvalues) {
    if (mu < 0.0) throw DataError("adversarial strength mu must be nonnegative");
    if (n_factors < 1) throw DimensionMismatch("model needs at least one factor");
    const Index dx = primary_loadings.rows();
    const Index dy = adversary_loadings.rows();
    if (primary_loadings.cols() != n_factors || adversary_loadings.cols() != n_factors ||
        encoder.rows() != n_factors || encoder.cols() != dx + dy ||
        center_primary.size() != dx || center_concomitant.size() != dy ||
        eigenvalues.size() != n_factors)
        throw DimensionMismatch("model parts have inconsistent shapes");

    ApcaModel m;
    m.encoder_ = std::move(encoder);
    m.w_ = std::move(primary_loadings);
    m.d_ = std::move(adversary_loadings);
    m.v_.resize(dx + dy, n_factors);
    m.v_.topRows(dx) = m.w_;
    m.v_.bottomRows(dy) = m.d_;
    m.mu_ = mu;
    m.l_ = n_factors;
    m.center_primary_ = std::move(center_primary);
    m.center_concomitant_ = std::move(center_concomitant);
    m.eigenvalues_ = std::move(eigenvalues);
    return m;
}

ApcaModel fit(const Dataset& data, Index n_factors, double mu, const FitConfig& config) {
    data.validate();
    const Index dx = data.d_primary();
    const Index dy = data.d_concomitant();
    const Index max_l = std::min(dx + dy, data.n_samples());
    if (n_factors < 1 || n_factors > max_l)
        throw DimensionMismatch("n_factors must lie in [1, min(d_x + d_y, N)]");

    Centered c = center(data);
    const Matrix z = c.data.stacked();
    CoreSystem core = assemble_core(c.data, mu, config.ridge, config.order);
    const Index split = dx + dy;

    auto [columns, eigenvalues] = select_leading(core, n_factors, config.imag_tol);
    normalize_loading_blocks(columns, split);
    const Matrix v = columns.topRows(split);
    const Matrix d = columns.bottomRows(dy);

    Matrix encoder = detail::recover_encoder(v, d, mu + 1.0, z, c.data.concomitant,
                                             config.pinv_rtol);
    return ApcaModel::from_parts(std::move(encoder), v.topRows(dx), d, mu, n_factors,
                                 std::move(c.center_primary), std::move(c.center_concomitant),
                                 std::move(eigenvalues));
}

Matrix encode(const ApcaModel& model, const Dataset& data) {
    data.validate();
    return model.encoder() * centered_stack(model, data);
}

Matrix reconstruct_primary(const ApcaModel& model, const Matrix& factors) {
    check_factor_shape(model, factors);
    return (model.primary_loadings() * factors).colwise() + model.center_primary();
}

Matrix predict_concomitant(const ApcaModel& model, const Matrix& factors) {
    check_factor_shape(model, factors);
    return (model.adversary_loadings() * factors).colwise() + model.center_concomitant();
}

ObjectiveValue objective_value(const ApcaModel& model, const Dataset& data) {
    data.validate();
    const Matrix z = centered_stack(model, data);
    const Matrix s = model.encoder() * z;
    const Matrix x_c = z.topRows(model.d_primary());
    const Matrix y_c = z.bottomRows(model.d_concomitant());
    ObjectiveValue obj{};
    obj.primary_term = (x_c - model.primary_loadings() * s).squaredNorm();
    obj.adversary_term = (y_c - model.adversary_loadings() * s).squaredNorm();
    obj.total = obj.primary_term - model.mu() * obj.adversary_term;
    return obj;
}

PcaModel pca_fit(const Matrix& block, Index k) {
    if (block.rows() < 1 || block.cols() < 1)
        throw DimensionMismatch("pca_fit needs a nonempty matrix");
    if (k < 1 || k > std::min(block.rows(), block.cols()))
        throw DimensionMismatch("component count must lie in [1, min(rows, N)]");
    if (!block.allFinite()) throw DataError("pca_fit input contains non-finite entries");

    PcaModel m;
    m.mean = block.rowwise().mean();
    Matrix centered = block.colwise() - m.mean;
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinU);
    m.loadings = svd.matrixU().leftCols(k);
    m.singular_values = svd.singularValues();
    m.k = k;
    return m;
}

Matrix pca_transform(const PcaModel& model, const Matrix& block) {
    if (block.rows() != model.loadings.rows())
        throw DimensionMismatch("block dimension does not match PCA model");
    return model.loadings.transpose() * (block.colwise() - model.mean);
}

Matrix pca_reconstruct(const PcaModel& model, const Matrix& scores) {
    if (scores.rows() != model.k)
        throw DimensionMismatch("score rows do not match PCA component count");
    return (model.loadings * scores).colwise() + model.mean;
}

namespace detail {

Matrix pinv_sym(const Matrix& m, double rtol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Vector lam = es.eigenvalues();
    const double cutoff = rtol * lam.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(lam.size());
    bool any = false;
    for (Index i = 0; i < lam.size(); ++i) {
        if (std::abs(lam[i]) > cutoff && lam[i] != 0.0) {
            inv[i] = 1.0 / lam[i];
            any = true;
        }
    }
    if (!any)
        throw DegenerateEncoder("encoder-recovery system is singular beyond pseudo-inverse tolerance");
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Matrix recover_encoder(const Matrix& joint_loadings, const Matrix& adversary_loadings,
                       double mu_star, const Matrix& z_centered, const Matrix& y_centered,
                       double pinv_rtol) {
    const Matrix m = joint_loadings.transpose() * joint_loadings -
                     mu_star * adversary_loadings.transpose() * adversary_loadings;
    const Matrix rhs = (joint_loadings.transpose() * z_centered -
                        mu_star * adversary_loadings.transpose() * y_centered) *
                       z_centered.transpose();
    const Matrix gram = z_centered * z_centered.transpose();
    return pinv_sym(m, pinv_rtol) * rhs * pinv_sym(gram, pinv_rtol);
}

} // namespace detail

} // namespace apca
