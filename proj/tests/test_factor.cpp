#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apca/factor.hpp"
#include "testutil.hpp"

#include <random>

using namespace apca;

namespace {

// Independent reassembly of B from its definition, kept separate from the
// implementation on purpose.
Matrix reference_b(const Dataset& centered, double mu, double ridge) {
    const Matrix z = centered.stacked();
    const Matrix& y = centered.concomitant;
    const double mu_star = mu + 1.0;
    const Index d = z.rows();
    const Matrix gram = z * z.transpose();
    const Matrix inv = (gram + ridge * Matrix::Identity(d, d)).inverse();
    const Matrix p_z = z.transpose() * inv * z;
    Matrix b(d + y.rows(), d + y.rows());
    b.topLeftCorner(d, d) = gram;
    b.topRightCorner(d, y.rows()) = -mu_star * z * y.transpose();
    b.bottomLeftCorner(y.rows(), d) = y * z.transpose();
    b.bottomRightCorner(y.rows(), y.rows()) = -mu_star * y * p_z * y.transpose();
    return b;
}

Dataset centered_random(Index dx, Index dy, Index n, std::uint64_t seed) {
    return center(testutil::random_dataset(dx, dy, n, seed)).data;
}

} // namespace

TEST_CASE("augmented matrix matches an element-by-element recomputation") {
    const Dataset data = centered_random(5, 2, 50, 42);
    const AugmentedSystem sys = build_augmented_system(data, 2.0, 0.0);
    const Matrix ref = reference_b(data, 2.0, 0.0);
    CHECK(testutil::rel_frobenius(sys.b_matrix, ref) < 1e-12);
    CHECK(sys.b_matrix.rows() == 5 + 2 * 2);
    CHECK(sys.split_index == 7);
}

TEST_CASE("zero concomitant data kills the adversary blocks") {
    Dataset data;
    data.primary = Matrix::Identity(2, 2);
    data.concomitant = Matrix::Zero(1, 2);
    const AugmentedSystem sys = build_augmented_system(data, 1.5, 1e-12);
    CHECK(testutil::rel_frobenius(sys.projector, Matrix::Identity(2, 2)) < 1e-8);
    CHECK(sys.b_matrix.topRightCorner(3, 1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.b_matrix.bottomRows(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mu = 0 leaves the top-right block as -ZY^T") {
    const Dataset data = centered_random(4, 2, 30, 9);
    const AugmentedSystem sys = build_augmented_system(data, 0.0, 0.0);
    const Matrix expected = -(data.stacked() * data.concomitant.transpose());
    CHECK(testutil::rel_frobenius(sys.b_matrix.topRightCorner(6, 2), expected) < 1e-13);
}

TEST_CASE("singular gram with zero ridge is an error") {
    Dataset data;
    data.primary = Matrix::Identity(2, 2);
    data.concomitant = Matrix::Zero(1, 2);  // makes ZZ^T rank 2 of 3
    CHECK_THROWS_AS(build_augmented_system(data, 0.0, 0.0), SingularGram);
    CHECK_NOTHROW(build_augmented_system(data, 0.0, 1e-10));
}

TEST_CASE("projector is idempotent and symmetric") {
    const Dataset data = centered_random(5, 2, 40, 3);
    const AugmentedSystem sys = build_augmented_system(data, 1.0, 0.0);
    const Matrix& p = sys.projector;
    CHECK((p * p - p).norm() <= 1e-8 * p.norm());
    CHECK((p - p.transpose()).norm() <= 1e-8 * p.norm());
}

TEST_CASE("eigenpairs satisfy the eigen equation and ordering") {
    const Dataset data = centered_random(6, 2, 60, 17);
    const AugmentedSystem sys = build_augmented_system(data, 3.0, 0.0);
    const double scale = sys.b_matrix.norm();
    for (Index i = 0; i < sys.eigenvalues.size(); ++i) {
        const Eigen::VectorXcd resid =
            sys.b_matrix * sys.eigenvectors.col(i) - sys.eigenvalues[i] * sys.eigenvectors.col(i);
        CHECK(resid.norm() <= 1e-8 * scale);
        if (i > 0) CHECK(sys.eigenvalues[i].real() <= sys.eigenvalues[i - 1].real() + 1e-12);
    }
}

TEST_CASE("mu = 0 fit reproduces the rank-l PCA reconstruction") {
    const Dataset data = testutil::random_dataset(6, 2, 80, 123);
    const ApcaModel model = fit(data, 3, 0.0);
    const Matrix factors = encode(model, data);
    const Matrix recon = reconstruct_primary(model, factors);

    const PcaModel pca = pca_fit(data.primary, 3);
    const Matrix pca_recon = pca_reconstruct(pca, pca_transform(pca, data.primary));
    CHECK(testutil::rel_frobenius(recon, pca_recon) < 1e-6);
}

TEST_CASE("identically zero concomitant block makes mu irrelevant") {
    Dataset data = testutil::random_dataset(5, 1, 40, 5);
    data.concomitant.setZero();
    const ApcaModel at_zero = fit(data, 2, 0.0);
    const ApcaModel at_seven = fit(data, 2, 7.0);
    const Matrix recon_zero = reconstruct_primary(at_zero, encode(at_zero, data));
    const Matrix recon_seven = reconstruct_primary(at_seven, encode(at_seven, data));
    CHECK(testutil::rel_frobenius(recon_seven, recon_zero) < 1e-10);
    const ObjectiveValue a = objective_value(at_zero, data);
    const ObjectiveValue b = objective_value(at_seven, data);
    CHECK(a.primary_term == doctest::Approx(b.primary_term).epsilon(1e-10));
}

TEST_CASE("fit validates its arguments") {
    const Dataset data = testutil::random_dataset(3, 2, 20, 8);
    CHECK_THROWS_AS(fit(data, 0, 1.0), DimensionMismatch);
    CHECK_THROWS_AS(fit(data, 6, 1.0), DimensionMismatch);  // > d_x + d_y
    CHECK_THROWS_AS(fit(data, 2, -0.5), DataError);
}

TEST_CASE("fit is deterministic") {
    const Dataset data = testutil::random_dataset(5, 2, 50, 77);
    const ApcaModel a = fit(data, 3, 2.0);
    const ApcaModel b = fit(data, 3, 2.0);
    CHECK(a.encoder() == b.encoder());
    CHECK(a.joint_loadings() == b.joint_loadings());
    CHECK(a.adversary_loadings() == b.adversary_loadings());
    CHECK(a.eigenvalues() == b.eigenvalues());
}

TEST_CASE("model invariants hold after fitting") {
    const Dataset data = testutil::random_dataset(5, 2, 50, 21);
    const ApcaModel model = fit(data, 3, 2.5);
    CHECK(model.mu_star() == doctest::Approx(3.5));
    CHECK(model.joint_loadings().topRows(5) == model.primary_loadings());
    CHECK(model.joint_loadings().bottomRows(2) == model.adversary_loadings());
    CHECK(model.n_factors() == 3);
}

TEST_CASE("encode of the training mean is the zero factor vector") {
    const Dataset data = testutil::random_dataset(4, 2, 30, 31);
    const ApcaModel model = fit(data, 2, 1.0);
    Dataset mean_sample;
    mean_sample.primary = data.primary.rowwise().mean();
    mean_sample.concomitant = data.concomitant.rowwise().mean();
    const Matrix s = encode(model, mean_sample);
    CHECK(s.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("encode matches a naive matrix multiply") {
    const Dataset data = testutil::random_dataset(5, 2, 50, 99);
    const ApcaModel model = fit(data, 2, 2.0);
    const Matrix s = encode(model, data);

    Matrix manual(model.n_factors(), data.n_samples());
    for (Index f = 0; f < model.n_factors(); ++f) {
        for (Index j = 0; j < data.n_samples(); ++j) {
            double acc = 0.0;
            for (Index i = 0; i < 5; ++i)
                acc += model.encoder()(f, i) * (data.primary(i, j) - model.center_primary()[i]);
            for (Index i = 0; i < 2; ++i)
                acc += model.encoder()(f, 5 + i) *
                       (data.concomitant(i, j) - model.center_concomitant()[i]);
            manual(f, j) = acc;
        }
    }
    CHECK(testutil::rel_frobenius(s, manual) < 1e-12);
}

TEST_CASE("encode and full-rank span agree with PCA at mu = 0") {
    const Dataset data = testutil::random_dataset(4, 1, 30, 13);
    const ApcaModel model = fit(data, 4, 0.0);  // l = d_x
    const Matrix s = encode(model, data);

    const PcaModel pca = pca_fit(data.primary, 4);
    const Matrix scores = pca_transform(pca, data.primary);
    // Compare row spaces through their orthogonal projectors.
    auto row_projector = [](const Matrix& m) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m.transpose());
        const Matrix q = cod.householderQ() * Matrix::Identity(m.cols(), cod.rank());
        return Matrix(q * q.transpose());
    };
    CHECK((row_projector(s) - row_projector(scores)).norm() < 1e-8);
}

TEST_CASE("lossless reconstruction at full rank and mu = 0") {
    const Dataset data = testutil::random_dataset(5, 2, 50, 55);
    const ApcaModel model = fit(data, 7, 0.0);
    const Matrix recon = reconstruct_primary(model, encode(model, data));
    CHECK(testutil::rel_frobenius(recon, data.primary) < 1e-8);
}

TEST_CASE("zero factors reconstruct the centers") {
    const Dataset data = testutil::random_dataset(3, 2, 25, 6);
    const ApcaModel model = fit(data, 2, 1.0);
    const Matrix zero = Matrix::Zero(2, 4);
    const Matrix x_hat = reconstruct_primary(model, zero);
    const Matrix y_hat = predict_concomitant(model, zero);
    for (Index j = 0; j < 4; ++j) {
        CHECK((x_hat.col(j) - model.center_primary()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((y_hat.col(j) - model.center_concomitant()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("reconstruction error equals the first objective term") {
    const Dataset data = testutil::random_dataset(5, 2, 50, 14);
    const ApcaModel model = fit(data, 3, 4.0);
    const Matrix recon = reconstruct_primary(model, encode(model, data));
    const ObjectiveValue obj = objective_value(model, data);
    CHECK((data.primary - recon).squaredNorm() ==
          doctest::Approx(obj.primary_term).epsilon(1e-10));
}

TEST_CASE("an unpredictable concomitant block defeats the adversary") {
    // Y chosen orthogonal to the centered primary rows (and the constant),
    // so no factor of X carries information about it.
    Dataset data = testutil::random_dataset(4, 1, 60, 44);
    const Centered c = center(data);
    Matrix basis(60, 5);
    basis.leftCols(4) = c.data.primary.transpose();
    basis.col(4).setOnes();
    Vector y = Vector::Zero(60);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < 60; ++i) y[i] = normal(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(basis).householderQ() *
                     Matrix::Identity(60, 5);
    y -= q * (q.transpose() * y);
    data.concomitant = y.transpose();

    const ApcaModel model = fit(data, 2, 25.0);
    const Matrix y_hat = predict_concomitant(model, encode(model, data));
    const double resid = (data.concomitant - y_hat).squaredNorm();
    const double total = center(data).data.concomitant.squaredNorm();
    CHECK(resid == doctest::Approx(total).epsilon(1e-8));
}

TEST_CASE("objective at mu = 0 is the primary term") {
    const Dataset data = testutil::random_dataset(4, 2, 30, 71);
    const ApcaModel model = fit(data, 2, 0.0);
    const ObjectiveValue obj = objective_value(model, data);
    CHECK(obj.total == obj.primary_term);
}

TEST_CASE("perfect reconstruction with a silent adversary gives objective zero") {
    Dataset data = testutil::random_dataset(4, 1, 30, 101);
    data.concomitant.setZero();
    const ApcaModel model = fit(data, 5, 3.0);  // full rank of Z
    const ObjectiveValue obj = objective_value(model, data);
    CHECK(std::abs(obj.primary_term) < 1e-8 * data.primary.squaredNorm());
    CHECK(obj.adversary_term < 1e-12);
    CHECK(std::abs(obj.total) < 1e-8 * data.primary.squaredNorm());
}

TEST_CASE("pca handles the textbook cases") {
    // Rank-1 data reconstructs exactly with one component.
    Vector direction(3);
    direction << 1.0, -2.0, 0.5;
    Vector weights(10);
    for (Index i = 0; i < 10; ++i) weights[i] = static_cast<double>(i) - 4.5;
    const Matrix rank1 = direction * weights.transpose();
    const PcaModel m1 = pca_fit(rank1, 1);
    const Matrix recon = pca_reconstruct(m1, pca_transform(m1, rank1));
    CHECK((recon - rank1).norm() < 1e-10 * rank1.norm());

    // Orthonormal loadings.
    const Dataset data = testutil::random_dataset(5, 1, 40, 23);
    const PcaModel m2 = pca_fit(data.primary, 3);
    CHECK((m2.loadings.transpose() * m2.loadings - Matrix::Identity(3, 3)).norm() < 1e-10);

    // Reconstruction error equals the discarded singular-value energy.
    const Matrix r = pca_reconstruct(m2, pca_transform(m2, data.primary));
    const double err = (data.primary - r).squaredNorm();
    double discarded = 0.0;
    for (Index i = 3; i < m2.singular_values.size(); ++i)
        discarded += m2.singular_values[i] * m2.singular_values[i];
    CHECK(err == doctest::Approx(discarded).epsilon(1e-8));

    CHECK_THROWS_AS(pca_fit(data.primary, 0), DimensionMismatch);
    CHECK_THROWS_AS(pca_fit(data.primary, 6), DimensionMismatch);
}

TEST_CASE("degenerate encoder systems are reported") {
    CHECK_THROWS_AS(detail::pinv_sym(Matrix::Zero(2, 2), 1e-10), DegenerateEncoder);

    // V^T V == mu* D^T D makes the recovery matrix exactly zero.
    Matrix v(2, 1);
    v << 3.0, 4.0;
    Matrix d(1, 1);
    d << 5.0;
    const Dataset data = centered_random(1, 1, 10, 2);
    CHECK_THROWS_AS(detail::recover_encoder(v, d, 1.0, data.stacked(), data.concomitant, 1e-10),
                    DegenerateEncoder);
}

TEST_CASE("dimension mismatches are rejected across operations") {
    const Dataset data = testutil::random_dataset(4, 2, 30, 3);
    const ApcaModel model = fit(data, 2, 1.0);
    const Dataset other = testutil::random_dataset(5, 2, 30, 3);
    CHECK_THROWS_AS(encode(model, other), DimensionMismatch);
    CHECK_THROWS_AS(reconstruct_primary(model, Matrix::Zero(3, 10)), DimensionMismatch);
    CHECK_THROWS_AS(predict_concomitant(model, Matrix::Zero(3, 10)), DimensionMismatch);
    CHECK_THROWS_AS(objective_value(model, other), DimensionMismatch);
}
