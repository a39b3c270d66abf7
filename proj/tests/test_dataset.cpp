#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apca/dataset.hpp"
#include "testutil.hpp"

using namespace apca;

TEST_CASE("center removes a one-row mean") {
    Dataset data;
    data.primary.resize(1, 2);
    data.primary << 1.0, 3.0;
    data.concomitant = Matrix::Zero(1, 2);
    const Centered c = center(data);
    CHECK(c.data.primary(0, 0) == doctest::Approx(-1.0));
    CHECK(c.data.primary(0, 1) == doctest::Approx(1.0));
    CHECK(c.center_primary[0] == doctest::Approx(2.0));
}

TEST_CASE("center is the identity on zero-mean data") {
    Dataset data = testutil::random_dataset(3, 2, 20, 11);
    data.primary.colwise() -= Vector(data.primary.rowwise().mean());
    data.concomitant.colwise() -= Vector(data.concomitant.rowwise().mean());
    const Centered c = center(data);
    CHECK(testutil::rel_frobenius(c.data.primary, data.primary) < 1e-14);
    CHECK(c.center_primary.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(c.center_concomitant.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("centered rows sum to zero") {
    const Dataset data = testutil::random_dataset(4, 2, 50, 7);
    const Centered c = center(data);
    const Vector row_sums = c.data.primary.rowwise().sum();
    CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(c.data.concomitant.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("single-sample datasets center to zero") {
    Dataset data;
    data.primary = Matrix::Constant(2, 1, 5.0);
    data.concomitant = Matrix::Constant(1, 1, -3.0);
    const Centered c = center(data);
    CHECK(c.data.primary.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.center_primary[0] == 5.0);
}

TEST_CASE("validate rejects malformed datasets") {
    Dataset data = testutil::random_dataset(3, 2, 10, 1);
    CHECK_NOTHROW(data.validate());

    Dataset mismatched = data;
    mismatched.concomitant = Matrix::Zero(2, 9);
    CHECK_THROWS_AS(mismatched.validate(), DimensionMismatch);

    Dataset nonfinite = data;
    nonfinite.primary(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nonfinite.validate(), DataError);

    Dataset empty;
    empty.primary.resize(3, 0);
    empty.concomitant.resize(2, 0);
    CHECK_THROWS_AS(empty.validate(), DimensionMismatch);

    Dataset one_class = data;
    one_class.labels = std::vector<int>(10, 1);
    CHECK_THROWS_AS(one_class.validate(), DataError);

    Dataset three_class = data;
    three_class.labels = std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    CHECK_THROWS_AS(three_class.validate(), DataError);

    Dataset short_labels = data;
    short_labels.labels = std::vector<int>{0, 1};
    CHECK_THROWS_AS(short_labels.validate(), DimensionMismatch);
}

TEST_CASE("stacked puts the primary block on top") {
    const Dataset data = testutil::random_dataset(3, 2, 5, 2);
    const Matrix z = data.stacked();
    CHECK(testutil::rel_frobenius(z.topRows(3), data.primary) == 0.0);
    CHECK(testutil::rel_frobenius(z.bottomRows(2), data.concomitant) == 0.0);
}

TEST_CASE("subset slices columns and labels together") {
    Dataset data = testutil::random_dataset(2, 1, 6, 3);
    data.labels = std::vector<int>{0, 1, 0, 1, 0, 1};
    data.confound_labels = std::vector<int>{1, 1, 0, 0, 1, 0};
    const Dataset s = subset(data, {4, 0, 5});
    CHECK(s.n_samples() == 3);
    CHECK(s.primary.col(0) == data.primary.col(4));
    CHECK(s.primary.col(2) == data.primary.col(5));
    CHECK((*s.labels)[0] == 0);
    CHECK((*s.labels)[2] == 1);
    CHECK((*s.confound_labels)[0] == 1);
    CHECK((*s.confound_labels)[2] == 0);
}
