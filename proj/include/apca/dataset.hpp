#pragma once

#include "apca/types.hpp"

#include <optional>
#include <vector>

namespace apca {

/// Sample container for fitting and evaluation. Data is stored with one
/// feature per row and one sample per column, so `primary` is d_x x N and
/// `concomitant` is d_y x N. Labels are optional binary class markers;
/// `labels` is the prediction target (e.g. diagnosis) and `confound_labels`
/// the secondary grouping (e.g. above/below-average IQ).
struct Dataset {
    Matrix primary;
    Matrix concomitant;
    std::optional<std::vector<int>> labels;
    std::optional<std::vector<int>> confound_labels;
    std::vector<std::string> primary_names;     // optional, may be empty
    std::vector<std::string> concomitant_names; // optional, may be empty

    Index n_samples() const { return primary.cols(); }
    Index d_primary() const { return primary.rows(); }
    Index d_concomitant() const { return concomitant.rows(); }

    /// Z = [X; Y], the jointly stacked blocks, (d_x + d_y) x N.
    Matrix stacked() const;

    /// Throws DimensionMismatch / DataError when an invariant is violated:
    /// equal column counts, N >= 1, d_x >= 1, d_y >= 1, finite entries,
    /// and any label vector of length N with exactly two distinct values.
    void validate() const;
};

/// Column subset of a dataset (labels sliced alongside), in index order.
Dataset subset(const Dataset& data, const std::vector<int>& indices);

struct Centered {
    Dataset data;
    Vector center_primary;
    Vector center_concomitant;
};

/// Removes the row means of both blocks. The returned means restore the
/// original data via broadcast addition.
Centered center(const Dataset& data);

} // namespace apca
