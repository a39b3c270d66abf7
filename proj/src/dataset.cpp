#include "apca/dataset.hpp"

#include <set>

namespace apca {

namespace {

void validate_labels(const std::vector<int>& labels, Index n, const char* name) {
    if (static_cast<Index>(labels.size()) != n)
        throw DimensionMismatch(std::string(name) + " length does not match sample count");
    std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() != 2)
        throw DataError(std::string(name) + " must take exactly two distinct values, got " +
                        std::to_string(distinct.size()));
}

} // namespace

Matrix Dataset::stacked() const {
    Matrix z(primary.rows() + concomitant.rows(), primary.cols());
    z.topRows(primary.rows()) = primary;
    z.bottomRows(concomitant.rows()) = concomitant;
    return z;
}

void Dataset::validate() const {
    if (primary.rows() < 1 || concomitant.rows() < 1)
        throw DimensionMismatch("primary and concomitant blocks need at least one feature row");
    if (primary.cols() < 1)
        throw DimensionMismatch("dataset needs at least one sample");
    if (primary.cols() != concomitant.cols())
        throw DimensionMismatch("primary and concomitant blocks have different sample counts");
    if (!primary.allFinite() || !concomitant.allFinite())
        throw DataError("dataset contains non-finite entries");
    if (labels) validate_labels(*labels, n_samples(), "labels");
    if (confound_labels) validate_labels(*confound_labels, n_samples(), "confound_labels");
    if (!primary_names.empty() && static_cast<Index>(primary_names.size()) != d_primary())
        throw DimensionMismatch("primary feature-name count does not match block");
    if (!concomitant_names.empty() && static_cast<Index>(concomitant_names.size()) != d_concomitant())
        throw DimensionMismatch("concomitant feature-name count does not match block");
}

Dataset subset(const Dataset& data, const std::vector<int>& indices) {
    Dataset out;
    out.primary.resize(data.d_primary(), static_cast<Index>(indices.size()));
    out.concomitant.resize(data.d_concomitant(), static_cast<Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const Index src = indices[j];
        out.primary.col(static_cast<Index>(j)) = data.primary.col(src);
        out.concomitant.col(static_cast<Index>(j)) = data.concomitant.col(src);
    }
    auto slice = [&](const std::optional<std::vector<int>>& v) -> std::optional<std::vector<int>> {
        if (!v) return std::nullopt;
        std::vector<int> s;
        s.reserve(indices.size());
        for (int i : indices) s.push_back((*v)[static_cast<std::size_t>(i)]);
        return s;
    };
    out.labels = slice(data.labels);
    out.confound_labels = slice(data.confound_labels);
    out.primary_names = data.primary_names;
    out.concomitant_names = data.concomitant_names;
    return out;
}

Centered center(const Dataset& data) {
    data.validate();
    Centered c;
    c.center_primary = data.primary.rowwise().mean();
    c.center_concomitant = data.concomitant.rowwise().mean();
    c.data = data;
    c.data.primary.colwise() -= c.center_primary;
    c.data.concomitant.colwise() -= c.center_concomitant;
    return c;
}

} // namespace apca
