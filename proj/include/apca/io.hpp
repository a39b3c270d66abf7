#pragma once

#include "apca/dataset.hpp"
#include "apca/eval.hpp"
#include "apca/factor.hpp"
#include "apca/synth.hpp"

#include <filesystem>
#include <string>

namespace apca {

/// Shortest decimal form that parses back to the same double (to_chars).
std::string format_double(double value);

/// FNV-1a 64-bit digest of a file's bytes, lowercase hex.
std::string fnv1a_file_hex(const std::filesystem::path& path);

/// Dataset CSV: one header row, one row per sample; columns are the primary
/// block (x0, x1, ...), the concomitant block (y0, y1, ...), then
/// label_target and label_confound where present. Floats are written in
/// round-trip form, so load(save(d)) is bit-exact.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// JSON sidecar describing how a synthetic dataset was generated.
void write_synth_sidecar(const std::filesystem::path& path, const SynthSpec& spec,
                         const std::string& preset);

struct ModelProvenance {
    std::string dataset_hash = "none";
    FitConfig config;
};

/// Keyed text format with explicit shape metadata and round-trip floats.
/// A version-line mismatch on load is a hard error.
void write_model(const std::filesystem::path& path, const ApcaModel& model,
                 const ModelProvenance& provenance);

struct LoadedModel {
    ApcaModel model;
    ModelProvenance provenance;
};

LoadedModel read_model(const std::filesystem::path& path);

/// Factor matrix as CSV, one row per sample, columns f0 .. f{l-1}.
void write_factors_csv(const std::filesystem::path& path, const Matrix& factors);

struct ResultMetadata {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string dataset_hash = "none";
    std::vector<double> mu_grid;
    std::vector<int> k_grid;
    std::vector<double> c_grid;
    int cv_folds = 0;
    int diag_factors = 0;
};

/// Sweep records plus metadata as JSON. The creation stamp honors
/// SOURCE_DATE_EPOCH and is otherwise 0 so identical runs produce identical
/// bytes.
void write_result_json(const std::filesystem::path& path, const SweepResult& sweep,
                       const std::vector<PipelineScore>& comparison,
                       const ResultMetadata& meta);

struct LoadedResult {
    SweepResult sweep;
    std::vector<PipelineScore> comparison;
    ResultMetadata meta;
};

LoadedResult read_result_json(const std::filesystem::path& path);

/// Tidy per-curve CSV (columns mu, series, value) for external plotting.
void write_curves_csv(const std::filesystem::path& path, const SweepResult& sweep);

} // namespace apca
