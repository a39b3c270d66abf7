#pragma once

#include "apca/dataset.hpp"
#include "apca/factor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace apca {

enum class CvScheme { stratified_k_fold, leave_one_out };
enum class ClassifierLoss { logistic, squared };
enum class Preprocessing { none, pca, apca };
enum class LabelTarget { target, confound };

struct EvalConfig {
    /// Regularization grid; empty means the default decades 1e-2 .. 1e6.
    std::vector<double> c_grid;
    /// Component counts; empty means 1 .. p where p is the decomposed
    /// block's feature dimensionality (clamped to what the folds support).
    std::vector<int> k_grid;
    /// Adversarial strengths; empty means 0.0, 0.1, ..., 20.0.
    std::vector<double> mu_grid;
    int cv_folds = 5;
    CvScheme cv_scheme = CvScheme::stratified_k_fold;
    /// "Linear regression with an l1 penalty" read as L1 logistic scored by
    /// its linear predictor; `squared` gives the literal lasso reading.
    ClassifierLoss loss = ClassifierLoss::logistic;
    std::uint64_t seed = 0;
    /// Factor count used for the per-mu reconstruction/correlation
    /// diagnostics in sweeps; 0 means the largest resolved k.
    int diag_factors = 0;
    FitConfig fit;

    /// Grids filled in with the defaults above.
    static EvalConfig defaults();
};

std::vector<double> default_c_grid();
std::vector<double> default_mu_grid();

/// L1-penalized linear classifier scored by its linear predictor. Features
/// are standardized internally; the stored means/scales are applied again at
/// scoring time. Weights minimize ||w||_1 + C * sum_i loss_i.
struct ClassifierModel {
    Vector weights;
    double intercept = 0.0;
    double penalty_c = 1.0;
    Vector feature_means;
    Vector feature_scales;
    ClassifierLoss loss = ClassifierLoss::logistic;

    /// Scores for features given one column per sample.
    Vector decision_function(const Matrix& features) const;
};

/// Trains on features (one column per sample). `warm` optionally seeds the
/// optimizer with a previous solution on the same feature set (used along a
/// C path). Throws SingleClass when labels are constant.
ClassifierModel train_l1_classifier(const Matrix& features, const std::vector<int>& labels,
                                    double c, ClassifierLoss loss = ClassifierLoss::logistic,
                                    const ClassifierModel* warm = nullptr);

/// Mann-Whitney AUC with ties counted as one half. Throws SingleClass.
double auc(const Vector& scores, const std::vector<int>& labels);

/// Deterministic stratified fold assignment: per-class shuffle with the
/// seeded generator, folds dealt round-robin with a rotating offset so fold
/// sizes differ by at most one overall. Throws InfeasibleStratification when
/// a class has fewer members than folds.
std::vector<int> stratified_fold_assignment(const std::vector<int>& labels, int n_folds,
                                            std::uint64_t seed);

/// A fitted feature preprocessing step (applied to held-out data unchanged).
struct FeatureTransform {
    virtual ~FeatureTransform() = default;
    virtual Matrix apply(const Dataset& data) const = 0;
};

/// A recipe for fitting a FeatureTransform on a training split only.
struct FeaturePlan {
    virtual ~FeaturePlan() = default;
    virtual std::unique_ptr<FeatureTransform> fit(const Dataset& train) const = 0;
};

enum class FeatureBlock { primary, concomitant, stacked };

/// Raw features from the chosen block, no fitting involved.
class RawPlan : public FeaturePlan {
public:
    explicit RawPlan(FeatureBlock block) : block_(block) {}
    std::unique_ptr<FeatureTransform> fit(const Dataset& train) const override;

private:
    FeatureBlock block_;
};

/// PCA scores of the chosen block, k components.
class PcaPlan : public FeaturePlan {
public:
    PcaPlan(FeatureBlock block, Index k) : block_(block), k_(k) {}
    std::unique_ptr<FeatureTransform> fit(const Dataset& train) const override;

private:
    FeatureBlock block_;
    Index k_;
};

/// Adversarial factors; optionally concatenated with the raw concomitant
/// block (the multimodal pipeline).
class ApcaPlan : public FeaturePlan {
public:
    ApcaPlan(Index k, double mu, bool concat_concomitant = false, FitConfig config = {})
        : k_(k), mu_(mu), concat_(concat_concomitant), config_(config) {}
    std::unique_ptr<FeatureTransform> fit(const Dataset& train) const override;

private:
    Index k_;
    double mu_;
    bool concat_;
    FitConfig config_;
};

struct CvResult {
    double mean_auc = 0.0;
    std::vector<double> per_fold_aucs;
};

/// Cross-validated AUC of the classifier on fixed features. Standardization
/// is fit inside each training fold. Folds are deterministic given the seed.
CvResult cross_validated_auc(const Matrix& features, const std::vector<int>& labels, double c,
                             const EvalConfig& config);

/// Pipeline-aware variant evaluating the whole C grid in one pass: the plan
/// is fit once per fold and the classifier is warm-started along the
/// ascending C path. Returns one result per entry of config.c_grid, in the
/// caller's order. With leave-one-out, held-out scores are pooled into a
/// single AUC (a one-sample fold has no AUC of its own).
std::vector<CvResult> cross_validated_auc_path(const Dataset& data,
                                               const std::vector<int>& labels,
                                               const FeaturePlan& plan,
                                               const EvalConfig& config);

struct GridCell {
    std::optional<double> mu;
    std::optional<int> k;
    double c = 1.0;
    double mean_auc = 0.0;
};

struct GridSearchResult {
    GridCell best;
    std::vector<GridCell> table;
    /// Feature count entering the classifier at the best cell.
    Index feature_count = 0;
};

/// Exhaustive search over the applicable grids (C only for `none`, k x C for
/// `pca`, mu x k x C for `apca`). Ties prefer smaller k, then smaller C,
/// then smaller mu.
GridSearchResult grid_search(const Dataset& data, LabelTarget target, Preprocessing prep,
                             const EvalConfig& config);

struct SweepRecord {
    double mu = 0.0;
    int best_k = 0;
    double best_c = 1.0;
    double auc_target = 0.0;
    std::optional<double> auc_confound;
    double primary_recon_error = 0.0;      // ||X - W A Z||_F^2 at the diagnostic fit
    double concomitant_recon_error = 0.0;  // ||Y - D A Z||_F^2 at the diagnostic fit
    /// Per-factor max |pearson correlation| against the concomitant rows.
    std::vector<double> factor_confound_correlations;
};

struct SweepResult {
    std::vector<SweepRecord> records;
    int diag_factors = 0;
};

/// Per-mu trace of the confound-removal pipeline: fit with the concomitant
/// block as adversary data, grid-search both label targets, record the
/// Pareto quantities. Needs both label vectors.
SweepResult confound_invariance_experiment(const Dataset& data, const EvalConfig& config);

struct PipelineScore {
    std::string name;
    Index feature_count = 0;
    double auc = 0.0;
    std::optional<int> k;
    std::optional<double> c;
    std::optional<double> mu;
};

struct DisentanglementResult {
    SweepResult sweep;
    /// Rows: naive concatenation, PCA on the stacked blocks, best-mu
    /// adversarial pipeline (factors plus raw concomitant features).
    std::vector<PipelineScore> comparison;
};

/// Multimodal pipeline: per mu, classifier features are the adversarial
/// factors of the primary block concatenated with the raw concomitant block;
/// compared against naive concatenation and stacked PCA.
DisentanglementResult disentanglement_experiment(const Dataset& data, const EvalConfig& config);

/// Pearson correlation; zero-variance inputs give 0.
double pearson(const Vector& a, const Vector& b);

} // namespace apca
