#include "apca/eval.hpp"

#include <algorithm>
#include <cmath>

namespace apca {

namespace {

// Ties prefer simpler models: smaller k, then smaller C, then smaller mu.
bool cell_better(const GridCell& a, const GridCell& b) {
    if (a.mean_auc != b.mean_auc) return a.mean_auc > b.mean_auc;
    const int ak = a.k.value_or(0), bk = b.k.value_or(0);
    if (ak != bk) return ak < bk;
    if (a.c != b.c) return a.c < b.c;
    return a.mu.value_or(0.0) < b.mu.value_or(0.0);
}

EvalConfig with_default_grids(const EvalConfig& config) {
    EvalConfig cfg = config;
    if (cfg.c_grid.empty()) cfg.c_grid = default_c_grid();
    if (cfg.mu_grid.empty()) cfg.mu_grid = default_mu_grid();
    return cfg;
}

// Smallest training-split size the scheme will produce, which caps usable
// component counts (preprocessing is fit on training folds only).
Index min_train_size(const std::vector<int>& labels, const EvalConfig& cfg) {
    const Index n = static_cast<Index>(labels.size());
    if (cfg.cv_scheme == CvScheme::leave_one_out) return n - 1;
    const std::vector<int> fold_of = stratified_fold_assignment(labels, cfg.cv_folds, cfg.seed);
    std::vector<Index> counts(static_cast<std::size_t>(cfg.cv_folds), 0);
    for (int f : fold_of) ++counts[static_cast<std::size_t>(f)];
    return n - *std::max_element(counts.begin(), counts.end());
}

std::vector<int> resolve_k_grid(const std::vector<int>& requested, Index p, Index cap) {
    std::vector<int> grid;
    if (requested.empty()) {
        for (Index k = 1; k <= std::min(p, cap); ++k) grid.push_back(static_cast<int>(k));
    } else {
        for (int k : requested)
            if (k >= 1 && k <= static_cast<int>(cap)) grid.push_back(k);
    }
    if (grid.empty()) throw DataError("no usable component counts in the k grid");
    return grid;
}

const std::vector<int>& pick_labels(const Dataset& data, LabelTarget target) {
    const auto& chosen = target == LabelTarget::target ? data.labels : data.confound_labels;
    if (!chosen)
        throw DataError(target == LabelTarget::target ? "dataset carries no target labels"
                                                      : "dataset carries no confound labels");
    return *chosen;
}

// One (mu, k) pipeline evaluated over the whole C grid.
void append_cells(std::vector<GridCell>& cells, const Dataset& data,
                  const std::vector<int>& labels, const FeaturePlan& plan,
                  const EvalConfig& cfg, std::optional<double> mu, std::optional<int> k) {
    const std::vector<CvResult> path = cross_validated_auc_path(data, labels, plan, cfg);
    for (std::size_t ci = 0; ci < cfg.c_grid.size(); ++ci) {
        GridCell cell;
        cell.mu = mu;
        cell.k = k;
        cell.c = cfg.c_grid[ci];
        cell.mean_auc = path[ci].mean_auc;
        cells.push_back(cell);
    }
}

GridCell best_of(const std::vector<GridCell>& cells) {
    GridCell best = cells.front();
    for (const GridCell& cell : cells)
        if (cell_better(cell, best)) best = cell;
    return best;
}

// Per-factor max |pearson| against the concomitant rows.
std::vector<double> factor_confound_correlations(const Matrix& factors, const Matrix& concomitant) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(factors.rows()));
    for (Index i = 0; i < factors.rows(); ++i) {
        double best = 0.0;
        const Vector f = factors.row(i).transpose();
        for (Index j = 0; j < concomitant.rows(); ++j)
            best = std::max(best, std::abs(pearson(f, concomitant.row(j).transpose())));
        out.push_back(best);
    }
    return out;
}

} // namespace

GridSearchResult grid_search(const Dataset& data, LabelTarget target, Preprocessing prep,
                             const EvalConfig& config) {
    data.validate();
    const std::vector<int>& labels = pick_labels(data, target);
    const EvalConfig cfg = with_default_grids(config);

    GridSearchResult result;
    if (prep == Preprocessing::none) {
        append_cells(result.table, data, labels, RawPlan(FeatureBlock::primary), cfg,
                     std::nullopt, std::nullopt);
        result.best = best_of(result.table);
        result.feature_count = data.d_primary();
        return result;
    }

    const Index n_train = min_train_size(labels, cfg);
    if (prep == Preprocessing::pca) {
        const Index cap = std::min(data.d_primary(), n_train);
        for (int k : resolve_k_grid(cfg.k_grid, data.d_primary(), cap))
            append_cells(result.table, data, labels, PcaPlan(FeatureBlock::primary, k), cfg,
                         std::nullopt, k);
    } else {
        const Index cap = std::min(data.d_primary() + data.d_concomitant(), n_train);
        const std::vector<int> ks = resolve_k_grid(cfg.k_grid, data.d_primary(), cap);
        for (double mu : cfg.mu_grid)
            for (int k : ks)
                append_cells(result.table, data, labels, ApcaPlan(k, mu, false, cfg.fit), cfg,
                             mu, k);
    }
    result.best = best_of(result.table);
    result.feature_count = result.best.k.value_or(static_cast<int>(data.d_primary()));
    return result;
}

SweepResult confound_invariance_experiment(const Dataset& data, const EvalConfig& config) {
    data.validate();
    const std::vector<int>& target = pick_labels(data, LabelTarget::target);
    const std::vector<int>& confound = pick_labels(data, LabelTarget::confound);
    const EvalConfig cfg = with_default_grids(config);

    const Index cap = std::min({data.d_primary() + data.d_concomitant(),
                                min_train_size(target, cfg), min_train_size(confound, cfg)});
    const std::vector<int> ks = resolve_k_grid(cfg.k_grid, data.d_primary(), cap);

    SweepResult sweep;
    sweep.diag_factors = cfg.diag_factors > 0
                             ? std::min<int>(cfg.diag_factors, static_cast<int>(cap))
                             : *std::max_element(ks.begin(), ks.end());

    for (double mu : cfg.mu_grid) {
        std::vector<GridCell> target_cells, confound_cells;
        for (int k : ks) {
            const ApcaPlan plan(k, mu, false, cfg.fit);
            append_cells(target_cells, data, target, plan, cfg, mu, k);
            append_cells(confound_cells, data, confound, plan, cfg, mu, k);
        }
        const GridCell best_target = best_of(target_cells);
        const GridCell best_confound = best_of(confound_cells);

        const ApcaModel model = fit(data, sweep.diag_factors, mu, cfg.fit);
        const ObjectiveValue obj = objective_value(model, data);
        const Matrix factors = encode(model, data);

        SweepRecord rec;
        rec.mu = mu;
        rec.best_k = best_target.k.value_or(0);
        rec.best_c = best_target.c;
        rec.auc_target = best_target.mean_auc;
        rec.auc_confound = best_confound.mean_auc;
        rec.primary_recon_error = obj.primary_term;
        rec.concomitant_recon_error = obj.adversary_term;
        rec.factor_confound_correlations = factor_confound_correlations(factors, data.concomitant);
        sweep.records.push_back(std::move(rec));
    }
    return sweep;
}

DisentanglementResult disentanglement_experiment(const Dataset& data, const EvalConfig& config) {
    data.validate();
    const std::vector<int>& labels = pick_labels(data, LabelTarget::target);
    const EvalConfig cfg = with_default_grids(config);
    const Index d_stacked = data.d_primary() + data.d_concomitant();
    const Index n_train = min_train_size(labels, cfg);

    DisentanglementResult result;

    // Baseline: naive concatenation, C search only.
    std::vector<GridCell> naive_cells;
    append_cells(naive_cells, data, labels, RawPlan(FeatureBlock::stacked), cfg, std::nullopt,
                 std::nullopt);
    const GridCell naive_best = best_of(naive_cells);
    result.comparison.push_back(
        {"none", d_stacked, naive_best.mean_auc, std::nullopt, naive_best.c, std::nullopt});

    // Baseline: PCA on the stacked blocks, k x C search.
    std::vector<GridCell> pca_cells;
    const Index pca_cap = std::min(d_stacked, n_train);
    for (int k : resolve_k_grid(cfg.k_grid, d_stacked, pca_cap))
        append_cells(pca_cells, data, labels, PcaPlan(FeatureBlock::stacked, k), cfg,
                     std::nullopt, k);
    const GridCell pca_best = best_of(pca_cells);
    result.comparison.push_back({"pca", static_cast<Index>(*pca_best.k), pca_best.mean_auc,
                                 pca_best.k, pca_best.c, std::nullopt});

    // Adversarial pipeline: factors of the primary block, unpredictive of
    // the concomitant block, concatenated with the raw concomitant features.
    const Index cap = std::min(d_stacked, n_train);
    const std::vector<int> ks = resolve_k_grid(cfg.k_grid, data.d_primary(), cap);
    result.sweep.diag_factors = cfg.diag_factors > 0
                                    ? std::min<int>(cfg.diag_factors, static_cast<int>(cap))
                                    : *std::max_element(ks.begin(), ks.end());

    std::vector<GridCell> all_mu_cells;
    for (double mu : cfg.mu_grid) {
        std::vector<GridCell> cells;
        for (int k : ks)
            append_cells(cells, data, labels, ApcaPlan(k, mu, true, cfg.fit), cfg, mu, k);
        const GridCell best = best_of(cells);
        all_mu_cells.insert(all_mu_cells.end(), cells.begin(), cells.end());

        const ApcaModel model = fit(data, result.sweep.diag_factors, mu, cfg.fit);
        const ObjectiveValue obj = objective_value(model, data);
        const Matrix factors = encode(model, data);

        SweepRecord rec;
        rec.mu = mu;
        rec.best_k = best.k.value_or(0);
        rec.best_c = best.c;
        rec.auc_target = best.mean_auc;
        rec.primary_recon_error = obj.primary_term;
        rec.concomitant_recon_error = obj.adversary_term;
        rec.factor_confound_correlations = factor_confound_correlations(factors, data.concomitant);
        result.sweep.records.push_back(std::move(rec));
    }

    const GridCell apca_best = best_of(all_mu_cells);
    result.comparison.push_back({"apca",
                                 static_cast<Index>(*apca_best.k) + data.d_concomitant(),
                                 apca_best.mean_auc, apca_best.k, apca_best.c, apca_best.mu});
    return result;
}

} // namespace apca
