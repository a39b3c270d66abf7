#include "apca/eval.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace apca {

namespace {

constexpr double kClassifierTol = 1e-7;
constexpr int kClassifierMaxIters = 5000;

// Maps arbitrary two-valued labels to {-1, +1}; the larger value is the
// positive class. Throws SingleClass / DataError.
std::vector<double> signed_labels(const std::vector<int>& labels) {
    std::set<int> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw SingleClass("labels contain a single class");
    if (distinct.size() > 2) throw DataError("labels must be binary");
    const int hi = *distinct.rbegin();
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == hi ? 1.0 : -1.0;
    return y;
}

double stable_log1pexp(double m) {
    // log(1 + exp(-m)) without overflow.
    if (m >= 0.0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

double sigmoid_neg(double m) {
    // 1 / (1 + exp(m)) = sigma(-m)
    if (m >= 0.0) {
        const double e = std::exp(-m);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(m));
}

struct SmoothPart {
    double value = 0.0;
    Vector grad_w;
    double grad_b = 0.0;
};

// c * sum_i loss(y_i * (w^T x_i + b)) and its gradient.
SmoothPart smooth_loss(const Matrix& x, const std::vector<double>& y, const Vector& w, double b,
                       double c, ClassifierLoss loss) {
    const Index n = x.cols();
    Vector f = x.transpose() * w;
    f.array() += b;
    SmoothPart out;
    Vector g(n);
    for (Index i = 0; i < n; ++i) {
        const double m = y[static_cast<std::size_t>(i)] * f[i];
        if (loss == ClassifierLoss::logistic) {
            out.value += stable_log1pexp(m);
            g[i] = -sigmoid_neg(m) * y[static_cast<std::size_t>(i)];
        } else {
            const double r = 1.0 - m;
            out.value += r * r;
            g[i] = -2.0 * r * y[static_cast<std::size_t>(i)];
        }
    }
    out.value *= c;
    out.grad_w = c * (x * g);
    out.grad_b = c * g.sum();
    return out;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

} // namespace

EvalConfig EvalConfig::defaults() {
    EvalConfig cfg;
    cfg.c_grid = default_c_grid();
    cfg.mu_grid = default_mu_grid();
    return cfg;
}

std::vector<double> default_c_grid() {
    std::vector<double> grid;
    for (int e = -2; e <= 6; ++e) grid.push_back(std::pow(10.0, e));
    return grid;
}

std::vector<double> default_mu_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 200; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

Vector ClassifierModel::decision_function(const Matrix& features) const {
    if (features.rows() != weights.size())
        throw DimensionMismatch("feature dimension does not match classifier");
    Vector scores(features.cols());
    for (Index j = 0; j < features.cols(); ++j) {
        const Vector standardized =
            (features.col(j) - feature_means).cwiseQuotient(feature_scales);
        scores[j] = weights.dot(standardized) + intercept;
    }
    return scores;
}

ClassifierModel train_l1_classifier(const Matrix& features, const std::vector<int>& labels,
                                    double c, ClassifierLoss loss, const ClassifierModel* warm) {
    if (features.cols() != static_cast<Index>(labels.size()))
        throw DimensionMismatch("feature columns and label count differ");
    if (features.cols() < 2) throw DataError("classifier needs at least two samples");
    if (c <= 0.0) throw DataError("penalty parameter C must be positive");
    const std::vector<double> y = signed_labels(labels);

    const Index d = features.rows();
    const Index n = features.cols();

    ClassifierModel model;
    model.penalty_c = c;
    model.loss = loss;
    model.feature_means = features.rowwise().mean();
    model.feature_scales.resize(d);
    Matrix x = features.colwise() - model.feature_means;
    for (Index i = 0; i < d; ++i) {
        const double sd = std::sqrt(x.row(i).squaredNorm() / static_cast<double>(n));
        model.feature_scales[i] = sd > 1e-12 ? sd : 1.0;
        x.row(i) /= model.feature_scales[i];
    }

    // Lipschitz constant of the smooth part: c * L_loss * lambda_max of the
    // Gram including the intercept column.
    Matrix gram = x * x.transpose();
    Matrix h(d + 1, d + 1);
    h.topLeftCorner(d, d) = gram;
    h.topRightCorner(d, 1) = x.rowwise().sum();
    h.bottomLeftCorner(1, d) = h.topRightCorner(d, 1).transpose();
    h(d, d) = static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const double loss_curv = loss == ClassifierLoss::logistic ? 0.25 : 2.0;
    const double lipschitz = std::max(c * loss_curv * es.eigenvalues().maxCoeff(), 1e-12);

    Vector w = Vector::Zero(d);
    double b = 0.0;
    if (warm && warm->weights.size() == d) {
        w = warm->weights;
        b = warm->intercept;
    }

    // FISTA with a monotone restart.
    Vector w_momentum = w;
    double b_momentum = b;
    double t = 1.0;
    SmoothPart cur = smooth_loss(x, y, w, b, c, loss);
    double objective = cur.value + w.lpNorm<1>();

    for (int iter = 0; iter < kClassifierMaxIters; ++iter) {
        SmoothPart at_momentum = smooth_loss(x, y, w_momentum, b_momentum, c, loss);
        Vector w_next(d);
        for (Index i = 0; i < d; ++i)
            w_next[i] = soft_threshold(w_momentum[i] - at_momentum.grad_w[i] / lipschitz,
                                       1.0 / lipschitz);
        const double b_next = b_momentum - at_momentum.grad_b / lipschitz;

        SmoothPart next = smooth_loss(x, y, w_next, b_next, c, loss);
        const double objective_next = next.value + w_next.lpNorm<1>();

        if (objective_next > objective) {
            // Momentum overshoot: restart from the last good iterate.
            w_momentum = w;
            b_momentum = b;
            t = 1.0;
            continue;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double mix = (t - 1.0) / t_next;
        w_momentum = w_next + mix * (w_next - w);
        b_momentum = b_next + mix * (b_next - b);
        t = t_next;

        const double change = objective - objective_next;
        w = std::move(w_next);
        b = b_next;
        const bool done = change <= kClassifierTol * (1.0 + std::abs(objective));
        objective = objective_next;
        if (done && iter > 0) break;
    }

    model.weights = std::move(w);
    model.intercept = b;
    return model;
}

double auc(const Vector& scores, const std::vector<int>& labels) {
    if (scores.size() != static_cast<Index>(labels.size()))
        throw DimensionMismatch("scores and labels have different lengths");
    const std::vector<double> y = signed_labels(labels);
    const Index n = scores.size();

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return scores[a] < scores[b]; });

    // Midranks over tie groups; ranks are half-integers so sums stay exact.
    double positive_rank_sum = 0.0;
    double n_pos = 0.0, n_neg = 0.0;
    Index i = 0;
    while (i < n) {
        Index j = i;
        while (j + 1 < n && scores[order[static_cast<std::size_t>(j + 1)]] ==
                                scores[order[static_cast<std::size_t>(i)]])
            ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (Index k = i; k <= j; ++k) {
            if (y[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] > 0.0) {
                positive_rank_sum += midrank;
                n_pos += 1.0;
            } else {
                n_neg += 1.0;
            }
        }
        i = j + 1;
    }
    return (positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& labels, int n_folds,
                                            std::uint64_t seed) {
    if (n_folds < 2) throw DataError("stratified assignment needs at least two folds");
    std::set<int> distinct(labels.begin(), labels.end());
    std::mt19937_64 rng(seed);
    std::vector<int> fold_of(labels.size(), -1);
    int offset = 0;
    for (int cls : distinct) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.size() < static_cast<std::size_t>(n_folds))
            throw InfeasibleStratification("class " + std::to_string(cls) + " has " +
                                           std::to_string(members.size()) +
                                           " members for " + std::to_string(n_folds) + " folds");
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < members.size(); ++j)
            fold_of[members[j]] = static_cast<int>((j + static_cast<std::size_t>(offset)) %
                                                   static_cast<std::size_t>(n_folds));
        offset = (offset + static_cast<int>(members.size() % static_cast<std::size_t>(n_folds))) %
                 n_folds;
    }
    return fold_of;
}

std::unique_ptr<FeatureTransform> RawPlan::fit(const Dataset&) const {
    struct Raw : FeatureTransform {
        FeatureBlock block;
        Matrix apply(const Dataset& data) const override {
            switch (block) {
                case FeatureBlock::primary: return data.primary;
                case FeatureBlock::concomitant: return data.concomitant;
                default: return data.stacked();
            }
        }
    };
    auto t = std::make_unique<Raw>();
    t->block = block_;
    return t;
}

std::unique_ptr<FeatureTransform> PcaPlan::fit(const Dataset& train) const {
    struct PcaFeatures : FeatureTransform {
        PcaModel model;
        FeatureBlock block;
        Matrix apply(const Dataset& data) const override {
            const Matrix source = block == FeatureBlock::primary     ? data.primary
                                  : block == FeatureBlock::concomitant ? data.concomitant
                                                                       : data.stacked();
            return pca_transform(model, source);
        }
    };
    const Matrix source = block_ == FeatureBlock::primary     ? train.primary
                          : block_ == FeatureBlock::concomitant ? train.concomitant
                                                                : train.stacked();
    auto t = std::make_unique<PcaFeatures>();
    t->model = pca_fit(source, k_);
    t->block = block_;
    return t;
}

std::unique_ptr<FeatureTransform> ApcaPlan::fit(const Dataset& train) const {
    struct ApcaFeatures : FeatureTransform {
        ApcaModel model;
        bool concat = false;
        ApcaFeatures(ApcaModel m, bool cc) : model(std::move(m)), concat(cc) {}
        Matrix apply(const Dataset& data) const override {
            Matrix factors = encode(model, data);
            if (!concat) return factors;
            Matrix out(factors.rows() + data.d_concomitant(), factors.cols());
            out.topRows(factors.rows()) = factors;
            out.bottomRows(data.d_concomitant()) = data.concomitant;
            return out;
        }
    };
    return std::make_unique<ApcaFeatures>(apca::fit(train, k_, mu_, config_), concat_);
}

CvResult cross_validated_auc(const Matrix& features, const std::vector<int>& labels, double c,
                             const EvalConfig& config) {
    Dataset wrapper;
    wrapper.primary = features;
    wrapper.concomitant = Matrix::Zero(1, features.cols());
    EvalConfig cfg = config;
    cfg.c_grid = {c};
    return cross_validated_auc_path(wrapper, labels, RawPlan(FeatureBlock::primary), cfg)[0];
}

std::vector<CvResult> cross_validated_auc_path(const Dataset& data,
                                               const std::vector<int>& labels,
                                               const FeaturePlan& plan,
                                               const EvalConfig& config) {
    data.validate();
    if (static_cast<Index>(labels.size()) != data.n_samples())
        throw DimensionMismatch("label count does not match dataset");
    if (config.c_grid.empty()) throw DataError("C grid is empty");
    const Index n = data.n_samples();

    std::vector<int> fold_of;
    int n_folds = 0;
    if (config.cv_scheme == CvScheme::leave_one_out) {
        n_folds = static_cast<int>(n);
        fold_of.resize(static_cast<std::size_t>(n));
        std::iota(fold_of.begin(), fold_of.end(), 0);
        signed_labels(labels);  // both classes must be present overall
    } else {
        n_folds = config.cv_folds;
        fold_of = stratified_fold_assignment(labels, n_folds, config.seed);
    }

    // Evaluate the C path ascending (sparse solutions first) with warm
    // starts, then report in the caller's order.
    std::vector<std::size_t> path(config.c_grid.size());
    std::iota(path.begin(), path.end(), std::size_t{0});
    std::sort(path.begin(), path.end(), [&](std::size_t a, std::size_t b) {
        return config.c_grid[a] < config.c_grid[b];
    });

    // scores[ci] collects held-out decision values sample-aligned.
    std::vector<Vector> scores(config.c_grid.size(), Vector::Zero(n));

    for (int fold = 0; fold < n_folds; ++fold) {
        std::vector<int> train_idx, test_idx;
        for (Index i = 0; i < n; ++i) {
            if (fold_of[static_cast<std::size_t>(i)] == fold)
                test_idx.push_back(static_cast<int>(i));
            else
                train_idx.push_back(static_cast<int>(i));
        }
        if (test_idx.empty()) continue;

        const Dataset train = subset(data, train_idx);
        const Dataset test = subset(data, test_idx);
        std::vector<int> train_labels;
        train_labels.reserve(train_idx.size());
        for (int i : train_idx) train_labels.push_back(labels[static_cast<std::size_t>(i)]);

        const auto transform = plan.fit(train);
        const Matrix f_train = transform->apply(train);
        const Matrix f_test = transform->apply(test);

        ClassifierModel prev;
        bool have_prev = false;
        for (std::size_t ci : path) {
            ClassifierModel clf = train_l1_classifier(f_train, train_labels, config.c_grid[ci],
                                                      config.loss, have_prev ? &prev : nullptr);
            const Vector s = clf.decision_function(f_test);
            for (std::size_t j = 0; j < test_idx.size(); ++j)
                scores[ci][test_idx[j]] = s[static_cast<Index>(j)];
            prev = std::move(clf);
            have_prev = true;
        }
    }

    std::vector<CvResult> results(config.c_grid.size());
    for (std::size_t ci = 0; ci < config.c_grid.size(); ++ci) {
        CvResult& r = results[ci];
        if (config.cv_scheme == CvScheme::leave_one_out) {
            r.mean_auc = auc(scores[ci], labels);
            r.per_fold_aucs = {r.mean_auc};
            continue;
        }
        for (int fold = 0; fold < n_folds; ++fold) {
            std::vector<int> fold_labels;
            std::vector<double> fold_scores;
            for (Index i = 0; i < n; ++i) {
                if (fold_of[static_cast<std::size_t>(i)] != fold) continue;
                fold_labels.push_back(labels[static_cast<std::size_t>(i)]);
                fold_scores.push_back(scores[ci][i]);
            }
            Vector sv = Eigen::Map<Vector>(fold_scores.data(),
                                           static_cast<Index>(fold_scores.size()));
            r.per_fold_aucs.push_back(auc(sv, fold_labels));
        }
        r.mean_auc = std::accumulate(r.per_fold_aucs.begin(), r.per_fold_aucs.end(), 0.0) /
                     static_cast<double>(r.per_fold_aucs.size());
    }
    return results;
}

double pearson(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionMismatch("pearson inputs differ in length");
    const double ma = a.mean();
    const double mb = b.mean();
    const Vector da = a.array() - ma;
    const Vector db = b.array() - mb;
    const double denom = da.norm() * db.norm();
    if (denom == 0.0) return 0.0;
    return da.dot(db) / denom;
}

} // namespace apca
