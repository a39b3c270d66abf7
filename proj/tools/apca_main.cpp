#include "apca/eval.hpp"
#include "apca/factor.hpp"
#include "apca/io.hpp"
#include "apca/oracle.hpp"
#include "apca/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>

namespace {

using namespace apca;

struct GridFlags {
    std::vector<double> mu_grid;
    std::vector<int> k_grid;
    std::vector<double> c_grid;
    int folds = 5;
    bool leave_one_out = false;
    std::string loss = "logistic";
    std::uint64_t seed = 0;
    int diag_factors = 0;
};

void add_grid_flags(CLI::App* cmd, GridFlags& flags) {
    cmd->add_option("--mu-grid", flags.mu_grid, "Adversarial strengths (default 0.0,0.1,...,20.0)")
        ->delimiter(',');
    cmd->add_option("--k-grid", flags.k_grid, "Component counts (default 1..p)")->delimiter(',');
    cmd->add_option("--c-grid", flags.c_grid, "Penalty grid (default decades 1e-2..1e6)")
        ->delimiter(',');
    cmd->add_option("--folds", flags.folds, "Stratified CV folds")->check(CLI::Range(2, 1000));
    cmd->add_flag("--loo", flags.leave_one_out, "Leave-one-out instead of stratified k-fold");
    cmd->add_option("--loss", flags.loss, "Classifier loss")
        ->check(CLI::IsMember({"logistic", "squared"}));
    cmd->add_option("--seed", flags.seed, "Fold-assignment seed");
    cmd->add_option("--diag-factors", flags.diag_factors,
                    "Factor count for per-mu diagnostics (default: largest k)");
}

EvalConfig make_eval_config(const GridFlags& flags) {
    EvalConfig cfg = EvalConfig::defaults();
    if (!flags.mu_grid.empty()) cfg.mu_grid = flags.mu_grid;
    if (!flags.k_grid.empty()) cfg.k_grid = flags.k_grid;
    if (!flags.c_grid.empty()) cfg.c_grid = flags.c_grid;
    cfg.cv_folds = flags.folds;
    cfg.cv_scheme = flags.leave_one_out ? CvScheme::leave_one_out : CvScheme::stratified_k_fold;
    cfg.loss = flags.loss == "squared" ? ClassifierLoss::squared : ClassifierLoss::logistic;
    cfg.seed = flags.seed;
    cfg.diag_factors = flags.diag_factors;
    return cfg;
}

void print_score_row(const PipelineScore& row, bool show_confound, double auc_confound) {
    std::cout << std::left << std::setw(14) << row.name << std::setw(10) << row.feature_count
              << std::setw(12) << format_double(row.auc);
    if (show_confound) std::cout << std::setw(12) << format_double(auc_confound);
    if (row.k) std::cout << " k=" << *row.k;
    if (row.c) std::cout << " C=" << format_double(*row.c);
    if (row.mu) std::cout << " mu=" << format_double(*row.mu);
    std::cout << '\n';
}

int run(int argc, char** argv) {
    CLI::App app{"adversarial linear factor models: generate, fit, sweep, evaluate"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "Generate a seeded synthetic cohort CSV");
    std::string gen_out, gen_preset = "confounded";
    SynthSpec gen_overrides;
    bool has_n = false, has_dp = false, has_dc = false;
    gen->add_option("--out", gen_out, "Output CSV path")->required();
    gen->add_option("--preset", gen_preset, "Cohort family")
        ->check(CLI::IsMember({"confounded", "multimodal"}));
    std::uint64_t gen_seed = 0;
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--n", gen_overrides.n_samples, "Sample count")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { has_n = true; });
    gen->add_option("--d-primary", gen_overrides.d_primary, "Primary feature count")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { has_dp = true; });
    gen->add_option("--d-concomitant", gen_overrides.d_concomitant, "Concomitant feature count")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { has_dc = true; });
    double sig = -1.0, conf = -1.0, red = -1.0, corr = -2.0, noise = -1.0;
    gen->add_option("--signal-strength", sig)->check(CLI::NonNegativeNumber);
    gen->add_option("--confound-strength", conf)->check(CLI::NonNegativeNumber);
    gen->add_option("--redundancy-strength", red)->check(CLI::NonNegativeNumber);
    gen->add_option("--label-confound-corr", corr)->check(CLI::Range(-1.0, 1.0));
    gen->add_option("--noise-sigma", noise, "Noise standard deviation (> 0)")
        ->check(CLI::PositiveNumber);
    gen->callback([&] {
        SynthSpec spec = gen_preset == "multimodal" ? multimodal_preset(gen_seed)
                                                    : confounded_preset(gen_seed);
        if (has_n) spec.n_samples = gen_overrides.n_samples;
        if (has_dp) spec.d_primary = gen_overrides.d_primary;
        if (has_dc) spec.d_concomitant = gen_overrides.d_concomitant;
        if (sig >= 0.0) spec.signal_strength = sig;
        if (conf >= 0.0) spec.confound_strength = conf;
        if (red >= 0.0) spec.redundancy_strength = red;
        if (corr >= -1.0) spec.label_confound_correlation = corr;
        if (noise > 0.0) spec.noise_sigma = noise;
        const Dataset data = gen_preset == "multimodal" ? generate_multimodal_cohort(spec)
                                                        : generate_confounded_cohort(spec);
        write_dataset_csv(gen_out, data);
        std::filesystem::path sidecar(gen_out);
        sidecar.replace_extension(".spec.json");
        write_synth_sidecar(sidecar, spec, gen_preset);
        std::cout << "wrote " << gen_out << " (" << data.n_samples() << " samples, "
                  << data.d_primary() << "+" << data.d_concomitant() << " features)\n"
                  << "wrote " << sidecar.string() << '\n';
    });

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "Fit the adversarial factor model");
    std::string fit_data, fit_out, fit_order = "real";
    double fit_mu = 0.0, fit_ridge = -1.0;
    int fit_factors = 0;
    fit_cmd->add_option("--data", fit_data, "Dataset CSV")->required();
    fit_cmd->add_option("--mu", fit_mu, "Adversarial strength")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--factors", fit_factors, "Factor count l")
        ->required()
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fit_out, "Output model path")->required();
    fit_cmd->add_option("--ridge", fit_ridge, "Projector ridge (default: scaled automatic)");
    fit_cmd->add_option("--order", fit_order, "Eigenvalue ordering")
        ->check(CLI::IsMember({"real", "magnitude"}));
    fit_cmd->callback([&] {
        const Dataset data = read_dataset_csv(fit_data);
        FitConfig config;
        config.ridge = fit_ridge;
        config.order = fit_order == "magnitude" ? EigenOrder::magnitude : EigenOrder::real_part;
        const ApcaModel model = fit(data, fit_factors, fit_mu, config);
        ModelProvenance prov;
        prov.dataset_hash = fnv1a_file_hex(fit_data);
        prov.config = config;
        write_model(fit_out, model, prov);
        const ObjectiveValue obj = objective_value(model, data);
        std::cout << "objective_total " << format_double(obj.total) << '\n'
                  << "primary_term " << format_double(obj.primary_term) << '\n'
                  << "adversary_term " << format_double(obj.adversary_term) << '\n'
                  << "eigenvalues";
        for (Index i = 0; i < model.eigenvalues().size(); ++i)
            std::cout << ' ' << format_double(model.eigenvalues()[i]);
        std::cout << '\n' << "wrote " << fit_out << '\n';
    });

    // ---- transform ----
    auto* transform = app.add_subcommand("transform", "Encode a dataset with a fitted model");
    std::string tr_model, tr_data, tr_out;
    transform->add_option("--model", tr_model)->required();
    transform->add_option("--data", tr_data)->required();
    transform->add_option("--out", tr_out, "Output factors CSV")->required();
    transform->callback([&] {
        const LoadedModel loaded = read_model(tr_model);
        const Dataset data = read_dataset_csv(tr_data);
        write_factors_csv(tr_out, encode(loaded.model, data));
        std::cout << "wrote " << tr_out << " (" << loaded.model.n_factors() << " factors x "
                  << data.n_samples() << " samples)\n";
    });

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Run an experiment pipeline over the mu grid");
    std::string sw_data, sw_out, sw_experiment, sw_curves;
    GridFlags sw_flags;
    sweep->add_option("--data", sw_data)->required();
    sweep->add_option("--experiment", sw_experiment, "confound | multimodal")
        ->required()
        ->check(CLI::IsMember({"confound", "multimodal"}));
    sweep->add_option("--out", sw_out, "Output result JSON")->required();
    sweep->add_option("--emit-curves", sw_curves, "Also write a tidy mu,series,value CSV");
    add_grid_flags(sweep, sw_flags);
    sweep->callback([&] {
        const Dataset data = read_dataset_csv(sw_data);
        const EvalConfig cfg = make_eval_config(sw_flags);
        SweepResult result;
        std::vector<PipelineScore> comparison;
        if (sw_experiment == "confound") {
            result = confound_invariance_experiment(data, cfg);
        } else {
            DisentanglementResult d = disentanglement_experiment(data, cfg);
            result = std::move(d.sweep);
            comparison = std::move(d.comparison);
        }
        ResultMetadata meta;
        meta.experiment = sw_experiment;
        meta.seed = cfg.seed;
        meta.dataset_hash = fnv1a_file_hex(sw_data);
        meta.mu_grid = cfg.mu_grid;
        meta.k_grid = cfg.k_grid;
        meta.c_grid = cfg.c_grid;
        meta.cv_folds = cfg.cv_folds;
        meta.diag_factors = result.diag_factors;
        write_result_json(sw_out, result, comparison, meta);
        std::cout << "wrote " << sw_out << " (" << result.records.size() << " rows)\n";
        if (!sw_curves.empty()) {
            write_curves_csv(sw_curves, result);
            std::cout << "wrote " << sw_curves << '\n';
        }
    });

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand("evaluate", "Grid-searched classifier report");
    std::string ev_data, ev_prep = "all";
    GridFlags ev_flags;
    evaluate->add_option("--data", ev_data)->required();
    evaluate->add_option("--preprocessing", ev_prep, "none | pca | apca | all")
        ->check(CLI::IsMember({"none", "pca", "apca", "all"}));
    add_grid_flags(evaluate, ev_flags);
    evaluate->callback([&] {
        const Dataset data = read_dataset_csv(ev_data);
        const EvalConfig cfg = make_eval_config(ev_flags);
        const bool has_confound = data.confound_labels.has_value();
        std::cout << std::left << std::setw(14) << "preprocessing" << std::setw(10) << "features"
                  << std::setw(12) << "auc_target";
        if (has_confound) std::cout << std::setw(12) << "auc_confound";
        std::cout << '\n';
        auto evaluate_one = [&](const std::string& name, Preprocessing prep) {
            const GridSearchResult target = grid_search(data, LabelTarget::target, prep, cfg);
            double auc_confound = 0.0;
            if (has_confound)
                auc_confound = grid_search(data, LabelTarget::confound, prep, cfg).best.mean_auc;
            PipelineScore row;
            row.name = name;
            row.feature_count = target.feature_count;
            row.auc = target.best.mean_auc;
            row.k = target.best.k;
            row.c = target.best.c;
            row.mu = target.best.mu;
            print_score_row(row, has_confound, auc_confound);
        };
        if (ev_prep == "none" || ev_prep == "all") evaluate_one("none", Preprocessing::none);
        if (ev_prep == "pca" || ev_prep == "all") evaluate_one("pca", Preprocessing::pca);
        if (ev_prep == "apca" || ev_prep == "all") evaluate_one("apca", Preprocessing::apca);
    });

    // ---- oracle ----
    auto* oracle = app.add_subcommand("oracle", "Compare the analytic fit with the iterative solver");
    std::string or_data;
    double or_mu = 0.0;
    int or_factors = 0;
    OracleConfig or_cfg;
    oracle->add_option("--data", or_data)->required();
    oracle->add_option("--mu", or_mu)->check(CLI::NonNegativeNumber);
    oracle->add_option("--factors", or_factors)->required()->check(CLI::PositiveNumber);
    oracle->add_option("--seed", or_cfg.seed);
    oracle->add_option("--max-iters", or_cfg.max_outer_iters)->check(CLI::PositiveNumber);
    oracle->add_option("--tol", or_cfg.convergence_tol)->check(CLI::PositiveNumber);
    oracle->callback([&] {
        const Dataset data = read_dataset_csv(or_data);
        const Centered centered = center(data);
        const OracleResult ref = solve_minimax(centered.data, or_factors, or_mu, or_cfg);
        const ApcaModel model = fit(data, or_factors, or_mu);
        const ObjectiveValue obj = objective_value(model, data);
        std::cout << "analytic_objective " << format_double(obj.total) << '\n'
                  << "oracle_objective " << format_double(ref.objective()) << '\n'
                  << "oracle_iterations " << ref.objective_trace.size() - 1 << '\n'
                  << "oracle_converged " << (ref.converged ? "yes" : "no") << '\n';
        const double rel = std::abs(obj.total - ref.objective()) /
                           (1.0 + std::abs(ref.objective()));
        std::cout << "relative_gap " << format_double(rel) << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const apca::SingularGram& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const apca::ComplexSpectrum& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const apca::DegenerateEncoder& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const apca::DimensionMismatch& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const apca::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const apca::SingleClass& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const apca::InfeasibleStratification& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const apca::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
