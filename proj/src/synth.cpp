#include "apca/synth.hpp"

#include <cmath>
#include <random>

namespace apca {

namespace {

Vector random_unit(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(d);
    for (Index i = 0; i < d; ++i) v[i] = normal(rng);
    return v.normalized();
}

// Second direction orthogonal to `u` (when the dimension allows one).
Vector random_unit_orthogonal(const Vector& u, std::mt19937_64& rng) {
    if (u.size() < 2) return u;
    Vector v = random_unit(u.size(), rng);
    v -= v.dot(u) * u;
    double n = v.norm();
    while (n < 1e-8) {  // essentially never with Gaussian draws
        v = random_unit(u.size(), rng);
        v -= v.dot(u) * u;
        n = v.norm();
    }
    return v / n;
}

std::vector<int> balanced_target(Index n) {
    std::vector<int> t(static_cast<std::size_t>(n), 0);
    for (Index i = n - n / 2; i < n; ++i) t[static_cast<std::size_t>(i)] = 1;
    return t;
}

void add_gaussian_noise(Matrix& m, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) m(i, j) += normal(rng);
}

} // namespace

void SynthSpec::validate() const {
    if (n_samples < 1 || d_primary < 1 || d_concomitant < 1)
        throw DataError("synthetic cohort dimensions must be at least 1");
    if (noise_sigma <= 0.0) throw DataError("noise_sigma must be positive");
    if (label_confound_correlation < -1.0 || label_confound_correlation > 1.0)
        throw DataError("label_confound_correlation must lie in [-1, 1]");
    if (signal_strength < 0.0 || confound_strength < 0.0 || redundancy_strength < 0.0)
        throw DataError("strengths must be nonnegative");
}

Dataset generate_confounded_cohort(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const Index n = spec.n_samples;

    // Draw order is fixed: directions, component flips, mixture noise,
    // primary noise, concomitant noise.
    const Vector signal_dir = random_unit(spec.d_primary, rng);
    const Vector confound_dir = random_unit_orthogonal(signal_dir, rng);

    const std::vector<int> target = balanced_target(n);
    std::vector<int> component(static_cast<std::size_t>(n));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double agree = (1.0 + spec.label_confound_correlation) / 2.0;
    for (Index i = 0; i < n; ++i) {
        const int t = target[static_cast<std::size_t>(i)];
        component[static_cast<std::size_t>(i)] = unif(rng) < agree ? t : 1 - t;
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    Vector confound_value(n);
    const double half_sep = synth_detail::mixture_separation / 2.0;
    for (Index i = 0; i < n; ++i) {
        const double mode = component[static_cast<std::size_t>(i)] == 1 ? half_sep : -half_sep;
        confound_value[i] = mode + synth_detail::mixture_sigma * normal(rng);
    }

    Dataset data;
    data.primary.resize(spec.d_primary, n);
    for (Index i = 0; i < n; ++i) {
        const double t_c = target[static_cast<std::size_t>(i)] - 0.5;
        data.primary.col(i) = spec.signal_strength * t_c * signal_dir +
                              spec.confound_strength * confound_value[i] * confound_dir;
    }
    add_gaussian_noise(data.primary, spec.noise_sigma, rng);

    data.concomitant.resize(spec.d_concomitant, n);
    for (Index i = 0; i < n; ++i) data.concomitant.col(i).setConstant(confound_value[i]);
    add_gaussian_noise(data.concomitant, synth_detail::concomitant_noise, rng);

    data.labels = target;
    data.confound_labels = component;
    data.validate();
    return data;
}

Dataset generate_multimodal_cohort(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const Index n = spec.n_samples;

    const Vector signal_dir_1 = random_unit(spec.d_primary, rng);
    const Vector shared_dir_1 = random_unit_orthogonal(signal_dir_1, rng);
    const Vector signal_dir_2 = random_unit(spec.d_concomitant, rng);
    const Vector shared_dir_2 = random_unit_orthogonal(signal_dir_2, rng);

    const std::vector<int> target = balanced_target(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector shared(n);
    for (Index i = 0; i < n; ++i) shared[i] = normal(rng);

    Dataset data;
    data.primary.resize(spec.d_primary, n);
    data.concomitant.resize(spec.d_concomitant, n);
    const double unit = synth_detail::multimodal_concomitant_scale;
    for (Index i = 0; i < n; ++i) {
        const double t_c = target[static_cast<std::size_t>(i)] - 0.5;
        data.primary.col(i) = spec.signal_strength * t_c * signal_dir_1 +
                              spec.redundancy_strength * shared[i] * shared_dir_1;
        data.concomitant.col(i) = unit * (spec.signal_strength * t_c * signal_dir_2 +
                                          spec.redundancy_strength * shared[i] * shared_dir_2);
    }
    add_gaussian_noise(data.primary, spec.noise_sigma, rng);
    add_gaussian_noise(data.concomitant, unit * spec.noise_sigma, rng);

    data.labels = target;
    data.validate();
    return data;
}

SynthSpec confounded_preset(std::uint64_t seed) {
    SynthSpec spec;
    spec.signal_strength = 2.5;
    spec.confound_strength = 1.2;
    spec.label_confound_correlation = 0.0;
    spec.noise_sigma = 1.0;
    spec.seed = seed;
    return spec;
}

SynthSpec multimodal_preset(std::uint64_t seed) {
    SynthSpec spec;
    spec.n_samples = 150;
    spec.signal_strength = 1.6;
    spec.redundancy_strength = 3.0;
    spec.noise_sigma = 1.0;
    spec.seed = seed;
    return spec;
}

} // namespace apca
