#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apca/oracle.hpp"
#include "apca/synth.hpp"
#include "testutil.hpp"

using namespace apca;

TEST_CASE("identical seeds give bit-identical cohorts") {
    SynthSpec spec = confounded_preset(12);
    spec.n_samples = 100;
    const Dataset a = generate_confounded_cohort(spec);
    const Dataset b = generate_confounded_cohort(spec);
    CHECK(a.primary == b.primary);
    CHECK(a.concomitant == b.concomitant);
    CHECK(*a.labels == *b.labels);
    CHECK(*a.confound_labels == *b.confound_labels);

    const Dataset m1 = generate_multimodal_cohort(multimodal_preset(4));
    const Dataset m2 = generate_multimodal_cohort(multimodal_preset(4));
    CHECK(m1.primary == m2.primary);
    CHECK(m1.concomitant == m2.concomitant);
}

TEST_CASE("distinct seeds give distinct cohorts") {
    SynthSpec spec = confounded_preset(1);
    const Dataset a = generate_confounded_cohort(spec);
    spec.seed = 2;
    const Dataset b = generate_confounded_cohort(spec);
    CHECK(a.primary != b.primary);
}

TEST_CASE("target labels are balanced and binary") {
    SynthSpec spec = confounded_preset(3);
    spec.n_samples = 63;
    const Dataset data = generate_confounded_cohort(spec);
    int ones = 0;
    for (int v : *data.labels) ones += v;
    CHECK(ones == 31);  // floor(63 / 2)
    CHECK(data.n_samples() == 63);
}

TEST_CASE("mixture component tracks the target at the requested correlation") {
    SynthSpec spec = confounded_preset(5);
    spec.n_samples = 20000;
    spec.label_confound_correlation = 0.6;
    const Dataset data = generate_confounded_cohort(spec);
    double agree = 0.0;
    for (std::size_t i = 0; i < data.labels->size(); ++i)
        agree += (*data.labels)[i] == (*data.confound_labels)[i] ? 1.0 : 0.0;
    agree /= static_cast<double>(data.labels->size());
    CHECK(agree == doctest::Approx(0.8).epsilon(0.02));  // (1 + rho) / 2
}

TEST_CASE("confounded cohort moments match the generative law") {
    SynthSpec spec;
    spec.n_samples = 10000;
    spec.d_primary = 8;
    spec.d_concomitant = 2;
    spec.signal_strength = 1.5;
    spec.confound_strength = 0.8;
    spec.label_confound_correlation = 0.5;
    spec.noise_sigma = 0.7;
    spec.seed = 99;
    const Dataset data = generate_confounded_cohort(spec);

    // Means converge to zero relative to the feature scale.
    const Vector mean = data.primary.rowwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.1);

    const Matrix centered = data.primary.colwise() - mean;
    const Matrix sample_cov = centered * centered.transpose() / static_cast<double>(spec.n_samples);

    // Trace against the closed formula: var(x) = s^2/4 + g^2 var(q) + d sigma^2
    // with var(q) = sep^2/4 + mix_sigma^2 (the mixture is symmetric).
    const double var_q =
        synth_detail::mixture_separation * synth_detail::mixture_separation / 4.0 +
        synth_detail::mixture_sigma * synth_detail::mixture_sigma;
    const double expected_trace = spec.signal_strength * spec.signal_strength * 0.25 +
                                  spec.confound_strength * spec.confound_strength * var_q +
                                  spec.noise_sigma * spec.noise_sigma *
                                      static_cast<double>(spec.d_primary);
    CHECK(sample_cov.trace() == doctest::Approx(expected_trace).epsilon(0.05));

    // Structure: the same seed replays the same latents and directions, so a
    // near-noise-free regeneration isolates the structured covariance and the
    // noisy covariance must equal it plus sigma^2 I.
    SynthSpec clean = spec;
    clean.noise_sigma = 1e-12;
    const Dataset skeleton = generate_confounded_cohort(clean);
    const Vector mean_s = skeleton.primary.rowwise().mean();
    const Matrix centered_s = skeleton.primary.colwise() - mean_s;
    const Matrix structured_cov =
        centered_s * centered_s.transpose() / static_cast<double>(spec.n_samples);
    const Matrix expected_cov =
        structured_cov + spec.noise_sigma * spec.noise_sigma *
                             Matrix::Identity(spec.d_primary, spec.d_primary);
    CHECK((sample_cov - expected_cov).norm() <= 0.05 * expected_cov.norm());
}

TEST_CASE("multimodal cohort moments match the generative law") {
    SynthSpec spec;
    spec.n_samples = 10000;
    spec.d_primary = 6;
    spec.d_concomitant = 3;
    spec.signal_strength = 1.2;
    spec.redundancy_strength = 2.0;
    spec.noise_sigma = 0.5;
    spec.seed = 7;
    const Dataset data = generate_multimodal_cohort(spec);

    const Vector mean = data.primary.rowwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 0.1);

    const Matrix centered = data.primary.colwise() - mean;
    const Matrix cov = centered * centered.transpose() / static_cast<double>(spec.n_samples);
    const double expected_trace = spec.signal_strength * spec.signal_strength * 0.25 +
                                  spec.redundancy_strength * spec.redundancy_strength +
                                  spec.noise_sigma * spec.noise_sigma *
                                      static_cast<double>(spec.d_primary);
    CHECK(cov.trace() == doctest::Approx(expected_trace).epsilon(0.05));

    // Cross-block covariance carries only the signal and shared latents:
    // s^2/4 u1 u2^T + r^2 p1 p2^T, whose Frobenius norm is
    // sqrt(s^4/16 + r^4) for orthonormal direction pairs.
    const Vector mean_y = data.concomitant.rowwise().mean();
    const Matrix centered_y = data.concomitant.colwise() - mean_y;
    const Matrix cross = centered * centered_y.transpose() / static_cast<double>(spec.n_samples);
    const double s2 = spec.signal_strength * spec.signal_strength / 4.0;
    const double r2 = spec.redundancy_strength * spec.redundancy_strength;
    CHECK(cross.norm() == doctest::Approx(std::sqrt(s2 * s2 + r2 * r2)).epsilon(0.08));
}

TEST_CASE("high redundancy makes one modality predict the other") {
    SynthSpec spec = multimodal_preset(11);
    spec.n_samples = 2000;
    const Dataset data = generate_multimodal_cohort(spec);
    const Centered c = center(data);
    const AdversaryRefit refit = refit_adversary(c.data.primary, c.data.concomitant);
    const double explained = 1.0 - refit.residual / c.data.concomitant.squaredNorm();
    // Shared-latent variance dominates one direction of the concomitant
    // block, so a large share of its energy is predictable.
    CHECK(explained > 0.5);
}

TEST_CASE("spec validation rejects bad knobs") {
    SynthSpec spec;
    spec.noise_sigma = 0.0;
    CHECK_THROWS_AS(spec.validate(), DataError);
    spec = SynthSpec{};
    spec.label_confound_correlation = 1.5;
    CHECK_THROWS_AS(spec.validate(), DataError);
    spec = SynthSpec{};
    spec.d_primary = 0;
    CHECK_THROWS_AS(spec.validate(), DataError);
}
