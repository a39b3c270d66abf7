#pragma once

#include "apca/dataset.hpp"

#include <cstdint>

namespace apca {

/// Knobs of the seeded synthetic cohort generators. Defaults mirror the
/// target application's shape (36 primary features, 3 concomitant features,
/// 62 participants); tests typically raise n_samples for stable AUCs.
struct SynthSpec {
    Index n_samples = 62;
    Index d_primary = 36;
    Index d_concomitant = 3;
    /// Label -> feature pathway weight.
    double signal_strength = 1.0;
    /// Confound -> primary-feature pathway weight (confounded cohort).
    double confound_strength = 1.0;
    /// Shared-latent weight across modalities (multimodal cohort).
    double redundancy_strength = 1.0;
    /// Correlation between the confound's mixture component and the target.
    /// Above zero, part of the target signal is inseparable from the
    /// confound and suppressing one costs the other (the tradeoff stress
    /// case); at zero, full suppression without target loss is possible.
    double label_confound_correlation = 0.0;
    double noise_sigma = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Cohort with a bimodal continuous confound. The target label is balanced;
/// the confound value is drawn from a two-component Gaussian mixture whose
/// component tracks the target with probability (1 + rho) / 2; primary
/// features mix a label direction, a confound direction (orthogonal to it)
/// and isotropic noise, and the concomitant block carries noisy copies of
/// the confound value. Both the target and the mixture-component labels are
/// attached.
Dataset generate_confounded_cohort(const SynthSpec& spec);

/// Two modality blocks driven by one shared latent (weight
/// redundancy_strength) plus a private label-informative latent per block
/// and isotropic noise. Only the target label is attached.
Dataset generate_multimodal_cohort(const SynthSpec& spec);

/// Tuned presets used by the command line and the acceptance suite.
SynthSpec confounded_preset(std::uint64_t seed);
SynthSpec multimodal_preset(std::uint64_t seed);

namespace synth_detail {
/// Separation and component spread of the confound mixture; exposed so
/// moment tests can reproduce the generative law.
inline constexpr double mixture_separation = 3.0;
inline constexpr double mixture_sigma = 1.0;
inline constexpr double concomitant_noise = 0.1;
/// Unit scale of the second modality relative to the first. Multimodal
/// blocks come in different units; the concomitant block is generated small
/// the way a handful of behavioral scores sits next to broadband power
/// values.
inline constexpr double multimodal_concomitant_scale = 0.2;
} // namespace synth_detail

} // namespace apca
