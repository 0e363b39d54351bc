#pragma once

#include "outcome_rl/mdp.hpp"
#include "outcome_rl/rng.hpp"

namespace outcome_rl {

/// Bradley-Terry-Luce comparison probability
///   P(tau+ preferred) = exp(beta r+) / (exp(beta r+) + exp(beta r-)),
/// computed as a numerically stable logistic of beta (r+ - r-).
inline double btl_probability(double r_plus, double r_minus, double beta) {
    const double x = beta * (r_plus - r_minus);
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Trajectory sample_trajectory_from(const TabularMdp& mdp, const Policy& pi, int s1,
                                         Rng& rng) {
    Trajectory tau;
    tau.steps.reserve(mdp.horizon);
    int s = s1;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = pi.action(h, s);
        tau.steps.emplace_back(s, a);
        if (h + 1 < mdp.horizon) {
            auto row = mdp.transition_row(h, s, a);
            s = rng.categorical(std::vector<double>(row.begin(), row.end()));
        }
    }
    return tau;
}

/// Roll out pi for one episode, drawing s1 from the initial distribution.
inline Trajectory sample_trajectory(const TabularMdp& mdp, const Policy& pi, Rng& rng) {
    const int s1 = rng.categorical(mdp.initial_dist);
    return sample_trajectory_from(mdp, pi, s1, rng);
}

// ---------------------------------------------------------------------------
// Feedback channels
// ---------------------------------------------------------------------------

struct BernoulliChannel {};

struct ClippedGaussianChannel {
    double sigma = 0.1;
};

using OutcomeChannel = std::variant<BernoulliChannel, ClippedGaussianChannel>;

/// Single end-of-episode reward with E[r | tau] = R*(tau). The default
/// Bernoulli channel requires R*(tau) in [0, 1] (the normalization every
/// valid TabularMdp guarantees for reachable trajectories).
inline double sample_outcome_reward(const TabularMdp& mdp, const Trajectory& tau, Rng& rng,
                                    const OutcomeChannel& channel = BernoulliChannel{}) {
    const double mean = mdp.trajectory_reward(tau);
    if (mean < -1e-9 || mean > 1.0 + 1e-9)
        throw std::domain_error("sample_outcome_reward: trajectory mean reward outside [0, 1]");
    const double p = std::clamp(mean, 0.0, 1.0);
    if (std::holds_alternative<BernoulliChannel>(channel)) return rng.bernoulli(p) ? 1.0 : 0.0;
    const double sigma = std::get<ClippedGaussianChannel>(channel).sigma;
    return std::clamp(p + sigma * rng.gaussian(), 0.0, 1.0);
}

/// Per-step reward vector; the default channel reports the mean rewards
/// R*_h(s_h, a_h) exactly.
inline std::vector<double> sample_process_rewards(const TabularMdp& mdp, const Trajectory& tau,
                                                  Rng& /*rng*/) {
    std::vector<double> rewards(tau.length());
    for (int h = 0; h < tau.length(); ++h)
        rewards[h] = mdp.mean_reward.at(h, tau.state(h), tau.action(h));
    return rewards;
}

/// Binary preference y ~ Bern(C(tau+, tau-)) under the BTL model.
inline int sample_preference(const TabularMdp& mdp, const Trajectory& tau_plus,
                             const Trajectory& tau_minus, double beta, Rng& rng) {
    const double p =
        btl_probability(mdp.trajectory_reward(tau_plus), mdp.trajectory_reward(tau_minus), beta);
    return rng.bernoulli(p) ? 1 : 0;
}

}  // namespace outcome_rl
