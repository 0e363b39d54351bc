#pragma once

#include "outcome_rl/function_classes.hpp"
#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

/// Reward model loss: sum over (tau, r) of (sum_h R_h(s_h,a_h) - r)^2.
inline double loss_rm(const RewardTable& reward, const Dataset& data) {
    require_kind(data, FeedbackKind::Outcome, "loss_rm");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.outcome(i);
        const double diff = trajectory_sum(reward, sample.traj) - sample.reward;
        total += diff * diff;
    }
    return total;
}

/// Stepwise Bellman error at step h (0-based) under proxy reward model R:
///   sum over tau of ( head_h(s_h,a_h) - R_h(s_h,a_h) - max_a' tail_{h+1}(s_{h+1},a') )^2,
/// with the h = H-1 convention tail_H = 0. Only the trajectories of the
/// dataset are used.
inline double loss_be_h(const ValueTable& head, const ValueTable& tail, const RewardTable& reward,
                        int h, const Dataset& data) {
    require_kind(data, FeedbackKind::Outcome, "loss_be_h");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Trajectory& tau = data.outcome(i).traj;
        double residual = head.at(h, tau.state(h), tau.action(h)) -
                          reward.at(h, tau.state(h), tau.action(h));
        if (h + 1 < tau.length()) residual -= tail.state_max(h + 1, tau.state(h + 1));
        total += residual * residual;
    }
    return total;
}

/// Comparator-subtracted Bellman loss:
///   sum_h [ loss_be_h(f_h, f_{h+1}; R) - inf_{g in G} loss_be_h(g_h, f_{h+1}; R) ].
/// The comparator class acts per step (the product-class reading of
/// inf_{g in G_1 x ... x G_H}), so each step's regression is debiased by the
/// best step-h slice found anywhere in G. Nonnegative whenever f's tables
/// appear in G.
inline double loss_be(const ValueTable& f, const RewardTable& reward, const ComparatorClass& g,
                      const Dataset& data) {
    require_kind(data, FeedbackKind::Outcome, "loss_be");
    if (g.members.empty()) throw std::invalid_argument("loss_be: empty comparator class");
    double total = 0.0;
    for (int h = 0; h < f.horizon(); ++h) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& gm : g.members) best = std::min(best, loss_be_h(gm, f, reward, h, data));
        total += loss_be_h(f, f, reward, h, data) - best;
    }
    return total;
}

/// Bellman residual loss for deterministic MDPs:
///   sum over (tau, r) of ( R^f(tau) - r )^2
/// with R^f the value-difference reward model of induced_reward_model().
inline double loss_dbe(const ValueTable& f, const Dataset& data) {
    require_kind(data, FeedbackKind::Outcome, "loss_dbe");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.outcome(i);
        const double diff = induced_reward_model(f, sample.traj) - sample.reward;
        total += diff * diff;
    }
    return total;
}

/// Logistic loss L(w, y) = -beta w y + log(1 + e^{beta w}), stable for
/// large |beta w|.
inline double logistic_loss(double w, int y, double beta) {
    const double x = beta * w;
    const double softplus = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    return -x * y + softplus;
}

/// Preference-based reward model loss:
///   sum over (tau+, tau-, y) of L( R(tau+) - R(tau-), y ).
inline double loss_pbrm(const RewardTable& reward, const Dataset& data, double beta) {
    require_kind(data, FeedbackKind::Preference, "loss_pbrm");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.preference(i);
        const double w =
            trajectory_sum(reward, sample.traj_plus) - trajectory_sum(reward, sample.traj_minus);
        total += logistic_loss(w, sample.label, beta);
    }
    return total;
}

/// Reference-policy value estimate: mean over the dataset of R(tau-).
inline double v_ref_hat(const RewardTable& reward, const Dataset& data) {
    require_kind(data, FeedbackKind::Preference, "v_ref_hat");
    if (data.empty()) throw std::invalid_argument("v_ref_hat: empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        total += trajectory_sum(reward, data.preference(i).traj_minus);
    return total / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Process-feedback variants (observed per-step rewards in place of a
// reward class; used by the process-reward baseline).
// ---------------------------------------------------------------------------

inline double loss_be_h_observed(const ValueTable& head, const ValueTable& tail, int h,
                                 const Dataset& data) {
    require_kind(data, FeedbackKind::Process, "loss_be_h_observed");
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.process(i);
        const Trajectory& tau = sample.traj;
        double residual = head.at(h, tau.state(h), tau.action(h)) - sample.rewards[h];
        if (h + 1 < tau.length()) residual -= tail.state_max(h + 1, tau.state(h + 1));
        total += residual * residual;
    }
    return total;
}

inline double loss_be_observed(const ValueTable& f, const ComparatorClass& g,
                               const Dataset& data) {
    require_kind(data, FeedbackKind::Process, "loss_be_observed");
    if (g.members.empty()) throw std::invalid_argument("loss_be_observed: empty comparator class");
    double total = 0.0;
    for (int h = 0; h < f.horizon(); ++h) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& gm : g.members) best = std::min(best, loss_be_h_observed(gm, f, h, data));
        total += loss_be_h_observed(f, f, h, data) - best;
    }
    return total;
}

}  // namespace outcome_rl
