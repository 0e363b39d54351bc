#pragma once

#include <functional>
#include <optional>

#include "outcome_rl/dp.hpp"
#include "outcome_rl/function_classes.hpp"
#include "outcome_rl/losses.hpp"
#include "outcome_rl/mdp.hpp"
#include "outcome_rl/sampling.hpp"

namespace outcome_rl {

struct AlgoConfig {
    double lambda = 1.0;      // optimism weight
    int iterations = 1;       // T
    double beta_btl = 1.0;    // BTL temperature (preference algorithm only)
    double beta_conf = 1.0;   // confidence radius (fitted-reward baseline only)
    std::uint64_t seed = 0;
    std::optional<Policy> ref_policy;  // defaults to the all-action-0 policy

    void validate() const {
        if (iterations < 1) throw std::invalid_argument("AlgoConfig: iterations must be >= 1");
        if (lambda < 0.0) throw std::invalid_argument("AlgoConfig: lambda must be >= 0");
        if (beta_conf < 0.0) throw std::invalid_argument("AlgoConfig: beta_conf must be >= 0");
    }

    Policy ref_or_default(const TabularMdp& mdp) const {
        if (ref_policy) return *ref_policy;
        return Policy::constant(0, mdp.horizon, mdp.num_states);
    }
};

struct IterationRecord {
    int t = 0;  // 1-based
    int f_index = -1;
    int r_index = -1;  // -1 when the algorithm carries no reward class
    double suboptimality = 0.0;
    int episodes = 0;
};

/// Per-run record: one entry per iteration plus the uniform-mixture output.
/// The mixture's suboptimality equals the mean of the per-iteration values
/// (J is linear over policy mixtures).
struct RunTrace {
    std::vector<IterationRecord> records;
    std::vector<Policy> policies;  // greedy policy of each iteration
    StepTable visit_counts;        // executed (h, s, a) visits across all episodes
    double output_suboptimality = 0.0;
    long long total_episodes = 0;

    void finalize() {
        double total = 0.0;
        total_episodes = 0;
        for (const auto& rec : records) {
            total += rec.suboptimality;
            total_episodes += rec.episodes;
        }
        output_suboptimality = records.empty() ? 0.0 : total / static_cast<double>(records.size());
    }
};

/// Selection snapshot handed to test observers before data collection.
struct IterationView {
    int t = 0;
    int f_index = -1;
    int r_index = -1;
    double objective = 0.0;
    const Dataset* data = nullptr;  // dataset the selection saw
};
using IterationObserver = std::function<void(const IterationView&)>;

namespace detail {

inline int fixed_initial_state(const TabularMdp& mdp) {
    for (int s = 0; s < mdp.num_states; ++s)
        if (std::abs(mdp.initial_dist[s] - 1.0) <= kProbTol) return s;
    throw std::invalid_argument("algorithm requires a degenerate initial distribution");
}

inline void count_visits(StepTable& counts, const Trajectory& tau) {
    for (int h = 0; h < tau.length(); ++h) counts.at(h, tau.state(h), tau.action(h)) += 1.0;
}

// Near-ties are broken toward the higher index to realize the worst-case
// reward fit of the decoupled baseline.
constexpr double kRewardFitTieTol = 1e-9;

inline int adversarial_reward_fit(const RewardClass& r, const Dataset& data) {
    std::vector<double> losses(r.members.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r.members.size(); ++j) {
        losses[j] = loss_rm(r.members[j], data);
        best = std::min(best, losses[j]);
    }
    int chosen = 0;
    for (std::size_t j = 0; j < r.members.size(); ++j)
        if (losses[j] <= best + kRewardFitTieTol) chosen = static_cast<int>(j);
    return chosen;
}

}  // namespace detail

struct JointChoice {
    int f_index = 0;
    int r_index = 0;
    double objective = 0.0;
};

/// Exact joint optimism step: argmax over F x R of
///   lambda * max_a f_1(s1, a) - loss_be(f; R) - loss_rm(R)
/// by full enumeration, ties broken toward the lexicographically lowest
/// (f_index, r_index).
inline JointChoice joint_optimize(const QClass& f, const RewardClass& r,
                                  const ComparatorClass& g, const Dataset& data, double lambda,
                                  int s1) {
    f.validate();
    r.validate();
    JointChoice choice;
    bool first = true;
    for (std::size_t i = 0; i < f.members.size(); ++i) {
        const double optimistic_value = lambda * f.members[i].state_max(0, s1);
        for (std::size_t j = 0; j < r.members.size(); ++j) {
            const double objective = optimistic_value -
                                     loss_be(f.members[i], r.members[j], g, data) -
                                     loss_rm(r.members[j], data);
            if (first || objective > choice.objective) {
                first = false;
                choice = {static_cast<int>(i), static_cast<int>(j), objective};
            }
        }
    }
    return choice;
}

// ---------------------------------------------------------------------------
// Joint optimism with outcome reward
// ---------------------------------------------------------------------------

/// Outcome-based exploration with optimism. Each iteration selects the
/// optimistic (f, R) pair, plays the greedy policy of f composed with the
/// reference policy at every switch step h = 1..H, and appends the H
/// (trajectory, outcome reward) pairs to the dataset.
inline RunTrace run_algorithm1(const TabularMdp& mdp, const QClass& f, const RewardClass& r,
                               const ComparatorClass& g, const AlgoConfig& cfg,
                               const IterationObserver& observer = {}) {
    cfg.validate();
    g.validate_contains(f);
    const int s1 = detail::fixed_initial_state(mdp);
    const Policy ref = cfg.ref_or_default(mdp);
    const ValueTable q_star = optimal_q(mdp);
    const double v_star = q_star.state_max(0, s1);

    Rng rng(cfg.seed);
    Dataset data(FeedbackKind::Outcome);
    RunTrace trace;
    trace.visit_counts = StepTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int t = 1; t <= cfg.iterations; ++t) {
        const JointChoice choice = joint_optimize(f, r, g, data, cfg.lambda, s1);
        if (observer)
            observer(IterationView{t, choice.f_index, choice.r_index, choice.objective, &data});
        const Policy pi = greedy_policy(f.members[choice.f_index]);
        const double subopt = v_star - policy_value_at(mdp, pi, s1);
        for (int h = 1; h <= mdp.horizon; ++h) {
            const Policy rollout = Policy::composed(pi, ref, h);
            Trajectory tau = sample_trajectory_from(mdp, rollout, s1, rng);
            const double reward = sample_outcome_reward(mdp, tau, rng);
            detail::count_visits(trace.visit_counts, tau);
            data.append(OutcomeSample{std::move(tau), reward});
        }
        trace.records.push_back({t, choice.f_index, choice.r_index, subopt, mdp.horizon});
        trace.policies.push_back(pi);
    }
    trace.finalize();
    return trace;
}

// ---------------------------------------------------------------------------
// Bellman residual minimization for deterministic MDPs
// ---------------------------------------------------------------------------

/// Optimistic Bellman-residual minimization. Requires deterministic
/// transitions; the initial state may be random. One episode per iteration.
inline RunTrace run_algorithm2(const TabularMdp& mdp, const QClass& f, const AlgoConfig& cfg) {
    cfg.validate();
    f.validate();
    if (!mdp.is_deterministic())
        throw std::invalid_argument("run_algorithm2: MDP transitions must be deterministic");
    const ValueTable q_star = optimal_q(mdp);

    Rng rng(cfg.seed);
    Dataset data(FeedbackKind::Outcome);
    RunTrace trace;
    trace.visit_counts = StepTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int t = 1; t <= cfg.iterations; ++t) {
        const int s1 = rng.categorical(mdp.initial_dist);
        int best_index = 0;
        double best_objective = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const double objective =
                cfg.lambda * f.members[i].state_max(0, s1) - loss_dbe(f.members[i], data);
            if (objective > best_objective) {
                best_objective = objective;
                best_index = static_cast<int>(i);
            }
        }
        const Policy pi = greedy_policy(f.members[best_index]);
        const PolicyEvaluation eval = policy_value(mdp, pi);
        const double subopt = q_star.state_max(0, s1) - eval.q.at(0, s1, pi.action(0, s1));
        Trajectory tau = sample_trajectory_from(mdp, pi, s1, rng);
        const double reward = sample_outcome_reward(mdp, tau, rng);
        detail::count_visits(trace.visit_counts, tau);
        data.append(OutcomeSample{std::move(tau), reward});
        trace.records.push_back({t, best_index, -1, subopt, 1});
        trace.policies.push_back(pi);
    }
    trace.finalize();
    return trace;
}

// ---------------------------------------------------------------------------
// Preference-based variant
// ---------------------------------------------------------------------------

/// Preference-based exploration with optimism. Per iteration and switch step
/// h, one trajectory from the composed policy and one from the reference
/// policy are compared through the BTL channel. The advantage anchor
/// f_1(s1) - Vhat_ref(R) replaces the raw optimistic value because
/// preferences only identify reward differences.
inline RunTrace run_algorithm3(const TabularMdp& mdp, const QClass& f, const RewardClass& r,
                               const ComparatorClass& g, const AlgoConfig& cfg) {
    cfg.validate();
    if (!(cfg.beta_btl > 0.0)) throw std::invalid_argument("run_algorithm3: beta_btl must be > 0");
    g.validate_contains(f);
    r.validate();
    const int s1 = detail::fixed_initial_state(mdp);
    const Policy ref = cfg.ref_or_default(mdp);
    const ValueTable q_star = optimal_q(mdp);
    const double v_star = q_star.state_max(0, s1);

    Rng rng(cfg.seed);
    Dataset preferences(FeedbackKind::Preference);
    Dataset rollout_trajectories(FeedbackKind::Outcome);  // tau+ views for the Bellman loss
    RunTrace trace;
    trace.visit_counts = StepTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int t = 1; t <= cfg.iterations; ++t) {
        int best_f = 0;
        int best_r = 0;
        double best_objective = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const double optimistic_value = f.members[i].state_max(0, s1);
            for (std::size_t j = 0; j < r.members.size(); ++j) {
                const double anchor =
                    preferences.empty() ? 0.0 : v_ref_hat(r.members[j], preferences);
                const double objective =
                    cfg.lambda * (optimistic_value - anchor) -
                    loss_be(f.members[i], r.members[j], g, rollout_trajectories) -
                    loss_pbrm(r.members[j], preferences, cfg.beta_btl);
                if (objective > best_objective) {
                    best_objective = objective;
                    best_f = static_cast<int>(i);
                    best_r = static_cast<int>(j);
                }
            }
        }
        const Policy pi = greedy_policy(f.members[best_f]);
        const double subopt = v_star - policy_value_at(mdp, pi, s1);
        for (int h = 1; h <= mdp.horizon; ++h) {
            const Policy rollout = Policy::composed(pi, ref, h);
            Trajectory tau_plus = sample_trajectory_from(mdp, rollout, s1, rng);
            Trajectory tau_minus = sample_trajectory_from(mdp, ref, s1, rng);
            const int label = sample_preference(mdp, tau_plus, tau_minus, cfg.beta_btl, rng);
            detail::count_visits(trace.visit_counts, tau_plus);
            detail::count_visits(trace.visit_counts, tau_minus);
            rollout_trajectories.append(OutcomeSample{tau_plus, 0.0});
            preferences.append(PreferenceSample{std::move(tau_plus), std::move(tau_minus), label});
        }
        trace.records.push_back({t, best_f, best_r, subopt, mdp.horizon});
        trace.policies.push_back(pi);
    }
    trace.finalize();
    return trace;
}

// ---------------------------------------------------------------------------
// Decoupled fitted-reward baseline (provably trapped)
// ---------------------------------------------------------------------------

/// Fitted-reward baseline: fit a reward model by least squares on the
/// observed outcomes (near-ties broken adversarially toward the higher
/// index), then run one optimistic step over the confidence set of value
/// functions whose Bellman loss under the previous fit is at most beta_conf.
/// One episode per iteration, played by the selected greedy policy.
inline RunTrace run_fitted_reward_baseline(const TabularMdp& mdp, const QClass& f,
                                           const RewardClass& r, const ComparatorClass& g,
                                           const AlgoConfig& cfg,
                                           const IterationObserver& observer = {}) {
    cfg.validate();
    g.validate_contains(f);
    r.validate();
    const int s1 = detail::fixed_initial_state(mdp);
    const ValueTable q_star = optimal_q(mdp);
    const double v_star = q_star.state_max(0, s1);

    Rng rng(cfg.seed);
    Dataset data(FeedbackKind::Outcome);
    RunTrace trace;
    trace.visit_counts = StepTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    int fitted_index = -1;  // no fit before the first episode
    for (int t = 1; t <= cfg.iterations; ++t) {
        std::vector<int> confidence_set;
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const double bellman_loss =
                data.empty() ? 0.0 : loss_be(f.members[i], r.members[fitted_index], g, data);
            if (bellman_loss <= cfg.beta_conf) confidence_set.push_back(static_cast<int>(i));
        }
        if (confidence_set.empty())
            throw std::runtime_error(
                "run_fitted_reward_baseline: empty confidence set (beta_conf too small)");
        int chosen = confidence_set.front();
        for (int i : confidence_set)
            if (f.members[i].state_max(0, s1) > f.members[chosen].state_max(0, s1)) chosen = i;

        const Policy pi = greedy_policy(f.members[chosen]);
        const double subopt = v_star - policy_value_at(mdp, pi, s1);
        Trajectory tau = sample_trajectory_from(mdp, pi, s1, rng);
        const double reward = sample_outcome_reward(mdp, tau, rng);
        detail::count_visits(trace.visit_counts, tau);
        data.append(OutcomeSample{std::move(tau), reward});

        fitted_index = detail::adversarial_reward_fit(r, data);
        if (observer) observer(IterationView{t, chosen, fitted_index, 0.0, &data});
        trace.records.push_back({t, chosen, fitted_index, subopt, 1});
        trace.policies.push_back(pi);
    }
    trace.finalize();
    return trace;
}

// ---------------------------------------------------------------------------
// Process-reward baseline (for the separation experiment)
// ---------------------------------------------------------------------------

/// GOLF-style optimism with true per-step rewards: the Bellman loss
/// regresses on observed process rewards instead of a reward class.
inline RunTrace run_process_reward_baseline(const TabularMdp& mdp, const QClass& f,
                                            const ComparatorClass& g, const AlgoConfig& cfg) {
    cfg.validate();
    g.validate_contains(f);
    const int s1 = detail::fixed_initial_state(mdp);
    const Policy ref = cfg.ref_or_default(mdp);
    const ValueTable q_star = optimal_q(mdp);
    const double v_star = q_star.state_max(0, s1);

    Rng rng(cfg.seed);
    Dataset data(FeedbackKind::Process);
    RunTrace trace;
    trace.visit_counts = StepTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int t = 1; t <= cfg.iterations; ++t) {
        int best_index = 0;
        double best_objective = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < f.members.size(); ++i) {
            const double objective = cfg.lambda * f.members[i].state_max(0, s1) -
                                     (data.empty() ? 0.0 : loss_be_observed(f.members[i], g, data));
            if (objective > best_objective) {
                best_objective = objective;
                best_index = static_cast<int>(i);
            }
        }
        const Policy pi = greedy_policy(f.members[best_index]);
        const double subopt = v_star - policy_value_at(mdp, pi, s1);
        for (int h = 1; h <= mdp.horizon; ++h) {
            const Policy rollout = Policy::composed(pi, ref, h);
            Trajectory tau = sample_trajectory_from(mdp, rollout, s1, rng);
            std::vector<double> rewards = sample_process_rewards(mdp, tau, rng);
            detail::count_visits(trace.visit_counts, tau);
            data.append(ProcessSample{std::move(tau), std::move(rewards)});
        }
        trace.records.push_back({t, best_index, -1, subopt, mdp.horizon});
        trace.policies.push_back(pi);
    }
    trace.finalize();
    return trace;
}

}  // namespace outcome_rl
