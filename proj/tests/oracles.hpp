// Test-only oracles. Everything here recomputes quantities by brute force
// (trajectory enumeration, exhaustive policy search, dumb per-sample loops)
// and must stay independent of the dynamic-programming paths it checks.
#pragma once

#include <functional>

#include "outcome_rl/mdp.hpp"

namespace oracle {

using outcome_rl::Dataset;
using outcome_rl::Policy;
using outcome_rl::RewardTable;
using outcome_rl::StepTable;
using outcome_rl::TabularMdp;
using outcome_rl::Trajectory;
using outcome_rl::ValueTable;

/// Visits every positive-probability trajectory of pi with its probability.
inline void for_each_trajectory(const TabularMdp& mdp, const Policy& pi,
                                const std::function<void(const Trajectory&, double)>& visit) {
    Trajectory tau;
    std::function<void(int, int, double)> rec = [&](int h, int s, double prob) {
        const int a = pi.action(h, s);
        tau.steps.emplace_back(s, a);
        if (h + 1 == mdp.horizon) {
            visit(tau, prob);
        } else {
            auto row = mdp.transition_row(h, s, a);
            for (int sp = 0; sp < mdp.num_states; ++sp)
                if (row[sp] > 0.0) rec(h + 1, sp, prob * row[sp]);
        }
        tau.steps.pop_back();
    };
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] > 0.0) rec(0, s, mdp.initial_dist[s]);
}

/// E^pi[g(tau)] by exhaustive trajectory enumeration.
inline double expectation(const TabularMdp& mdp, const Policy& pi,
                          const std::function<double(const Trajectory&)>& g) {
    double total = 0.0;
    for_each_trajectory(mdp, pi, [&](const Trajectory& tau, double p) { total += p * g(tau); });
    return total;
}

/// J(pi) by trajectory enumeration (no backward DP).
inline double policy_value(const TabularMdp& mdp, const Policy& pi) {
    return expectation(mdp, pi,
                       [&](const Trajectory& tau) { return mdp.trajectory_reward(tau); });
}

/// Occupancy d^pi_h(s, a) accumulated over enumerated trajectories.
inline StepTable occupancy(const TabularMdp& mdp, const Policy& pi) {
    StepTable d(mdp.horizon, mdp.num_states, mdp.num_actions);
    for_each_trajectory(mdp, pi, [&](const Trajectory& tau, double p) {
        for (int h = 0; h < tau.length(); ++h) d.at(h, tau.state(h), tau.action(h)) += p;
    });
    return d;
}

/// All deterministic Markov policies of the MDP's shape. Only usable for
/// tiny instances: there are num_actions^(horizon * num_states) of them.
inline std::vector<Policy> all_markov_policies(const TabularMdp& mdp) {
    const int cells = mdp.horizon * mdp.num_states;
    std::vector<Policy> policies;
    std::vector<int> table(cells, 0);
    while (true) {
        policies.push_back(Policy::markov(table, mdp.horizon, mdp.num_states));
        int i = 0;
        while (i < cells) {
            if (++table[i] < mdp.num_actions) break;
            table[i] = 0;
            ++i;
        }
        if (i == cells) break;
    }
    return policies;
}

/// max_pi J(pi) over every deterministic Markov policy, via the
/// trajectory-enumeration evaluator.
inline double max_policy_value(const TabularMdp& mdp) {
    double best = -1.0;
    for (const Policy& pi : all_markov_policies(mdp))
        best = std::max(best, oracle::policy_value(mdp, pi));
    return best;
}

/// All open-loop action sequences of length horizon, rolled out through a
/// deterministic MDP from its (degenerate) start state.
inline std::vector<Trajectory> all_deterministic_paths(const TabularMdp& mdp) {
    int s1 = 0;
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] == 1.0) s1 = s;
    std::vector<Trajectory> paths;
    std::vector<int> actions(mdp.horizon, 0);
    while (true) {
        Trajectory tau;
        int s = s1;
        for (int h = 0; h < mdp.horizon; ++h) {
            tau.steps.emplace_back(s, actions[h]);
            if (h + 1 < mdp.horizon) s = mdp.successor(h, s, actions[h]);
        }
        paths.push_back(std::move(tau));
        int i = 0;
        while (i < mdp.horizon) {
            if (++actions[i] < mdp.num_actions) break;
            actions[i] = 0;
            ++i;
        }
        if (i == mdp.horizon) break;
    }
    return paths;
}

// ---------------------------------------------------------------------------
// Loss re-implementations (straight from the formulas, per-sample loops)
// ---------------------------------------------------------------------------

inline double loss_rm(const RewardTable& r, const Dataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.outcome(i);
        double pred = 0.0;
        for (int h = 0; h < sample.traj.length(); ++h)
            pred += r.at(h, sample.traj.state(h), sample.traj.action(h));
        total += (pred - sample.reward) * (pred - sample.reward);
    }
    return total;
}

inline double loss_be_h(const ValueTable& head, const ValueTable& tail, const RewardTable& r,
                        int h, const Dataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Trajectory& tau = data.outcome(i).traj;
        double e = head.at(h, tau.state(h), tau.action(h)) - r.at(h, tau.state(h), tau.action(h));
        if (h + 1 < tau.length()) {
            double next_best = tail.at(h + 1, tau.state(h + 1), 0);
            for (int a = 1; a < tail.num_actions(); ++a)
                next_best = std::max(next_best, tail.at(h + 1, tau.state(h + 1), a));
            e -= next_best;
        }
        total += e * e;
    }
    return total;
}

inline double loss_dbe(const ValueTable& f, const Dataset& data) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sample = data.outcome(i);
        const Trajectory& tau = sample.traj;
        double pred = 0.0;
        for (int h = 0; h < tau.length(); ++h) {
            pred += f.at(h, tau.state(h), tau.action(h));
            if (h + 1 < tau.length()) {
                double next_best = f.at(h + 1, tau.state(h + 1), 0);
                for (int a = 1; a < f.num_actions(); ++a)
                    next_best = std::max(next_best, f.at(h + 1, tau.state(h + 1), a));
                pred -= next_best;
            }
        }
        total += (pred - sample.reward) * (pred - sample.reward);
    }
    return total;
}

/// Centered two-point finite difference of g at x.
inline double finite_difference(const std::function<double(double)>& g, double x,
                                double step = 1e-6) {
    return (g(x + step) - g(x - step)) / (2.0 * step);
}

}  // namespace oracle
