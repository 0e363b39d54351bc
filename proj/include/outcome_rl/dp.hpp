#pragma once

#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

/// Optimal Q-function by backward induction:
///   Q_h(s,a) = R_h(s,a) + E_{s'} max_a' Q_{h+1}(s',a'),   Q_{H+1} = 0.
/// The greedy policy of the result (lowest-index tie-break) is optimal among
/// Markov policies.
inline ValueTable optimal_q(const TabularMdp& mdp) {
    ValueTable q(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double value = mdp.mean_reward.at(h, s, a);
                if (h + 1 < mdp.horizon) {
                    auto row = mdp.transition_row(h, s, a);
                    for (int sp = 0; sp < mdp.num_states; ++sp)
                        if (row[sp] > 0.0) value += row[sp] * q.state_max(h + 1, sp);
                }
                q.at(h, s, a) = value;
            }
        }
    }
    return q;
}

/// Optimal value at the initial distribution: E_{s1~rho} max_a Q*_1(s1,a).
inline double optimal_value(const TabularMdp& mdp, const ValueTable& q_star) {
    double value = 0.0;
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] > 0.0) value += mdp.initial_dist[s] * q_star.state_max(0, s);
    return value;
}

struct PolicyEvaluation {
    double value = 0.0;  // J(pi)
    ValueTable q;        // Q^pi
};

/// Exact policy evaluation by backward dynamic programming.
/// V^pi_h(s) = Q^pi_h(s, pi_h(s)); J(pi) = E_{s1~rho} V^pi_1(s1).
inline PolicyEvaluation policy_value(const TabularMdp& mdp, const Policy& pi) {
    PolicyEvaluation eval;
    eval.q = ValueTable(mdp.horizon, mdp.num_states, mdp.num_actions);
    std::vector<double> v_next(mdp.num_states, 0.0);  // V^pi_{h+1}
    std::vector<double> v_here(mdp.num_states, 0.0);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double value = mdp.mean_reward.at(h, s, a);
                if (h + 1 < mdp.horizon) {
                    auto row = mdp.transition_row(h, s, a);
                    for (int sp = 0; sp < mdp.num_states; ++sp)
                        if (row[sp] > 0.0) value += row[sp] * v_next[sp];
                }
                eval.q.at(h, s, a) = value;
            }
            v_here[s] = eval.q.at(h, s, pi.action(h, s));
        }
        std::swap(v_next, v_here);
    }
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] > 0.0) eval.value += mdp.initial_dist[s] * v_next[s];
    return eval;
}

/// V^pi_1(s) for a fixed initial state.
inline double policy_value_at(const TabularMdp& mdp, const Policy& pi, int s1) {
    PolicyEvaluation eval = policy_value(mdp, pi);
    return eval.q.at(0, s1, pi.action(0, s1));
}

/// Exact state-action occupancy d^pi_h(s,a) by forward dynamic programming.
/// Each layer sums to 1.
inline StepTable occupancy(const TabularMdp& mdp, const Policy& pi) {
    StepTable d(mdp.horizon, mdp.num_states, mdp.num_actions);
    std::vector<double> state_dist(mdp.initial_dist);
    std::vector<double> next_dist(mdp.num_states, 0.0);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (state_dist[s] <= 0.0) continue;
            d.at(h, s, pi.action(h, s)) = state_dist[s];
        }
        if (h + 1 == mdp.horizon) break;
        std::fill(next_dist.begin(), next_dist.end(), 0.0);
        for (int s = 0; s < mdp.num_states; ++s) {
            if (state_dist[s] <= 0.0) continue;
            auto row = mdp.transition_row(h, s, pi.action(h, s));
            for (int sp = 0; sp < mdp.num_states; ++sp) next_dist[sp] += state_dist[s] * row[sp];
        }
        std::swap(state_dist, next_dist);
    }
    return d;
}

}  // namespace outcome_rl
