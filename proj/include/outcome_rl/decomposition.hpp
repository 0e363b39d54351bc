#pragma once

#include "outcome_rl/dp.hpp"
#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

/// E^pi[ (sum_h D_h(s_h, a_h))^2 ] by an exact backward second-moment
/// recursion over suffix sums. Works for composed policies.
inline double expected_square_sum(const TabularMdp& mdp, const Policy& pi, const StepTable& d) {
    std::vector<double> m_next(mdp.num_states, 0.0);  // E[suffix | s_{h+1}]
    std::vector<double> q_next(mdp.num_states, 0.0);  // E[suffix^2 | s_{h+1}]
    std::vector<double> m_here(mdp.num_states, 0.0);
    std::vector<double> q_here(mdp.num_states, 0.0);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            const int a = pi.action(h, s);
            const double dv = d.at(h, s, a);
            double m = dv;
            double q = dv * dv;
            if (h + 1 < mdp.horizon) {
                auto row = mdp.transition_row(h, s, a);
                for (int sp = 0; sp < mdp.num_states; ++sp) {
                    if (row[sp] <= 0.0) continue;
                    m += row[sp] * m_next[sp];
                    q += row[sp] * (2.0 * dv * m_next[sp] + q_next[sp]);
                }
            }
            m_here[s] = m;
            q_here[s] = q;
        }
        std::swap(m_next, m_here);
        std::swap(q_next, q_here);
    }
    double total = 0.0;
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] > 0.0) total += mdp.initial_dist[s] * q_next[s];
    return total;
}

/// Suffix means under pi: out[h][s] = E^pi[ sum_{l>=h} D_l | s_h = s ],
/// for h in 0..H-1 (0-based).
inline std::vector<std::vector<double>> suffix_means(const TabularMdp& mdp, const Policy& pi,
                                                     const StepTable& d) {
    std::vector<std::vector<double>> m(mdp.horizon, std::vector<double>(mdp.num_states, 0.0));
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            const int a = pi.action(h, s);
            double value = d.at(h, s, a);
            if (h + 1 < mdp.horizon) {
                auto row = mdp.transition_row(h, s, a);
                for (int sp = 0; sp < mdp.num_states; ++sp)
                    if (row[sp] > 0.0) value += row[sp] * m[h + 1][sp];
            }
            m[h][s] = value;
        }
    }
    return m;
}

struct PerfDiffTerms {
    double lhs = 0.0;           // E_{s1~rho} max_a f_1(s1,a) - V^pi(s1)
    double bellman_term = 0.0;  // sum_h E^pi[ f_h - T_{R,h} f_{h+1} ]
    double reward_term = 0.0;   // E^pi[ R(tau) - R*(tau) ]
};

/// Refined performance-difference split of the optimistic value gap into a
/// Bellman-residual part (under the proxy reward model) and a reward-model
/// error part. The three terms satisfy lhs = bellman_term + reward_term
/// whenever pi is the greedy policy of f; all expectations are exact DP.
inline PerfDiffTerms perf_diff_decomposition(const TabularMdp& mdp, const ValueTable& f,
                                             const RewardTable& r_proxy, const Policy& pi) {
    PerfDiffTerms terms;
    const PolicyEvaluation eval = policy_value(mdp, pi);
    for (int s = 0; s < mdp.num_states; ++s)
        if (mdp.initial_dist[s] > 0.0) terms.lhs += mdp.initial_dist[s] * f.state_max(0, s);
    terms.lhs -= eval.value;

    const StepTable d = occupancy(mdp, pi);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double w = d.at(h, s, a);
                if (w <= 0.0) continue;
                double backup = r_proxy.at(h, s, a);
                if (h + 1 < mdp.horizon) {
                    auto row = mdp.transition_row(h, s, a);
                    for (int sp = 0; sp < mdp.num_states; ++sp)
                        if (row[sp] > 0.0) backup += row[sp] * f.state_max(h + 1, sp);
                }
                terms.bellman_term += w * (f.at(h, s, a) - backup);
                terms.reward_term += w * (r_proxy.at(h, s, a) - mdp.mean_reward.at(h, s, a));
            }
        }
    }
    return terms;
}

struct TrajDecompSides {
    double lhs = 0.0;
    double rhs = 0.0;  // already includes the factor 4
};

/// Both sides of the trajectory-decomposition inequality
///   sum_h E^pi ( D_h(s_h,a_h) + Dbar_{h+1}(s_{h+1}) - Dbar_h(s_h) )^2
///     <= 4 sum_h E^{pi o_h pi_ref} D(tau)^2,
/// where Dbar_h is the suffix mean of D under pi_ref (Dbar_1 = Dbar_{H+1} = 0).
/// Exact DP on both sides; the contract lhs <= rhs holds for every D.
inline TrajDecompSides traj_decomp_check(const TabularMdp& mdp, const StepTable& d,
                                         const Policy& pi, const Policy& pi_ref) {
    TrajDecompSides sides;
    const auto dbar_raw = suffix_means(mdp, pi_ref, d);
    auto dbar = [&](int h, int s) -> double {
        if (h == 0 || h >= mdp.horizon) return 0.0;  // Dbar_1 and Dbar_{H+1} vanish
        return dbar_raw[h][s];
    };

    const StepTable occ = occupancy(mdp, pi);
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double w = occ.at(h, s, a);
                if (w <= 0.0) continue;
                const double base = d.at(h, s, a) - dbar(h, s);
                if (h + 1 < mdp.horizon) {
                    auto row = mdp.transition_row(h, s, a);
                    for (int sp = 0; sp < mdp.num_states; ++sp) {
                        if (row[sp] <= 0.0) continue;
                        const double term = base + dbar(h + 1, sp);
                        sides.lhs += w * row[sp] * term * term;
                    }
                } else {
                    sides.lhs += w * base * base;
                }
            }
        }
    }

    for (int h = 1; h <= mdp.horizon; ++h) {
        const Policy composed = Policy::composed(pi, pi_ref, h);
        sides.rhs += expected_square_sum(mdp, composed, d);
    }
    sides.rhs *= 4.0;
    return sides;
}

}  // namespace outcome_rl
