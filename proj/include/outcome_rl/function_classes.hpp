#pragma once

#include "outcome_rl/dp.hpp"
#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

/// Finite ordered Q-function class. Each member is one joint candidate
/// (a full per-step table); per-step product classes are represented by
/// listing the cartesian product explicitly.
struct QClass {
    std::vector<ValueTable> members;

    void validate() const {
        if (members.empty()) throw std::invalid_argument("QClass: empty class");
        for (const auto& m : members) {
            if (!m.same_shape(members.front()))
                throw std::invalid_argument("QClass: member shape mismatch");
            for (double v : m.data())
                if (v < 0.0 || v > 1.0) throw std::invalid_argument("QClass: value outside [0, 1]");
        }
    }
};

struct RewardClass {
    std::vector<RewardTable> members;

    void validate() const {
        if (members.empty()) throw std::invalid_argument("RewardClass: empty class");
        for (const auto& m : members) {
            if (!m.same_shape(members.front()))
                throw std::invalid_argument("RewardClass: member shape mismatch");
            for (double v : m.data())
                if (v < 0.0 || v > 1.0)
                    throw std::invalid_argument("RewardClass: value outside [0, 1]");
        }
    }
};

/// Helper class G. Must contain every member of the paired Q-class; use
/// containing() to build one that does by construction.
struct ComparatorClass {
    std::vector<ValueTable> members;

    /// G = F union extras, deduplicated by exact table equality.
    static ComparatorClass containing(const QClass& f, std::vector<ValueTable> extras) {
        ComparatorClass g;
        g.members = f.members;
        for (auto& table : extras) {
            bool dup = false;
            for (const auto& existing : g.members)
                if (existing == table) {
                    dup = true;
                    break;
                }
            if (!dup) g.members.push_back(std::move(table));
        }
        return g;
    }

    void validate_contains(const QClass& f) const {
        if (members.empty()) throw std::invalid_argument("ComparatorClass: empty class");
        for (const auto& fm : f.members) {
            bool found = false;
            for (const auto& gm : members)
                if (gm == fm) {
                    found = true;
                    break;
                }
            if (!found)
                throw std::invalid_argument("ComparatorClass: does not contain the Q-class");
        }
    }
};

/// Greedy policy of a value table: pi_h(s) = lowest index among
/// argmax_a f_h(s, a).
inline Policy greedy_policy(const ValueTable& f) {
    std::vector<int> actions(static_cast<std::size_t>(f.horizon()) * f.num_states());
    for (int h = 0; h < f.horizon(); ++h)
        for (int s = 0; s < f.num_states(); ++s)
            actions[static_cast<std::size_t>(h) * f.num_states() + s] = f.argmax_action(h, s);
    return Policy::markov(std::move(actions), f.horizon(), f.num_states());
}

/// Reward-induced Bellman image: (T_{R,h} f_{h+1})(s,a) for all h, with
/// f_{H+1} = 0, returned as a full per-step table.
inline ValueTable bellman_image(const TabularMdp& mdp, const RewardTable& reward,
                                const ValueTable& f) {
    ValueTable image(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                double value = reward.at(h, s, a);
                if (h + 1 < mdp.horizon) {
                    auto row = mdp.transition_row(h, s, a);
                    for (int sp = 0; sp < mdp.num_states; ++sp)
                        if (row[sp] > 0.0) value += row[sp] * f.state_max(h + 1, sp);
                }
                image.at(h, s, a) = value;
            }
    return image;
}

inline double sup_distance(const ValueTable& a, const ValueTable& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

/// Realizability gaps: min over class members of max_h sup-norm distance to
/// Q* (first) and to R* (second). Zero means exactly realizable.
inline std::pair<double, double> check_realizability(const TabularMdp& mdp, const QClass& f,
                                                     const RewardClass& r) {
    const ValueTable q_star = optimal_q(mdp);
    double eps_q = std::numeric_limits<double>::infinity();
    for (const auto& member : f.members) eps_q = std::min(eps_q, sup_distance(member, q_star));
    double eps_r = std::numeric_limits<double>::infinity();
    for (const auto& member : r.members)
        eps_r = std::min(eps_r, sup_distance(member, mdp.mean_reward));
    return {eps_q, eps_r};
}

/// Completeness gap: max over (f in F, R in R, h) of
///   min_{g in G} || T_{R,h} f_{h+1} - g_h ||_inf.
/// Zero means G is closed under every reward-induced Bellman backup of F.
inline double check_completeness(const TabularMdp& mdp, const QClass& f, const RewardClass& r,
                                 const ComparatorClass& g) {
    g.validate_contains(f);
    double worst = 0.0;
    for (const auto& fm : f.members) {
        for (const auto& rm : r.members) {
            const ValueTable image = bellman_image(mdp, rm, fm);
            for (int h = 0; h < mdp.horizon; ++h) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& gm : g.members) {
                    double dist = 0.0;
                    for (int s = 0; s < mdp.num_states; ++s)
                        for (int a = 0; a < mdp.num_actions; ++a)
                            dist = std::max(dist, std::abs(image.at(h, s, a) - gm.at(h, s, a)));
                    best = std::min(best, dist);
                }
                worst = std::max(worst, best);
            }
        }
    }
    return worst;
}

/// Outcome reward model induced by a value function on deterministic MDPs:
///   R^f(tau) = sum_h [ f_h(s_h, a_h) - f_{h+1}(s_{h+1}) ],
/// with f_{H+1} = 0 and f_h(s) = max_a f_h(s, a).
inline double induced_reward_model(const ValueTable& f, const Trajectory& tau) {
    double total = 0.0;
    for (int h = 0; h < tau.length(); ++h) {
        total += f.at(h, tau.state(h), tau.action(h));
        if (h + 1 < tau.length()) total -= f.state_max(h + 1, tau.state(h + 1));
    }
    return total;
}

}  // namespace outcome_rl
