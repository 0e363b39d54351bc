#pragma once

#include "outcome_rl/dp.hpp"
#include "outcome_rl/function_classes.hpp"
#include "outcome_rl/mdp.hpp"
#include "outcome_rl/rng.hpp"

namespace outcome_rl {

// ---------------------------------------------------------------------------
// Fitted-reward trap instance
// ---------------------------------------------------------------------------

/// Two-layer trap instance for the fitted-reward baseline: a 2-state,
/// 2-action, H = 2 MDP where every trajectory that avoids (s2, a1) gives the
/// decoupled reward fit no way to distinguish the true reward model from a
/// decoy that makes the suboptimal arm look safe.
struct HardCaseBundle {
    TabularMdp mdp;
    QClass q_class;        // {Q1, Q2, Q3, Q4}
    RewardClass r_class;   // {R1 (truth), R2 (decoy)}
    ComparatorClass g_class;
};

inline HardCaseBundle build_hard_case() {
    HardCaseBundle bundle;
    TabularMdp& mdp = bundle.mdp;
    mdp.num_states = 2;  // state 0 is the layer-1 state, state 1 the layer-2 state
    mdp.num_actions = 2;
    mdp.horizon = 2;
    mdp.initial_dist = {1.0, 0.0};
    mdp.transitions.assign(static_cast<std::size_t>(1) * 2 * 2 * 2, 0.0);
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 2; ++a) mdp.transition_row(0, s, a)[1] = 1.0;

    // True reward R1; layer-off cells (state 1 at step 1, state 0 at step 2)
    // are unreachable and set to 0.
    mdp.mean_reward = RewardTable(2, 2, 2, 0.0);
    mdp.mean_reward.at(0, 0, 0) = 0.20;
    mdp.mean_reward.at(0, 0, 1) = 0.20;
    mdp.mean_reward.at(1, 1, 0) = 0.20;
    mdp.mean_reward.at(1, 1, 1) = 0.19;
    mdp.validate();

    // Reward class {R1, R2}; the decoy R2 shifts all value onto layer 2 so
    // that R1(tau) = R2(tau) for every trajectory through (s2, a2).
    RewardTable r1 = mdp.mean_reward;
    RewardTable r2(2, 2, 2, 0.0);
    r2.at(1, 1, 0) = 0.38;
    r2.at(1, 1, 1) = 0.39;
    bundle.r_class.members = {r1, r2};

    // Q-class {Q1..Q4}; Q1 is optimal under R1, Q4 is the Bellman fixed
    // point of R2. Unreachable cells hold the values the reward-induced
    // backups produce there, so realizability and completeness are exact.
    auto make_q = [](double s1_value, double s2_a1, double s2_a2, double off1) {
        ValueTable q(2, 2, 2, 0.0);
        q.at(0, 0, 0) = s1_value;
        q.at(0, 0, 1) = s1_value;
        q.at(0, 1, 0) = off1;
        q.at(0, 1, 1) = off1;
        q.at(1, 1, 0) = s2_a1;
        q.at(1, 1, 1) = s2_a2;
        return q;
    };
    bundle.q_class.members = {
        make_q(0.40, 0.20, 0.19, 0.20),  // Q1
        make_q(0.20, 0.20, 0.19, 0.20),  // Q2
        make_q(0.59, 0.38, 0.39, 0.39),  // Q3
        make_q(0.39, 0.38, 0.39, 0.39),  // Q4
    };
    bundle.g_class.members = bundle.q_class.members;
    return bundle;
}

// ---------------------------------------------------------------------------
// ReLU generalized-linear reward family
// ---------------------------------------------------------------------------

/// Greedy rejection packing of unit vectors in R^d with pairwise inner
/// products at most 1 - eps. Stops at max_n accepted points or after
/// failure_budget rejected candidates; may return fewer than max_n.
inline std::vector<std::vector<double>> sphere_packing(int d, double eps, int max_n, Rng& rng,
                                                       int failure_budget = 10000) {
    if (d < 1) throw std::invalid_argument("sphere_packing: d must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("sphere_packing: eps must be in (0, 1)");
    std::vector<std::vector<double>> thetas;
    int failures = 0;
    while (static_cast<int>(thetas.size()) < max_n && failures < failure_budget) {
        std::vector<double> candidate = rng.unit_vector(d);
        bool ok = true;
        for (const auto& theta : thetas) {
            double dot = 0.0;
            for (int i = 0; i < d; ++i) dot += candidate[i] * theta[i];
            if (dot > 1.0 - eps) {
                ok = false;
                break;
            }
        }
        if (ok)
            thetas.push_back(std::move(candidate));
        else
            ++failures;
    }
    return thetas;
}

/// Two-layer MDP family with reward linear in a hidden unit vector v except
/// for a ReLU spike at the hidden arm. The packed set serves as both the
/// action set and the second-layer state set, so the instance is exactly
/// tabular. J(pi) = 2/3 + (eps/3) 1{a_pi = v}.
struct ReluFamily {
    int dimension = 0;
    double epsilon = 0.0;
    double b = 0.0;  // 1 - epsilon
    std::vector<std::vector<double>> theta_set;
    int hidden_index = 0;
    TabularMdp mdp;

    int num_arms() const { return static_cast<int>(theta_set.size()); }
};

namespace detail {

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) total += x[i] * y[i];
    return total;
}

/// Mean rewards of the instance with hidden vector theta_set[v]:
///   R_1(s1, a) = (ReLU(<a,v> - b) + <a,v> + 1) / 3,
///   R_2(theta, .) = (1 - <theta,v>) / 3.
inline RewardTable relu_rewards(const std::vector<std::vector<double>>& theta_set, double b,
                                int hidden, int num_states, int num_actions) {
    RewardTable reward(2, num_states, num_actions, 0.0);
    const auto& v = theta_set[hidden];
    for (int i = 0; i < num_actions; ++i) {
        const double ip = dot(theta_set[i], v);
        reward.at(0, 0, i) = (std::max(ip - b, 0.0) + ip + 1.0) / 3.0;
        for (int a = 0; a < num_actions; ++a) reward.at(1, 1 + i, a) = (1.0 - ip) / 3.0;
    }
    return reward;
}

}  // namespace detail

inline ReluFamily build_relu_family(std::vector<std::vector<double>> theta_set, double eps,
                                    int hidden_index) {
    if (theta_set.empty()) throw std::invalid_argument("build_relu_family: empty theta set");
    if (hidden_index < 0 || hidden_index >= static_cast<int>(theta_set.size()))
        throw std::invalid_argument("build_relu_family: hidden_index out of range");
    ReluFamily family;
    family.dimension = static_cast<int>(theta_set.front().size());
    family.epsilon = eps;
    family.b = 1.0 - eps;
    family.theta_set = std::move(theta_set);
    family.hidden_index = hidden_index;

    const int n = family.num_arms();
    TabularMdp& mdp = family.mdp;
    mdp.num_states = 1 + n;  // state 0 is the start, state 1+i is theta_i
    mdp.num_actions = n;
    mdp.horizon = 2;
    mdp.initial_dist.assign(mdp.num_states, 0.0);
    mdp.initial_dist[0] = 1.0;
    mdp.transitions.assign(
        static_cast<std::size_t>(mdp.num_states) * mdp.num_actions * mdp.num_states, 0.0);
    for (int a = 0; a < n; ++a) mdp.transition_row(0, 0, a)[1 + a] = 1.0;
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < n; ++a) mdp.transition_row(0, 1 + i, a)[1 + i] = 1.0;  // unreachable
    mdp.mean_reward =
        detail::relu_rewards(family.theta_set, family.b, hidden_index, mdp.num_states, n);
    mdp.validate();
    return family;
}

/// Candidate classes for the family: one Q-function and one reward table per
/// hypothesis "the hidden vector is theta_w".
struct ReluCandidates {
    QClass q_class;
    RewardClass r_class;
    ComparatorClass g_class;
};

inline ReluCandidates relu_candidate_classes(const ReluFamily& family) {
    ReluCandidates classes;
    const int n = family.num_arms();
    for (int w = 0; w < n; ++w) {
        TabularMdp sibling = family.mdp;
        sibling.mean_reward =
            detail::relu_rewards(family.theta_set, family.b, w, sibling.num_states, n);
        classes.r_class.members.push_back(sibling.mean_reward);
        classes.q_class.members.push_back(optimal_q(sibling));
    }
    classes.g_class.members = classes.q_class.members;
    return classes;
}

// ---------------------------------------------------------------------------
// Generic generators
// ---------------------------------------------------------------------------

struct RandomMdpSpec {
    int num_states = 4;
    int num_actions = 2;
    int horizon = 3;
    double reward_scale = 1.0;  // in [0, 1]; 0 gives a zero-reward MDP
    std::uint64_t seed = 0;
};

/// Random dense MDP: Dirichlet(1) transition rows, uniform initial
/// distribution draw, uniform rewards normalized pathwise. Rewards are drawn
/// in [0, 1], divided by horizon * (max entry) so every trajectory total is
/// at most 1, then multiplied by reward_scale.
inline TabularMdp build_random_tabular(const RandomMdpSpec& spec) {
    Rng rng(spec.seed);
    TabularMdp mdp;
    mdp.num_states = spec.num_states;
    mdp.num_actions = spec.num_actions;
    mdp.horizon = spec.horizon;
    mdp.initial_dist = rng.simplex(spec.num_states);
    mdp.transitions.assign(static_cast<std::size_t>(std::max(spec.horizon - 1, 0)) *
                               spec.num_states * spec.num_actions * spec.num_states,
                           0.0);
    for (int h = 0; h + 1 < spec.horizon; ++h)
        for (int s = 0; s < spec.num_states; ++s)
            for (int a = 0; a < spec.num_actions; ++a) {
                auto row = mdp.transition_row(h, s, a);
                const auto probs = rng.simplex(spec.num_states);
                std::copy(probs.begin(), probs.end(), row.begin());
            }
    mdp.mean_reward = RewardTable(spec.horizon, spec.num_states, spec.num_actions);
    double peak = 0.0;
    for (double& r : mdp.mean_reward.data()) {
        r = rng.uniform();
        peak = std::max(peak, r);
    }
    const double scale = std::clamp(spec.reward_scale, 0.0, 1.0);
    const double denom = peak > 0.0 ? spec.horizon * peak : 1.0;
    for (double& r : mdp.mean_reward.data()) r = scale * r / denom;
    mdp.validate();
    return mdp;
}

/// Layered deterministic chain on `length` states with horizon length - 1.
/// At each (h, s) one seeded action advances toward the end of the chain and
/// the others fall back to an earlier state. Rewards are seeded uniform,
/// normalized pathwise. Start state is 0.
inline TabularMdp build_deterministic_chain(int length, int num_actions, std::uint64_t seed) {
    if (length < 2) throw std::invalid_argument("build_deterministic_chain: length must be >= 2");
    Rng rng(seed);
    TabularMdp mdp;
    mdp.num_states = length;
    mdp.num_actions = num_actions;
    mdp.horizon = length - 1;
    mdp.initial_dist.assign(length, 0.0);
    mdp.initial_dist[0] = 1.0;
    mdp.transitions.assign(static_cast<std::size_t>(std::max(mdp.horizon - 1, 0)) * length *
                               num_actions * length,
                           0.0);
    for (int h = 0; h + 1 < mdp.horizon; ++h)
        for (int s = 0; s < length; ++s) {
            const int forward = rng.uniform_int(num_actions);
            for (int a = 0; a < num_actions; ++a) {
                const int next = (a == forward) ? std::min(s + 1, length - 1)
                                                : rng.uniform_int(s + 1);  // fall back to 0..s
                mdp.transition_row(h, s, a)[next] = 1.0;
            }
        }
    mdp.mean_reward = RewardTable(mdp.horizon, length, num_actions);
    double peak = 0.0;
    for (double& r : mdp.mean_reward.data()) {
        r = rng.uniform();
        peak = std::max(peak, r);
    }
    const double denom = peak > 0.0 ? mdp.horizon * peak : 1.0;
    for (double& r : mdp.mean_reward.data()) r /= denom;
    mdp.validate();
    return mdp;
}

// ---------------------------------------------------------------------------
// Function class generators
// ---------------------------------------------------------------------------

/// {Q*} followed by count - 1 clamped noisy copies Q* + noise, noise uniform
/// in [-noise_scale, noise_scale] per entry. Member 0 is exactly realizable.
inline QClass perturbed_optimal_q_class(const TabularMdp& mdp, int count, double noise_scale,
                                        std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("perturbed_optimal_q_class: count must be >= 1");
    Rng rng(seed);
    QClass f;
    ValueTable q_star = optimal_q(mdp);
    for (double& v : q_star.data()) v = std::clamp(v, 0.0, 1.0);
    f.members.push_back(q_star);
    for (int i = 1; i < count; ++i) {
        ValueTable noisy = q_star;
        for (double& v : noisy.data())
            v = std::clamp(v + rng.uniform(-noise_scale, noise_scale), 0.0, 1.0);
        f.members.push_back(std::move(noisy));
    }
    f.validate();
    return f;
}

/// {R*} followed by clamped noisy copies of the true reward tables.
inline RewardClass perturbed_optimal_r_class(const TabularMdp& mdp, int count, double noise_scale,
                                             std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("perturbed_optimal_r_class: count must be >= 1");
    Rng rng(seed + 0x9e3779b97f4a7c15ull);
    RewardClass r;
    r.members.push_back(mdp.mean_reward);
    for (int i = 1; i < count; ++i) {
        RewardTable noisy = mdp.mean_reward;
        for (double& v : noisy.data())
            v = std::clamp(v + rng.uniform(-noise_scale, noise_scale), 0.0, 1.0);
        r.members.push_back(std::move(noisy));
    }
    r.validate();
    return r;
}

/// Independent uniform tables; realizability is not guaranteed.
inline QClass random_q_class(const TabularMdp& mdp, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("random_q_class: count must be >= 1");
    Rng rng(seed);
    QClass f;
    for (int i = 0; i < count; ++i) {
        ValueTable table(mdp.horizon, mdp.num_states, mdp.num_actions);
        for (double& v : table.data()) v = rng.uniform();
        f.members.push_back(std::move(table));
    }
    f.validate();
    return f;
}

/// Comparator class closed under every reward-induced Bellman backup of F:
/// G = F union { T_R f : f in F, R in R }. Completeness gap is 0 by
/// construction.
inline ComparatorClass closure_comparators(const TabularMdp& mdp, const QClass& f,
                                           const RewardClass& r) {
    std::vector<ValueTable> extras;
    extras.reserve(f.members.size() * r.members.size());
    for (const auto& fm : f.members)
        for (const auto& rm : r.members)
            extras.push_back(bellman_image(mdp, rm, fm));
    return ComparatorClass::containing(f, std::move(extras));
}

}  // namespace outcome_rl
