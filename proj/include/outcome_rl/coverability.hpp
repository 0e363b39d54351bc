#pragma once

#include "outcome_rl/dp.hpp"
#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

/// Finite policy class, typically the greedy policies induced by a Q-class.
struct PolicySet {
    std::vector<Policy> members;

    void validate() const {
        if (members.empty()) throw std::invalid_argument("PolicySet: empty set");
    }
};

struct CoverabilityResult {
    double value = 0.0;
    std::vector<double> per_layer;                // sum_{s,a} max_pi d^pi_h(s,a)
    std::vector<std::vector<double>> witnesses;   // optimal mu_h, flattened (s,a)
};

namespace detail {

inline std::vector<StepTable> all_occupancies(const TabularMdp& mdp, const PolicySet& policies) {
    std::vector<StepTable> occ;
    occ.reserve(policies.members.size());
    for (const auto& pi : policies.members) occ.push_back(occupancy(mdp, pi));
    return occ;
}

}  // namespace detail

/// Coverability coefficient
///   C_cov = min_{mu_1..mu_H} max_{h, pi} || d^pi_h / mu_h ||_inf
/// over per-layer distributions mu_h on state-action pairs, with the ratio
/// conventions 0/0 = 0 and x/0 = +inf for x > 0.
///
/// Computed layerwise in closed form: the optimal witness is
/// mu_h proportional to max_pi d^pi_h, which gives the layer value
/// sum_{s,a} max_pi d^pi_h(s,a); the coefficient is the max over layers.
inline CoverabilityResult coverability_detailed(const TabularMdp& mdp,
                                                const PolicySet& policies) {
    policies.validate();
    const auto occ = detail::all_occupancies(mdp, policies);
    CoverabilityResult result;
    result.per_layer.resize(mdp.horizon, 0.0);
    result.witnesses.assign(mdp.horizon,
                            std::vector<double>(static_cast<std::size_t>(mdp.num_states) *
                                                mdp.num_actions));
    for (int h = 0; h < mdp.horizon; ++h) {
        double layer_sum = 0.0;
        auto& witness = result.witnesses[h];
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                double peak = 0.0;
                for (const auto& d : occ) peak = std::max(peak, d.at(h, s, a));
                witness[static_cast<std::size_t>(s) * mdp.num_actions + a] = peak;
                layer_sum += peak;
            }
        result.per_layer[h] = layer_sum;
        if (layer_sum > 0.0)
            for (double& w : witness) w /= layer_sum;
        result.value = std::max(result.value, layer_sum);
    }
    return result;
}

inline double coverability(const TabularMdp& mdp, const PolicySet& policies) {
    return coverability_detailed(mdp, policies).value;
}

/// Independent verifier for the coverability value: bisect on t over the
/// per-layer feasibility test
///   exists mu_h in Delta(SxA) with d^pi_h <= t mu_h for all pi, s, a
/// which holds iff sum_{s,a} max_pi d^pi_h(s,a) <= t (a witness must put at
/// least max_pi d^pi_h(s,a) / t on every reachable cell). Returns the minimal
/// t feasible for every layer, within tol.
inline double coverability_bisection_oracle(const TabularMdp& mdp, const PolicySet& policies,
                                            double tol) {
    policies.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("coverability_bisection_oracle: tol must be > 0");
    const auto occ = detail::all_occupancies(mdp, policies);

    auto feasible = [&](double t) {
        for (int h = 0; h < mdp.horizon; ++h) {
            double required_mass = 0.0;
            for (int s = 0; s < mdp.num_states; ++s)
                for (int a = 0; a < mdp.num_actions; ++a) {
                    double peak = 0.0;
                    for (const auto& d : occ) peak = std::max(peak, d.at(h, s, a));
                    required_mass += peak / t;
                }
            if (required_mass > 1.0) return false;
        }
        return true;
    };

    double lo = 0.0;
    double hi = static_cast<double>(mdp.num_states) * mdp.num_actions + 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (feasible(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Initial-state coverability C'_cov = E_{s1~rho} C_cov(Pi; M_{s1}), where
/// M_{s1} fixes the start state and keeps the dynamics. Always an upper bound
/// on the plain coverability.
inline double coverability_prime(const TabularMdp& mdp, const PolicySet& policies) {
    policies.validate();
    double total = 0.0;
    for (int s1 = 0; s1 < mdp.num_states; ++s1) {
        if (mdp.initial_dist[s1] <= 0.0) continue;
        TabularMdp fixed = mdp;
        std::fill(fixed.initial_dist.begin(), fixed.initial_dist.end(), 0.0);
        fixed.initial_dist[s1] = 1.0;
        total += mdp.initial_dist[s1] * coverability(fixed, policies);
    }
    return total;
}

}  // namespace outcome_rl
