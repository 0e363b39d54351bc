#include <gtest/gtest.h>

#include "outcome_rl/decomposition.hpp"
#include "outcome_rl/dp.hpp"
#include "outcome_rl/environments.hpp"
#include "outcome_rl/mdp.hpp"
#include "outcome_rl/sampling.hpp"
#include "oracles.hpp"

using namespace outcome_rl;

namespace {

TabularMdp single_state_mdp(int horizon, double step_reward) {
    TabularMdp mdp;
    mdp.num_states = 1;
    mdp.num_actions = 1;
    mdp.horizon = horizon;
    mdp.initial_dist = {1.0};
    mdp.transitions.assign(static_cast<std::size_t>(std::max(horizon - 1, 0)), 1.0);
    mdp.mean_reward = RewardTable(horizon, 1, 1, step_reward);
    mdp.validate();
    return mdp;
}

StepTable random_table(int horizon, int states, int actions, Rng& rng, double lo = 0.0,
                       double hi = 1.0) {
    StepTable t(horizon, states, actions);
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

Policy random_policy(const TabularMdp& mdp, Rng& rng) {
    std::vector<int> actions(static_cast<std::size_t>(mdp.horizon) * mdp.num_states);
    for (int& a : actions) a = rng.uniform_int(mdp.num_actions);
    return Policy::markov(std::move(actions), mdp.horizon, mdp.num_states);
}

}  // namespace

// ---------------------------------------------------------------------------
// TabularMdp invariants
// ---------------------------------------------------------------------------

TEST(TabularMdp, ValidateRejectsBadRows) {
    TabularMdp mdp = single_state_mdp(2, 0.1);
    mdp.transitions[0] = 0.5;
    EXPECT_THROW(mdp.validate(), std::invalid_argument);
}

TEST(TabularMdp, ValidateRejectsUnnormalizedTrajectoryReward) {
    TabularMdp mdp = single_state_mdp(3, 0.3);
    for (double& r : mdp.mean_reward.data()) r = 0.5;  // total 1.5 > 1
    EXPECT_THROW(mdp.validate(), std::invalid_argument);
}

TEST(TabularMdp, DatasetRejectsKindMismatch) {
    Dataset data(FeedbackKind::Outcome);
    data.append(OutcomeSample{Trajectory{{{0, 0}}}, 0.5});
    EXPECT_THROW(data.append(PreferenceSample{}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// optimal_q
// ---------------------------------------------------------------------------

TEST(OptimalQ, HardCaseMatchesKnownTable) {
    const HardCaseBundle bundle = build_hard_case();
    const ValueTable q = optimal_q(bundle.mdp);
    EXPECT_NEAR(q.at(0, 0, 0), 0.40, 1e-12);
    EXPECT_NEAR(q.at(0, 0, 1), 0.40, 1e-12);
    EXPECT_NEAR(q.at(1, 1, 0), 0.20, 1e-12);
    EXPECT_NEAR(q.at(1, 1, 1), 0.19, 1e-12);
}

TEST(OptimalQ, ZeroRewardGivesZeroQ) {
    RandomMdpSpec spec;
    spec.reward_scale = 0.0;
    spec.seed = 11;
    const TabularMdp mdp = build_random_tabular(spec);
    const ValueTable q = optimal_q(mdp);
    for (double v : q.data()) EXPECT_EQ(v, 0.0);
}

TEST(OptimalQ, GreedyMatchesBruteForceOverAllPolicies) {
    RandomMdpSpec spec;
    spec.num_states = 4;
    spec.num_actions = 2;
    spec.horizon = 3;
    spec.seed = 3;
    const TabularMdp mdp = build_random_tabular(spec);
    const ValueTable q = optimal_q(mdp);
    const double j_greedy = policy_value(mdp, greedy_policy(q)).value;
    const double j_best = oracle::max_policy_value(mdp);  // 2^(4*3) policies
    EXPECT_NEAR(j_greedy, j_best, 1e-10);
}

TEST(OptimalQ, BellmanFixedPointHolds) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        RandomMdpSpec spec;
        spec.num_states = 5;
        spec.num_actions = 3;
        spec.horizon = 4;
        spec.seed = seed;
        const TabularMdp mdp = build_random_tabular(spec);
        const ValueTable q = optimal_q(mdp);
        for (int h = 0; h < mdp.horizon; ++h)
            for (int s = 0; s < mdp.num_states; ++s)
                for (int a = 0; a < mdp.num_actions; ++a) {
                    double backup = mdp.mean_reward.at(h, s, a);
                    if (h + 1 < mdp.horizon) {
                        auto row = mdp.transition_row(h, s, a);
                        for (int sp = 0; sp < mdp.num_states; ++sp)
                            backup += row[sp] * q.state_max(h + 1, sp);
                    }
                    EXPECT_NEAR(q.at(h, s, a), backup, 1e-10);
                }
    }
}

// ---------------------------------------------------------------------------
// policy_value
// ---------------------------------------------------------------------------

TEST(PolicyValue, HardCaseTrapPolicyValue) {
    const HardCaseBundle bundle = build_hard_case();
    // takes a2 at the layer-2 state
    const Policy pi = Policy::markov({0, 0, 0, 1}, 2, 2);
    EXPECT_NEAR(policy_value(bundle.mdp, pi).value, 0.39, 1e-12);
}

TEST(PolicyValue, ConstantRewardSumsToOne) {
    const TabularMdp mdp = single_state_mdp(4, 0.25);
    const Policy pi = Policy::constant(0, 4, 1);
    EXPECT_DOUBLE_EQ(policy_value(mdp, pi).value, 1.0);
}

TEST(PolicyValue, MatchesTrajectoryEnumerationOracle) {
    RandomMdpSpec spec;
    spec.num_states = 5;
    spec.num_actions = 3;
    spec.horizon = 4;
    spec.seed = 17;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng rng(5);
    for (int k = 0; k < 5; ++k) {
        const Policy pi = random_policy(mdp, rng);
        EXPECT_NEAR(policy_value(mdp, pi).value, oracle::policy_value(mdp, pi), 1e-12);
    }
}

TEST(PolicyValue, MatchesMonteCarloWithinThreeStandardErrors) {
    RandomMdpSpec spec;
    spec.seed = 23;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng policy_rng(7);
    const Policy pi = random_policy(mdp, policy_rng);
    const double j = policy_value(mdp, pi).value;

    Rng rng(99);
    const int n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = mdp.trajectory_reward(sample_trajectory(mdp, pi, rng));
        sum += r;
        sum_sq += r * r;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
    const double se = sd / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(mean, j, 3.0 * se + 1e-12);
}

// ---------------------------------------------------------------------------
// occupancy
// ---------------------------------------------------------------------------

TEST(Occupancy, HardCaseDeterministicTransition) {
    const HardCaseBundle bundle = build_hard_case();
    const Policy pi = Policy::constant(0, 2, 2);
    const StepTable d = occupancy(bundle.mdp, pi);
    EXPECT_DOUBLE_EQ(d.at(1, 1, 0), 1.0);
}

TEST(Occupancy, FirstLayerMatchesDefinition) {
    RandomMdpSpec spec;
    spec.seed = 31;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng rng(2);
    const Policy pi = random_policy(mdp, rng);
    const StepTable d = occupancy(mdp, pi);
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double expected = (pi.action(0, s) == a) ? mdp.initial_dist[s] : 0.0;
            EXPECT_NEAR(d.at(0, s, a), expected, 1e-15);
        }
}

TEST(Occupancy, LayersSumToOneAndMarginalsPropagate) {
    RandomMdpSpec spec;
    spec.num_states = 6;
    spec.num_actions = 3;
    spec.horizon = 5;
    spec.seed = 37;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng rng(4);
    const Policy pi = random_policy(mdp, rng);
    const StepTable d = occupancy(mdp, pi);
    for (int h = 0; h < mdp.horizon; ++h) {
        double layer = 0.0;
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) layer += d.at(h, s, a);
        EXPECT_NEAR(layer, 1.0, 1e-12);
    }
    for (int h = 0; h + 1 < mdp.horizon; ++h)
        for (int sp = 0; sp < mdp.num_states; ++sp) {
            double pushed = 0.0;
            for (int s = 0; s < mdp.num_states; ++s)
                for (int a = 0; a < mdp.num_actions; ++a)
                    pushed += d.at(h, s, a) * mdp.transition_row(h, s, a)[sp];
            double marginal = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) marginal += d.at(h + 1, sp, a);
            EXPECT_NEAR(pushed, marginal, 1e-12);
        }
}

TEST(Occupancy, MatchesEnumerationAndMonteCarlo) {
    RandomMdpSpec spec;
    spec.seed = 41;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng rng(6);
    const Policy pi = random_policy(mdp, rng);
    const StepTable d = occupancy(mdp, pi);
    const StepTable d_oracle = oracle::occupancy(mdp, pi);
    for (std::size_t i = 0; i < d.data().size(); ++i)
        EXPECT_NEAR(d.data()[i], d_oracle.data()[i], 1e-12);

    Rng mc(123);
    const int n = 100000;
    StepTable freq(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int i = 0; i < n; ++i) {
        const Trajectory tau = sample_trajectory(mdp, pi, mc);
        for (int h = 0; h < tau.length(); ++h) freq.at(h, tau.state(h), tau.action(h)) += 1.0;
    }
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double p = d.at(h, s, a);
                const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
                EXPECT_NEAR(freq.at(h, s, a) / n, p, 3.0 * se + 1e-9);
            }
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

TEST(SampleTrajectory, DeterministicMdpYieldsUniquePath) {
    const TabularMdp mdp = build_deterministic_chain(4, 3, 13);
    Rng pol_rng(1);
    const Policy pi = random_policy(mdp, pol_rng);
    Rng rng(9);
    const Trajectory tau = sample_trajectory(mdp, pi, rng);
    int s = 0;
    for (int h = 0; h < mdp.horizon; ++h) {
        EXPECT_EQ(tau.state(h), s);
        EXPECT_EQ(tau.action(h), pi.action(h, s));
        if (h + 1 < mdp.horizon) s = mdp.successor(h, s, pi.action(h, s));
    }
}

TEST(SampleTrajectory, SeededDeterminism) {
    RandomMdpSpec spec;
    spec.seed = 47;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng pol_rng(3);
    const Policy pi = random_policy(mdp, pol_rng);
    Rng a(1234), b(1234);
    for (int i = 0; i < 20; ++i) {
        EXPECT_TRUE(sample_trajectory(mdp, pi, a) == sample_trajectory(mdp, pi, b));
    }
}

TEST(SampleTrajectory, HardCaseGreedyOfQ3TakesA2) {
    const HardCaseBundle bundle = build_hard_case();
    const Policy pi = greedy_policy(bundle.q_class.members[2]);  // Q3
    Rng rng(0);
    const Trajectory tau = sample_trajectory(bundle.mdp, pi, rng);
    EXPECT_EQ(tau.state(1), 1);
    EXPECT_EQ(tau.action(1), 1);  // a2 at the layer-2 state
}

TEST(SampleOutcomeReward, DegenerateBernoulliEnds) {
    const TabularMdp zero = single_state_mdp(2, 0.0);
    const TabularMdp one = single_state_mdp(2, 0.5);
    Rng rng(77);
    const Policy pi = Policy::constant(0, 2, 1);
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(sample_outcome_reward(zero, sample_trajectory(zero, pi, rng), rng), 0.0);
        EXPECT_EQ(sample_outcome_reward(one, sample_trajectory(one, pi, rng), rng), 1.0);
    }
}

TEST(SampleOutcomeReward, HardCaseTrapTrajectoryMean) {
    const HardCaseBundle bundle = build_hard_case();
    Trajectory tau{{{0, 0}, {1, 1}}};  // total mean reward 0.39
    Rng rng(55);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_outcome_reward(bundle.mdp, tau, rng);
    const double se = std::sqrt(0.39 * 0.61 / n);
    EXPECT_NEAR(sum / n, 0.39, 3.0 * se);
}

TEST(SampleOutcomeReward, RejectsUnnormalizedTrajectory) {
    TabularMdp mdp = single_state_mdp(2, 0.5);
    mdp.mean_reward.at(0, 0, 0) = 0.9;  // trajectory total 1.4
    Trajectory tau{{{0, 0}, {0, 0}}};
    Rng rng(1);
    EXPECT_THROW(sample_outcome_reward(mdp, tau, rng), std::domain_error);
}

// ---------------------------------------------------------------------------
// btl_probability
// ---------------------------------------------------------------------------

TEST(BtlProbability, EqualRewardsGiveHalf) {
    EXPECT_DOUBLE_EQ(btl_probability(0.3, 0.3, 2.0), 0.5);
}

TEST(BtlProbability, ZeroBetaGivesHalf) {
    EXPECT_DOUBLE_EQ(btl_probability(0.9, 0.1, 0.0), 0.5);
}

TEST(BtlProbability, LogisticOfOne) {
    // 1 / (1 + e^{-1}), frozen from direct evaluation
    EXPECT_NEAR(btl_probability(1.0, 0.0, 1.0), 0.7310585786300049, 1e-15);
}

TEST(BtlProbability, SymmetrySumsToOne) {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform(), y = rng.uniform(), beta = rng.uniform(0.0, 50.0);
        EXPECT_NEAR(btl_probability(x, y, beta) + btl_probability(y, x, beta), 1.0, 1e-12);
    }
}

// ---------------------------------------------------------------------------
// perf_diff_decomposition
// ---------------------------------------------------------------------------

TEST(PerfDiff, AllTermsVanishAtTheFixedPoint) {
    const HardCaseBundle bundle = build_hard_case();
    const ValueTable q_star = optimal_q(bundle.mdp);
    const auto terms = perf_diff_decomposition(bundle.mdp, q_star, bundle.mdp.mean_reward,
                                               greedy_policy(q_star));
    EXPECT_NEAR(terms.lhs, 0.0, 1e-12);
    EXPECT_NEAR(terms.bellman_term, 0.0, 1e-12);
    EXPECT_NEAR(terms.reward_term, 0.0, 1e-12);
}

TEST(PerfDiff, TrueRewardRecoversPlainPerformanceDifference) {
    RandomMdpSpec spec;
    spec.num_states = 5;
    spec.num_actions = 3;
    spec.horizon = 4;
    spec.seed = 53;
    const TabularMdp mdp = build_random_tabular(spec);
    Rng rng(12);
    for (int k = 0; k < 20; ++k) {
        const ValueTable f = random_table(mdp.horizon, mdp.num_states, mdp.num_actions, rng);
        const auto terms = perf_diff_decomposition(mdp, f, mdp.mean_reward, greedy_policy(f));
        EXPECT_EQ(terms.reward_term, 0.0);
        EXPECT_NEAR(terms.lhs, terms.bellman_term, 1e-10);
    }
}

TEST(PerfDiff, IdentityHoldsForRandomProxyRewards) {
    Rng rng(21);
    for (int k = 0; k < 50; ++k) {
        RandomMdpSpec spec;
        spec.num_states = 2 + static_cast<int>(rng.raw() % 5);
        spec.num_actions = 2 + static_cast<int>(rng.raw() % 3);
        spec.horizon = 1 + static_cast<int>(rng.raw() % 5);
        spec.seed = rng.raw();
        const TabularMdp mdp = build_random_tabular(spec);
        const ValueTable f = random_table(mdp.horizon, mdp.num_states, mdp.num_actions, rng);
        const RewardTable r = random_table(mdp.horizon, mdp.num_states, mdp.num_actions, rng);
        const auto terms = perf_diff_decomposition(mdp, f, r, greedy_policy(f));
        EXPECT_NEAR(terms.lhs, terms.bellman_term + terms.reward_term, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// traj_decomp_check
// ---------------------------------------------------------------------------

TEST(TrajDecomp, ZeroTablesGiveZeroOnBothSides) {
    const HardCaseBundle bundle = build_hard_case();
    const StepTable d(2, 2, 2, 0.0);
    const Policy pi = Policy::constant(0, 2, 2);
    const auto sides = traj_decomp_check(bundle.mdp, d, pi, pi);
    EXPECT_EQ(sides.lhs, 0.0);
    EXPECT_EQ(sides.rhs, 0.0);
}

TEST(TrajDecomp, SingleStepReducesToFourTimesTheSquare) {
    TabularMdp mdp;
    mdp.num_states = 3;
    mdp.num_actions = 2;
    mdp.horizon = 1;
    mdp.initial_dist = {0.5, 0.25, 0.25};
    mdp.mean_reward = RewardTable(1, 3, 2, 0.0);
    mdp.validate();
    Rng rng(5);
    const StepTable d = random_table(1, 3, 2, rng, -1.0, 1.0);
    const Policy pi = Policy::constant(1, 1, 3);
    const Policy ref = Policy::constant(0, 1, 3);
    const auto sides = traj_decomp_check(mdp, d, pi, ref);
    double expected = 0.0;
    for (int s = 0; s < 3; ++s) expected += mdp.initial_dist[s] * d.at(0, s, 1) * d.at(0, s, 1);
    EXPECT_NEAR(sides.lhs, expected, 1e-14);
    EXPECT_NEAR(sides.rhs, 4.0 * expected, 1e-14);
}

TEST(TrajDecomp, InequalityAndExactEnumerationAgreement) {
    Rng rng(31);
    for (int k = 0; k < 30; ++k) {
        RandomMdpSpec spec;
        spec.num_states = 3;
        spec.num_actions = 2;
        spec.horizon = 1 + static_cast<int>(rng.raw() % 4);
        spec.seed = rng.raw();
        const TabularMdp mdp = build_random_tabular(spec);
        const StepTable d = random_table(mdp.horizon, mdp.num_states, mdp.num_actions, rng, -1.0, 1.0);
        Rng pol_rng(rng.raw());
        const Policy pi = random_policy(mdp, pol_rng);
        const Policy ref = random_policy(mdp, pol_rng);
        const auto sides = traj_decomp_check(mdp, d, pi, ref);
        EXPECT_LE(sides.lhs, sides.rhs + 1e-12);

        // rhs against exhaustive trajectory enumeration
        double rhs_oracle = 0.0;
        for (int h = 1; h <= mdp.horizon; ++h) {
            const Policy composed = Policy::composed(pi, ref, h);
            rhs_oracle += oracle::expectation(mdp, composed, [&](const Trajectory& tau) {
                const double total = trajectory_sum(d, tau);
                return total * total;
            });
        }
        EXPECT_NEAR(sides.rhs, 4.0 * rhs_oracle, 1e-10);
    }
}

// ---------------------------------------------------------------------------
// policies
// ---------------------------------------------------------------------------

TEST(Policy, ComposedSwitchesAtTheStatedStep) {
    const Policy front = Policy::constant(0, 4, 2);
    const Policy back = Policy::constant(1, 4, 2);
    const Policy mix = Policy::composed(front, back, 2);
    EXPECT_EQ(mix.action(0, 0), 0);
    EXPECT_EQ(mix.action(1, 1), 0);
    EXPECT_EQ(mix.action(2, 0), 1);
    EXPECT_EQ(mix.action(3, 1), 1);
}

TEST(SampleOutcomeReward, ClippedGaussianChannelStaysInRange) {
    const HardCaseBundle bundle = build_hard_case();
    const Trajectory tau{{{0, 0}, {1, 1}}};  // mean 0.39
    Rng rng(31);
    const OutcomeChannel channel = ClippedGaussianChannel{0.2};
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double r = sample_outcome_reward(bundle.mdp, tau, rng, channel);
        ASSERT_GE(r, 0.0);
        ASSERT_LE(r, 1.0);
        sum += r;
    }
    // clipping is rare at sigma = 0.2 around 0.39; mean stays close
    EXPECT_NEAR(sum / n, 0.39, 0.02);

    Rng a(5), b(5);
    for (int i = 0; i < 10; ++i)
        EXPECT_EQ(sample_outcome_reward(bundle.mdp, tau, a, channel),
                  sample_outcome_reward(bundle.mdp, tau, b, channel));
}
