#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace outcome_rl {

constexpr double kProbTol = 1e-12;

/// Dense per-step table indexed (h, s, a). Used for Q-functions, reward
/// models, occupancy measures and generic per-step quantities.
class StepTable {
public:
    StepTable() = default;
    StepTable(int horizon, int num_states, int num_actions, double fill = 0.0)
        : horizon_(horizon),
          num_states_(num_states),
          num_actions_(num_actions),
          data_(static_cast<std::size_t>(horizon) * num_states * num_actions, fill) {}

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }

    double& at(int h, int s, int a) { return data_[index(h, s, a)]; }
    double at(int h, int s, int a) const { return data_[index(h, s, a)]; }

    /// max_a table(h, s, a)
    double state_max(int h, int s) const {
        double best = at(h, s, 0);
        for (int a = 1; a < num_actions_; ++a) best = std::max(best, at(h, s, a));
        return best;
    }

    /// Lowest action index attaining max_a table(h, s, a).
    int argmax_action(int h, int s) const {
        int best = 0;
        for (int a = 1; a < num_actions_; ++a)
            if (at(h, s, a) > at(h, s, best)) best = a;
        return best;
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const StepTable& other) const {
        return horizon_ == other.horizon_ && num_states_ == other.num_states_ &&
               num_actions_ == other.num_actions_;
    }

    bool operator==(const StepTable& other) const {
        return same_shape(other) && data_ == other.data_;
    }

private:
    std::size_t index(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
    }

    int horizon_ = 0;
    int num_states_ = 0;
    int num_actions_ = 0;
    std::vector<double> data_;
};

using ValueTable = StepTable;
using RewardTable = StepTable;

/// H-step state-action sequence (s_1, a_1, ..., s_H, a_H).
struct Trajectory {
    std::vector<std::pair<int, int>> steps;

    int length() const { return static_cast<int>(steps.size()); }
    int state(int h) const { return steps[h].first; }
    int action(int h) const { return steps[h].second; }

    bool operator==(const Trajectory& other) const { return steps == other.steps; }
};

/// Sum of table entries along a trajectory: sum_h table(h, s_h, a_h).
inline double trajectory_sum(const StepTable& table, const Trajectory& tau) {
    double total = 0.0;
    for (int h = 0; h < tau.length(); ++h) total += table.at(h, tau.state(h), tau.action(h));
    return total;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Deterministic policy: either a Markov table (h, s) -> action, or the
/// roll-in/roll-out composition that follows `front` for steps 1..switch_step
/// and `back` afterwards. Immutable value type; cheap to copy.
class Policy {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    struct MarkovRepr {
        std::vector<int> actions;  // indexed h * num_states + s
        int horizon;
        int num_states;
    };
    struct ComposedRepr {
        NodePtr front;
        NodePtr back;
        int switch_step;  // number of steps taken from `front`
    };
    struct Node {
        std::variant<MarkovRepr, ComposedRepr> repr;
    };

public:
    static Policy markov(std::vector<int> actions, int horizon, int num_states) {
        if (static_cast<int>(actions.size()) != horizon * num_states)
            throw std::invalid_argument("Policy::markov: table size mismatch");
        Node node;
        node.repr = MarkovRepr{std::move(actions), horizon, num_states};
        return Policy(std::make_shared<const Node>(std::move(node)));
    }

    /// Constant policy taking the same action everywhere.
    static Policy constant(int action, int horizon, int num_states) {
        return markov(std::vector<int>(static_cast<std::size_t>(horizon) * num_states, action),
                      horizon, num_states);
    }

    /// `switch_step` is 1-based: steps 1..switch_step follow `front`.
    static Policy composed(Policy front, Policy back, int switch_step) {
        Node node;
        node.repr = ComposedRepr{std::move(front.node_), std::move(back.node_), switch_step};
        return Policy(std::make_shared<const Node>(std::move(node)));
    }

    /// Action at 0-based step index h in state s.
    int action(int h, int s) const {
        const Node* node = node_.get();
        while (true) {
            if (const auto* m = std::get_if<MarkovRepr>(&node->repr))
                return m->actions[static_cast<std::size_t>(h) * m->num_states + s];
            const auto& c = std::get<ComposedRepr>(node->repr);
            node = (h < c.switch_step) ? c.front.get() : c.back.get();
        }
    }

    bool is_markov() const { return std::holds_alternative<MarkovRepr>(node_->repr); }

private:
    explicit Policy(NodePtr node) : node_(std::move(node)) {}

    NodePtr node_;
};

// ---------------------------------------------------------------------------
// Feedback
// ---------------------------------------------------------------------------

struct ProcessSample {
    Trajectory traj;
    std::vector<double> rewards;  // one per step
};

struct OutcomeSample {
    Trajectory traj;
    double reward = 0.0;
};

struct PreferenceSample {
    Trajectory traj_plus;
    Trajectory traj_minus;
    int label = 0;  // y, 1 means traj_plus preferred
};

using FeedbackSample = std::variant<ProcessSample, OutcomeSample, PreferenceSample>;

enum class FeedbackKind { Process, Outcome, Preference };

inline FeedbackKind kind_of(const FeedbackSample& sample) {
    if (std::holds_alternative<ProcessSample>(sample)) return FeedbackKind::Process;
    if (std::holds_alternative<OutcomeSample>(sample)) return FeedbackKind::Outcome;
    return FeedbackKind::Preference;
}

/// Append-only homogeneous collection of feedback samples.
class Dataset {
public:
    explicit Dataset(FeedbackKind kind) : kind_(kind) {}

    FeedbackKind kind() const { return kind_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    void append(FeedbackSample sample) {
        if (kind_of(sample) != kind_)
            throw std::invalid_argument("Dataset::append: feedback kind mismatch");
        samples_.push_back(std::move(sample));
    }

    const FeedbackSample& operator[](std::size_t i) const { return samples_[i]; }

    const ProcessSample& process(std::size_t i) const { return std::get<ProcessSample>(samples_[i]); }
    const OutcomeSample& outcome(std::size_t i) const { return std::get<OutcomeSample>(samples_[i]); }
    const PreferenceSample& preference(std::size_t i) const {
        return std::get<PreferenceSample>(samples_[i]);
    }

    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

private:
    FeedbackKind kind_;
    std::vector<FeedbackSample> samples_;
};

inline void require_kind(const Dataset& data, FeedbackKind kind, const char* where) {
    if (data.kind() != kind)
        throw std::invalid_argument(std::string(where) + ": feedback kind mismatch");
}

// ---------------------------------------------------------------------------
// Tabular MDP
// ---------------------------------------------------------------------------

/// Finite-horizon tabular MDP with layered transitions and mean rewards.
///
/// Transitions are indexed (h, s, a) -> distribution over next states for
/// h in 0..H-2 (the episode ends after the step-H action). Mean rewards are
/// per (h, s, a) in [0, 1], normalized so that every reachable trajectory's
/// total mean reward lies in [0, 1].
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> transitions;  // (h, s, a, s') flattened, h in 0..H-2
    std::vector<double> initial_dist;
    RewardTable mean_reward;

    std::span<const double> transition_row(int h, int s, int a) const {
        const std::size_t offset =
            ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states;
        return std::span<const double>(transitions.data() + offset, num_states);
    }

    std::span<double> transition_row(int h, int s, int a) {
        const std::size_t offset =
            ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states;
        return std::span<double>(transitions.data() + offset, num_states);
    }

    /// Total mean reward R*(tau) of a trajectory.
    double trajectory_reward(const Trajectory& tau) const {
        return trajectory_sum(mean_reward, tau);
    }

    bool is_deterministic() const {
        for (int h = 0; h + 1 < horizon; ++h)
            for (int s = 0; s < num_states; ++s)
                for (int a = 0; a < num_actions; ++a) {
                    int nonzero = 0;
                    for (double p : transition_row(h, s, a))
                        if (p > 0.0) ++nonzero;
                    if (nonzero != 1) return false;
                }
        return true;
    }

    /// Unique successor of (h, s, a); only meaningful for deterministic MDPs.
    int successor(int h, int s, int a) const {
        auto row = transition_row(h, s, a);
        int best = 0;
        for (int sp = 1; sp < num_states; ++sp)
            if (row[sp] > row[best]) best = sp;
        return best;
    }

    /// Checks all structural invariants; throws std::invalid_argument on the
    /// first violation. See validate_message() for a non-throwing variant.
    void validate() const {
        const std::string msg = validate_message();
        if (!msg.empty()) throw std::invalid_argument("TabularMdp: " + msg);
    }

    std::string validate_message() const {
        if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
            return "num_states, num_actions and horizon must be positive";
        const std::size_t expected_rows =
            static_cast<std::size_t>(std::max(horizon - 1, 0)) * num_states * num_actions;
        if (transitions.size() != expected_rows * num_states) return "transition tensor has wrong size";
        if (static_cast<int>(initial_dist.size()) != num_states) return "initial_dist has wrong size";
        if (!mean_reward.same_shape(StepTable(horizon, num_states, num_actions)))
            return "mean_reward has wrong shape";

        for (int h = 0; h + 1 < horizon; ++h)
            for (int s = 0; s < num_states; ++s)
                for (int a = 0; a < num_actions; ++a) {
                    double sum = 0.0;
                    for (double p : transition_row(h, s, a)) {
                        if (p < 0.0) return "negative transition probability";
                        sum += p;
                    }
                    if (std::abs(sum - 1.0) > kProbTol) return "transition row does not sum to 1";
                }

        double rho_sum = 0.0;
        for (double p : initial_dist) {
            if (p < 0.0) return "negative initial probability";
            rho_sum += p;
        }
        if (std::abs(rho_sum - 1.0) > kProbTol) return "initial_dist does not sum to 1";

        for (double r : mean_reward.data())
            if (r < -kProbTol || r > 1.0 + kProbTol) return "mean reward outside [0, 1]";

        if (max_reachable_total_reward() > 1.0 + 1e-9)
            return "reachable trajectory with total mean reward above 1";
        return {};
    }

    /// Max over reachable trajectories of the total mean reward, by max-plus
    /// dynamic programming over the transition support.
    double max_reachable_total_reward() const {
        const double neg_inf = -std::numeric_limits<double>::infinity();
        std::vector<double> best(num_states, neg_inf);  // best suffix from (h, s)
        std::vector<double> next(num_states, neg_inf);
        for (int h = horizon - 1; h >= 0; --h) {
            for (int s = 0; s < num_states; ++s) {
                double value = neg_inf;
                for (int a = 0; a < num_actions; ++a) {
                    double cont = 0.0;
                    if (h + 1 < horizon) {
                        cont = neg_inf;
                        auto row = transition_row(h, s, a);
                        for (int sp = 0; sp < num_states; ++sp)
                            if (row[sp] > 0.0) cont = std::max(cont, best[sp]);
                    }
                    value = std::max(value, mean_reward.at(h, s, a) + cont);
                }
                next[s] = value;
            }
            std::swap(best, next);
        }
        double result = neg_inf;
        for (int s = 0; s < num_states; ++s)
            if (initial_dist[s] > 0.0) result = std::max(result, best[s]);
        return result;
    }
};

}  // namespace outcome_rl
