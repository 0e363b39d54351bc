#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "outcome_rl/algorithms.hpp"
#include "outcome_rl/coverability.hpp"
#include "outcome_rl/environments.hpp"
#include "outcome_rl/serialization.hpp"

namespace outcome_rl {

/// Config-level failure; the message lists offending fields by path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExperimentConfig {
    Json environment;
    Json classes;
    std::string algorithm;
    AlgoConfig algo;
    Json ref_policy_json;  // null, "action0", or explicit table
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
};

namespace detail {

inline void require_field(const Json& j, const char* key, const std::string& path,
                          std::vector<std::string>& errors) {
    if (!j.contains(key)) errors.push_back(path + "." + key + ": missing");
}

inline double get_or(const Json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline int get_or(const Json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

inline std::uint64_t get_seed(const Json& j, const char* key) {
    return j.contains(key) ? j.at(key).get<std::uint64_t>() : 0;
}

}  // namespace detail

/// Parses and validates an experiment config, reporting every offending
/// field path at once.
inline ExperimentConfig parse_experiment_config(const Json& j) {
    std::vector<std::string> errors;
    ExperimentConfig cfg;

    if (!j.contains("environment") || !j.at("environment").is_object()) {
        errors.push_back("environment: missing or not an object");
    } else {
        cfg.environment = j.at("environment");
        detail::require_field(cfg.environment, "name", "environment", errors);
        if (cfg.environment.contains("name")) {
            const std::string name = cfg.environment.at("name").get<std::string>();
            if (name != "hard_case" && name != "deterministic_chain" && name != "random_tabular" &&
                name != "relu_family")
                errors.push_back("environment.name: unknown environment '" + name + "'");
            if (name == "deterministic_chain" && detail::get_or(cfg.environment, "length", 5) < 2)
                errors.push_back("environment.length: must be >= 2");
            if (name == "relu_family") {
                if (detail::get_or(cfg.environment, "dimension", 1) < 1)
                    errors.push_back("environment.dimension: must be >= 1");
                const double eps = detail::get_or(cfg.environment, "epsilon", 1.0 / 3.0);
                if (!(eps > 0.0 && eps < 1.0)) errors.push_back("environment.epsilon: must be in (0, 1)");
            }
            if (name == "random_tabular") {
                if (detail::get_or(cfg.environment, "num_states", 1) < 1)
                    errors.push_back("environment.num_states: must be >= 1");
                if (detail::get_or(cfg.environment, "num_actions", 1) < 1)
                    errors.push_back("environment.num_actions: must be >= 1");
                if (detail::get_or(cfg.environment, "horizon", 1) < 1)
                    errors.push_back("environment.horizon: must be >= 1");
            }
        }
    }

    if (!j.contains("classes") || !j.at("classes").is_object()) {
        errors.push_back("classes: missing or not an object");
    } else {
        cfg.classes = j.at("classes");
        detail::require_field(cfg.classes, "generator", "classes", errors);
        if (cfg.classes.contains("generator")) {
            const std::string gen = cfg.classes.at("generator").get<std::string>();
            if (gen != "hard_case" && gen != "perturbed_optimal" && gen != "random_tables" &&
                gen != "relu_candidates")
                errors.push_back("classes.generator: unknown generator '" + gen + "'");
            if ((gen == "perturbed_optimal" || gen == "random_tables") &&
                detail::get_or(cfg.classes, "count", 8) < 1)
                errors.push_back("classes.count: must be >= 1");
        }
    }

    if (!j.contains("algorithm") || !j.at("algorithm").is_object()) {
        errors.push_back("algorithm: missing or not an object");
    } else {
        const Json& alg = j.at("algorithm");
        detail::require_field(alg, "name", "algorithm", errors);
        if (alg.contains("name")) {
            cfg.algorithm = alg.at("name").get<std::string>();
            if (cfg.algorithm != "algorithm1" && cfg.algorithm != "algorithm2" &&
                cfg.algorithm != "algorithm3" && cfg.algorithm != "fitted_baseline" &&
                cfg.algorithm != "process_baseline")
                errors.push_back("algorithm.name: unknown algorithm '" + cfg.algorithm + "'");
        }
        if (!alg.contains("iterations"))
            errors.push_back("algorithm.iterations: missing");
        else if (alg.at("iterations").get<int>() < 1)
            errors.push_back("algorithm.iterations: must be >= 1");
        cfg.algo.iterations = detail::get_or(alg, "iterations", 1);
        cfg.algo.lambda = detail::get_or(alg, "lambda", 1.0);
        if (cfg.algo.lambda < 0.0) errors.push_back("algorithm.lambda: must be >= 0");
        cfg.algo.beta_conf = detail::get_or(alg, "beta_conf", 1.0);
        if (cfg.algo.beta_conf < 0.0) errors.push_back("algorithm.beta_conf: must be >= 0");
        if (cfg.algorithm == "algorithm3") {
            if (!alg.contains("beta_btl"))
                errors.push_back("algorithm.beta_btl: required for algorithm3");
            else if (!(alg.at("beta_btl").get<double>() > 0.0))
                errors.push_back("algorithm.beta_btl: must be > 0");
        }
        cfg.algo.beta_btl = detail::get_or(alg, "beta_btl", 1.0);
        if (alg.contains("ref_policy")) cfg.ref_policy_json = alg.at("ref_policy");
    }

    if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty()) {
        errors.push_back("seeds: missing or empty array");
    } else {
        for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    }

    if (!j.contains("output_dir") || !j.at("output_dir").is_string() ||
        j.at("output_dir").get<std::string>().empty())
        errors.push_back("output_dir: missing or empty");
    else
        cfg.output_dir = j.at("output_dir").get<std::string>();

    // cross-field constraints that do not need the built environment
    if (cfg.classes.contains("generator") && cfg.environment.contains("name")) {
        const std::string gen = cfg.classes.at("generator").get<std::string>();
        const std::string env = cfg.environment.at("name").get<std::string>();
        if (gen == "hard_case" && env != "hard_case")
            errors.push_back("classes.generator: hard_case classes require the hard_case environment");
        if (gen == "relu_candidates" && env != "relu_family")
            errors.push_back("classes.generator: relu_candidates require the relu_family environment");
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Building environments and classes
// ---------------------------------------------------------------------------

struct BuiltExperiment {
    TabularMdp mdp;
    QClass f;
    RewardClass r;
    ComparatorClass g;
    bool has_reward_class = false;
};

inline TabularMdp build_environment_from_json(const Json& env) {
    const std::string name = env.at("name").get<std::string>();
    if (name == "hard_case") return build_hard_case().mdp;
    if (name == "deterministic_chain")
        return build_deterministic_chain(detail::get_or(env, "length", 5),
                                         detail::get_or(env, "num_actions", 2),
                                         detail::get_seed(env, "seed"));
    if (name == "random_tabular") {
        RandomMdpSpec spec;
        spec.num_states = detail::get_or(env, "num_states", spec.num_states);
        spec.num_actions = detail::get_or(env, "num_actions", spec.num_actions);
        spec.horizon = detail::get_or(env, "horizon", spec.horizon);
        spec.reward_scale = detail::get_or(env, "reward_scale", spec.reward_scale);
        spec.seed = detail::get_seed(env, "seed");
        return build_random_tabular(spec);
    }
    if (name == "relu_family") {
        Rng rng(detail::get_seed(env, "seed"));
        const double eps = detail::get_or(env, "epsilon", 1.0 / 3.0);
        auto thetas = sphere_packing(detail::get_or(env, "dimension", 2), eps,
                                     detail::get_or(env, "max_n", 32), rng);
        const int hidden = detail::get_or(env, "hidden_index", 0);
        if (hidden < 0 || hidden >= static_cast<int>(thetas.size()))
            throw ConfigError("environment.hidden_index: outside the packed set (N = " +
                              std::to_string(thetas.size()) + ")");
        return build_relu_family(std::move(thetas), eps, hidden).mdp;
    }
    throw ConfigError("environment.name: unknown environment '" + name + "'");
}

inline BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    BuiltExperiment built;
    const std::string env_name = cfg.environment.at("name").get<std::string>();
    const std::string gen = cfg.classes.at("generator").get<std::string>();

    if (gen == "hard_case") {
        HardCaseBundle bundle = build_hard_case();
        built.mdp = std::move(bundle.mdp);
        built.f = std::move(bundle.q_class);
        built.r = std::move(bundle.r_class);
        built.g = std::move(bundle.g_class);
        built.has_reward_class = true;
    } else if (gen == "relu_candidates") {
        Rng rng(detail::get_seed(cfg.environment, "seed"));
        const double eps = detail::get_or(cfg.environment, "epsilon", 1.0 / 3.0);
        auto thetas = sphere_packing(detail::get_or(cfg.environment, "dimension", 2), eps,
                                     detail::get_or(cfg.environment, "max_n", 32), rng);
        const int hidden = detail::get_or(cfg.environment, "hidden_index", 0);
        if (hidden < 0 || hidden >= static_cast<int>(thetas.size()))
            throw ConfigError("environment.hidden_index: outside the packed set (N = " +
                              std::to_string(thetas.size()) + ")");
        ReluFamily family = build_relu_family(std::move(thetas), eps, hidden);
        ReluCandidates classes = relu_candidate_classes(family);
        built.mdp = std::move(family.mdp);
        built.f = std::move(classes.q_class);
        built.r = std::move(classes.r_class);
        built.g = std::move(classes.g_class);
        built.has_reward_class = true;
    } else {
        built.mdp = build_environment_from_json(cfg.environment);
        const std::uint64_t seed = detail::get_seed(cfg.classes, "seed");
        const int count = detail::get_or(cfg.classes, "count", 8);
        if (gen == "perturbed_optimal") {
            const double noise = detail::get_or(cfg.classes, "noise_scale", 0.1);
            built.f = perturbed_optimal_q_class(built.mdp, count, noise, seed);
            built.r = perturbed_optimal_r_class(
                built.mdp, detail::get_or(cfg.classes, "r_count", count), noise, seed);
        } else {  // random_tables
            built.f = random_q_class(built.mdp, count, seed);
            built.r.members.push_back(built.mdp.mean_reward);
        }
        built.g = closure_comparators(built.mdp, built.f, built.r);
        built.has_reward_class = true;
    }

    if (cfg.algorithm == "algorithm2" && !built.mdp.is_deterministic())
        throw ConfigError("algorithm.name: algorithm2 requires a deterministic environment");
    if (cfg.algorithm != "algorithm2") {
        // fixed-start algorithms
        bool degenerate = false;
        for (double p : built.mdp.initial_dist) degenerate = degenerate || std::abs(p - 1.0) <= kProbTol;
        if (!degenerate)
            throw ConfigError("environment: " + cfg.algorithm +
                              " requires a degenerate initial distribution");
    }
    if (!cfg.ref_policy_json.is_null() && !cfg.ref_policy_json.is_string()) {
        Policy ref = policy_from_json(cfg.ref_policy_json, "algorithm.ref_policy");
        (void)ref;
    } else if (cfg.ref_policy_json.is_string() &&
               cfg.ref_policy_json.get<std::string>() != "action0") {
        throw ConfigError("algorithm.ref_policy: expected \"action0\" or an explicit table");
    }
    (void)env_name;
    return built;
}

inline AlgoConfig algo_config_for_seed(const ExperimentConfig& cfg, const BuiltExperiment& built,
                                       std::uint64_t seed) {
    AlgoConfig algo = cfg.algo;
    algo.seed = seed;
    if (!cfg.ref_policy_json.is_null() && !cfg.ref_policy_json.is_string())
        algo.ref_policy = policy_from_json(cfg.ref_policy_json, "algorithm.ref_policy");
    else
        algo.ref_policy = Policy::constant(0, built.mdp.horizon, built.mdp.num_states);
    return algo;
}

inline RunTrace run_single(const BuiltExperiment& built, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
    const AlgoConfig algo = algo_config_for_seed(cfg, built, seed);
    if (cfg.algorithm == "algorithm1")
        return run_algorithm1(built.mdp, built.f, built.r, built.g, algo);
    if (cfg.algorithm == "algorithm2") return run_algorithm2(built.mdp, built.f, algo);
    if (cfg.algorithm == "algorithm3")
        return run_algorithm3(built.mdp, built.f, built.r, built.g, algo);
    if (cfg.algorithm == "fitted_baseline")
        return run_fitted_reward_baseline(built.mdp, built.f, built.r, built.g, algo);
    if (cfg.algorithm == "process_baseline")
        return run_process_reward_baseline(built.mdp, built.f, built.g, algo);
    throw ConfigError("algorithm.name: unknown algorithm '" + cfg.algorithm + "'");
}

// ---------------------------------------------------------------------------
// Summaries
// ---------------------------------------------------------------------------

struct SeedResult {
    std::uint64_t seed = 0;
    double final_suboptimality = 0.0;
    long long episodes = 0;
    long long episodes_to_target = -1;  // set by the separation experiment
};

struct SummaryReport {
    std::string algorithm;
    std::vector<SeedResult> per_seed;
    double mean_final_suboptimality = 0.0;
    double stderr_final_suboptimality = 0.0;
    std::vector<double> mean_curve;  // per-iteration mean suboptimality
    long long total_episodes = 0;

    Json to_json() const {
        Json j;
        j["algorithm"] = algorithm;
        Json seeds = Json::array();
        for (const auto& s : per_seed)
            seeds.push_back(Json{{"seed", s.seed},
                                 {"final_suboptimality", s.final_suboptimality},
                                 {"episodes", s.episodes},
                                 {"episodes_to_target", s.episodes_to_target}});
        j["per_seed"] = std::move(seeds);
        j["mean_final_suboptimality"] = mean_final_suboptimality;
        j["stderr_final_suboptimality"] = stderr_final_suboptimality;
        j["mean_curve"] = mean_curve;
        j["total_episodes"] = total_episodes;
        return j;
    }
};

namespace detail {

inline int worker_count(std::size_t jobs) {
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("OUTCOME_RL_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) workers = parsed;
    }
    workers = std::max(workers, 1);
    return static_cast<int>(std::min<std::size_t>(workers, jobs));
}

inline SummaryReport summarize(const std::string& algorithm,
                               const std::vector<std::uint64_t>& seeds,
                               const std::vector<RunTrace>& traces) {
    SummaryReport report;
    report.algorithm = algorithm;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        SeedResult res;
        res.seed = seeds[i];
        res.final_suboptimality = traces[i].output_suboptimality;
        res.episodes = traces[i].total_episodes;
        report.per_seed.push_back(res);
        report.total_episodes += res.episodes;
        sum += res.final_suboptimality;
        sum_sq += res.final_suboptimality * res.final_suboptimality;
    }
    const double n = static_cast<double>(traces.size());
    report.mean_final_suboptimality = sum / n;
    if (traces.size() > 1) {
        const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
        report.stderr_final_suboptimality = std::sqrt(var / n);
    }
    if (!traces.empty()) {
        const std::size_t iters = traces.front().records.size();
        report.mean_curve.assign(iters, 0.0);
        for (const auto& trace : traces)
            for (std::size_t k = 0; k < iters; ++k)
                report.mean_curve[k] += trace.records[k].suboptimality / n;
    }
    return report;
}

}  // namespace detail

/// Builds the environment and classes once, runs every seed (in parallel up
/// to OUTCOME_RL_THREADS workers), writes trace_<i>.csv per seed plus
/// summary.json under output_dir, and returns the summary. Completed traces
/// are flushed even when a later seed fails.
inline SummaryReport run_experiment(const ExperimentConfig& cfg) {
    const BuiltExperiment built = build_experiment(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<RunTrace> traces(cfg.seeds.size());
    std::vector<char> done(cfg.seeds.size(), 0);
    std::vector<std::string> failures(cfg.seeds.size());
    std::atomic<std::size_t> next{0};
    const int workers = detail::worker_count(cfg.seeds.size());
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cfg.seeds.size()) return;
            try {
                traces[i] = run_single(built, cfg, cfg.seeds[i]);
                done[i] = 1;
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    char name[32];
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (!done[i]) continue;
        std::snprintf(name, sizeof(name), "trace_%03zu.csv", i);
        write_text_file((std::filesystem::path(cfg.output_dir) / name).string(),
                        trace_to_csv(traces[i]));
    }
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
        if (!done[i])
            throw std::runtime_error("seed " + std::to_string(cfg.seeds[i]) +
                                     " failed: " + failures[i]);

    SummaryReport report = detail::summarize(cfg.algorithm, cfg.seeds, traces);
    write_text_file((std::filesystem::path(cfg.output_dir) / "summary.json").string(),
                    report.to_json().dump(2) + "\n");
    return report;
}

// ---------------------------------------------------------------------------
// Outcome vs process separation experiment
// ---------------------------------------------------------------------------

struct SeparationOutcome {
    int num_arms = 0;
    SummaryReport process;
    SummaryReport outcome;
};

namespace detail {

/// Episodes consumed up to the start of the final stretch of records whose
/// suboptimality stays at or below the target; -1 if the last record misses.
inline long long episodes_to_target(const std::vector<IterationRecord>& records, double target) {
    if (records.empty() || records.back().suboptimality > target) return -1;
    std::size_t first_good = records.size() - 1;
    while (first_good > 0 && records[first_good - 1].suboptimality <= target) --first_good;
    long long episodes = 0;
    for (std::size_t k = 0; k <= first_good; ++k) episodes += records[k].episodes;
    return episodes;
}

}  // namespace detail

/// Runs the process-reward optimism baseline and a round-robin outcome
/// learner on per-seed instances of the ReLU family, with the same episode
/// budget, and reports episodes-to-0.1-optimality for both.
inline SeparationOutcome separation_experiment(int d, double eps, long long episode_budget,
                                               const std::vector<std::uint64_t>& seeds,
                                               int max_n = 32) {
    if (seeds.empty()) throw std::invalid_argument("separation_experiment: no seeds");
    SeparationOutcome result;
    result.process.algorithm = "process_baseline";
    result.outcome.algorithm = "outcome_round_robin";
    constexpr double kTarget = 0.1;

    double proc_sum = 0.0, proc_sq = 0.0, out_sum = 0.0, out_sq = 0.0;
    for (std::uint64_t seed : seeds) {
        Rng build_rng(seed);
        auto thetas = sphere_packing(d, eps, max_n, build_rng);
        const int n = static_cast<int>(thetas.size());
        if (n < 2) throw std::runtime_error("separation_experiment: packing produced < 2 arms");
        result.num_arms = n;
        const int hidden = build_rng.uniform_int(n);
        ReluFamily family = build_relu_family(std::move(thetas), eps, hidden);
        const ReluCandidates classes = relu_candidate_classes(family);
        const ValueTable q_star = optimal_q(family.mdp);
        const double v_star = q_star.state_max(0, 0);

        // process-feedback side: optimism over the candidate class
        AlgoConfig algo;
        algo.lambda = 1.0;
        algo.iterations = static_cast<int>(episode_budget / family.mdp.horizon);
        algo.seed = seed;
        RunTrace trace =
            run_process_reward_baseline(family.mdp, classes.q_class, classes.g_class, algo);
        SeedResult proc;
        proc.seed = seed;
        proc.final_suboptimality = trace.records.back().suboptimality;
        proc.episodes = trace.total_episodes;
        proc.episodes_to_target = detail::episodes_to_target(trace.records, kTarget);
        result.process.per_seed.push_back(proc);
        result.process.total_episodes += proc.episodes;
        proc_sum += proc.final_suboptimality;
        proc_sq += proc.final_suboptimality * proc.final_suboptimality;

        // outcome-feedback side: round-robin arms, recommend the empirical
        // mean argmax (lowest index on ties)
        Rng rng(seed);
        std::vector<Policy> arm_policy;
        std::vector<double> arm_value(n);
        for (int arm = 0; arm < n; ++arm) {
            std::vector<int> actions(
                static_cast<std::size_t>(family.mdp.horizon) * family.mdp.num_states, 0);
            for (int s = 0; s < family.mdp.num_states; ++s) actions[s] = arm;
            arm_policy.push_back(
                Policy::markov(std::move(actions), family.mdp.horizon, family.mdp.num_states));
            arm_value[arm] = policy_value_at(family.mdp, arm_policy.back(), 0);
        }
        std::vector<double> sums(n, 0.0);
        std::vector<int> counts(n, 0);
        std::vector<IterationRecord> records;
        for (long long e = 0; e < episode_budget; ++e) {
            const int arm = static_cast<int>(e % n);
            Trajectory tau = sample_trajectory_from(family.mdp, arm_policy[arm], 0, rng);
            sums[arm] += sample_outcome_reward(family.mdp, tau, rng);
            counts[arm] += 1;
            int best = -1;
            for (int i = 0; i < n; ++i) {
                if (counts[i] == 0) continue;
                if (best < 0 || sums[i] / counts[i] > sums[best] / counts[best]) best = i;
            }
            records.push_back({static_cast<int>(e + 1), best, -1, v_star - arm_value[best], 1});
        }
        SeedResult out;
        out.seed = seed;
        out.final_suboptimality = records.back().suboptimality;
        out.episodes = episode_budget;
        out.episodes_to_target = detail::episodes_to_target(records, kTarget);
        result.outcome.per_seed.push_back(out);
        result.outcome.total_episodes += out.episodes;
        out_sum += out.final_suboptimality;
        out_sq += out.final_suboptimality * out.final_suboptimality;
    }

    const double n = static_cast<double>(seeds.size());
    result.process.mean_final_suboptimality = proc_sum / n;
    result.outcome.mean_final_suboptimality = out_sum / n;
    if (seeds.size() > 1) {
        result.process.stderr_final_suboptimality =
            std::sqrt(std::max(0.0, (proc_sq - proc_sum * proc_sum / n) / (n - 1.0)) / n);
        result.outcome.stderr_final_suboptimality =
            std::sqrt(std::max(0.0, (out_sq - out_sum * out_sum / n) / (n - 1.0)) / n);
    }
    return result;
}

}  // namespace outcome_rl
