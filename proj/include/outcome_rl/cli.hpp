#pragma once

#include <iostream>

#include <CLI11.hpp>

#include "outcome_rl/coverability.hpp"
#include "outcome_rl/harness.hpp"

namespace outcome_rl {

namespace detail {

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return j;
}

/// Policy set from a classes file: explicit "policies" tables and/or the
/// greedy policies of "q_tables".
inline PolicySet policy_set_from_json(const Json& j) {
    PolicySet policies;
    if (j.contains("policies"))
        for (const auto& p : j.at("policies"))
            policies.members.push_back(policy_from_json(p, "classes.policies"));
    if (j.contains("q_tables"))
        for (const auto& q : tables_from_json(j.at("q_tables"), "classes.q_tables"))
            policies.members.push_back(greedy_policy(q));
    if (policies.members.empty())
        throw ConfigError("classes file: expected a 'policies' or 'q_tables' array");
    return policies;
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(std::stoull(item));
    }
    if (seeds.empty()) throw ConfigError("--seeds: expected a comma-separated list");
    return seeds;
}

}  // namespace detail

/// Entry point behind the command-line tool. Returns 0 on success, 1 on
/// validation errors, 2 on runtime failures.
inline int cli_main(std::vector<std::string> args) {
    CLI::App app{"outcome-rl: tabular simulation of outcome-reward and preference-based RL"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run an experiment config and write traces");
    run_cmd->add_option("config", config_path, "experiment config JSON")->required();

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "validate an experiment config");
    validate_cmd->add_option("config", validate_path, "experiment config JSON")->required();

    std::string mdp_path, classes_path;
    auto* cov_cmd = app.add_subcommand("coverability", "coverability of an MDP and policy set");
    cov_cmd->add_option("mdp", mdp_path, "MDP JSON")->required();
    cov_cmd->add_option("classes", classes_path, "policy set or Q-class JSON")->required();

    int sep_d = 6;
    double sep_eps = 1.0 / 3.0;
    long long sep_budget = 0;
    std::string sep_seeds = "0,1,2,3,4,5,6,7,8,9";
    std::string sep_out;
    auto* sep_cmd = app.add_subcommand("separation", "outcome vs process feedback comparison");
    sep_cmd->add_option("--d", sep_d, "packing dimension");
    sep_cmd->add_option("--eps", sep_eps, "packing separation parameter");
    sep_cmd->add_option("--budget", sep_budget, "episode budget (default 2N)");
    sep_cmd->add_option("--seeds", sep_seeds, "comma-separated seed list");
    sep_cmd->add_option("--output", sep_out, "optional output directory for the report");

    std::vector<const char*> argv;
    const std::string program = "outcome_rl";
    argv.push_back(program.c_str());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (*validate_cmd) {
            const ExperimentConfig cfg = parse_experiment_config(detail::load_json_file(validate_path));
            build_experiment(cfg);  // exercises environment and cross-field checks
            std::cout << "ok\n";
            return 0;
        }
        if (*run_cmd) {
            const ExperimentConfig cfg = parse_experiment_config(detail::load_json_file(config_path));
            const SummaryReport report = run_experiment(cfg);
            std::cout << report.to_json().dump(2) << "\n";
            return 0;
        }
        if (*cov_cmd) {
            const TabularMdp mdp = mdp_from_json(detail::load_json_file(mdp_path));
            const PolicySet policies = detail::policy_set_from_json(detail::load_json_file(classes_path));
            const CoverabilityResult cov = coverability_detailed(mdp, policies);
            Json out;
            out["coverability"] = cov.value;
            out["coverability_prime"] = coverability_prime(mdp, policies);
            out["per_layer"] = cov.per_layer;
            out["witnesses"] = cov.witnesses;
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (*sep_cmd) {
            const auto seeds = detail::parse_seed_list(sep_seeds);
            // probe the packing size to default the budget to 2N
            if (sep_budget <= 0) {
                Rng probe(seeds.front());
                sep_budget =
                    2 * static_cast<long long>(sphere_packing(sep_d, sep_eps, 32, probe).size());
            }
            const SeparationOutcome sep = separation_experiment(sep_d, sep_eps, sep_budget, seeds);
            Json out;
            out["num_arms"] = sep.num_arms;
            out["episode_budget"] = sep_budget;
            out["process"] = sep.process.to_json();
            out["outcome"] = sep.outcome.to_json();
            std::cout << out.dump(2) << "\n";
            if (!sep_out.empty()) {
                std::filesystem::create_directories(sep_out);
                write_text_file((std::filesystem::path(sep_out) / "separation.json").string(),
                                out.dump(2) + "\n");
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const Json::exception& e) {  // wrong field types are config errors
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace outcome_rl
