#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "outcome_rl/algorithms.hpp"
#include "outcome_rl/function_classes.hpp"
#include "outcome_rl/mdp.hpp"

namespace outcome_rl {

using Json = nlohmann::json;

/// Shortest round-trip decimal form of a double (byte-stable across runs).
inline std::string format_double(double value) {
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    (void)ec;
    return std::string(buffer, ptr);
}

// ---------------------------------------------------------------------------
// Tables and MDPs
// ---------------------------------------------------------------------------

inline Json table_to_json(const StepTable& table) {
    Json layers = Json::array();
    for (int h = 0; h < table.horizon(); ++h) {
        Json states = Json::array();
        for (int s = 0; s < table.num_states(); ++s) {
            Json actions = Json::array();
            for (int a = 0; a < table.num_actions(); ++a) actions.push_back(table.at(h, s, a));
            states.push_back(std::move(actions));
        }
        layers.push_back(std::move(states));
    }
    return layers;
}

inline StepTable table_from_json(const Json& j, const char* where) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(where) + ": expected nested array");
    const int horizon = static_cast<int>(j.size());
    const int num_states = static_cast<int>(j.at(0).size());
    const int num_actions = static_cast<int>(j.at(0).at(0).size());
    StepTable table(horizon, num_states, num_actions);
    for (int h = 0; h < horizon; ++h) {
        if (static_cast<int>(j.at(h).size()) != num_states)
            throw std::invalid_argument(std::string(where) + ": ragged state dimension");
        for (int s = 0; s < num_states; ++s) {
            if (static_cast<int>(j.at(h).at(s).size()) != num_actions)
                throw std::invalid_argument(std::string(where) + ": ragged action dimension");
            for (int a = 0; a < num_actions; ++a)
                table.at(h, s, a) = j.at(h).at(s).at(a).get<double>();
        }
    }
    return table;
}

inline Json mdp_to_json(const TabularMdp& mdp) {
    Json j;
    j["num_states"] = mdp.num_states;
    j["num_actions"] = mdp.num_actions;
    j["horizon"] = mdp.horizon;
    Json transitions = Json::array();
    for (int h = 0; h + 1 < mdp.horizon; ++h) {
        Json states = Json::array();
        for (int s = 0; s < mdp.num_states; ++s) {
            Json actions = Json::array();
            for (int a = 0; a < mdp.num_actions; ++a) {
                auto row = mdp.transition_row(h, s, a);
                actions.push_back(Json(std::vector<double>(row.begin(), row.end())));
            }
            states.push_back(std::move(actions));
        }
        transitions.push_back(std::move(states));
    }
    j["transitions"] = std::move(transitions);
    j["initial_dist"] = mdp.initial_dist;
    j["mean_reward"] = table_to_json(mdp.mean_reward);
    return j;
}

inline TabularMdp mdp_from_json(const Json& j) {
    TabularMdp mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.horizon = j.at("horizon").get<int>();
    mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
    mdp.transitions.assign(static_cast<std::size_t>(std::max(mdp.horizon - 1, 0)) *
                               mdp.num_states * mdp.num_actions * mdp.num_states,
                           0.0);
    const Json& transitions = j.at("transitions");
    if (static_cast<int>(transitions.size()) != std::max(mdp.horizon - 1, 0))
        throw std::invalid_argument("mdp_from_json: transitions layer count mismatch");
    for (int h = 0; h + 1 < mdp.horizon; ++h)
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) {
                const auto probs = transitions.at(h).at(s).at(a).get<std::vector<double>>();
                if (static_cast<int>(probs.size()) != mdp.num_states)
                    throw std::invalid_argument("mdp_from_json: transition row size mismatch");
                auto row = mdp.transition_row(h, s, a);
                std::copy(probs.begin(), probs.end(), row.begin());
            }
    mdp.mean_reward = table_from_json(j.at("mean_reward"), "mdp_from_json.mean_reward");
    mdp.validate();
    return mdp;
}

// ---------------------------------------------------------------------------
// Classes and policies
// ---------------------------------------------------------------------------

inline Json tables_to_json(const std::vector<StepTable>& tables) {
    Json j = Json::array();
    for (const auto& t : tables) j.push_back(table_to_json(t));
    return j;
}

inline std::vector<StepTable> tables_from_json(const Json& j, const char* where) {
    std::vector<StepTable> tables;
    for (const auto& item : j) tables.push_back(table_from_json(item, where));
    return tables;
}

inline Json policy_to_json(const Policy& pi, int horizon, int num_states) {
    Json layers = Json::array();
    for (int h = 0; h < horizon; ++h) {
        Json row = Json::array();
        for (int s = 0; s < num_states; ++s) row.push_back(pi.action(h, s));
        layers.push_back(std::move(row));
    }
    return layers;
}

inline Policy policy_from_json(const Json& j, const char* where) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(where) + ": expected nested array");
    const int horizon = static_cast<int>(j.size());
    const int num_states = static_cast<int>(j.at(0).size());
    std::vector<int> actions;
    actions.reserve(static_cast<std::size_t>(horizon) * num_states);
    for (const auto& row : j) {
        if (static_cast<int>(row.size()) != num_states)
            throw std::invalid_argument(std::string(where) + ": ragged policy table");
        for (const auto& a : row) actions.push_back(a.get<int>());
    }
    return Policy::markov(std::move(actions), horizon, num_states);
}

// ---------------------------------------------------------------------------
// Run traces
// ---------------------------------------------------------------------------

/// Flat per-iteration CSV: t, suboptimality, f_index, r_index, episodes.
inline std::string trace_to_csv(const RunTrace& trace) {
    std::string out = "t,suboptimality,f_index,r_index,episodes\n";
    for (const auto& rec : trace.records) {
        out += std::to_string(rec.t);
        out += ',';
        out += format_double(rec.suboptimality);
        out += ',';
        out += std::to_string(rec.f_index);
        out += ',';
        out += std::to_string(rec.r_index);
        out += ',';
        out += std::to_string(rec.episodes);
        out += '\n';
    }
    return out;
}

inline Json trace_to_json(const RunTrace& trace) {
    Json j;
    Json records = Json::array();
    for (const auto& rec : trace.records) {
        records.push_back(Json{{"t", rec.t},
                               {"suboptimality", rec.suboptimality},
                               {"f_index", rec.f_index},
                               {"r_index", rec.r_index},
                               {"episodes", rec.episodes}});
    }
    j["records"] = std::move(records);
    j["output_suboptimality"] = trace.output_suboptimality;
    j["total_episodes"] = trace.total_episodes;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace outcome_rl
