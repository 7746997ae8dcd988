#include "bot/config.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "bot/csv.hpp"
#include "bot/errors.hpp"

namespace bot {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("unknown config key '" + item.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("bad value for config key '") + key + "'");
        }
    }
}

void apply_scenario(const json& s, ScenarioConfig& cfg) {
    check_keys(s,
               {"steps_per_leg", "platform_speed", "d_min", "d_max",
                "bearing_noise_sigma", "process_noise_q", "nominal_range", "range_sigma",
                "v_max", "sample_interval"},
               "scenario");
    read(s, "steps_per_leg", cfg.steps_per_leg);
    read(s, "platform_speed", cfg.platform_speed);
    read(s, "d_min", cfg.d_min);
    read(s, "d_max", cfg.d_max);
    read(s, "bearing_noise_sigma", cfg.bearing_noise_sigma);
    read(s, "process_noise_q", cfg.process_noise_q);
    read(s, "nominal_range", cfg.nominal_range);
    read(s, "range_sigma", cfg.range_sigma);
    read(s, "v_max", cfg.v_max);
    read(s, "sample_interval", cfg.sample_interval);
}

void apply_dqn(const json& d, Hyperparams& hp) {
    check_keys(d,
               {"hidden_sizes", "batch_size", "learning_rate", "grad_clip",
                "ref_update_every", "tau", "epsilon0", "epsilon_min", "epsilon_decay",
                "gamma", "episodes", "replay_capacity"},
               "dqn");
    read(d, "hidden_sizes", hp.hidden_sizes);
    read(d, "batch_size", hp.batch_size);
    read(d, "learning_rate", hp.learning_rate);
    read(d, "grad_clip", hp.grad_clip);
    read(d, "ref_update_every", hp.ref_update_every);
    read(d, "tau", hp.tau);
    read(d, "epsilon0", hp.epsilon0);
    read(d, "epsilon_min", hp.epsilon_min);
    read(d, "epsilon_decay", hp.epsilon_decay);
    read(d, "gamma", hp.gamma);
    read(d, "episodes", hp.episodes);
    read(d, "replay_capacity", hp.replay_capacity);
}

}  // namespace

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    if (path.empty()) return cfg;

    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    check_keys(j, {"scenario", "dqn"}, "config root");
    if (j.contains("scenario")) apply_scenario(j.at("scenario"), cfg.scenario);
    if (j.contains("dqn")) apply_dqn(j.at("dqn"), cfg.dqn);
    return cfg;
}

void print_effective_config(std::ostream& os, const std::string& command,
                            const AppConfig& cfg, const KeyValues& extras) {
    os << "# effective-config\n";
    os << "# command = " << command << "\n";
    const auto& s = cfg.scenario;
    os << "# scenario.steps_per_leg = " << s.steps_per_leg << "\n";
    os << "# scenario.platform_speed = " << fmt_g17(s.platform_speed) << "\n";
    os << "# scenario.d_min = " << fmt_g17(s.d_min) << "\n";
    os << "# scenario.d_max = " << fmt_g17(s.d_max) << "\n";
    os << "# scenario.bearing_noise_sigma = " << fmt_g17(s.bearing_noise_sigma) << "\n";
    os << "# scenario.process_noise_q = " << fmt_g17(s.process_noise_q) << "\n";
    os << "# scenario.nominal_range = " << fmt_g17(s.nominal_range) << "\n";
    os << "# scenario.range_sigma = " << fmt_g17(s.range_sigma) << "\n";
    os << "# scenario.v_max = " << fmt_g17(s.v_max) << "\n";
    os << "# scenario.sample_interval = " << fmt_g17(s.sample_interval) << "\n";
    const auto& d = cfg.dqn;
    os << "# dqn.hidden_sizes = ";
    for (std::size_t i = 0; i < d.hidden_sizes.size(); ++i)
        os << (i ? "," : "") << d.hidden_sizes[i];
    os << "\n";
    os << "# dqn.batch_size = " << d.batch_size << "\n";
    os << "# dqn.learning_rate = " << fmt_g17(d.learning_rate) << "\n";
    os << "# dqn.grad_clip = " << fmt_g17(d.grad_clip) << "\n";
    os << "# dqn.ref_update_every = " << d.ref_update_every << "\n";
    os << "# dqn.tau = " << fmt_g17(d.tau) << "\n";
    os << "# dqn.epsilon0 = " << fmt_g17(d.epsilon0) << "\n";
    os << "# dqn.epsilon_min = " << fmt_g17(d.epsilon_min) << "\n";
    os << "# dqn.epsilon_decay = " << fmt_g17(d.epsilon_decay) << "\n";
    os << "# dqn.gamma = " << fmt_g17(d.gamma) << "\n";
    os << "# dqn.episodes = " << d.episodes << "\n";
    os << "# dqn.replay_capacity = " << d.replay_capacity << "\n";
    for (const auto& [k, v] : extras) os << "# " << command << "." << k << " = " << v << "\n";
}

}  // namespace bot
