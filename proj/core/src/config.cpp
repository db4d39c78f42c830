#include "pedcross/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pedcross {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

RoadGeometry parse_geometry(const json& j) {
    reject_unknown_keys(j,
                        {"road_width", "lane_count", "vehicle_lane_center_offset",
                         "vehicle_length", "vehicle_width", "walk_speed", "eye_height"},
                        "geometry");
    RoadGeometry g;
    g.road_width = j.value("road_width", g.road_width);
    g.lane_count = j.value("lane_count", g.lane_count);
    g.vehicle_lane_center_offset =
        j.value("vehicle_lane_center_offset", g.vehicle_lane_center_offset);
    g.vehicle_length = j.value("vehicle_length", g.vehicle_length);
    g.vehicle_width = j.value("vehicle_width", g.vehicle_width);
    g.walk_speed = j.value("walk_speed", g.walk_speed);
    g.eye_height = j.value("eye_height", g.eye_height);
    return g;
}

std::vector<Scenario> parse_scenarios(const json& j) {
    std::vector<Scenario> out;
    for (const auto& item : j) {
        reject_unknown_keys(item, {"id", "v0", "d0", "tau0", "training_only"}, "scenarios");
        if (!item.contains("id") || !item.contains("v0") || !item.contains("d0"))
            throw ConfigError("config: each scenario needs id, v0 and d0");
        Scenario s = Scenario::make(item["id"].get<int>(), item["v0"].get<double>(),
                                    item["d0"].get<double>(),
                                    item.value("training_only", false));
        if (item.contains("tau0") &&
            std::abs(item["tau0"].get<double>() - s.tau0) > 1e-9)
            throw ConfigError("config: scenario tau0 must equal d0/v0");
        out.push_back(s);
    }
    if (out.empty()) throw ConfigError("config: scenario list is empty");
    return out;
}

TrainConfig parse_train(const json& j, const TrainConfig& base) {
    reject_unknown_keys(
        j, {"mode", "sigma_v", "sigma_grid", "gamma", "lr", "epsilon_start",
            "epsilon_decrement", "epsilon_min", "replay_capacity", "batch_size",
            "target_sync_interval", "max_episodes", "grad_clip", "hidden1", "hidden2"},
        "train");
    TrainConfig t = base;
    if (j.contains("mode")) t.mode = train_mode_from_string(j["mode"].get<std::string>());
    t.sigma_v = j.value("sigma_v", t.sigma_v);
    if (j.contains("sigma_grid")) {
        if (j["sigma_grid"].is_string())
            t.sigma_grid = parse_grid_spec(j["sigma_grid"].get<std::string>());
        else
            t.sigma_grid = j["sigma_grid"].get<std::vector<double>>();
    }
    t.gamma = j.value("gamma", t.gamma);
    t.lr = j.value("lr", t.lr);
    t.epsilon_start = j.value("epsilon_start", t.epsilon_start);
    t.epsilon_decrement = j.value("epsilon_decrement", t.epsilon_decrement);
    t.epsilon_min = j.value("epsilon_min", t.epsilon_min);
    t.replay_capacity = j.value("replay_capacity", t.replay_capacity);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.target_sync_interval = j.value("target_sync_interval", t.target_sync_interval);
    t.max_episodes = j.value("max_episodes", t.max_episodes);
    t.grad_clip = j.value("grad_clip", t.grad_clip);
    t.hidden1 = j.value("hidden1", t.hidden1);
    t.hidden2 = j.value("hidden2", t.hidden2);
    return t;
}

}  // namespace

ProjectConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    reject_unknown_keys(j, {"geometry", "scenarios", "train", "eval_rollouts", "fit_rollouts"},
                        "top level");

    ProjectConfig cfg;
    if (j.contains("geometry")) cfg.geometry = parse_geometry(j["geometry"]);
    if (j.contains("scenarios")) cfg.scenarios = parse_scenarios(j["scenarios"]);
    if (j.contains("train")) cfg.train = parse_train(j["train"], cfg.train);
    cfg.eval_rollouts = j.value("eval_rollouts", cfg.eval_rollouts);
    cfg.fit_rollouts = j.value("fit_rollouts", cfg.fit_rollouts);

    try {
        validate(cfg.geometry);
        for (const auto& s : cfg.scenarios) validate(s);
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.eval_rollouts < 1 || cfg.fit_rollouts < 1)
        throw ConfigError("config: rollout counts must be >= 1");
    return cfg;
}

std::string train_config_to_json(const TrainConfig& t) {
    json j;
    j["mode"] = to_string(t.mode);
    j["sigma_v"] = t.sigma_v;
    j["sigma_grid"] = t.sigma_grid;
    j["gamma"] = t.gamma;
    j["lr"] = t.lr;
    j["epsilon_start"] = t.epsilon_start;
    j["epsilon_decrement"] = t.epsilon_decrement;
    j["epsilon_min"] = t.epsilon_min;
    j["replay_capacity"] = t.replay_capacity;
    j["batch_size"] = t.batch_size;
    j["target_sync_interval"] = t.target_sync_interval;
    j["max_episodes"] = t.max_episodes;
    j["grad_clip"] = t.grad_clip;
    j["hidden1"] = t.hidden1;
    j["hidden2"] = t.hidden2;
    return j.dump();
}

std::string config_to_json(const ProjectConfig& cfg) {
    json j;
    j["geometry"] = {{"road_width", cfg.geometry.road_width},
                     {"lane_count", cfg.geometry.lane_count},
                     {"vehicle_lane_center_offset", cfg.geometry.vehicle_lane_center_offset},
                     {"vehicle_length", cfg.geometry.vehicle_length},
                     {"vehicle_width", cfg.geometry.vehicle_width},
                     {"walk_speed", cfg.geometry.walk_speed},
                     {"eye_height", cfg.geometry.eye_height}};
    j["scenarios"] = json::array();
    for (const auto& s : cfg.scenarios)
        j["scenarios"].push_back({{"id", s.id},
                                  {"v0", s.v0},
                                  {"d0", s.d0},
                                  {"tau0", s.tau0},
                                  {"training_only", s.training_only}});
    j["train"] = json::parse(train_config_to_json(cfg.train));
    j["eval_rollouts"] = cfg.eval_rollouts;
    j["fit_rollouts"] = cfg.fit_rollouts;
    return j.dump(2);
}

std::vector<double> parse_grid_spec(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) {
        try {
            std::size_t pos = 0;
            parts.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("malformed grid spec '" + spec + "'");
        }
    }
    if (parts.size() == 1) return {parts[0]};
    if (parts.size() != 3) throw ConfigError("grid spec must be 'start:stop:step': " + spec);
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (!(step > 0.0) || stop < start)
        throw ConfigError("grid spec needs stop >= start and step > 0: " + spec);
    std::vector<double> grid;
    const int count = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) grid.push_back(start + i * step);
    return grid;
}

}  // namespace pedcross
