#include "pimbrl/exp/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>

#include "pimbrl/util/errors.hpp"

namespace pimbrl::exp {

using nlohmann::json;

std::string to_string(Algo a) {
    switch (a) {
        case Algo::mfrl: return "mfrl";
        case Algo::mbrl: return "mbrl";
        case Algo::pimbrl: return "pimbrl";
    }
    throw std::invalid_argument("unknown Algo");
}

Algo algo_from_string(const std::string& s) {
    if (s == "mfrl") return Algo::mfrl;
    if (s == "mbrl") return Algo::mbrl;
    if (s == "pimbrl") return Algo::pimbrl;
    throw std::invalid_argument("unknown algorithm: " + s);
}

ExperimentConfig default_config(env::EnvId id, Algo algo) {
    ExperimentConfig c;
    c.env_id = id;
    c.algo = algo;
    switch (id) {
        case env::EnvId::cartpole:
            c.lambda_gate = 1e-4;
            c.rollout_length = 200;  // full episode length
            c.n_s_m = 800;
            c.n_s_r = 1000;
            c.n_intermediate = 1;
            c.eval_every = 500;
            break;
        case env::EnvId::pendulum:
            c.lambda_gate = 1e-2;
            c.rollout_length = 200;
            c.n_s_m = 6000;
            c.n_s_r = 12000;
            c.n_intermediate = 1;
            c.eval_every = 500;
            break;
        case env::EnvId::burgers:
            c.lambda_gate = 1e-2;
            c.rollout_length = 1;
            c.n_s_m = 120;
            c.n_s_r = 120;
            c.n_intermediate = 10;
            c.eval_every = 500;
            break;
        case env::EnvId::ks:
            c.gamma = 0.977;
            c.lambda_gate = 1e-2;
            c.rollout_length = 3;
            c.n_s_m = 6000;
            c.n_s_r = 12000;
            c.n_intermediate = 10;
            c.eval_every = 5000;
            c.fine_tune_threshold = -55.0;
            break;
    }
    return c;
}

void validate(const ExperimentConfig& cfg) {
    std::vector<std::string> bad;
    auto require = [&](bool ok, const std::string& msg) {
        if (!ok) bad.push_back(msg);
    };
    require(cfg.gamma > 0.0 && cfg.gamma <= 1.0, "agent.gamma must lie in (0, 1]");
    require(cfg.rho >= 0.0 && cfg.rho <= 1.0, "agent.rho must lie in [0, 1]");
    require(cfg.policy_delay >= 1, "agent.policy_delay must be >= 1");
    require(cfg.i_rl >= 1, "agent.i_rl must be >= 1");
    require(cfg.batch >= 1, "agent.batch must be >= 1");
    require(cfg.lr > 0.0, "agent.lr must be positive");
    require(cfg.explore_noise >= 0.0, "agent.explore_noise must be >= 0");
    require(cfg.target_noise >= 0.0, "agent.target_noise must be >= 0");
    require(cfg.noise_clip >= 0.0, "agent.noise_clip must be >= 0");
    require(cfg.hidden >= 1, "agent.hidden must be >= 1");
    require(cfg.lambda_gate >= 0.0, "model.lambda must be >= 0");
    require(cfg.rollout_length >= 0, "model.rollout_length must be >= 0");
    require(cfg.n_s_m >= 0, "model.n_s_m must be >= 0");
    require(cfg.n_s_r >= 0, "model.n_s_r must be >= 0");
    require(cfg.n_intermediate >= 1, "model.n_intermediate must be >= 1");
    require(cfg.model_batch >= 1, "model.batch must be >= 1");
    require(cfg.model_lr > 0.0, "model.lr must be positive");
    require(cfg.model_updates_per_cycle >= 0, "model.updates_per_cycle must be >= 0");
    require(cfg.physics_updates_per_cycle >= 0,
            "model.physics_updates_per_cycle must be >= 0");
    require(cfg.rollout_batch >= 1, "model.rollout_batch must be >= 1");
    require(cfg.gate_window >= 1, "model.gate_window must be >= 1");
    require(cfg.latent_width >= 1, "model.latent_width must be >= 1");
    require(cfg.total_steps >= 0, "loop.total_steps must be >= 0");
    require(cfg.update_every >= 1, "loop.update_every must be >= 1");
    require(cfg.update_after >= 0, "loop.update_after must be >= 0");
    require(cfg.start_steps >= 0, "loop.start_steps must be >= 0");
    require(cfg.eval_every >= 1, "loop.eval_every must be >= 1");
    require(cfg.eval_episodes >= 1, "loop.eval_episodes must be >= 1");
    require(cfg.real_capacity >= 1, "loop.real_capacity must be >= 1");
    require(cfg.fake_capacity >= 1, "loop.fake_capacity must be >= 1");
    require(cfg.real_fraction < 0.0 ||
                (cfg.real_fraction >= 0.0 && cfg.real_fraction <= 1.0),
            "loop.real_fraction must be negative (uniform) or in [0, 1]");
    if (!bad.empty()) throw ConfigError(std::move(bad));
}

namespace {

void apply_section(const json& section, const std::string& name, ExperimentConfig& cfg,
                   std::vector<std::string>& bad) {
    static const std::set<std::string> env_keys = {"id", "ks_bank_seed", "ks_bank_size"};
    static const std::set<std::string> agent_keys = {
        "gamma", "rho",          "policy_delay", "i_rl",       "batch",
        "lr",    "explore_noise", "target_noise", "noise_clip", "hidden"};
    static const std::set<std::string> model_keys = {
        "lambda",        "rollout_length",    "n_s_m",
        "n_s_r",         "n_intermediate",    "batch",
        "lr",            "updates_per_cycle", "physics_updates_per_cycle",
        "rollout_batch", "gate_window",       "latent_width",
        "dense_hidden",  "decoder_hidden",    "residual_head"};
    static const std::set<std::string> loop_keys = {
        "algo",          "seed",          "total_steps",   "update_every",
        "update_after",  "start_steps",   "eval_every",    "eval_episodes",
        "fine_tune_threshold", "real_capacity", "fake_capacity", "real_fraction",
        "dump_trajectories",   "out_dir"};

    const std::set<std::string>* known = nullptr;
    if (name == "env") known = &env_keys;
    else if (name == "agent") known = &agent_keys;
    else if (name == "model") known = &model_keys;
    else known = &loop_keys;

    for (const auto& [key, value] : section.items()) {
        if (!known->contains(key)) {
            bad.push_back("unknown key " + name + "." + key);
            continue;
        }
        try {
            if (name == "env") {
                if (key == "id") cfg.env_id = env::env_id_from_string(value.get<std::string>());
                else if (key == "ks_bank_seed") cfg.ks_bank_seed = value.get<std::uint64_t>();
                else if (key == "ks_bank_size") cfg.ks_bank_size = value.get<int>();
            } else if (name == "agent") {
                if (key == "gamma") cfg.gamma = value.get<double>();
                else if (key == "rho") cfg.rho = value.get<double>();
                else if (key == "policy_delay") cfg.policy_delay = value.get<int>();
                else if (key == "i_rl") cfg.i_rl = value.get<int>();
                else if (key == "batch") cfg.batch = value.get<int>();
                else if (key == "lr") cfg.lr = value.get<double>();
                else if (key == "explore_noise") cfg.explore_noise = value.get<double>();
                else if (key == "target_noise") cfg.target_noise = value.get<double>();
                else if (key == "noise_clip") cfg.noise_clip = value.get<double>();
                else if (key == "hidden") cfg.hidden = value.get<int>();
            } else if (name == "model") {
                if (key == "lambda") cfg.lambda_gate = value.get<double>();
                else if (key == "rollout_length") cfg.rollout_length = value.get<int>();
                else if (key == "n_s_m") cfg.n_s_m = value.get<long>();
                else if (key == "n_s_r") cfg.n_s_r = value.get<long>();
                else if (key == "n_intermediate") cfg.n_intermediate = value.get<int>();
                else if (key == "batch") cfg.model_batch = value.get<int>();
                else if (key == "lr") cfg.model_lr = value.get<double>();
                else if (key == "updates_per_cycle") cfg.model_updates_per_cycle = value.get<int>();
                else if (key == "physics_updates_per_cycle")
                    cfg.physics_updates_per_cycle = value.get<int>();
                else if (key == "rollout_batch") cfg.rollout_batch = value.get<int>();
                else if (key == "gate_window") cfg.gate_window = value.get<int>();
                else if (key == "latent_width") cfg.latent_width = value.get<int>();
                else if (key == "dense_hidden") cfg.dense_hidden = value.get<int>();
                else if (key == "decoder_hidden") cfg.decoder_hidden = value.get<int>();
                else if (key == "residual_head") cfg.residual_head = value.get<bool>();
            } else {
                if (key == "algo") cfg.algo = algo_from_string(value.get<std::string>());
                else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
                else if (key == "total_steps") cfg.total_steps = value.get<long>();
                else if (key == "update_every") cfg.update_every = value.get<int>();
                else if (key == "update_after") cfg.update_after = value.get<int>();
                else if (key == "start_steps") cfg.start_steps = value.get<int>();
                else if (key == "eval_every") cfg.eval_every = value.get<int>();
                else if (key == "eval_episodes") cfg.eval_episodes = value.get<int>();
                else if (key == "fine_tune_threshold") {
                    if (value.is_null()) cfg.fine_tune_threshold.reset();
                    else cfg.fine_tune_threshold = value.get<double>();
                } else if (key == "real_capacity")
                    cfg.real_capacity = value.get<std::size_t>();
                else if (key == "fake_capacity") cfg.fake_capacity = value.get<std::size_t>();
                else if (key == "real_fraction") cfg.real_fraction = value.get<double>();
                else if (key == "dump_trajectories") cfg.dump_trajectories = value.get<bool>();
                else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
            }
        } catch (const json::exception& e) {
            bad.push_back("bad value for " + name + "." + key + ": " + e.what());
        }
    }
}

void apply_document(const json& doc, ExperimentConfig& cfg, std::vector<std::string>& bad) {
    static const std::set<std::string> sections = {"env", "agent", "model", "loop"};
    for (const auto& [key, value] : doc.items()) {
        if (!sections.contains(key)) {
            bad.push_back("unknown section " + key);
            continue;
        }
        if (!value.is_object()) {
            bad.push_back("section " + key + " must be an object");
            continue;
        }
        apply_section(value, key, cfg, bad);
    }
}

std::optional<env::EnvId> peek_env(const json& doc) {
    if (doc.contains("env") && doc["env"].is_object() && doc["env"].contains("id")) {
        return env::env_id_from_string(doc["env"]["id"].get<std::string>());
    }
    return std::nullopt;
}

std::optional<Algo> peek_algo(const json& doc) {
    if (doc.contains("loop") && doc["loop"].is_object() && doc["loop"].contains("algo")) {
        return algo_from_string(doc["loop"]["algo"].get<std::string>());
    }
    return std::nullopt;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& file,
                             const std::string& overrides_json,
                             std::optional<env::EnvId> fallback_env) {
    std::vector<std::string> bad;
    json file_doc = json::object();
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw ConfigError({"cannot open config file " + file.string()});
        try {
            file_doc = json::parse(is);
        } catch (const json::exception& e) {
            throw ConfigError({std::string("config parse error: ") + e.what()});
        }
    }
    json over_doc = json::object();
    if (!overrides_json.empty()) {
        try {
            over_doc = json::parse(overrides_json);
        } catch (const json::exception& e) {
            throw ConfigError({std::string("override parse error: ") + e.what()});
        }
    }

    // environment and algorithm select the default row, so resolve them first
    std::optional<env::EnvId> id = peek_env(over_doc);
    if (!id) id = peek_env(file_doc);
    if (!id) id = fallback_env;
    if (!id) throw ConfigError({"missing env.id (no environment selected)"});
    std::optional<Algo> algo = peek_algo(over_doc);
    if (!algo) algo = peek_algo(file_doc);

    ExperimentConfig cfg = default_config(*id, algo.value_or(Algo::pimbrl));
    apply_document(file_doc, cfg, bad);
    apply_document(over_doc, cfg, bad);
    if (!bad.empty()) throw ConfigError(std::move(bad));
    validate(cfg);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json doc;
    doc["env"] = {{"id", env::to_string(cfg.env_id)},
                  {"ks_bank_seed", cfg.ks_bank_seed},
                  {"ks_bank_size", cfg.ks_bank_size}};
    doc["agent"] = {{"gamma", cfg.gamma},
                    {"rho", cfg.rho},
                    {"policy_delay", cfg.policy_delay},
                    {"i_rl", cfg.i_rl},
                    {"batch", cfg.batch},
                    {"lr", cfg.lr},
                    {"explore_noise", cfg.explore_noise},
                    {"target_noise", cfg.target_noise},
                    {"noise_clip", cfg.noise_clip},
                    {"hidden", cfg.hidden}};
    doc["model"] = {{"lambda", cfg.lambda_gate},
                    {"rollout_length", cfg.rollout_length},
                    {"n_s_m", cfg.n_s_m},
                    {"n_s_r", cfg.n_s_r},
                    {"n_intermediate", cfg.n_intermediate},
                    {"batch", cfg.model_batch},
                    {"lr", cfg.model_lr},
                    {"updates_per_cycle", cfg.model_updates_per_cycle},
                    {"physics_updates_per_cycle", cfg.physics_updates_per_cycle},
                    {"rollout_batch", cfg.rollout_batch},
                    {"gate_window", cfg.gate_window},
                    {"latent_width", cfg.latent_width},
                    {"dense_hidden", cfg.dense_hidden},
                    {"decoder_hidden", cfg.decoder_hidden},
                    {"residual_head", cfg.residual_head}};
    doc["loop"] = {{"algo", to_string(cfg.algo)},
                   {"seed", cfg.seed},
                   {"total_steps", cfg.total_steps},
                   {"update_every", cfg.update_every},
                   {"update_after", cfg.update_after},
                   {"start_steps", cfg.start_steps},
                   {"eval_every", cfg.eval_every},
                   {"eval_episodes", cfg.eval_episodes},
                   {"real_capacity", cfg.real_capacity},
                   {"fake_capacity", cfg.fake_capacity},
                   {"real_fraction", cfg.real_fraction},
                   {"dump_trajectories", cfg.dump_trajectories},
                   {"out_dir", cfg.out_dir}};
    if (cfg.fine_tune_threshold) {
        doc["loop"]["fine_tune_threshold"] = *cfg.fine_tune_threshold;
    } else {
        doc["loop"]["fine_tune_threshold"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

void echo_config(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream os(out_dir / "config.json");
    if (!os) throw std::runtime_error("echo_config: cannot write to " + out_dir.string());
    os << config_to_json(cfg);
}

}  // namespace pimbrl::exp
