#include "wamtopo/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wamtopo/errors.hpp"

namespace wamtopo {
namespace {

using nlohmann::json;

// Seed-stream identifiers (see derive_seed's contract in the header).
constexpr std::uint64_t kStreamParamInit = 0;
constexpr std::uint64_t kStreamEpisodeEnv = 1;
constexpr std::uint64_t kStreamEpisodeActions = 2;
constexpr std::uint64_t kStreamEvalBase = 3;
constexpr std::uint64_t kStreamEvalEpisode = 4;

json env_to_json(const EnvConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  j["humanoid_preset"] = to_string(c.humanoid_preset);
  j["custom_torso_height"] = c.custom_torso_height;
  j["custom_shoulder_width"] = c.custom_shoulder_width;
  j["custom_torso_depth"] = c.custom_torso_depth;
  j["custom_arm_length"] = c.custom_arm_length;
  j["custom_neck_length"] = c.custom_neck_length;
  j["arm_model_file"] = c.arm_model_file;
  j["spawn_half_width"] = c.spawn_half_width;
  j["oscillation_peak_to_peak"] = c.oscillation_peak_to_peak;
  j["oscillation_period_s"] = c.oscillation_period_s;
  j["step_period_s"] = c.step_period_s;
  j["t_max"] = c.t_max;
  j["action_scale"] = c.action_scale;
  j["noise_sigma"] = c.noise_sigma;
  j["input_space"] = to_string(c.input_space);
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["gamma_ref"] = c.gamma_ref;
  j["freeze_graph_at_reset"] = c.freeze_graph_at_reset;
  j["seed"] = c.seed;
  return j;
}

json train_to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["discount"] = c.discount;
  j["value_coef"] = c.value_coef;
  j["entropy_coef"] = c.entropy_coef;
  j["clip_ratio"] = c.clip_ratio;
  j["updates_per_episode"] = c.updates_per_episode;
  j["window_episodes"] = c.window_episodes;
  j["update_mode"] = to_string(c.update_mode);
  j["normalize_observations"] = c.normalize_observations;
  j["normalize_advantages"] = c.normalize_advantages;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["widths"] = {{"branch", c.widths.branch},
                 {"merge", c.widths.merge},
                 {"lstm", c.widths.lstm}};
  j["seed"] = c.seed;
  return j;
}

json run_to_json(const RunConfig& c) {
  json j;
  j["run_id"] = c.run_id;
  j["output_dir"] = c.output_dir;
  j["episode_budget"] = c.episode_budget;
  j["eval_cadence"] = c.eval_cadence;
  j["eval_episodes"] = c.eval_episodes;
  j["checkpoint_cadence"] = c.checkpoint_cadence;
  j["seed"] = c.seed;
  j["env"] = env_to_json(c.env);
  j["train"] = train_to_json(c.train);
  return j;
}

// Missing keys keep their defaults (partial configuration files are fine);
// unknown keys are rejected so typos fail loudly instead of being ignored.
void require_known_keys(const json& j, std::initializer_list<const char*> keys,
                        const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown configuration key \"" + where + it.key() +
                        "\"");
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    out = it->get<T>();
  }
}

template <typename Enum, typename FromString>
void read_enum(const json& j, const char* key, FromString from_string,
               Enum& out) {
  if (auto it = j.find(key); it != j.end()) {
    out = from_string(it->get<std::string>());
  }
}

void env_from_json(const json& j, EnvConfig& c) {
  require_known_keys(
      j,
      {"scenario", "humanoid_preset", "custom_torso_height",
       "custom_shoulder_width", "custom_torso_depth", "custom_arm_length",
       "custom_neck_length", "arm_model_file", "spawn_half_width",
       "oscillation_peak_to_peak", "oscillation_period_s", "step_period_s",
       "t_max", "action_scale", "noise_sigma", "input_space", "beta1", "beta2",
       "gamma_ref", "freeze_graph_at_reset", "seed"},
      "env.");
  read_enum(j, "scenario", scenario_from_string, c.scenario);
  read_enum(j, "humanoid_preset", humanoid_preset_from_string,
            c.humanoid_preset);
  read_field(j, "custom_torso_height", c.custom_torso_height);
  read_field(j, "custom_shoulder_width", c.custom_shoulder_width);
  read_field(j, "custom_torso_depth", c.custom_torso_depth);
  read_field(j, "custom_arm_length", c.custom_arm_length);
  read_field(j, "custom_neck_length", c.custom_neck_length);
  read_field(j, "arm_model_file", c.arm_model_file);
  read_field(j, "spawn_half_width", c.spawn_half_width);
  read_field(j, "oscillation_peak_to_peak", c.oscillation_peak_to_peak);
  read_field(j, "oscillation_period_s", c.oscillation_period_s);
  read_field(j, "step_period_s", c.step_period_s);
  read_field(j, "t_max", c.t_max);
  read_field(j, "action_scale", c.action_scale);
  read_field(j, "noise_sigma", c.noise_sigma);
  read_enum(j, "input_space", input_space_from_string, c.input_space);
  read_field(j, "beta1", c.beta1);
  read_field(j, "beta2", c.beta2);
  read_field(j, "gamma_ref", c.gamma_ref);
  read_field(j, "freeze_graph_at_reset", c.freeze_graph_at_reset);
  read_field(j, "seed", c.seed);
}

void train_from_json(const json& j, TrainConfig& c) {
  require_known_keys(
      j,
      {"learning_rate", "discount", "value_coef", "entropy_coef", "clip_ratio",
       "updates_per_episode", "window_episodes", "update_mode",
       "normalize_observations", "normalize_advantages", "adam_beta1",
       "adam_beta2", "adam_epsilon", "widths", "seed"},
      "train.");
  read_field(j, "learning_rate", c.learning_rate);
  read_field(j, "discount", c.discount);
  read_field(j, "value_coef", c.value_coef);
  read_field(j, "entropy_coef", c.entropy_coef);
  read_field(j, "clip_ratio", c.clip_ratio);
  read_field(j, "updates_per_episode", c.updates_per_episode);
  read_field(j, "window_episodes", c.window_episodes);
  read_enum(j, "update_mode", update_mode_from_string, c.update_mode);
  read_field(j, "normalize_observations", c.normalize_observations);
  read_field(j, "normalize_advantages", c.normalize_advantages);
  read_field(j, "adam_beta1", c.adam_beta1);
  read_field(j, "adam_beta2", c.adam_beta2);
  read_field(j, "adam_epsilon", c.adam_epsilon);
  if (auto it = j.find("widths"); it != j.end()) {
    require_known_keys(*it, {"branch", "merge", "lstm"}, "train.widths.");
    read_field(*it, "branch", c.widths.branch);
    read_field(*it, "merge", c.widths.merge);
    read_field(*it, "lstm", c.widths.lstm);
  }
  read_field(j, "seed", c.seed);
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// Fixed 17-significant-digit decimal form: enough to reproduce any double
// exactly, and byte-stable for equal values.
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_record_header(std::ofstream& out, std::uint64_t config_hash,
                         const std::string& run_id) {
  out << "# format-version " << kRecordFormatVersion << "\n";
  out << "# code-version " << kCodeVersion << "\n";
  out << "# config-hash " << hex16(config_hash) << "\n";
  out << "# run-id " << run_id << "\n";
}

std::ofstream open_record(const std::string& path, bool append) {
  std::ofstream out(path, append ? (std::ios::out | std::ios::app)
                                 : (std::ios::out | std::ios::trunc));
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  return out;
}

void finish_record(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw IoError("error while writing " + path);
  }
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index) {
  return splitmix64(master ^ splitmix64(stream ^ splitmix64(index)));
}

void RunConfig::validate() const {
  if (run_id.empty()) {
    throw ConfigError("run_id must not be empty");
  }
  for (char c : run_id) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' &&
        c != '.') {
      throw ConfigError(
          "run_id may only contain letters, digits, '.', '-' and '_', got \"" +
          run_id + "\"");
    }
  }
  if (output_dir.empty()) {
    throw ConfigError("output_dir must not be empty");
  }
  if (episode_budget < 0) {
    throw ConfigError("episode_budget must be >= 0");
  }
  if (eval_cadence < 0) {
    throw ConfigError("eval_cadence must be >= 0 (0 disables online evaluation)");
  }
  if (eval_episodes < 1) {
    throw ConfigError("eval_episodes must be >= 1");
  }
  if (checkpoint_cadence < 0) {
    throw ConfigError(
        "checkpoint_cadence must be >= 0 (0 keeps only the final checkpoint)");
  }
  env.validate();
  train.validate();
}

std::string run_config_to_json(const RunConfig& config) {
  return run_to_json(config).dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") +
                      e.what());
  }
  RunConfig config;
  try {
    if (!j.is_object()) {
      throw ConfigError("configuration root must be a JSON object");
    }
    require_known_keys(j,
                       {"run_id", "output_dir", "episode_budget",
                        "eval_cadence", "eval_episodes", "checkpoint_cadence",
                        "seed", "env", "train"},
                       "");
    read_field(j, "run_id", config.run_id);
    read_field(j, "output_dir", config.output_dir);
    read_field(j, "episode_budget", config.episode_budget);
    read_field(j, "eval_cadence", config.eval_cadence);
    read_field(j, "eval_episodes", config.eval_episodes);
    read_field(j, "checkpoint_cadence", config.checkpoint_cadence);
    read_field(j, "seed", config.seed);
    if (auto it = j.find("env"); it != j.end()) {
      env_from_json(*it, config.env);
    }
    if (auto it = j.find("train"); it != j.end()) {
      train_from_json(*it, config.train);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  return config;
}

void save_run_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::out | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << run_config_to_json(config) << "\n";
  finish_record(out, path);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::ostringstream text;
  text << in.rdbuf();
  return run_config_from_json(text.str());
}

std::uint64_t run_config_hash(const RunConfig& config) {
  // Compact dump with sorted keys: one canonical byte string per
  // configuration, independent of file formatting.
  return fnv1a64(run_to_json(config).dump());
}

void write_episode_csv(const std::string& path,
                       const std::vector<EpisodeRow>& rows,
                       std::uint64_t config_hash, const std::string& run_id,
                       bool append) {
  std::ofstream out = open_record(path, append);
  if (!append) {
    write_record_header(out, config_hash, run_id);
    out << "episode,mean_reward,final_gamma,success\n";
  }
  for (const EpisodeRow& r : rows) {
    out << r.episode << ',' << format_double(r.mean_reward) << ','
        << format_double(r.final_gamma) << ',' << (r.success ? 1 : 0) << "\n";
  }
  finish_record(out, path);
}

void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows,
                    std::uint64_t config_hash, const std::string& run_id,
                    bool append) {
  std::ofstream out = open_record(path, append);
  if (!append) {
    write_record_header(out, config_hash, run_id);
    out << "episode,success_rate,mean_final_gamma\n";
  }
  for (const EvalRow& r : rows) {
    out << r.episode << ',' << format_double(r.success_rate) << ','
        << format_double(r.mean_final_gamma) << "\n";
  }
  finish_record(out, path);
}

std::vector<double> smooth_curve(const std::vector<double>& raw) {
  const int n = static_cast<int>(raw.size());
  std::vector<double> out(raw.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - 5);
    const int hi = std::min(n - 1, i + 5);
    double sum = 0.0;
    for (int k = lo; k <= hi; ++k) {
      sum += raw[k];
    }
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

RolloutStats greedy_rollout(Environment& env, const NetworkParams& params,
                            std::uint64_t env_seed,
                            const ObsStats* normalizer) {
  auto [state, first] = env.reset(env_seed);
  (void)state;
  Hidden hidden = Hidden::zeros(params.widths.lstm);
  Eigen::VectorXd obs = first.values;
  RolloutStats stats;
  double reward_sum = 0.0;
  int steps = 0;
  const bool standardize = normalizer != nullptr && normalizer->enabled();
  while (!env.done()) {
    const PolicyOut out =
        forward(params, standardize ? normalizer->normalize(obs) : obs, hidden);
    const ActionSample choice = greedy_action(out.mean, out.stddev);
    const StepResult result = env.step(choice.action);
    reward_sum += result.reward;
    ++steps;
    stats.step_gammas.push_back(result.info.gamma);
    obs = result.observation.values;
    hidden = out.hidden;
  }
  stats.final_gamma = env.state().gamma;
  stats.success = is_success(env.state());
  stats.mean_reward = steps > 0 ? reward_sum / steps : 0.0;
  return stats;
}

EvalSummary evaluate_policy(const EnvConfig& env_config,
                            const NetworkParams& params,
                            std::uint64_t eval_seed, int episodes, int threads,
                            std::vector<RolloutStats>* details,
                            const ObsStats* normalizer) {
  if (episodes < 1) {
    throw ConfigError("evaluation needs at least one episode");
  }
  threads = std::clamp(threads, 1, episodes);
  std::vector<RolloutStats> all(static_cast<std::size_t>(episodes));
  if (threads == 1) {
    Environment env(env_config);
    for (int k = 0; k < episodes; ++k) {
      all[k] = greedy_rollout(
          env, params,
          derive_seed(eval_seed, kStreamEvalEpisode, static_cast<std::uint64_t>(k)),
          normalizer);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          Environment env(env_config);
          for (int k = t; k < episodes; k += threads) {
            all[k] = greedy_rollout(env, params,
                                    derive_seed(eval_seed, kStreamEvalEpisode,
                                                static_cast<std::uint64_t>(k)),
                                    normalizer);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& worker : pool) {
      worker.join();
    }
    if (first_error) {
      std::rethrow_exception(first_error);
    }
  }
  // Aggregate in episode order so the summary is bit-identical no matter
  // how the rollouts were scheduled.
  double successes = 0.0;
  double gamma_sum = 0.0;
  for (const RolloutStats& r : all) {
    successes += r.success ? 1.0 : 0.0;
    gamma_sum += r.final_gamma;
  }
  EvalSummary summary;
  summary.success_rate = successes / episodes;
  summary.mean_final_gamma = gamma_sum / episodes;
  if (details != nullptr) {
    *details = std::move(all);
  }
  return summary;
}

std::string checkpoint_path(const RunConfig& config) {
  return (std::filesystem::path(config.output_dir) / (config.run_id + ".ckpt"))
      .string();
}

TrainResult train_policy(const RunConfig& config, const Checkpoint* resume) {
  config.validate();
  const std::uint64_t hash = run_config_hash(config);
  const InputSpace space = config.env.input_space;
  const Scenario scenario = config.env.scenario;

  TrainResult result;
  if (resume != nullptr) {
    const NetworkParams& stored = resume->params;
    if (stored.input_space != space || stored.scenario != scenario) {
      throw CheckpointMismatchError(
          "checkpoint input space/scenario do not match the run configuration");
    }
    if (stored.widths.branch != config.train.widths.branch ||
        stored.widths.merge != config.train.widths.merge ||
        stored.widths.lstm != config.train.widths.lstm) {
      throw CheckpointMismatchError(
          "checkpoint layer widths do not match the run configuration");
    }
    result.params = stored;
    result.params.validate();
    if (resume->has_trainer) {
      result.trainer = resume->trainer;
    } else {
      result.trainer.optimizer = AdamState::zeros_like(result.params);
    }
  } else {
    Rng init_rng(derive_seed(config.seed, kStreamParamInit, 0));
    result.params = NetworkParams::orthogonal_init(space, scenario, init_rng,
                                                   config.train.widths);
    result.trainer.optimizer = AdamState::zeros_like(result.params);
  }
  result.start_episode = result.trainer.episodes_done;

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + config.output_dir +
                  ": " + ec.message());
  }
  const std::string ckpt_path = checkpoint_path(config);

  Environment env(config.env);
  // Recent stochastic episodes the optimizer trains on. On a resumed run the
  // window restarts empty (the checkpoint holds parameters and optimizer
  // moments, not replay data), so the first post-resume updates see fewer
  // episodes than an uninterrupted run would — the one deliberate
  // approximation of the resume path.
  std::deque<Episode> window;
  ObsStats& stats = result.trainer.obs_stats;
  const bool standardize = config.train.normalize_observations;

  for (long e = result.trainer.episodes_done; e < config.episode_budget; ++e) {
    const auto episode_start = std::chrono::steady_clock::now();
    const std::uint64_t index = static_cast<std::uint64_t>(e);

    // One stochastic episode.
    Rng action_rng(derive_seed(config.seed, kStreamEpisodeActions, index));
    auto [ignored, first] =
        env.reset(derive_seed(config.seed, kStreamEpisodeEnv, index));
    (void)ignored;
    Hidden hidden = Hidden::zeros(config.train.widths.lstm);
    Eigen::VectorXd obs = first.values;
    Episode episode;
    double reward_sum = 0.0;
    while (!env.done()) {
      Transition tr;
      if (standardize) {
        stats.observe(obs);
        tr.observation = stats.normalize(obs);
      } else {
        tr.observation = obs;
      }
      tr.hidden = hidden;
      const PolicyOut out = forward(result.params, tr.observation, hidden);
      const ActionSample choice = sample_action(out.mean, out.stddev, action_rng);
      tr.action = choice.action;
      tr.log_prob = choice.log_prob;
      tr.value = out.value;
      const StepResult step = env.step(choice.action);
      tr.reward = step.reward;
      tr.done = step.done;
      reward_sum += step.reward;
      obs = step.observation.values;
      hidden = out.hidden;
      episode.push_back(std::move(tr));
    }

    EpisodeRow row;
    row.episode = e + 1;
    row.mean_reward = episode.empty() ? 0.0 : reward_sum / episode.size();
    row.final_gamma = env.state().gamma;
    row.success = is_success(env.state());

    window.push_back(std::move(episode));
    while (static_cast<int>(window.size()) > config.train.window_episodes) {
      window.pop_front();
    }

    LossReport last_report;
    if (config.train.update_mode == UpdateMode::kPooledWindow) {
      const std::vector<Episode> pooled(window.begin(), window.end());
      for (int u = 0; u < config.train.updates_per_episode; ++u) {
        last_report = ppo_update(result.params, result.trainer.optimizer,
                                 pooled, config.train);
      }
    } else {
      for (int u = 0; u < config.train.updates_per_episode; ++u) {
        const std::vector<Episode> one{window[u % window.size()]};
        last_report =
            ppo_update(result.params, result.trainer.optimizer, one, config.train);
      }
    }
    result.episode_losses.push_back(last_report);

    result.trainer.episodes_done = e + 1;
    result.record.episodes.push_back(row);

    if (config.eval_cadence > 0 && (e + 1) % config.eval_cadence == 0) {
      const EvalSummary eval = evaluate_policy(
          config.env, result.params,
          derive_seed(config.seed, kStreamEvalBase,
                      static_cast<std::uint64_t>(e + 1)),
          config.eval_episodes, /*threads=*/1, nullptr,
          standardize ? &stats : nullptr);
      EvalRow eval_row;
      eval_row.episode = e + 1;
      eval_row.success_rate = eval.success_rate;
      eval_row.mean_final_gamma = eval.mean_final_gamma;
      result.record.evals.push_back(eval_row);
    }

    if (config.checkpoint_cadence > 0 &&
        (e + 1) % config.checkpoint_cadence == 0) {
      save_checkpoint(ckpt_path, result.params, hash, &result.trainer);
    }

    const auto episode_end = std::chrono::steady_clock::now();
    result.episode_wall_ms.push_back(
        std::chrono::duration<double, std::milli>(episode_end - episode_start)
            .count());
  }

  // Always leave a checkpoint behind, including for a zero-episode budget
  // (fresh parameters, empty record) and for a resume that was already at
  // its budget.
  save_checkpoint(ckpt_path, result.params, hash, &result.trainer);
  return result;
}

}  // namespace wamtopo
