// Command-line front end: train / eval / ablate / rollout / check.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error,
// 3 check-suite failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wamtopo/body.hpp"
#include "wamtopo/checkpoint.hpp"
#include "wamtopo/delaunay.hpp"
#include "wamtopo/env.hpp"
#include "wamtopo/errors.hpp"
#include "wamtopo/gli.hpp"
#include "wamtopo/laplacian.hpp"
#include "wamtopo/linking.hpp"
#include "wamtopo/network.hpp"
#include "wamtopo/polyline.hpp"
#include "wamtopo/ppo.hpp"
#include "wamtopo/rng.hpp"
#include "wamtopo/trainer.hpp"
#include "wamtopo/writhe.hpp"
#include "wamtopo_oracle/delaunay_bruteforce.hpp"
#include "wamtopo_oracle/quadrature.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wamtopo;

namespace {

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Small output helpers (same record header convention as the trainer CSVs).
// ---------------------------------------------------------------------------

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path, bool append = false) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed while writing: " + path);
}

void write_header(std::ofstream& out, std::uint64_t config_hash,
                  const std::string& run_id) {
  out << "# format-version " << kRecordFormatVersion << "\n";
  out << "# code-version " << kCodeVersion << "\n";
  out << "# config-hash " << hex16(config_hash) << "\n";
  out << "# run-id " << run_id << "\n";
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " +
                        ec.message());
}

// ---------------------------------------------------------------------------
// Configuration wiring: a JSON file plus kebab-case flag overrides, merged
// and re-validated through the one canonical RunConfig parser.
// ---------------------------------------------------------------------------

struct ConfigCli {
  std::string config_file;
  json overrides = json::object();

  template <typename T>
  void add(CLI::App& cmd, const std::string& flag, const char* pointer,
           const std::string& help) {
    cmd.add_option_function<T>(
        flag,
        [this, pointer](const T& v) {
          overrides[json::json_pointer(pointer)] = v;
        },
        help);
  }

  // Run metadata + environment flags; `full` adds the training
  // hyperparameters (train/eval-only verbs skip those).
  void attach(CLI::App& cmd, bool full) {
    cmd.add_option("--config", config_file,
                   "JSON configuration file; flags override its values")
        ->check(CLI::ExistingFile);
    add<std::string>(cmd, "--run-id", "/run_id",
                     "run identifier used in output file names");
    add<std::string>(cmd, "--output-dir", "/output_dir",
                     "directory receiving records and checkpoints");
    add<long>(cmd, "--episode-budget", "/episode_budget",
              "training episodes to run");
    add<long>(cmd, "--eval-cadence", "/eval_cadence",
              "greedy online evaluation every N episodes (0 disables)");
    add<int>(cmd, "--eval-episodes", "/eval_episodes",
             "episodes per online evaluation");
    add<long>(cmd, "--checkpoint-cadence", "/checkpoint_cadence",
              "checkpoint every N episodes (0: final only)");
    add<std::uint64_t>(cmd, "--seed", "/seed",
                       "master seed; all streams derive from it");

    add<std::string>(cmd, "--scenario", "/env/scenario",
                     "upright or horizontal");
    add<std::string>(cmd, "--humanoid-preset", "/env/humanoid_preset",
                     "standard, slim, stout or custom");
    add<double>(cmd, "--custom-torso-height", "/env/custom_torso_height",
                "custom preset torso height (m)");
    add<double>(cmd, "--custom-shoulder-width", "/env/custom_shoulder_width",
                "custom preset shoulder width (m)");
    add<double>(cmd, "--custom-torso-depth", "/env/custom_torso_depth",
                "custom preset torso depth (m)");
    add<double>(cmd, "--custom-arm-length", "/env/custom_arm_length",
                "custom preset arm length (m)");
    add<double>(cmd, "--custom-neck-length", "/env/custom_neck_length",
                "custom preset neck length (m)");
    add<std::string>(cmd, "--arm-model-file", "/env/arm_model_file",
                     "robot chain description file (empty: built-in)");
    add<double>(cmd, "--spawn-half-width", "/env/spawn_half_width",
                "humanoid spawn half-width per horizontal axis (m)");
    add<double>(cmd, "--oscillation-peak-to-peak",
                "/env/oscillation_peak_to_peak",
                "vertical bobbing peak-to-peak travel (m)");
    add<double>(cmd, "--oscillation-period-s", "/env/oscillation_period_s",
                "vertical bobbing period (s)");
    add<double>(cmd, "--step-period-s", "/env/step_period_s",
                "simulated duration of one control step (s)");
    add<int>(cmd, "--t-max", "/env/t_max", "steps per episode");
    add<double>(cmd, "--action-scale", "/env/action_scale",
                "joint travel per unit action (rad)");
    add<double>(cmd, "--noise-sigma", "/env/noise_sigma",
                "landmark perception noise stddev (m)");
    add<std::string>(cmd, "--input-space", "/env/input_space",
                     "observation family: WL, W or P");
    add<double>(cmd, "--beta1", "/env/beta1", "linking reward weight");
    add<double>(cmd, "--beta2", "/env/beta2", "arm height punishment weight");
    add<double>(cmd, "--gamma-ref", "/env/gamma_ref",
                "linking reference in the reward");
    add<bool>(cmd, "--freeze-graph-at-reset", "/env/freeze_graph_at_reset",
              "reuse the reset-time neighbourhood graph all episode");
    add<std::uint64_t>(cmd, "--env-seed", "/env/seed",
                       "standalone environment seed (unused by training)");

    if (!full) return;
    add<double>(cmd, "--learning-rate", "/train/learning_rate",
                "Adam learning rate");
    add<double>(cmd, "--discount", "/train/discount", "return discount");
    add<double>(cmd, "--value-coef", "/train/value_coef",
                "critic loss weight");
    add<double>(cmd, "--entropy-coef", "/train/entropy_coef",
                "entropy bonus weight (negative: entropy penalty)");
    add<double>(cmd, "--clip-ratio", "/train/clip_ratio",
                "surrogate clipping ratio");
    add<int>(cmd, "--updates-per-episode", "/train/updates_per_episode",
             "optimizer steps after each collected episode");
    add<int>(cmd, "--window-episodes", "/train/window_episodes",
             "stored episodes available to each update");
    add<std::string>(cmd, "--update-mode", "/train/update_mode",
                     "pooled-window or per-episode");
    add<bool>(cmd, "--normalize-observations",
              "/train/normalize_observations",
              "standardize observations with running statistics");
    add<bool>(cmd, "--normalize-advantages", "/train/normalize_advantages",
              "standardize advantages within each update batch");
    add<double>(cmd, "--adam-beta1", "/train/adam_beta1",
                "Adam first-moment decay");
    add<double>(cmd, "--adam-beta2", "/train/adam_beta2",
                "Adam second-moment decay");
    add<double>(cmd, "--adam-epsilon", "/train/adam_epsilon",
                "Adam denominator floor");
    add<int>(cmd, "--branch-width", "/train/widths/branch",
             "per-branch hidden width");
    add<int>(cmd, "--merge-width", "/train/widths/merge",
             "merge layer width");
    add<int>(cmd, "--lstm-width", "/train/widths/lstm",
             "recurrent state width");
    add<std::uint64_t>(cmd, "--train-seed", "/train/seed",
                       "network module seed (unused by the run loop)");
  }

  RunConfig resolve() const {
    json j = json::object();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw IoError("cannot read configuration file: " + config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        j = json::parse(ss.str());
      } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") +
                          e.what());
      }
      if (!j.is_object()) {
        throw ConfigError("configuration root must be a JSON object");
      }
    }
    j.update(overrides, /*merge_objects=*/true);
    return run_config_from_json(j.dump());
  }
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

// Writes the four per-run artifacts next to the checkpoint: the resolved
// configuration, the episode and evaluation CSVs, and a wall-clock sidecar.
// Timing lives outside the CSVs on purpose: the records stay byte-identical
// across repeated runs of the same (config, seed).
void write_train_artifacts(const RunConfig& cfg, const TrainResult& result,
                           bool resume) {
  const std::uint64_t hash = run_config_hash(cfg);
  const fs::path dir(cfg.output_dir);
  ensure_dir(cfg.output_dir);
  save_run_config((dir / (cfg.run_id + "_config.json")).string(), cfg);

  const std::string epi_path = (dir / (cfg.run_id + "_episodes.csv")).string();
  const std::string eva_path = (dir / (cfg.run_id + "_evals.csv")).string();
  const bool append_epi = resume && fs::exists(epi_path);
  const bool append_eva = resume && fs::exists(eva_path);
  write_episode_csv(epi_path, result.record.episodes, hash, cfg.run_id,
                    append_epi);
  write_eval_csv(eva_path, result.record.evals, hash, cfg.run_id, append_eva);

  const std::string tim_path = (dir / (cfg.run_id + "_timings.txt")).string();
  const bool append_tim = resume && fs::exists(tim_path);
  std::ofstream tim = open_out(tim_path, append_tim);
  if (!append_tim) {
    write_header(tim, hash, cfg.run_id);
    tim << "# wall-clock sidecar; kept out of the CSV records so those stay "
           "reproducible\n";
  }
  double total_ms = 0.0;
  for (std::size_t i = 0; i < result.episode_wall_ms.size(); ++i) {
    const long episode = result.start_episode + static_cast<long>(i) + 1;
    tim << "episode " << episode << " wall-ms "
        << g17(result.episode_wall_ms[i]) << "\n";
    total_ms += result.episode_wall_ms[i];
  }
  tim << "segment-total-s " << g17(total_ms / 1000.0) << "\n";
  finish_out(tim, tim_path);
}

int run_train(const ConfigCli& cc, bool resume) {
  RunConfig cfg = cc.resolve();
  cfg.validate();

  std::optional<Checkpoint> prev;
  if (resume) prev = load_checkpoint(checkpoint_path(cfg));

  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train_policy(cfg, prev ? &*prev : nullptr);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  write_train_artifacts(cfg, result, resume);

  const long first = result.start_episode + 1;
  const long last =
      result.start_episode + static_cast<long>(result.record.episodes.size());
  std::printf("run %s: episodes %ld..%ld (%zu this run) in %.1f s\n",
              cfg.run_id.c_str(), first, last, result.record.episodes.size(),
              wall_s);
  if (!result.record.evals.empty()) {
    const EvalRow& ev = result.record.evals.back();
    std::printf(
        "last online eval @ episode %ld: success %.2f, mean final linking "
        "%.3f\n",
        ev.episode, ev.success_rate, ev.mean_final_gamma);
  }
  std::printf("checkpoint: %s\n", checkpoint_path(cfg).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  int episodes = 100;
  int batches = 5;
  int threads = 1;
};

void check_checkpoint_compat(const Checkpoint& ck, const EnvConfig& env) {
  if (ck.params.input_space != env.input_space) {
    throw CheckpointMismatchError(
        std::string("checkpoint input space ") +
        to_string(ck.params.input_space) + " does not match requested " +
        to_string(env.input_space));
  }
  if (ck.params.scenario != env.scenario) {
    throw CheckpointMismatchError(std::string("checkpoint scenario ") +
                                  to_string(ck.params.scenario) +
                                  " does not match requested " +
                                  to_string(env.scenario));
  }
}

int run_eval(const ConfigCli& cc, const EvalArgs& args) {
  if (args.episodes < 1) throw ConfigError("--episodes must be >= 1");
  if (args.batches < 1) throw ConfigError("--batches must be >= 1");
  if (args.threads < 1) throw ConfigError("--threads must be >= 1");

  RunConfig cfg = cc.resolve();
  cfg.env.validate();
  Checkpoint ck = load_checkpoint(args.checkpoint);
  check_checkpoint_compat(ck, cfg.env);
  const ObsStats* stats = (ck.has_trainer && ck.trainer.obs_stats.enabled())
                              ? &ck.trainer.obs_stats
                              : nullptr;

  // Per-batch greedy evaluations. Batch b draws its base seed from
  // stream 3 of the master seed; episodes within a batch use stream 4.
  std::vector<EvalSummary> batches;
  std::vector<RolloutStats> all;
  for (int b = 0; b < args.batches; ++b) {
    std::vector<RolloutStats> details;
    batches.push_back(evaluate_policy(cfg.env, ck.params,
                                      derive_seed(cfg.seed, 3, b),
                                      args.episodes, args.threads, &details,
                                      stats));
    all.insert(all.end(), details.begin(), details.end());
  }

  double mean_rate = 0.0, mean_gamma = 0.0;
  for (const EvalSummary& b : batches) {
    mean_rate += b.success_rate;
    mean_gamma += b.mean_final_gamma;
  }
  mean_rate /= batches.size();
  mean_gamma /= batches.size();
  double sd_rate = 0.0;
  if (batches.size() > 1) {
    for (const EvalSummary& b : batches) {
      sd_rate += (b.success_rate - mean_rate) * (b.success_rate - mean_rate);
    }
    sd_rate = std::sqrt(sd_rate / (batches.size() - 1));
  }

  // Per-step linking statistics pooled over every rollout.
  const int t_max = cfg.env.t_max;
  std::vector<double> step_mean(t_max, 0.0), step_sd(t_max, 0.0);
  const double n = static_cast<double>(all.size());
  for (const RolloutStats& r : all) {
    for (int t = 0; t < t_max; ++t) step_mean[t] += r.step_gammas[t];
  }
  for (int t = 0; t < t_max; ++t) step_mean[t] /= n;
  if (all.size() > 1) {
    for (const RolloutStats& r : all) {
      for (int t = 0; t < t_max; ++t) {
        const double d = r.step_gammas[t] - step_mean[t];
        step_sd[t] += d * d;
      }
    }
    for (int t = 0; t < t_max; ++t) step_sd[t] = std::sqrt(step_sd[t] / (n - 1));
  }

  // Record hash: the environment plus everything that shapes this command.
  json desc = json::parse(run_config_to_json(cfg));
  json ev{{"env", desc["env"]},
          {"checkpoint", args.checkpoint},
          {"episodes", args.episodes},
          {"batches", args.batches},
          {"seed", cfg.seed}};
  const std::uint64_t hash = fnv1a64(ev.dump());

  ensure_dir(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  const std::string bat_path = (dir / (cfg.run_id + "_batches.csv")).string();
  {
    std::ofstream out = open_out(bat_path);
    write_header(out, hash, cfg.run_id);
    out << "batch,success_rate,mean_final_gamma\n";
    for (std::size_t b = 0; b < batches.size(); ++b) {
      out << b << ',' << g17(batches[b].success_rate) << ','
          << g17(batches[b].mean_final_gamma) << "\n";
    }
    finish_out(out, bat_path);
  }
  const std::string stp_path = (dir / (cfg.run_id + "_steps.csv")).string();
  {
    std::ofstream out = open_out(stp_path);
    write_header(out, hash, cfg.run_id);
    out << "step,mean_gamma,stddev,ci95_low,ci95_high,n\n";
    for (int t = 0; t < t_max; ++t) {
      const double half = all.size() > 1
                              ? 1.96 * step_sd[t] / std::sqrt(n)
                              : 0.0;
      out << (t + 1) << ',' << g17(step_mean[t]) << ',' << g17(step_sd[t])
          << ',' << g17(step_mean[t] - half) << ','
          << g17(step_mean[t] + half) << ',' << all.size() << "\n";
    }
    finish_out(out, stp_path);
  }

  std::printf("checkpoint %s on preset %s, noise sigma %.3g\n",
              args.checkpoint.c_str(), to_string(cfg.env.humanoid_preset),
              cfg.env.noise_sigma);
  std::printf(
      "success rate over %d batches x %d episodes: %.4f +/- %.4f\n",
      args.batches, args.episodes, mean_rate, sd_rate);
  std::printf("mean final linking: %.4f\n", mean_gamma);
  std::printf("per-step mean linking (95%% band):\n");
  for (int t = 0; t < t_max; ++t) {
    const double half =
        all.size() > 1 ? 1.96 * step_sd[t] / std::sqrt(n) : 0.0;
    std::printf("  step %2d  %.4f  [%.4f, %.4f]\n", t + 1, step_mean[t],
                step_mean[t] - half, step_mean[t] + half);
  }
  std::printf("wrote %s, %s\n", bat_path.c_str(), stp_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

struct AblateArgs {
  std::vector<std::uint64_t> seeds;
  int final_eval_episodes = 50;
};

struct AblationRun {
  InputSpace space;
  std::uint64_t seed;
  std::vector<double> raw;       // per-episode mean reward
  std::vector<double> smoothed;  // centered 10-neighbour window
  double final_smoothed = 0.0;
  double success_rate = 0.0;
};

int run_ablate(const ConfigCli& cc, const AblateArgs& args) {
  if (args.seeds.size() < 2) {
    throw ConfigError("ablation needs at least 2 seeds (--seeds)");
  }
  if (args.final_eval_episodes < 1) {
    throw ConfigError("--final-eval-episodes must be >= 1");
  }
  RunConfig base = cc.resolve();
  base.validate();
  const std::uint64_t base_hash = run_config_hash(base);
  const InputSpace variants[] = {InputSpace::kWL, InputSpace::kW,
                                 InputSpace::kP};

  std::vector<AblationRun> runs;
  for (std::uint64_t seed : args.seeds) {
    for (InputSpace v : variants) {
      RunConfig cfg = base;
      cfg.seed = seed;
      cfg.env.input_space = v;
      cfg.run_id = base.run_id + "_" + to_string(v) + "_s" +
                   std::to_string(seed);
      std::printf("training %s (%ld episodes)...\n", cfg.run_id.c_str(),
                  cfg.episode_budget);
      std::fflush(stdout);
      TrainResult r = train_policy(cfg);
      write_train_artifacts(cfg, r, /*resume=*/false);

      AblationRun row;
      row.space = v;
      row.seed = seed;
      for (const EpisodeRow& e : r.record.episodes) {
        row.raw.push_back(e.mean_reward);
      }
      row.smoothed = smooth_curve(row.raw);
      row.final_smoothed = row.smoothed.empty() ? 0.0 : row.smoothed.back();
      const ObsStats* stats =
          r.trainer.obs_stats.enabled() ? &r.trainer.obs_stats : nullptr;
      row.success_rate =
          evaluate_policy(cfg.env, r.params,
                          derive_seed(seed, 3, cfg.episode_budget),
                          args.final_eval_episodes, 1, nullptr, stats)
              .success_rate;
      runs.push_back(std::move(row));
    }
  }

  ensure_dir(base.output_dir);
  const fs::path dir(base.output_dir);

  // One curve per variant per seed, plus the across-seed mean per variant.
  const std::string cur_path =
      (dir / (base.run_id + "_ablation_curves.csv")).string();
  {
    std::ofstream out = open_out(cur_path);
    write_header(out, base_hash, base.run_id);
    out << "variant,seed,episode,reward,reward_smoothed\n";
    for (const AblationRun& r : runs) {
      for (std::size_t i = 0; i < r.raw.size(); ++i) {
        out << to_string(r.space) << ',' << r.seed << ',' << (i + 1) << ','
            << g17(r.raw[i]) << ',' << g17(r.smoothed[i]) << "\n";
      }
    }
    for (InputSpace v : variants) {
      std::vector<double> mean;
      int count = 0;
      for (const AblationRun& r : runs) {
        if (r.space != v) continue;
        if (mean.empty()) mean.assign(r.raw.size(), 0.0);
        for (std::size_t i = 0; i < r.raw.size(); ++i) mean[i] += r.raw[i];
        ++count;
      }
      for (double& m : mean) m /= count;
      const std::vector<double> mean_smoothed = smooth_curve(mean);
      for (std::size_t i = 0; i < mean.size(); ++i) {
        out << to_string(v) << ",mean," << (i + 1) << ',' << g17(mean[i])
            << ',' << g17(mean_smoothed[i]) << "\n";
      }
    }
    finish_out(out, cur_path);
  }

  const std::string sum_path =
      (dir / (base.run_id + "_ablation_summary.csv")).string();
  {
    std::ofstream out = open_out(sum_path);
    write_header(out, base_hash, base.run_id);
    out << "variant,seed,final_reward_smoothed,success_rate\n";
    for (const AblationRun& r : runs) {
      out << to_string(r.space) << ',' << r.seed << ','
          << g17(r.final_smoothed) << ',' << g17(r.success_rate) << "\n";
    }
    for (InputSpace v : variants) {
      double fin = 0.0, rate = 0.0;
      int count = 0;
      for (const AblationRun& r : runs) {
        if (r.space != v) continue;
        fin += r.final_smoothed;
        rate += r.success_rate;
        ++count;
      }
      out << to_string(v) << ",mean," << g17(fin / count) << ','
          << g17(rate / count) << "\n";
    }
    finish_out(out, sum_path);
  }

  std::printf("%-8s %-8s %18s %14s\n", "variant", "seed", "final(smoothed)",
              "success");
  for (const AblationRun& r : runs) {
    std::printf("%-8s %-8llu %18.3f %14.2f\n", to_string(r.space),
                static_cast<unsigned long long>(r.seed), r.final_smoothed,
                r.success_rate);
  }
  for (InputSpace v : variants) {
    double fin = 0.0, rate = 0.0;
    int count = 0;
    for (const AblationRun& r : runs) {
      if (r.space != v) continue;
      fin += r.final_smoothed;
      rate += r.success_rate;
      ++count;
    }
    std::printf("%-8s %-8s %18.3f %14.2f\n", to_string(v), "mean",
                fin / count, rate / count);
  }
  std::printf("wrote %s, %s\n", cur_path.c_str(), sum_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// rollout
// ---------------------------------------------------------------------------

struct RolloutArgs {
  std::string checkpoint;
  std::string out_path;     // default: <output-dir>/<run-id>_rollout.jsonl
  double tilt_deg = 0.0;    // tip about the world y axis ("floating" pose)
  double lift_m = 0.0;      // extra pelvis height
};

json curve_json(const Polyline& p) {
  json pts = json::array();
  for (const Vec3& v : p.points()) pts.push_back({v.x(), v.y(), v.z()});
  return pts;
}

json curves_json(const CurveSet& cs) {
  return json{{"r_r", curve_json(cs.robot.right)},
              {"r_l", curve_json(cs.robot.left)},
              {"h_c", curve_json(cs.humanoid.center)},
              {"h_r", curve_json(cs.humanoid.side_r)},
              {"h_l", curve_json(cs.humanoid.side_l)},
              {"h_arm", curve_json(cs.humanoid.arm_ring)}};
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

int run_rollout(const ConfigCli& cc, const RolloutArgs& args) {
  RunConfig cfg = cc.resolve();
  cfg.env.validate();
  Checkpoint ck = load_checkpoint(args.checkpoint);
  check_checkpoint_compat(ck, cfg.env);
  const ObsStats* stats = (ck.has_trainer && ck.trainer.obs_stats.enabled())
                              ? &ck.trainer.obs_stats
                              : nullptr;

  const EnvConfig& env = cfg.env;
  const SceneModel model = SceneModel::from_config(env);

  // Episode start, mirroring the environment's reset draw order (spawn dx,
  // spawn dy, oscillation phase, then observation noise) so that with no
  // pose override this replays a standard episode bit-for-bit.
  Rng rng(derive_seed(cfg.seed, 1, 0));
  EnvState s;
  s.joints = rest_joints(model.arm);
  const double hw = env.spawn_half_width;
  const double dx = rng.uniform(-hw, hw);
  const double dy = rng.uniform(-hw, hw);
  s.phase = rng.uniform(0.0, 2.0 * kPi);
  const Vec3 pelvis = nominal_pelvis(env.scenario) + Vec3(dx, dy, 0.0);
  HumanoidPose pose;
  if (args.tilt_deg != 0.0) {
    pose = tilted_pose(pelvis, args.tilt_deg * kPi / 180.0);
  } else if (env.scenario == Scenario::kUpright) {
    pose = upright_pose(pelvis);
  } else {
    pose = horizontal_pose(pelvis);
  }
  pose.position.z() +=
      args.lift_m + (env.oscillation_peak_to_peak / 2.0) * std::sin(s.phase);
  s.pose = pose;
  s.t = 0;
  {
    const CurveSet cs = scene_curves(model, s);
    const ClampedGli g = total_linking_clamped(cs, env.scenario);
    s.gamma = g.value;
    s.saturated = g.saturated;
  }
  std::optional<EdgeSet> frozen;
  if (env.freeze_graph_at_reset) {
    frozen = delaunay_edges(
        landmark_points(scene_curves(model, s), env.scenario));
  }
  const EdgeSet* frozen_ptr = frozen ? &*frozen : nullptr;
  Observation obs = observe(s, env, model, frozen_ptr, rng);

  ensure_dir(cfg.output_dir);
  std::string out_path = args.out_path;
  if (out_path.empty()) {
    out_path =
        (fs::path(cfg.output_dir) / (cfg.run_id + "_rollout.jsonl")).string();
  }
  std::ofstream out = open_out(out_path);

  json desc = json::parse(run_config_to_json(cfg));
  json hdr{{"type", "header"},
           {"format_version", kRecordFormatVersion},
           {"code_version", kCodeVersion},
           {"config_hash", hex16(fnv1a64(desc["env"].dump()))},
           {"run_id", cfg.run_id},
           {"checkpoint", args.checkpoint},
           {"scenario", to_string(env.scenario)},
           {"input_space", to_string(env.input_space)},
           {"humanoid_preset", to_string(env.humanoid_preset)},
           {"tilt_deg", args.tilt_deg},
           {"lift_m", args.lift_m},
           {"seed", cfg.seed},
           {"t_max", env.t_max}};
  out << hdr.dump() << "\n";

  Hidden hidden = Hidden::zeros(ck.params.widths.lstm);
  bool success = false;
  while (s.t < env.t_max) {
    const Eigen::VectorXd in = stats ? stats->normalize(obs.values)
                                     : obs.values;
    const PolicyOut po = forward(ck.params, in, hidden);
    const ActionSample act = greedy_action(po.mean, po.stddev);
    const EnvState next = apply_action(s, act.action, env, model);
    const RewardInfo ri = reward(s, next, env, model);
    obs = observe(next, env, model, frozen_ptr, rng);
    hidden = po.hidden;

    const CurveSet cs = scene_curves(model, next);
    bool saturated = false;
    const Eigen::MatrixXd writhe =
        env.scenario == Scenario::kUpright
            ? combined_writhe_upright(cs.robot, cs.humanoid, &saturated)
            : combined_writhe_horizontal(cs.robot, cs.humanoid, &saturated);
    success = is_success(next);

    json step{{"type", "step"},
              {"t", next.t},
              {"action", std::vector<double>(act.action.data(),
                                             act.action.data() + 14)},
              {"joints", std::vector<double>(next.joints.data(),
                                             next.joints.data() + 14)},
              {"pose",
               json{{"position",
                     {next.pose.position.x(), next.pose.position.y(),
                      next.pose.position.z()}},
                    {"tilt_angle", next.pose.tilt_angle}}},
              {"gamma", ri.gamma},
              {"delta", ri.delta},
              {"reward", ri.reward},
              {"z_right", ri.z_right},
              {"z_left", ri.z_left},
              {"success", success},
              {"saturated", saturated || next.saturated},
              {"curves", curves_json(cs)},
              {"writhe", matrix_json(writhe)}};
    out << step.dump() << "\n";
    s = next;
  }
  json tail{{"type", "summary"},
            {"final_gamma", s.gamma},
            {"success", success}};
  out << tail.dump() << "\n";
  finish_out(out, out_path);

  std::printf("rollout: %d steps, final linking %.3f, success %s\n",
              env.t_max, s.gamma, success ? "yes" : "no");
  std::printf("wrote %s\n", out_path.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

Mat3 random_rotation(Rng& rng) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-6) axis = Vec3(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  const double angle = rng.uniform(0.0, 2.0 * kPi);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

// Random open polyline as a bounded random walk; the caller keeps the two
// curves in disjoint boxes so strict-mode evaluation cannot throw.
Polyline random_curve(Rng& rng, int n_points, const Vec3& offset) {
  std::vector<Vec3> pts;
  Vec3 p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
         rng.uniform(-0.3, 0.3));
  pts.push_back(p + offset);
  for (int i = 1; i < n_points; ++i) {
    Vec3 step(rng.normal(), rng.normal(), rng.normal());
    while (step.norm() < 1e-3) step = Vec3(rng.normal(), rng.normal(), rng.normal());
    p += step.normalized() * rng.uniform(0.15, 0.4);
    pts.push_back(p + offset);
  }
  return Polyline(std::move(pts));
}

struct CheckReporter {
  bool all_ok = true;
  void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s - %s (%s)\n", ok ? "ok" : "FAIL", name.c_str(),
                detail.c_str());
    all_ok = all_ok && ok;
  }
};

int run_check() {
  CheckReporter rep;

  // Closed-form segment linking against independent numerical quadrature.
  {
    Rng rng(20260816);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
      const auto pt = [&] {
        return Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                    rng.uniform(-1, 1));
      };
      const Vec3 a0 = pt(), a1 = pt(), b0 = pt(), b1 = pt();
      if ((a1 - a0).norm() < 0.05 || (b1 - b0).norm() < 0.05) continue;
      if (wamtopo_oracle::segment_distance_oracle(a0, a1, b0, b1) < 0.01) {
        continue;
      }
      const double closed = segment_gli(a0, a1, b0, b1);
      const double quad = wamtopo_oracle::gli_quadrature(a0, a1, b0, b1);
      worst = std::max(worst, std::abs(closed - quad));
      ++done;
    }
    rep.report("segment linking vs quadrature", worst <= 1e-6,
               "max abs diff " + std::to_string(worst) + " over 100 pairs");
  }

  // Writhe matrix entries sum to the curve linking integral.
  {
    Rng rng(7);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Polyline c1 = random_curve(rng, 5 + (k % 8), Vec3(0, 0, 0));
      const Polyline c2 = random_curve(rng, 5 + ((k + 3) % 8), Vec3(4, 0, 0));
      const double sum = writhe_matrix(c1, c2).entries.sum();
      worst = std::max(worst, std::abs(sum - curve_gli(c1, c2)));
    }
    rep.report("writhe sum equals curve linking", worst <= 1e-9,
               "max abs diff " + std::to_string(worst) + " over 50 pairs");
  }

  // Rigid-motion / uniform-scale invariance and reversal antisymmetry.
  {
    Rng rng(11);
    double worst_inv = 0.0, worst_rev = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Polyline c1 = random_curve(rng, 6, Vec3(0, 0, 0));
      const Polyline c2 = random_curve(rng, 6, Vec3(4, 0, 0));
      const Eigen::MatrixXd base = writhe_matrix(c1, c2).entries;
      const Mat3 rot = random_rotation(rng);
      const Vec3 tr(rng.uniform(-2, 2), rng.uniform(-2, 2),
                    rng.uniform(-2, 2));
      const Eigen::MatrixXd moved =
          writhe_matrix(c1.transformed(rot, tr), c2.transformed(rot, tr))
              .entries;
      const Eigen::MatrixXd scaled =
          writhe_matrix(c1.scaled(2.7), c2.scaled(2.7)).entries;
      worst_inv = std::max(worst_inv, (moved - base).cwiseAbs().maxCoeff());
      worst_inv = std::max(worst_inv, (scaled - base).cwiseAbs().maxCoeff());
      worst_rev = std::max(
          worst_rev, std::abs(curve_gli(c1.reversed(), c2) + base.sum()));
    }
    rep.report("writhe rigid/scale invariance", worst_inv <= 1e-9,
               "max abs drift " + std::to_string(worst_inv));
    rep.report("orientation-reversal antisymmetry", worst_rev <= 1e-12,
               "max abs residual " + std::to_string(worst_rev));
  }

  // Neighbourhood-graph coordinates: weight sums and scale invariance.
  {
    Rng rng(13);
    double worst_sum = 0.0, worst_scale = 0.0;
    for (int k = 0; k < 50; ++k) {
      const int n = 8 + (k % 5);
      Eigen::MatrixX3d pts(n, 3);
      for (int i = 0; i < n; ++i) {
        pts.row(i) = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1));
      }
      const EdgeSet graph = delaunay_edges(pts);
      const LaplacianCoords lc = laplacian_coords(pts, graph);
      for (const auto& w : lc.weights) {
        worst_sum = std::max(
            worst_sum,
            std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
      }
      const LaplacianCoords scaled = laplacian_coords(pts * 3.1, graph);
      for (std::size_t i = 0; i < lc.weights.size(); ++i) {
        for (std::size_t j = 0; j < lc.weights[i].size(); ++j) {
          worst_scale = std::max(
              worst_scale, std::abs(lc.weights[i][j] - scaled.weights[i][j]));
        }
      }
    }
    rep.report("graph-coordinate weight sums", worst_sum <= 1e-12,
               "max abs residual " + std::to_string(worst_sum));
    rep.report("graph-coordinate scale invariance", worst_scale <= 1e-12,
               "max abs drift " + std::to_string(worst_scale));
  }

  // Incremental tetrahedralization against the brute-force definition.
  {
    Rng rng(17);
    bool equal = true;
    for (int k = 0; k < 10 && equal; ++k) {
      const int n = 8 + (k % 5);
      Eigen::MatrixX3d pts(n, 3);
      for (int i = 0; i < n; ++i) {
        pts.row(i) = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                          rng.uniform(-1, 1));
      }
      const EdgeSet fast = delaunay_edges(pts);
      const auto brute =
          wamtopo_oracle::delaunay_bruteforce(jitter_points(pts));
      equal = fast.edges == brute.edges;
    }
    rep.report("tetrahedralization vs brute force", equal,
               "10 point sets, exact edge equality");
  }

  // Observation and interaction-matrix shapes.
  {
    const bool ok =
        observation_size(InputSpace::kWL, Scenario::kUpright) == 394 &&
        observation_size(InputSpace::kWL, Scenario::kHorizontal) == 357 &&
        combined_writhe_shape(Scenario::kUpright) == std::pair{20, 14} &&
        combined_writhe_shape(Scenario::kHorizontal) == std::pair{15, 14} &&
        landmark_count(Scenario::kUpright) == 38 &&
        landmark_count(Scenario::kHorizontal) == 49;
    rep.report("observation shapes", ok,
               "394 upright / 357 horizontal; 20x14 / 15x14; 38 / 49");
  }

  // Analytic gradients of the training loss against finite differences.
  {
    EnvConfig env;
    env.t_max = 3;
    Environment e(env);
    TrainConfig tc;
    Rng init_rng(23);
    NetworkParams params = NetworkParams::orthogonal_init(
        env.input_space, env.scenario, init_rng, tc.widths);
    Rng act_rng(29);
    Episode ep;
    auto [st, ob] = e.reset(31);
    (void)st;
    Hidden h = Hidden::zeros(tc.widths.lstm);
    Eigen::VectorXd obs = ob.values;
    while (!e.done()) {
      const PolicyOut po = forward(params, obs, h);
      const ActionSample a = sample_action(po.mean, po.stddev, act_rng);
      const StepResult sr = e.step(a.action);
      ep.push_back(Transition{obs, h, a.action, a.log_prob, po.value,
                              sr.reward, sr.done});
      obs = sr.observation.values;
      h = po.hidden;
    }
    Rng probe_rng(37);
    const GradientCheckResult gc =
        gradient_check(params, {ep}, tc, 60, 1e-5, probe_rng);
    rep.report("loss gradients vs finite differences",
               gc.max_rel_error <= 1e-4,
               "max rel error " + std::to_string(gc.max_rel_error) + " over " +
                   std::to_string(gc.probes) + " probes");
  }

  // Determinism: one configuration, two runs, identical records.
  {
    RunConfig cfg;
    cfg.run_id = "check";
    cfg.output_dir = (fs::temp_directory_path() / "wamtopo_check").string();
    cfg.episode_budget = 3;
    cfg.eval_cadence = 0;
    cfg.checkpoint_cadence = 0;
    cfg.seed = 41;
    const TrainResult a = train_policy(cfg);
    const TrainResult b = train_policy(cfg);
    bool equal = a.record.episodes.size() == b.record.episodes.size();
    for (std::size_t i = 0; equal && i < a.record.episodes.size(); ++i) {
      equal = a.record.episodes[i].episode == b.record.episodes[i].episode &&
              a.record.episodes[i].mean_reward ==
                  b.record.episodes[i].mean_reward &&
              a.record.episodes[i].final_gamma ==
                  b.record.episodes[i].final_gamma &&
              a.record.episodes[i].success == b.record.episodes[i].success;
    }
    rep.report("training determinism", equal,
               "3 episodes, bit-identical records");
  }

  if (!rep.all_ok) {
    std::printf("check: FAILED\n");
    return 3;
  }
  std::printf("check: all passed\n");
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{
      "Topology-based whole-arm manipulation toolkit: linking-driven "
      "training, evaluation and scene replay"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand(
      "train", "train a policy and write records + checkpoint");
  ConfigCli train_cc;
  train_cc.attach(*train, /*full=*/true);
  bool resume = false;
  train->add_flag("--resume", resume,
                  "continue from this run's last checkpoint; records append");

  CLI::App* eval = app.add_subcommand(
      "eval", "batched greedy evaluation of a trained checkpoint");
  ConfigCli eval_cc;
  eval_cc.attach(*eval, /*full=*/false);
  EvalArgs eval_args;
  eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_args.episodes,
                   "episodes per batch (default 100)");
  eval->add_option("--batches", eval_args.batches, "batches (default 5)");
  eval->add_option("--threads", eval_args.threads,
                   "parallel rollout workers; results are identical for any "
                   "thread count");

  CLI::App* ablate = app.add_subcommand(
      "ablate", "train the WL / W / P observation variants on matched seeds");
  ConfigCli ablate_cc;
  ablate_cc.attach(*ablate, /*full=*/true);
  AblateArgs ablate_args;
  ablate->add_option("--seeds", ablate_args.seeds,
                     "comma-separated seeds (at least 2)")
      ->required()
      ->delimiter(',');
  ablate->add_option("--final-eval-episodes", ablate_args.final_eval_episodes,
                     "greedy episodes for the final success rate");

  CLI::App* rollout = app.add_subcommand(
      "rollout", "replay one greedy episode to a line-delimited transcript");
  ConfigCli rollout_cc;
  rollout_cc.attach(*rollout, /*full=*/false);
  RolloutArgs rollout_args;
  rollout->add_option("--checkpoint", rollout_args.checkpoint,
                      "checkpoint file")
      ->required()
      ->check(CLI::ExistingFile);
  rollout->add_option("--out", rollout_args.out_path,
                      "transcript path (default <output-dir>/<run-id>_rollout"
                      ".jsonl)");
  rollout->add_option("--tilt-deg", rollout_args.tilt_deg,
                      "tip the humanoid about the world y axis (degrees)");
  rollout->add_option("--lift-m", rollout_args.lift_m,
                      "extra pelvis height for floating poses (m)");

  app.add_subcommand("check",
                     "run the fast oracle/invariant suite (exit 3 on failure)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) return run_train(train_cc, resume);
    if (eval->parsed()) return run_eval(eval_cc, eval_args);
    if (ablate->parsed()) return run_ablate(ablate_cc, ablate_args);
    if (rollout->parsed()) return run_rollout(rollout_cc, rollout_args);
    return run_check();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
