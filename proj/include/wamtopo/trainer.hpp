#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wamtopo/checkpoint.hpp"
#include "wamtopo/env.hpp"
#include "wamtopo/network.hpp"
#include "wamtopo/ppo.hpp"

namespace wamtopo {

// Version string embedded in every output file.
inline constexpr const char* kCodeVersion = "1.0.0";
inline constexpr int kRecordFormatVersion = 1;

// --- seeding -----------------------------------------------------------------

// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

// Documented seed-splitting rule: every random stream the harness uses is
// splitmix64(master ^ splitmix64(stream ^ splitmix64(index))), so streams
// and indices are independent and any (master, stream, index) triple maps
// to one fixed engine seed. Stream ids: 0 = parameter init, 1 = per-episode
// environment, 2 = per-episode action sampling, 3 = evaluation base,
// 4 = evaluation episode.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index);

// --- configuration -----------------------------------------------------------

// Full description of one training run: environment, optimizer, and the
// run-level bookkeeping. Round-trips losslessly through JSON.
struct RunConfig {
  std::string run_id = "run";
  std::string output_dir = ".";
  long episode_budget = 2000;
  int eval_cadence = 10;    // greedy online evaluation every N episodes
  int eval_episodes = 5;    // rollouts per online evaluation
  long checkpoint_cadence = 200;
  std::uint64_t seed = 0;   // master seed for all derived streams
  EnvConfig env;
  TrainConfig train;

  void validate() const;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);
void save_run_config(const std::string& path, const RunConfig& config);
RunConfig load_run_config(const std::string& path);

// FNV-1a hash of the canonical JSON serialization; embedded in every
// output artifact so results can be traced back to their configuration.
std::uint64_t run_config_hash(const RunConfig& config);

// --- records -----------------------------------------------------------------

struct EpisodeRow {
  long episode = 0;
  double mean_reward = 0.0;  // mean of the step rewards
  double final_gamma = 0.0;  // total linking at the last step
  bool success = false;
};

struct EvalRow {
  long episode = 0;  // training episode count when the evaluation ran
  double success_rate = 0.0;
  double mean_final_gamma = 0.0;
};

struct RunRecord {
  std::vector<EpisodeRow> episodes;
  std::vector<EvalRow> evals;
};

// CSV emission. Every file starts with comment lines carrying the format
// version, code version, config hash, and run id. `append` skips the
// header and adds rows to an existing file (used when resuming).
void write_episode_csv(const std::string& path,
                       const std::vector<EpisodeRow>& rows,
                       std::uint64_t config_hash, const std::string& run_id,
                       bool append = false);
void write_eval_csv(const std::string& path, const std::vector<EvalRow>& rows,
                    std::uint64_t config_hash, const std::string& run_id,
                    bool append = false);

// Centered moving average with half-width 5 (a value and its 10 nearest
// neighbors), truncated at the ends; used for reported reward curves.
std::vector<double> smooth_curve(const std::vector<double>& raw);

// --- rollouts and evaluation ---------------------------------------------------

struct RolloutStats {
  double final_gamma = 0.0;
  bool success = false;
  double mean_reward = 0.0;
  std::vector<double> step_gammas;  // after each of the T steps
};

// One greedy (zero-variance) episode from a fresh reset with `env_seed`.
// When `normalizer` is non-null and has seen data, observations are
// standardized with it before being fed to the network (matching what a
// policy trained with observation normalization expects).
RolloutStats greedy_rollout(Environment& env, const NetworkParams& params,
                            std::uint64_t env_seed,
                            const ObsStats* normalizer = nullptr);

struct EvalSummary {
  double success_rate = 0.0;
  double mean_final_gamma = 0.0;
};

// `episodes` greedy rollouts on environments seeded from
// derive_seed(eval_seed, 4, k). Rollouts are independent, so they may run
// on `threads` parallel workers; results are aggregated in episode order,
// making the outcome identical for any thread count.
EvalSummary evaluate_policy(const EnvConfig& env_config,
                            const NetworkParams& params,
                            std::uint64_t eval_seed, int episodes, int threads,
                            std::vector<RolloutStats>* details = nullptr,
                            const ObsStats* normalizer = nullptr);

// --- training ------------------------------------------------------------------

struct TrainResult {
  NetworkParams params;
  TrainerSnapshot trainer;
  RunRecord record;                     // rows produced by THIS invocation
  std::vector<double> episode_wall_ms;  // sidecar timings, kept out of the CSVs
  std::vector<LossReport> episode_losses;  // last optimizer step per episode
  long start_episode = 0;               // > 0 when resumed from a checkpoint
};

// Runs the on-policy training loop: one stochastic episode per iteration, a
// sliding window of recent episodes, `updates_per_episode` optimizer steps
// per iteration (pooled window or round-robin per episode, per the config),
// a greedy evaluation every `eval_cadence` episodes, and periodic
// checkpoints written to <output_dir>/<run_id>.ckpt. Pass a checkpoint to
// continue a run from its episode counter (the episode window restarts
// empty; see the note in the implementation).
TrainResult train_policy(const RunConfig& config,
                         const Checkpoint* resume = nullptr);

// Convenience: path of the checkpoint file a run writes.
std::string checkpoint_path(const RunConfig& config);

}  // namespace wamtopo
