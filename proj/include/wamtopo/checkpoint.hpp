#pragma once

#include <cstdint>
#include <string>

#include "wamtopo/network.hpp"
#include "wamtopo/ppo.hpp"

namespace wamtopo {

// Running per-coordinate observation statistics (Welford form: count, mean,
// and sum of squared deviations). Used only when observation normalization
// is switched on.
struct ObsStats {
  long count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  void observe(const Eigen::VectorXd& x);
  // (x - mean) / sqrt(variance + 1e-8); identity until two samples arrive.
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  bool enabled() const { return count > 0; }
};

// Optimizer and progress state stored alongside the parameters so training
// can resume mid-run.
struct TrainerSnapshot {
  long episodes_done = 0;
  AdamState optimizer;
  ObsStats obs_stats;  // empty unless observation normalization is on
};

// Everything a checkpoint file holds.
struct Checkpoint {
  NetworkParams params;
  std::uint64_t config_hash = 0;  // hash of the run configuration that wrote it
  bool has_trainer = false;
  TrainerSnapshot trainer;
};

// Binary format (little-endian), self-describing: an 8-byte magic, a format
// version, the config hash, input space / scenario tags, layer widths, then
// every parameter tensor as (name, rows, cols, float64 data), and optionally
// the trainer snapshot (episode counter, Adam step, per-tensor moments).
// Write/read round-trips are bit-exact.
void save_checkpoint(const std::string& path, const NetworkParams& params,
                     std::uint64_t config_hash,
                     const TrainerSnapshot* trainer = nullptr);

// Throws IoError if the file cannot be read and CheckpointMismatchError if
// the magic, version, tags, or tensor inventory do not describe a network
// this build can load.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wamtopo
