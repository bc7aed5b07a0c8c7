#include "wamtopo/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <vector>

#include "wamtopo/errors.hpp"

namespace wamtopo {

namespace {

constexpr char kMagic[8] = {'T', 'O', 'P', 'O', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i64(std::ostream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_tensor(std::ostream& out, const std::string& name,
                  const Eigen::MatrixXd& tensor) {
  write_string(out, name);
  write_u32(out, static_cast<std::uint32_t>(tensor.rows()));
  write_u32(out, static_cast<std::uint32_t>(tensor.cols()));
  out.write(reinterpret_cast<const char*>(tensor.data()),
            static_cast<std::streamsize>(sizeof(double)) * tensor.size());
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("checkpoint truncated while reading an integer");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("checkpoint truncated while reading an integer");
  return v;
}

std::int64_t read_i64(std::istream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw IoError("checkpoint truncated while reading an integer");
  return v;
}

std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > 4096) {
    throw CheckpointMismatchError("checkpoint string length is implausible");
  }
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("checkpoint truncated while reading a string");
  return s;
}

Eigen::MatrixXd read_tensor_data(std::istream& in) {
  const std::uint32_t rows = read_u32(in);
  const std::uint32_t cols = read_u32(in);
  if (rows > 1000000 || cols > 1000000) {
    throw CheckpointMismatchError("checkpoint tensor shape is implausible");
  }
  Eigen::MatrixXd tensor(rows, cols);
  in.read(reinterpret_cast<char*>(tensor.data()),
          static_cast<std::streamsize>(sizeof(double)) * tensor.size());
  if (!in) throw IoError("checkpoint truncated while reading tensor data");
  return tensor;
}

}  // namespace

void ObsStats::observe(const Eigen::VectorXd& x) {
  if (count == 0) {
    mean = Eigen::VectorXd::Zero(x.size());
    m2 = Eigen::VectorXd::Zero(x.size());
  }
  if (x.size() != mean.size()) {
    throw ShapeMismatchError("observation size changed under the running "
                             "normalizer");
  }
  count += 1;
  const Eigen::VectorXd delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta.cwiseProduct(x - mean);
}

Eigen::VectorXd ObsStats::normalize(const Eigen::VectorXd& x) const {
  if (count < 2) return x;
  if (x.size() != mean.size()) {
    throw ShapeMismatchError("observation size does not match the running "
                             "normalizer");
  }
  const Eigen::ArrayXd variance = m2.array() / static_cast<double>(count - 1);
  return ((x - mean).array() / (variance + 1e-8).sqrt()).matrix();
}

void save_checkpoint(const std::string& path, const NetworkParams& params,
                     std::uint64_t config_hash,
                     const TrainerSnapshot* trainer) {
  params.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint file for writing: " + path);

  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kFormatVersion);
  write_u64(out, config_hash);
  write_string(out, to_string(params.input_space));
  write_string(out, to_string(params.scenario));
  write_u32(out, static_cast<std::uint32_t>(params.widths.branch));
  write_u32(out, static_cast<std::uint32_t>(params.widths.merge));
  write_u32(out, static_cast<std::uint32_t>(params.widths.lstm));

  const auto named = params.named();
  write_u32(out, static_cast<std::uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    write_tensor(out, name, *tensor);
  }

  write_u32(out, trainer != nullptr ? 1u : 0u);
  if (trainer != nullptr) {
    if (!trainer->optimizer.m.empty() &&
        (trainer->optimizer.m.size() != named.size() ||
         trainer->optimizer.v.size() != named.size())) {
      throw ShapeMismatchError(
          "trainer snapshot moments do not match the parameter tensor list");
    }
    write_i64(out, trainer->episodes_done);
    write_i64(out, trainer->optimizer.step);
    write_u32(out, static_cast<std::uint32_t>(trainer->optimizer.m.size()));
    for (size_t i = 0; i < trainer->optimizer.m.size(); ++i) {
      write_tensor(out, named[i].first + ".m", trainer->optimizer.m[i]);
      write_tensor(out, named[i].first + ".v", trainer->optimizer.v[i]);
    }
    write_u32(out, trainer->obs_stats.enabled() ? 1u : 0u);
    if (trainer->obs_stats.enabled()) {
      write_i64(out, trainer->obs_stats.count);
      write_tensor(out, "obs_mean", trainer->obs_stats.mean);
      write_tensor(out, "obs_m2", trainer->obs_stats.m2);
    }
  }
  out.flush();
  if (!out) throw IoError("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file: " + path);

  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointMismatchError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != kFormatVersion) {
    throw CheckpointMismatchError("unsupported checkpoint format version " +
                                  std::to_string(version));
  }

  Checkpoint ckpt;
  ckpt.config_hash = read_u64(in);
  InputSpace space;
  Scenario scenario;
  try {
    space = input_space_from_string(read_string(in));
    scenario = scenario_from_string(read_string(in));
  } catch (const Error& e) {
    throw CheckpointMismatchError(std::string("bad checkpoint header: ") +
                                  e.what());
  }
  NetWidths widths;
  widths.branch = static_cast<int>(read_u32(in));
  widths.merge = static_cast<int>(read_u32(in));
  widths.lstm = static_cast<int>(read_u32(in));

  NetworkParams params;
  try {
    params = NetworkParams::zeros(space, scenario, widths);
  } catch (const Error& e) {
    throw CheckpointMismatchError(std::string("bad checkpoint widths: ") +
                                  e.what());
  }

  const std::uint32_t tensor_count = read_u32(in);
  std::map<std::string, Eigen::MatrixXd> stored;
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    const std::string name = read_string(in);
    stored[name] = read_tensor_data(in);
  }
  auto named = params.named();
  if (stored.size() != named.size()) {
    throw CheckpointMismatchError(
        "checkpoint holds " + std::to_string(stored.size()) +
        " tensors, this architecture has " + std::to_string(named.size()));
  }
  for (auto& [name, tensor] : named) {
    const auto it = stored.find(name);
    if (it == stored.end()) {
      throw CheckpointMismatchError("checkpoint is missing tensor " + name);
    }
    if (it->second.rows() != tensor->rows() ||
        it->second.cols() != tensor->cols()) {
      throw CheckpointMismatchError(
          "checkpoint tensor " + name + " is " +
          std::to_string(it->second.rows()) + "x" +
          std::to_string(it->second.cols()) + ", architecture expects " +
          std::to_string(tensor->rows()) + "x" +
          std::to_string(tensor->cols()));
    }
    *tensor = it->second;
  }

  const std::uint32_t has_trainer = read_u32(in);
  if (has_trainer == 1u) {
    ckpt.has_trainer = true;
    ckpt.trainer.episodes_done = static_cast<long>(read_i64(in));
    ckpt.trainer.optimizer.step = static_cast<long>(read_i64(in));
    const std::uint32_t moments = read_u32(in);
    if (moments != named.size()) {
      throw CheckpointMismatchError(
          "checkpoint trainer state holds " + std::to_string(moments) +
          " moment pairs, architecture has " + std::to_string(named.size()) +
          " tensors");
    }
    for (std::uint32_t i = 0; i < moments; ++i) {
      const std::string m_name = read_string(in);
      Eigen::MatrixXd m = read_tensor_data(in);
      const std::string v_name = read_string(in);
      Eigen::MatrixXd v = read_tensor_data(in);
      if (m_name != named[i].first + ".m" || v_name != named[i].first + ".v") {
        throw CheckpointMismatchError(
            "checkpoint trainer moments are out of order at " + m_name);
      }
      ckpt.trainer.optimizer.m.push_back(std::move(m));
      ckpt.trainer.optimizer.v.push_back(std::move(v));
    }
    const std::uint32_t has_stats = read_u32(in);
    if (has_stats == 1u) {
      ckpt.trainer.obs_stats.count = static_cast<long>(read_i64(in));
      if (read_string(in) != "obs_mean") {
        throw CheckpointMismatchError("corrupt normalizer section");
      }
      Eigen::MatrixXd mean = read_tensor_data(in);
      if (read_string(in) != "obs_m2") {
        throw CheckpointMismatchError("corrupt normalizer section");
      }
      Eigen::MatrixXd m2 = read_tensor_data(in);
      if (mean.cols() != 1 || m2.cols() != 1 || mean.rows() != m2.rows()) {
        throw CheckpointMismatchError("corrupt normalizer tensors");
      }
      ckpt.trainer.obs_stats.mean = mean.col(0);
      ckpt.trainer.obs_stats.m2 = m2.col(0);
    } else if (has_stats != 0u) {
      throw CheckpointMismatchError("corrupt normalizer flag in checkpoint");
    }
  } else if (has_trainer != 0u) {
    throw CheckpointMismatchError("corrupt trainer-state flag in checkpoint");
  }

  ckpt.params = std::move(params);
  return ckpt;
}

}  // namespace wamtopo
