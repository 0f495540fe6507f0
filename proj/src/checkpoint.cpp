// SPDX-License-Identifier: Apache-2.0
#include "tsgan/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <type_traits>

namespace tsgan {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic{'T', 'S', 'G', 'A', 'N', 'C', 'K', 'P'};

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& in) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("truncated checkpoint");
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

std::string decimal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_decimal(const json& j) {
  const auto s = j.get<std::string>();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw DataError("bad decimal '" + s + "' in checkpoint");
  return v;
}

template <typename Value>
struct Entry {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  std::span<Value> values;
};

// Every array in the checkpoint, in file order. Loading calls this on a
// Checkpoint whose shapes are set up but whose values are not yet filled.
template <typename Ckpt>
auto entries(Ckpt& c) {
  using Value = std::conditional_t<std::is_const_v<Ckpt>, const double, double>;
  std::vector<Entry<Value>> out;
  auto add_params = [&](const auto& blocks, auto& adam, const std::string& adam_prefix) {
    for (const auto& b : blocks) out.push_back({b.name, b.rows, b.cols, b.values});
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      auto& m = adam.m[i];
      auto& v = adam.v[i];
      out.push_back({adam_prefix + ".m." + blocks[i].name, blocks[i].rows, blocks[i].cols,
                     {m.data(), static_cast<std::size_t>(m.size())}});
      out.push_back({adam_prefix + ".v." + blocks[i].name, blocks[i].rows, blocks[i].cols,
                     {v.data(), static_cast<std::size_t>(v.size())}});
    }
  };
  add_params(param_blocks(c.generator), c.adam_g, "adam_g");
  add_params(param_blocks(c.discriminator), c.adam_d, "adam_d");
  auto add_series = [&](const char* name, auto& v) {
    out.push_back({name, static_cast<Eigen::Index>(v.size()), 1, {v.data(), v.size()}});
  };
  add_series("history.epoch_d", c.history.epoch_d);
  add_series("history.epoch_g", c.history.epoch_g);
  add_series("history.batch_d", c.history.batch_d);
  add_series("history.batch_g", c.history.batch_g);
  return out;
}

}  // namespace

json config_to_json(const TrainConfig& c) {
  return json{{"noise_dim", c.noise_dim},     {"condition_dim", c.condition_dim},
              {"batch_size", c.batch_size},   {"epochs", c.epochs},
              {"lr", c.lr},                   {"beta1", c.beta1},
              {"beta2", c.beta2},             {"epsilon", c.epsilon},
              {"seed", c.seed},               {"hidden_size", c.hidden_size},
              {"disc_layers", c.disc_layers}, {"clip_norm", c.clip_norm},
              {"init", std::string(to_string(c.init))}, {"train_fraction", c.train_fraction}};
}

TrainConfig config_from_json(const json& j, TrainConfig c) {
  try {
    auto read = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    read("noise_dim", c.noise_dim);
    read("condition_dim", c.condition_dim);
    read("batch_size", c.batch_size);
    read("epochs", c.epochs);
    read("lr", c.lr);
    read("beta1", c.beta1);
    read("beta2", c.beta2);
    read("epsilon", c.epsilon);
    read("seed", c.seed);
    read("hidden_size", c.hidden_size);
    read("disc_layers", c.disc_layers);
    read("clip_norm", c.clip_norm);
    read("train_fraction", c.train_fraction);
    if (j.contains("init")) c.init = init_scheme_from_string(j.at("init").get<std::string>());
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad training config: ") + e.what());
  }
  return c;
}

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& c = ckpt;
  const auto blocks = entries(c);

  json directory = json::array();
  for (const auto& e : blocks) directory.push_back({{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}});
  const json header{
      {"format", "tsgan-checkpoint"},
      {"version", kCheckpointVersion},
      {"config", config_to_json(c.config)},
      {"scaler", {{"mean", decimal(c.scaler.mean)}, {"stddev", decimal(c.scaler.stddev)}, {"n_fitted", c.scaler.n_fitted}}},
      {"epoch", c.epoch},
      {"adam_g_t", c.adam_g.t},
      {"adam_d_t", c.adam_d.t},
      {"rng_state", c.rng_state},
      {"blocks", directory},
  };
  const std::string text = header.dump();

  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& e : blocks) {
    for (double v : e.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw DataError("failed writing checkpoint");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  save_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("not a tsgan checkpoint");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint version mismatch: file has " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }
  const auto header_len = get_le<std::uint64_t>(in);
  if (header_len > (std::uint64_t{1} << 30)) throw DataError("corrupt checkpoint header length");
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("truncated checkpoint header");

  Checkpoint c;
  try {
    const json header = json::parse(text);
    c.config = config_from_json(header.at("config"));
    c.config.validate();
    const auto& s = header.at("scaler");
    c.scaler = {parse_decimal(s.at("mean")), parse_decimal(s.at("stddev")), s.at("n_fitted").get<std::size_t>()};
    c.epoch = header.at("epoch").get<std::size_t>();
    c.rng_state = header.at("rng_state").get<std::string>();

    // Shape everything from the config, then fill from the block data.
    TrainConfig shape_config = c.config;
    shape_config.init = InitScheme::zeros;
    Rng unused;
    c.generator = make_generator(shape_config, unused);
    c.discriminator = make_discriminator(shape_config, unused);
    c.adam_g = make_adam_state(param_blocks(std::as_const(c.generator)), c.config.adam());
    c.adam_d = make_adam_state(param_blocks(std::as_const(c.discriminator)), c.config.adam());
    c.adam_g.t = header.at("adam_g_t").get<std::int64_t>();
    c.adam_d.t = header.at("adam_d_t").get<std::int64_t>();

    std::map<std::string, std::size_t> history_sizes;
    for (const auto& b : header.at("blocks")) {
      const auto name = b.at("name").get<std::string>();
      if (name.rfind("history.", 0) == 0) history_sizes[name] = b.at("rows").get<std::size_t>();
    }
    c.history.epoch_d.resize(history_sizes["history.epoch_d"]);
    c.history.epoch_g.resize(history_sizes["history.epoch_g"]);
    c.history.batch_d.resize(history_sizes["history.batch_d"]);
    c.history.batch_g.resize(history_sizes["history.batch_g"]);

    const auto expected = entries(c);
    const auto& directory = header.at("blocks");
    if (directory.size() != expected.size()) throw DataError("checkpoint block count does not match its config");
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& d = directory[i];
      const auto& e = expected[i];
      if (d.at("name").get<std::string>() != e.name || d.at("rows").get<Eigen::Index>() != e.rows ||
          d.at("cols").get<Eigen::Index>() != e.cols) {
        throw DataError("checkpoint block " + std::to_string(i) + " ('" + d.at("name").get<std::string>() +
                        "') does not match expected '" + e.name + "'");
      }
    }
    for (const auto& e : expected) {
      for (double& v : e.values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint holds an invalid config: ") + e.what());
  }
  if (c.history.epoch_d.size() != c.epoch || c.history.epoch_g.size() != c.epoch) {
    throw DataError("checkpoint loss history does not match its epoch count");
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in);
}

}  // namespace tsgan
