#ifndef TATN_CHECKPOINT_HPP
#define TATN_CHECKPOINT_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tatn/seq2seq.hpp"

// Checkpoint container: magic "TATN", format version, the full model config
// echoed as key=value text, the training seed, then named tensors (name,
// rank, dims, 32-bit floats, row-major). Little-endian fixed-width fields.

namespace tatn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig cfg;
  std::uint64_t seed = 0;
  std::map<std::string, Tensor<float>> params;
};

namespace detail {

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename U>
U take(std::istream& in, const std::string& path) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError(path + ": truncated checkpoint");
  return v;
}

inline std::string config_echo(const ModelConfig& c) {
  std::ostringstream os;
  os << "variant = " << variant_name(c.variant) << '\n'
     << "src_vocab = " << c.src_vocab << '\n'
     << "tgt_vocab = " << c.tgt_vocab << '\n'
     << "emb = " << c.emb << '\n'
     << "hidden = " << c.hidden << '\n'
     << "attn = " << c.attn << '\n'
     << "readout = " << c.readout << '\n'
     << "cov_dim = " << c.cov_dim << '\n'
     << "local_d = " << c.local_d << '\n'
     << "history_window = " << c.history_window << '\n';
  return os.str();
}

inline ModelConfig config_from_echo(const std::string& text, const std::string& path) {
  ModelConfig c;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    try {
      if (key == "variant") c.variant = variant_from_string(val);
      else if (key == "src_vocab") c.src_vocab = std::stoi(val);
      else if (key == "tgt_vocab") c.tgt_vocab = std::stoi(val);
      else if (key == "emb") c.emb = std::stoi(val);
      else if (key == "hidden") c.hidden = std::stoi(val);
      else if (key == "attn") c.attn = std::stoi(val);
      else if (key == "readout") c.readout = std::stoi(val);
      else if (key == "cov_dim") c.cov_dim = std::stoi(val);
      else if (key == "local_d") c.local_d = std::stod(val);
      else if (key == "history_window") c.history_window = std::stoi(val);
      else throw DataError(path + ": unknown checkpoint config key \"" + key + "\"");
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError(path + ": bad checkpoint config value for \"" + key + "\"");
    }
  }
  return c;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const ModelConfig& cfg, std::uint64_t seed,
                            const std::map<std::string, Tensor<float>>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out.write("TATN", 4);
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint64_t>(out, seed);
  std::string cfg_text = detail::config_echo(cfg);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg_text.size()));
  out.write(cfg_text.data(), static_cast<std::streamsize>(cfg_text.size()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put<std::uint32_t>(out, 2);
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows()));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols()));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!out) throw DataError("write failed: " + path);
}

inline void save_checkpoint(const std::string& path, const Model<float>& model,
                            std::uint64_t seed) {
  save_checkpoint(path, model.cfg, seed, model.params);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TATN", 4) != 0)
    throw DataError(path + ": not a checkpoint (bad magic)");
  std::uint32_t version = detail::take<std::uint32_t>(in, path);
  if (version != kCheckpointVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.seed = detail::take<std::uint64_t>(in, path);
  std::uint32_t cfg_len = detail::take<std::uint32_t>(in, path);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), cfg_len);
  if (!in) throw DataError(path + ": truncated checkpoint");
  ck.cfg = detail::config_from_echo(cfg_text, path);
  std::uint32_t n = detail::take<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t name_len = detail::take<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError(path + ": truncated checkpoint");
    std::uint32_t rank = detail::take<std::uint32_t>(in, path);
    if (rank != 2) throw DataError(path + ": tensor \"" + name + "\" has unsupported rank");
    std::uint32_t rows = detail::take<std::uint32_t>(in, path);
    std::uint32_t cols = detail::take<std::uint32_t>(in, path);
    Tensor<float> t(static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!in) throw DataError(path + ": truncated checkpoint");
    ck.params.emplace(std::move(name), std::move(t));
  }
  return ck;
}

inline Model<float> model_from_checkpoint(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  return Model<float>(ck.cfg, std::move(ck.params));
}

}  // namespace tatn

#endif
