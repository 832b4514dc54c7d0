#include "mtorl/io/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mtorl/common/errors.hpp"
#include "mtorl/io/config_json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace mtorl::io {

namespace {

constexpr char kMagic[] = "MTORLCKPT";
constexpr std::size_t kMagicLen = 9;
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxNameLen = 4096;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_i32(std::ostream& out, std::int32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated checkpoint");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated checkpoint");
  return v;
}

std::int32_t read_i32(std::istream& in) {
  std::int32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw DataError("truncated checkpoint");
  return v;
}

std::string read_bytes(std::istream& in, std::size_t count, const char* what) {
  std::string buf(count, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(count));
  if (!in) throw DataError(std::string("truncated checkpoint while reading ") + what);
  return buf;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  for (const auto& [name, tensor] : checkpoint.params.tensors) {
    if (!tensor.all_finite()) {
      throw DataError("refusing to save non-finite values in tensor '" + name + "'");
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");

  out.write(kMagic, kMagicLen);
  write_u32(out, kVersion);

  const nlohmann::json config_blob{{"model", to_json(checkpoint.config)},
                                   {"reward", to_json(checkpoint.reward)}};
  const std::string config_text = config_blob.dump();
  write_u32(out, static_cast<std::uint32_t>(config_text.size()));
  out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));

  write_u64(out, checkpoint.params.tensors.size());
  for (const auto& [name, tensor] : checkpoint.params.tensors) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (int a = 0; a < tensor.rank(); ++a) write_i32(out, tensor.dim(a));
    out.write(reinterpret_cast<const char*>(tensor.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(tensor.size())));
  }
  out.flush();
  if (!out) throw DataError("failed writing checkpoint to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");

  const std::string magic = read_bytes(in, kMagicLen, "magic");
  if (std::memcmp(magic.data(), kMagic, kMagicLen) != 0) {
    throw DataError("'" + path + "' is not a checkpoint file");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }

  const std::uint32_t config_len = read_u32(in);
  const std::string config_text = read_bytes(in, config_len, "config");
  nlohmann::json config_blob;
  try {
    config_blob = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint config: ") + e.what());
  }
  if (!config_blob.is_object() || !config_blob.contains("model") || !config_blob.contains("reward")) {
    throw DataError("corrupt checkpoint config: missing model or reward section");
  }

  Checkpoint checkpoint;
  checkpoint.config = model_config_from_json(config_blob.at("model"));
  checkpoint.reward = reward_spec_from_json(config_blob.at("reward"));
  checkpoint.config.validate();

  const std::uint64_t tensor_count = read_u64(in);
  for (std::uint64_t i = 0; i < tensor_count; ++i) {
    const std::uint32_t name_len = read_u32(in);
    if (name_len == 0 || name_len > kMaxNameLen) throw DataError("corrupt checkpoint tensor name");
    const std::string name = read_bytes(in, name_len, "tensor name");
    const std::uint32_t rank = read_u32(in);
    if (rank < 1 || rank > 3) {
      throw DataError("corrupt checkpoint: tensor '" + name + "' has rank " + std::to_string(rank));
    }
    std::vector<int> shape;
    std::size_t count = 1;
    for (std::uint32_t a = 0; a < rank; ++a) {
      const std::int32_t dim = read_i32(in);
      if (dim < 1 || dim > (1 << 24)) {
        throw DataError("corrupt checkpoint: tensor '" + name + "' has dimension " + std::to_string(dim));
      }
      shape.push_back(dim);
      count *= static_cast<std::size_t>(dim);
    }
    num::Tensor tensor(shape);
    in.read(reinterpret_cast<char*>(tensor.data()),
            static_cast<std::streamsize>(sizeof(double) * count));
    if (!in) throw DataError("truncated checkpoint while reading tensor '" + name + "'");
    if (!checkpoint.params.tensors.emplace(name, std::move(tensor)).second) {
      throw DataError("corrupt checkpoint: duplicate tensor '" + name + "'");
    }
  }
  in.peek();
  if (!in.eof()) throw DataError("trailing bytes after checkpoint payload");

  model::validate_params(checkpoint.config, checkpoint.params);
  return checkpoint;
}

}  // namespace mtorl::io
