/* Copyright 2026 The AON Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "aon/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <zlib.h>

namespace aon {

namespace {

constexpr char kMagic[4] = {'A', 'O', 'N', '1'};
constexpr std::uint8_t kDtypeF32 = 0;
const std::string kSqGrad = "adadelta.sq_grad/";
const std::string kSqUpdate = "adadelta.sq_update/";

template <typename U>
void put(std::string& out, U v) {
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.append(reinterpret_cast<const char*>(b), sizeof(U));
}

void put_f32(std::string& out, const Tensor<float>& t) {
  if constexpr (std::endian::native == std::endian::little) {
    out.append(reinterpret_cast<const char*>(t.ptr()), sizeof(float) * t.data().size());
  } else {
    for (float v : t.data()) put(out, std::bit_cast<std::uint32_t>(v));
  }
}

void put_record(std::string& out, const std::string& name, const Tensor<float>& t) {
  put(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put(out, kDtypeF32);
  put(out, static_cast<std::uint32_t>(t.rank()));
  for (Index d : t.shape()) put(out, static_cast<std::uint64_t>(d));
  put_f32(out, t);
}

std::uint32_t crc_of(const char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end, const std::string& origin)
      : bytes_(bytes), end_(end), origin_(origin) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }
  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void read_f32(float* dst, std::size_t count, const char* what) {
    if (count > (end_ - pos_) / sizeof(float)) fail(std::string("truncated ") + what);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(dst, bytes_.data() + pos_, count * sizeof(float));
      pos_ += count * sizeof(float);
    } else {
      for (std::size_t i = 0; i < count; ++i) dst[i] = std::bit_cast<float>(get<std::uint32_t>(what));
    }
  }
  bool done() const { return pos_ == end_; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(origin_ + ": " + msg + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (n > end_ - pos_) fail(std::string("truncated ") + what);
  }
  const std::string& bytes_;
  std::size_t pos_ = 0, end_;
  std::string origin_;
};

}  // namespace

std::string serialize_checkpoint(const AonModel<float>& model, std::uint64_t step,
                                 const Adadelta<float>* optimizer) {
  std::string out(kMagic, 4);
  put(out, kCheckpointVersion);
  const std::string blob = model.config().to_text() + "train_step = " + std::to_string(step) + "\n";
  put(out, static_cast<std::uint32_t>(blob.size()));
  out += blob;
  for (const auto& [name, t] : model.params()) put_record(out, name, t);
  for (const auto& [name, t] : model.buffers()) put_record(out, name, t);
  if (optimizer) {
    for (const auto& [name, t] : optimizer->sq_grad()) put_record(out, kSqGrad + name, t);
    for (const auto& [name, t] : optimizer->sq_update()) put_record(out, kSqUpdate + name, t);
  }
  put(out, crc_of(out.data(), out.size()));
  return out;
}

void save_checkpoint(const std::string& path, const AonModel<float>& model, std::uint64_t step,
                     const Adadelta<float>* optimizer) {
  const std::string bytes = serialize_checkpoint(model, step, optimizer);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

CheckpointData parse_checkpoint(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(origin + ": not a checkpoint (bad magic)");
  }
  if (bytes.size() < 12) throw FormatError(origin + ": truncated header");
  const std::size_t body = bytes.size() - 4;
  Reader crc_reader(bytes, bytes.size(), origin);
  crc_reader.take(body, "body");
  const auto stored = crc_reader.get<std::uint32_t>("checksum");
  Reader r(bytes, body, origin);
  r.take(4, "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(origin + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (crc_of(bytes.data(), body) != stored) {
    throw FormatError(origin + ": checksum mismatch (corrupt or truncated file)");
  }
  const auto blob_len = r.get<std::uint32_t>("config length");
  const std::string blob = r.take(blob_len, "config blob");
  CheckpointData data;
  const KeyValues kv = KeyValues::parse(blob, origin + " config");
  std::set<std::string> known = ModelConfig::keys();
  known.insert("train_step");
  kv.require_known(known);
  data.config = ModelConfig::from_key_values(kv);
  data.step = static_cast<std::uint64_t>(kv.get_int("train_step", 0));
  std::set<std::string> names;
  while (!r.done()) {
    const auto name_len = r.get<std::uint32_t>("record name length");
    std::string name = r.take(name_len, "record name");
    if (!names.insert(name).second) r.fail("duplicate record `" + name + "`");
    const auto dtype = r.get<std::uint8_t>("dtype");
    if (dtype != kDtypeF32) r.fail("record `" + name + "` has unknown dtype " + std::to_string(dtype));
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) r.fail("record `" + name + "` has rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = r.get<std::uint64_t>("dims");
      if (d == 0 || d > (std::uint64_t{1} << 40) || count > (std::uint64_t{1} << 40) / d) {
        r.fail("record `" + name + "` has an invalid shape");
      }
      count *= d;
      shape.push_back(static_cast<Index>(d));
    }
    Tensor<float> t(shape);
    r.read_f32(t.ptr(), static_cast<std::size_t>(t.size()), "payload");
    data.records.emplace_back(std::move(name), std::move(t));
  }
  return data;
}

CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str(), path);
}

void restore_checkpoint(const CheckpointData& data, AonModel<float>& model,
                        Adadelta<float>* optimizer) {
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& [name, t] : data.records) by_name[name] = &t;
  std::size_t used = 0;
  auto copy_into = [&](const std::string& key, Tensor<float>& dst) {
    auto it = by_name.find(key);
    if (it == by_name.end()) throw DimensionError("checkpoint lacks tensor `" + key + "`");
    if (it->second->shape() != dst.shape()) {
      throw DimensionError("checkpoint tensor `" + key + "` has shape " +
                           to_string(it->second->shape()) + ", model expects " +
                           to_string(dst.shape()));
    }
    std::copy(it->second->data().begin(), it->second->data().end(), dst.data().begin());
    ++used;
  };
  for (auto& [name, t] : model.params()) copy_into(name, t);
  for (auto& [name, t] : model.buffers()) copy_into(name, t);
  std::size_t optimizer_records = 0;
  for (const auto& [name, t] : data.records) {
    if (name.rfind(kSqGrad, 0) == 0 || name.rfind(kSqUpdate, 0) == 0) ++optimizer_records;
  }
  if (optimizer && optimizer_records > 0) {
    for (auto& [name, t] : optimizer->sq_grad()) copy_into(kSqGrad + name, t);
    for (auto& [name, t] : optimizer->sq_update()) copy_into(kSqUpdate + name, t);
  } else {
    used += optimizer_records;
  }
  if (used != data.records.size()) {
    for (const auto& [name, t] : data.records) {
      if (!model.params().contains(name) && !model.buffers().contains(name) &&
          name.rfind("adadelta.", 0) != 0) {
        throw DimensionError("checkpoint has tensor `" + name + "` unknown to the model");
      }
    }
    throw DimensionError("checkpoint optimizer state does not match the model");
  }
}

std::unique_ptr<AonModel<float>> load_model(const std::string& path,
                                            std::optional<EncodeMode> mode) {
  const CheckpointData data = read_checkpoint(path);
  ModelConfig config = data.config;
  if (mode) config.encoder.mode = *mode;
  auto model = std::make_unique<AonModel<float>>(config, 0);
  restore_checkpoint(data, *model);
  model->set_training(false);
  return model;
}

}  // namespace aon
