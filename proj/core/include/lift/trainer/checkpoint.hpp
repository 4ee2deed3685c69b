#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lift/model/model.hpp"

namespace lift::train {

std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);

struct NamedTensor {
  std::string name;  // group-qualified
  int rows = 0;
  int cols = 0;
  std::vector<float> data;
};

// Little-endian container: magic, version, length-prefixed JSON header,
// name-prefixed f32 tensors, then per-group digests over the tensor records.
struct CheckpointData {
  nlohmann::json header;
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> group_digests;

  void recompute_digests();
};

void save_checkpoint(const CheckpointData& ckpt, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

// Digest of one group's serialized tensor records, computable without a file.
template <typename T>
std::string group_digest(const lift::model::LiftModel<T>& m, lift::model::Group g);

template <typename T>
CheckpointData to_checkpoint(const lift::model::LiftModel<T>& m, const std::string& stage_tag,
                             int64_t step, uint64_t seed);

// Overwrites the model's parameters from the checkpoint (names must match).
template <typename T>
void load_parameters(lift::model::LiftModel<T>& m, const CheckpointData& ckpt);

// --- template definitions -------------------------------------------------

namespace detail {
void append_tensor_record(std::string& buf, const NamedTensor& t);
}

template <typename T>
NamedTensor to_named(const lift::model::Parameter<T>& p) {
  NamedTensor nt;
  nt.name = p.name;
  nt.rows = p.value.rows();
  nt.cols = p.value.cols();
  nt.data.reserve(p.value.size());
  for (int64_t i = 0; i < p.value.size(); ++i) nt.data.push_back(static_cast<float>(p.value.vec()[i]));
  return nt;
}

template <typename T>
std::string group_digest(const lift::model::LiftModel<T>& m, lift::model::Group g) {
  std::string buf;
  for (size_t i = 0; i < m.store().size(); ++i) {
    const auto& p = m.store().at(i);
    if (p.group != g) continue;
    detail::append_tensor_record(buf, to_named(p));
  }
  return sha256_hex(buf);
}

template <typename T>
CheckpointData to_checkpoint(const lift::model::LiftModel<T>& m, const std::string& stage_tag,
                             int64_t step, uint64_t seed) {
  CheckpointData ckpt;
  ckpt.header = nlohmann::json{{"format_version", 1},
                               {"model_config", lift::model::to_json(m.config())},
                               {"stage", stage_tag},
                               {"step", step},
                               {"seed", seed}};
  for (size_t i = 0; i < m.store().size(); ++i) {
    ckpt.tensors.push_back(to_named(m.store().at(i)));
  }
  ckpt.recompute_digests();
  return ckpt;
}

template <typename T>
void load_parameters(lift::model::LiftModel<T>& m, const CheckpointData& ckpt) {
  if (ckpt.tensors.size() != m.store().size()) {
    throw FormatError("checkpoint parameter count does not match model");
  }
  for (size_t i = 0; i < ckpt.tensors.size(); ++i) {
    auto& p = m.store().at(i);
    const NamedTensor& nt = ckpt.tensors[i];
    if (nt.name != p.name || nt.rows != p.value.rows() || nt.cols != p.value.cols()) {
      throw FormatError("checkpoint tensor mismatch at " + nt.name);
    }
    for (int64_t k = 0; k < p.value.size(); ++k) p.value.vec()[k] = static_cast<T>(nt.data[k]);
  }
}

}  // namespace lift::train
