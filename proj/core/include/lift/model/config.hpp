#pragma once

#include <string>

#include <json.hpp>

#include "lift/errors.hpp"

namespace lift::model {

enum class AlignVariant { linear, mlp2, mlp3 };
const char* align_variant_name(AlignVariant v);
AlignVariant align_variant_from_name(const std::string& s);

struct ModelConfig {
  int d1 = 64;  // encoder hidden size
  int d2 = 64;  // decoder embedding size
  int enc_layers = 2;
  int enc_heads = 4;
  int dec_layers = 2;
  int dec_heads = 4;
  AlignVariant align_variant = AlignVariant::mlp2;
  int align_hidden = 128;
  int max_seq = 192;
  int enc_vocab = 0;
  int dec_vocab = 0;
  // decoder-vocabulary special ids (enc_start/enc_end are reserved ids whose
  // embeddings live in the alignment group, not the decoder table)
  int pad_id = 0;
  int unk_id = 1;
  int bos_id = 2;
  int eos_id = 3;
  int enc_start_id = 4;
  int enc_end_id = 5;
  int enc_mask_id = 2;  // encoder-vocabulary <mask>
  std::string dtype = "f32";

  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace lift::model
