#include "lift/model/config.hpp"

#include <set>

#include "lift/model/params.hpp"

namespace lift::model {

const char* group_name(Group g) {
  switch (g) {
    case Group::align: return "align";
    case Group::encoder: return "encoder";
    case Group::decoder: return "decoder";
  }
  return "?";
}

Group group_from_name(const std::string& s) {
  if (s == "align") return Group::align;
  if (s == "encoder") return Group::encoder;
  if (s == "decoder") return Group::decoder;
  throw ConfigError("unknown parameter group: " + s);
}

const char* align_variant_name(AlignVariant v) {
  switch (v) {
    case AlignVariant::linear: return "linear";
    case AlignVariant::mlp2: return "mlp2";
    case AlignVariant::mlp3: return "mlp3";
  }
  return "?";
}

AlignVariant align_variant_from_name(const std::string& s) {
  if (s == "linear") return AlignVariant::linear;
  if (s == "mlp2") return AlignVariant::mlp2;
  if (s == "mlp3") return AlignVariant::mlp3;
  throw ConfigError("unknown alignment variant: " + s);
}

void ModelConfig::validate() const {
  if (d1 <= 0 || d2 <= 0 || align_hidden <= 0) throw ConfigError("model dims must be positive");
  if (enc_layers <= 0 || dec_layers <= 0) throw ConfigError("layer counts must be positive");
  if (d1 % enc_heads != 0 || d2 % dec_heads != 0) throw ConfigError("dims must divide heads");
  if (dtype != "f32" && dtype != "f64") throw ConfigError("dtype must be f32 or f64");
  std::set<int> ids = {pad_id, unk_id, bos_id, eos_id, enc_start_id, enc_end_id};
  if (ids.size() != 6) throw ConfigError("special token ids must be distinct");
}

nlohmann::json to_json(const ModelConfig& c) {
  return nlohmann::json{{"d1", c.d1},
                        {"d2", c.d2},
                        {"enc_layers", c.enc_layers},
                        {"enc_heads", c.enc_heads},
                        {"dec_layers", c.dec_layers},
                        {"dec_heads", c.dec_heads},
                        {"align_variant", align_variant_name(c.align_variant)},
                        {"align_hidden", c.align_hidden},
                        {"max_seq", c.max_seq},
                        {"enc_vocab", c.enc_vocab},
                        {"dec_vocab", c.dec_vocab},
                        {"pad_id", c.pad_id},
                        {"unk_id", c.unk_id},
                        {"bos_id", c.bos_id},
                        {"eos_id", c.eos_id},
                        {"enc_start_id", c.enc_start_id},
                        {"enc_end_id", c.enc_end_id},
                        {"enc_mask_id", c.enc_mask_id},
                        {"dtype", c.dtype}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d1 = j.at("d1").get<int>();
  c.d2 = j.at("d2").get<int>();
  c.enc_layers = j.at("enc_layers").get<int>();
  c.enc_heads = j.at("enc_heads").get<int>();
  c.dec_layers = j.at("dec_layers").get<int>();
  c.dec_heads = j.at("dec_heads").get<int>();
  c.align_variant = align_variant_from_name(j.at("align_variant").get<std::string>());
  c.align_hidden = j.at("align_hidden").get<int>();
  c.max_seq = j.at("max_seq").get<int>();
  c.enc_vocab = j.at("enc_vocab").get<int>();
  c.dec_vocab = j.at("dec_vocab").get<int>();
  c.pad_id = j.at("pad_id").get<int>();
  c.unk_id = j.at("unk_id").get<int>();
  c.bos_id = j.at("bos_id").get<int>();
  c.eos_id = j.at("eos_id").get<int>();
  c.enc_start_id = j.at("enc_start_id").get<int>();
  c.enc_end_id = j.at("enc_end_id").get<int>();
  c.enc_mask_id = j.at("enc_mask_id").get<int>();
  c.dtype = j.at("dtype").get<std::string>();
  c.validate();
  return c;
}

}  // namespace lift::model
