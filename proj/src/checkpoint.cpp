#include "mvp/checkpoint.hpp"

#include <fstream>

#include "mvp/error.hpp"

namespace mvp {

using nlohmann::json;

json checkpoint_to_json(const MvpModel& model) {
  MvpModel m = model;
  json tensors = json::array();
  for (const auto& t : m.tensors()) {
    std::vector<double> flat;
    flat.reserve(t.size());
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) flat.push_back(t.data[r + c * t.rows]);
    }
    tensors.push_back({{"name", t.name}, {"shape", {t.rows, t.cols}}, {"data", std::move(flat)}});
  }
  const auto& s = model.shape;
  return {
      {"format", "mvp-checkpoint"},
      {"version", kCheckpointVersion},
      {"shape",
       {{"vocab_size", s.vocab_size},
        {"d_w", s.d_w},
        {"d_v", s.d_v},
        {"experts", s.experts},
        {"traits", s.traits},
        {"max_posts", s.max_posts},
        {"max_tokens", s.max_tokens}}},
      {"encoder", model.encoder.kind == EncoderKind::kToy ? "toy" : "frozen"},
      {"tensors", std::move(tensors)},
  };
}

MvpModel checkpoint_from_json(const json& j) {
  if (j.value("format", "") != "mvp-checkpoint") throw DataError("not an mvp checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  const json& js = j.at("shape");
  ModelShape shape;
  shape.vocab_size = js.at("vocab_size");
  shape.d_w = js.at("d_w");
  shape.d_v = js.at("d_v");
  shape.experts = js.at("experts");
  shape.traits = js.at("traits");
  shape.max_posts = js.at("max_posts");
  shape.max_tokens = js.at("max_tokens");

  MvpModel model;
  model.shape = shape;
  model.encoder.kind = j.at("encoder") == "frozen" ? EncoderKind::kFrozen : EncoderKind::kToy;
  model.encoder.table = Mat::Zero(shape.vocab_size, shape.d_w);
  model = model.zeros_like();

  auto refs = model.tensors();
  const json& tensors = j.at("tensors");
  if (tensors.size() != refs.size()) {
    throw ShapeError("checkpoint has " + std::to_string(tensors.size()) + " tensors, expected " +
                     std::to_string(refs.size()));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const json& t = tensors[i];
    const auto& ref = refs[i];
    if (t.at("name") != ref.name) throw ShapeError("checkpoint tensor " + std::to_string(i) + " is not " + ref.name);
    const auto dims = t.at("shape").get<std::vector<Eigen::Index>>();
    if (dims.size() != 2 || dims[0] != ref.rows || dims[1] != ref.cols) {
      throw ShapeError("checkpoint tensor " + ref.name + " has the wrong shape");
    }
    const auto& data = t.at("data");
    if (static_cast<Eigen::Index>(data.size()) != ref.size()) {
      throw ShapeError("checkpoint tensor " + ref.name + " has the wrong length");
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < ref.rows; ++r) {
      for (Eigen::Index c = 0; c < ref.cols; ++c) ref.data[r + c * ref.rows] = data[k++].get<double>();
    }
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const MvpModel& model) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out << checkpoint_to_json(model).dump() << '\n';
}

MvpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint '" + path.string() + "'");
  }
  return checkpoint_from_json(j);
}

}  // namespace mvp
