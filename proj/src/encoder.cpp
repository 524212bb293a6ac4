#include "mvp/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mvp/error.hpp"

namespace mvp {

int EncoderOutput::real_tokens() const {
  int n = 0;
  for (auto m : token_mask) n += m;
  return n;
}

EmbeddingEncoder EmbeddingEncoder::toy(Eigen::Index vocab_size, Eigen::Index width, Rng& rng) {
  EmbeddingEncoder enc;
  enc.kind = EncoderKind::kToy;
  enc.table = Mat::Zero(vocab_size, width);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  for (Eigen::Index r = 1; r < vocab_size; ++r) {
    for (Eigen::Index c = 0; c < width; ++c) enc.table(r, c) = rng.uniform(-bound, bound);
  }
  return enc;
}

EmbeddingEncoder EmbeddingEncoder::frozen(const std::filesystem::path& path, const Vocabulary& vocab,
                                          Eigen::Index width) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file '" + path.string() + "'");
  EmbeddingEncoder enc;
  enc.kind = EncoderKind::kFrozen;
  enc.table = Mat::Zero(static_cast<Eigen::Index>(vocab.size()), width);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    std::string v;
    while (fields >> v) values.push_back(std::stod(v));
    if (static_cast<Eigen::Index>(values.size()) != width) {
      throw ShapeError("embedding file line " + std::to_string(lineno) + " has " + std::to_string(values.size()) +
                       " values, expected " + std::to_string(width));
    }
    const TokenId id = vocab.lookup(token);
    if (id == Vocabulary::kUnknown && token != Vocabulary::kUnknownToken) continue;
    if (id == Vocabulary::kPad) continue;
    for (Eigen::Index c = 0; c < width; ++c) enc.table(id, c) = values[c];
  }
  return enc;
}

EncoderOutput encode_post(const TokenizedPost& post, const EmbeddingEncoder& encoder, int max_tokens) {
  EncoderOutput out{Mat::Zero(max_tokens, encoder.width()), Mask(max_tokens, 0)};
  const auto n = std::min<std::size_t>(post.length(), max_tokens);
  for (std::size_t l = 0; l < n; ++l) {
    const TokenId id = post.token_ids[l];
    if (id < 0 || id >= encoder.vocab_size()) {
      throw ShapeError("token id " + std::to_string(id) + " outside encoder vocabulary");
    }
    if (id == Vocabulary::kPad) continue;
    out.hidden.row(l) = encoder.table.row(id);
    out.token_mask[l] = 1;
  }
  return out;
}

void encode_post_backward(const TokenizedPost& post, const Mat& d_hidden, Mat& d_table) {
  const auto n = std::min<std::size_t>(post.length(), d_hidden.rows());
  for (std::size_t l = 0; l < n; ++l) {
    const TokenId id = post.token_ids[l];
    if (id == Vocabulary::kPad) continue;
    d_table.row(id) += d_hidden.row(l);
  }
}

}  // namespace mvp
