#pragma once

#include <filesystem>
#include <string>

#include "mvp/dataset.hpp"
#include "mvp/rng.hpp"
#include "mvp/tensor.hpp"
#include "mvp/vocabulary.hpp"

namespace mvp {

/// Token-level hidden states of one post: max_tokens rows, padding rows zero.
struct EncoderOutput {
  Mat hidden;
  Mask token_mask;

  Eigen::Index width() const { return hidden.cols(); }
  int real_tokens() const;
};

enum class EncoderKind { kToy, kFrozen };

/// Per-token lookup encoder standing in for a pretrained language model.
/// The toy variant is a trainable table; the frozen variant is loaded from
/// an embedding file and never updated.
struct EmbeddingEncoder {
  EncoderKind kind = EncoderKind::kToy;
  Mat table;  // vocab_size x d_w, row 0 (padding) is zero

  bool trainable() const { return kind == EncoderKind::kToy; }
  Eigen::Index width() const { return table.cols(); }
  Eigen::Index vocab_size() const { return table.rows(); }

  /// uniform(+-1/sqrt(d_w)) rows; the padding row stays zero.
  static EmbeddingEncoder toy(Eigen::Index vocab_size, Eigen::Index width, Rng& rng);

  /// Reads "token v1 ... vd" records (whitespace separated). Vocabulary
  /// tokens missing from the file get a zero row. Throws ShapeError when a
  /// record does not carry exactly `width` values.
  static EmbeddingEncoder frozen(const std::filesystem::path& path, const Vocabulary& vocab, Eigen::Index width);
};

/// Row l of the output is the embedding of token l; rows past the post
/// length are zero and masked out.
EncoderOutput encode_post(const TokenizedPost& post, const EmbeddingEncoder& encoder, int max_tokens);

/// Adds d_hidden rows into the gradient table for each real token.
void encode_post_backward(const TokenizedPost& post, const Mat& d_hidden, Mat& d_table);

}  // namespace mvp
