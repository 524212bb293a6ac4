#pragma once

#include "mvp/dataset.hpp"
#include "mvp/encoder.hpp"
#include "mvp/tensor.hpp"

namespace mvp {

/// Word-attention parameters: projection W_w (d_w x d_w), bias b_w and the
/// context vector p_w.
struct AttentionParams {
  Mat weight;
  Vec bias;
  Vec context;

  static AttentionParams initialize(Eigen::Index width, Rng& rng);
  static AttentionParams zeros(Eigen::Index width);
};

/// Intermediates kept from the forward pass for backpropagation.
struct AttentionTrace {
  Mat activations;  // tanh(W_w h + b_w) per token row
  Vec weights;      // attention weights, zero on masked rows
};

/// Attention-pooled post vector. The softmax runs over unmasked rows only.
/// Throws ShapeError when every row is masked.
Vec word_attention(const EncoderOutput& out, const AttentionParams& params, AttentionTrace* trace = nullptr);

/// Accumulates parameter gradients into `grad` and writes the gradient with
/// respect to the hidden rows into `d_hidden` (resized to match).
void word_attention_backward(const EncoderOutput& out, const AttentionParams& params, const AttentionTrace& trace,
                             const Vec& d_pooled, AttentionParams& grad, Mat& d_hidden);

/// The post representations H of one user: max_posts rows, rows past n_real
/// are zero.
struct UserPostMatrix {
  Mat rows;
  Mask post_mask;
  int n_real = 0;
};

struct PostTrace {
  EncoderOutput encoded;
  AttentionTrace attention;
};

/// Encodes and pools every post of the sample. When `traces` is given it
/// receives one entry per real post.
UserPostMatrix encode_user(const UserSample& sample, const EmbeddingEncoder& encoder, const AttentionParams& params,
                           int max_posts, int max_tokens, std::vector<PostTrace>* traces = nullptr);

}  // namespace mvp
