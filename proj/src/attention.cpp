#include "mvp/attention.hpp"

#include <cmath>
#include <limits>

#include "mvp/error.hpp"

namespace mvp {

AttentionParams AttentionParams::initialize(Eigen::Index width, Rng& rng) {
  AttentionParams p = zeros(width);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  fill_uniform(p.weight, bound, rng);
  fill_uniform(p.context, bound, rng);
  return p;
}

AttentionParams AttentionParams::zeros(Eigen::Index width) {
  return {Mat::Zero(width, width), Vec::Zero(width), Vec::Zero(width)};
}

Vec word_attention(const EncoderOutput& out, const AttentionParams& params, AttentionTrace* trace) {
  const Eigen::Index len = out.hidden.rows();
  if (out.width() != params.weight.cols()) {
    throw ShapeError("encoder width " + std::to_string(out.width()) + " does not match attention width " +
                     std::to_string(params.weight.cols()));
  }
  // Row by row so that results do not depend on the padded length.
  Mat act(len, params.weight.rows());
  Vec scores(len);
  for (Eigen::Index l = 0; l < len; ++l) {
    const Vec a = (params.weight * out.hidden.row(l).transpose() + params.bias).array().tanh();
    act.row(l) = a.transpose();
    scores(l) = a.dot(params.context);
  }

  double max_score = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index l = 0; l < len; ++l) {
    if (!out.token_mask[l]) continue;
    any = true;
    max_score = std::max(max_score, scores(l));
  }
  if (!any) throw ShapeError("word attention needs at least one unmasked token");

  Vec weights = Vec::Zero(len);
  double total = 0.0;
  for (Eigen::Index l = 0; l < len; ++l) {
    if (!out.token_mask[l]) continue;
    weights(l) = std::exp(scores(l) - max_score);
    total += weights(l);
  }
  weights /= total;

  Vec pooled = Vec::Zero(out.width());
  for (Eigen::Index l = 0; l < len; ++l) {
    if (out.token_mask[l]) pooled += weights(l) * out.hidden.row(l).transpose();
  }
  if (trace) {
    trace->activations = std::move(act);
    trace->weights = std::move(weights);
  }
  return pooled;
}

void word_attention_backward(const EncoderOutput& out, const AttentionParams& params, const AttentionTrace& trace,
                             const Vec& d_pooled, AttentionParams& grad, Mat& d_hidden) {
  const Vec& alpha = trace.weights;
  // pooled = sum_l alpha_l x_l
  const Vec d_alpha = out.hidden * d_pooled;
  d_hidden = alpha * d_pooled.transpose();

  // softmax over unmasked positions; masked alpha are zero so they drop out
  const double mean_d = alpha.dot(d_alpha);
  const Vec d_score = alpha.cwiseProduct((d_alpha.array() - mean_d).matrix());

  grad.context.noalias() += trace.activations.transpose() * d_score;
  // d pre-activation = d_score * p_w, through tanh
  Mat d_pre = d_score * params.context.transpose();
  d_pre.array() *= (1.0 - trace.activations.array().square());
  for (Eigen::Index l = 0; l < d_pre.rows(); ++l) {
    if (!out.token_mask[l]) d_pre.row(l).setZero();
  }
  grad.weight.noalias() += d_pre.transpose() * out.hidden;
  grad.bias.noalias() += d_pre.colwise().sum().transpose();
  d_hidden.noalias() += d_pre * params.weight;
}

UserPostMatrix encode_user(const UserSample& sample, const EmbeddingEncoder& encoder, const AttentionParams& params,
                           int max_posts, int max_tokens, std::vector<PostTrace>* traces) {
  UserPostMatrix h{Mat::Zero(max_posts, encoder.width()), Mask(max_posts, 0), 0};
  const auto n = std::min<std::size_t>(sample.posts.size(), max_posts);
  if (traces) {
    traces->clear();
    traces->reserve(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    EncoderOutput encoded = encode_post(sample.posts[i], encoder, max_tokens);
    AttentionTrace at;
    h.rows.row(i) = word_attention(encoded, params, traces ? &at : nullptr).transpose();
    h.post_mask[i] = 1;
    ++h.n_real;
    if (traces) traces->push_back(PostTrace{std::move(encoded), std::move(at)});
  }
  if (h.n_real == 0) throw ShapeError("user " + sample.user_id + " has no posts");
  return h;
}

}  // namespace mvp
