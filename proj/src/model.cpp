#include "mvp/model.hpp"

#include "mvp/error.hpp"

namespace mvp {

MvpModel MvpModel::initialize(const ModelShape& shape, Rng& rng) {
  if (shape.vocab_size < 2 || shape.d_w < 1 || shape.d_v < 1 || shape.experts < 1 || shape.traits < 1 ||
      shape.max_posts < 1 || shape.max_tokens < 1) {
    throw ShapeError("model dimensions must be positive");
  }
  MvpModel m;
  m.shape = shape;
  m.encoder = EmbeddingEncoder::toy(shape.vocab_size, shape.d_w, rng);
  m.attention = AttentionParams::initialize(shape.d_w, rng);
  for (int k = 0; k < shape.experts; ++k) m.experts.push_back(ExpertParams::initialize(shape.d_w, shape.d_v, rng));
  m.gate = GateParams::initialize(shape.d_w, shape.experts, rng);
  m.head = TraitHeadParams::initialize(shape.d_v, shape.traits, rng);
  return m;
}

MvpModel MvpModel::zeros_like() const {
  MvpModel m;
  m.shape = shape;
  m.encoder.kind = encoder.kind;
  m.encoder.table = Mat::Zero(encoder.table.rows(), encoder.table.cols());
  m.attention = AttentionParams::zeros(shape.d_w);
  for (int k = 0; k < shape.experts; ++k) m.experts.push_back(ExpertParams::zeros(shape.d_w, shape.d_v));
  m.gate = GateParams::zeros(shape.d_w, shape.experts);
  m.head = TraitHeadParams::zeros(shape.d_v, shape.traits);
  return m;
}

std::vector<TensorRef> MvpModel::tensors() {
  std::vector<TensorRef> refs;
  refs.push_back(make_ref("encoder.embedding", encoder.table, ParamGroup::kEncoder, encoder.trainable()));
  refs.push_back(make_ref("attention.weight", attention.weight, ParamGroup::kOther));
  refs.push_back(make_ref("attention.bias", attention.bias, ParamGroup::kOther));
  refs.push_back(make_ref("attention.context", attention.context, ParamGroup::kOther));
  for (std::size_t k = 0; k < experts.size(); ++k) {
    const std::string prefix = "experts." + std::to_string(k);
    refs.push_back(make_ref(prefix + ".center", experts[k].center, ParamGroup::kOther));
    refs.push_back(make_ref(prefix + ".projection", experts[k].projection, ParamGroup::kOther));
  }
  refs.push_back(make_ref("gate.clean", gate.clean, ParamGroup::kOther));
  refs.push_back(make_ref("gate.noise", gate.noise, ParamGroup::kOther));
  refs.push_back(make_ref("head.weight", head.weight, ParamGroup::kOther));
  refs.push_back(make_ref("head.bias", head.bias, ParamGroup::kOther));
  return refs;
}

void MvpModel::check_shapes() const {
  auto expect = [](bool ok, const std::string& what) {
    if (!ok) throw ShapeError("model tensor has the wrong shape: " + what);
  };
  expect(encoder.table.rows() == shape.vocab_size && encoder.table.cols() == shape.d_w, "encoder.embedding");
  expect(attention.weight.rows() == shape.d_w && attention.weight.cols() == shape.d_w, "attention.weight");
  expect(attention.bias.size() == shape.d_w && attention.context.size() == shape.d_w, "attention vectors");
  expect(static_cast<int>(experts.size()) == shape.experts, "expert count");
  for (const auto& e : experts) {
    expect(e.center.size() == shape.d_w, "expert center");
    expect(e.projection.rows() == shape.d_w && e.projection.cols() == shape.d_v, "expert projection");
  }
  expect(gate.clean.rows() == shape.d_w && gate.clean.cols() == shape.experts, "gate.clean");
  expect(gate.noise.rows() == shape.d_w && gate.noise.cols() == shape.experts, "gate.noise");
  expect(head.weight.rows() == shape.d_v && head.weight.cols() == 2 * shape.traits, "head.weight");
  expect(head.bias.size() == 2 * shape.traits, "head.bias");
}

PassNoise sample_pass_noise(const ModelShape& shape, double dropout_rate, Rng& dropout_rng, Rng& noise_rng) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw NumericError("dropout rate must lie in [0, 1)");
  PassNoise noise;
  if (dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - dropout_rate);
    auto draw = [&] { return dropout_rng.bernoulli(dropout_rate) ? 0.0 : keep_scale; };
    noise.post_mask.resize(shape.max_posts, shape.d_w);
    for (Eigen::Index r = 0; r < noise.post_mask.rows(); ++r) {
      for (Eigen::Index c = 0; c < noise.post_mask.cols(); ++c) noise.post_mask(r, c) = draw();
    }
    noise.user_mask.resize(shape.d_v);
    for (Eigen::Index c = 0; c < noise.user_mask.size(); ++c) noise.user_mask(c) = draw();
  }
  noise.gate_epsilon = sample_gate_noise(shape.experts, noise_rng);
  return noise;
}

TraitDistributions forward_user(const MvpModel& model, const UserSample& sample, const PassNoise* noise,
                                ForwardTrace* trace) {
  const auto& s = model.shape;
  std::vector<PostTrace>* post_traces = trace ? &trace->posts : nullptr;
  UserPostMatrix h = encode_user(sample, model.encoder, model.attention, s.max_posts, s.max_tokens, post_traces);
  if (noise && noise->post_mask.size() > 0) h.rows.array() *= noise->post_mask.array();

  const Vec* eps = (noise && noise->gate_epsilon) ? &*noise->gate_epsilon : nullptr;
  Vec user = moe_forward(h, model.experts, model.gate, eps, trace ? &trace->moe : nullptr);
  if (noise && noise->user_mask.size() > 0) user.array() *= noise->user_mask.array();

  TraitDistributions dist = trait_head(user, model.head);
  if (trace) {
    trace->post_matrix = std::move(h);
    trace->user = std::move(user);
    trace->dist = dist;
  }
  return dist;
}

void backward_user(const MvpModel& model, const UserSample& sample, const PassNoise* noise,
                   const ForwardTrace& trace, const ProbGrad& d_probs, MvpModel& grad) {
  Vec d_user = trait_head_backward(trace.user, model.head, trace.dist, d_probs, grad.head);
  if (noise && noise->user_mask.size() > 0) d_user.array() *= noise->user_mask.array();

  const Vec d_mean = moe_backward(model.experts, model.gate, trace.moe, d_user, grad.experts, grad.gate);
  const double inv_n = 1.0 / static_cast<double>(trace.post_matrix.n_real);

  Mat d_hidden;
  for (std::size_t i = 0; i < trace.posts.size(); ++i) {
    Vec d_post = d_mean * inv_n;
    if (noise && noise->post_mask.size() > 0) d_post.array() *= noise->post_mask.row(i).transpose().array();
    const PostTrace& pt = trace.posts[i];
    word_attention_backward(pt.encoded, model.attention, pt.attention, d_post, grad.attention, d_hidden);
    if (model.encoder.trainable()) encode_post_backward(sample.posts[i], d_hidden, grad.encoder.table);
  }
}

GateWeights gate_weights(const MvpModel& model, const UserSample& sample) {
  const auto& s = model.shape;
  const UserPostMatrix h = encode_user(sample, model.encoder, model.attention, s.max_posts, s.max_tokens);
  return gate(h, model.gate, nullptr);
}

DualForward dual_forward(const UserSample& sample, const MvpModel& model, double dropout_rate, Rng& dropout_first,
                         Rng& dropout_second, Rng& noise_first, Rng& noise_second, bool gate_noise) {
  DualForward out;
  out.noise_first = sample_pass_noise(model.shape, dropout_rate, dropout_first, noise_first);
  out.noise_second = sample_pass_noise(model.shape, dropout_rate, dropout_second, noise_second);
  if (!gate_noise) {
    out.noise_first.gate_epsilon.reset();
    out.noise_second.gate_epsilon.reset();
  }
  out.first = forward_user(model, sample, &out.noise_first);
  out.second = forward_user(model, sample, &out.noise_second);
  return out;
}

UserLoss user_loss(const MvpModel& model, const UserSample& sample, const PassNoise& first, const PassNoise& second,
                   double lambda, MvpModel* grad, double scale) {
  ForwardTrace trace_a;
  ForwardTrace trace_b;
  const TraitDistributions a = forward_user(model, sample, &first, grad ? &trace_a : nullptr);
  const TraitDistributions b = forward_user(model, sample, &second, grad ? &trace_b : nullptr);

  ProbGrad det_a, det_b;
  UserLoss loss;
  loss.detection =
      0.5 * (detection_loss(a, sample.labels, grad ? &det_a : nullptr) +
             detection_loss(b, sample.labels, grad ? &det_b : nullptr));
  const bool with_consistency = lambda != 0.0;
  ProbGrad cons_a, cons_b;
  loss.consistency =
      consistency_loss(a, b, grad && with_consistency ? &cons_a : nullptr, grad && with_consistency ? &cons_b : nullptr);
  if (!grad) return loss;

  auto combine = [&](const ProbGrad& det, const ProbGrad& cons) {
    ProbGrad out(det.size());
    for (std::size_t t = 0; t < det.size(); ++t) {
      for (int c = 0; c < 2; ++c) {
        out[t][c] = scale * 0.5 * det[t][c];
        if (with_consistency) out[t][c] += scale * lambda * cons[t][c];
      }
    }
    return out;
  };
  backward_user(model, sample, &first, trace_a, combine(det_a, cons_a), *grad);
  backward_user(model, sample, &second, trace_b, combine(det_b, cons_b), *grad);
  return loss;
}

}  // namespace mvp
