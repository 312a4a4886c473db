#include "phaselab/adapters.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "phaselab/error.hpp"
#include "phaselab/random.hpp"

namespace phaselab::adapters {

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

Var apply_activation(Tape& tape, Var v, Activation a) {
  switch (a) {
    case Activation::identity:
      return v;
    case Activation::tanh:
      return tape.tanh(v);
    case Activation::sigmoid:
      return tape.sigmoid(v);
    case Activation::silu:
      return tape.silu(v);
  }
  return v;
}

// Analytic-signal augmentation: re + |re + jH(re)| + arg(re + jH(re)).
Var phase_augment(Tape& tape, Var re) {
  const Var im = tape.hilbert_linear(re);
  const Var env = tape.envelope(re, im);
  const Var ph = tape.phase(re, im);
  return tape.add(tape.add(re, env), ph);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity:
      return "identity";
    case Activation::tanh:
      return "tanh";
    case Activation::sigmoid:
      return "sigmoid";
    case Activation::silu:
      return "silu";
  }
  return "identity";
}

Activation parse_activation(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "silu") return Activation::silu;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(const Variant& v) {
  switch (v.kind) {
    case VariantKind::lora:
      return "lora";
    case VariantKind::hlora:
      return "hlora";
    case VariantKind::qlora:
      return "qlora";
    case VariantKind::act:
      return "act:" + to_string(v.activation);
    case VariantKind::stacked_linear:
      return "stacked_linear:" + std::to_string(v.layers);
  }
  return "lora";
}

Variant parse_variant(const std::string& s) {
  if (s == "lora") return Variant::lora();
  if (s == "hlora") return Variant::hlora();
  if (s == "qlora") return Variant::qlora();
  if (s.starts_with("act:")) return Variant::act(parse_activation(s.substr(4)));
  if (s.starts_with("stacked_linear:")) {
    const std::string n = s.substr(15);
    int layers = 0;
    try {
      layers = std::stoi(n);
    } catch (const std::exception&) {
      throw ConfigError("bad layer count in variant '" + s + "'");
    }
    if (layers < 1) throw ConfigError("stacked_linear needs at least one layer");
    return Variant::stacked_linear(layers);
  }
  throw ConfigError("unknown adapter variant '" + s + "'");
}

std::string to_string(HilbertAxis a) {
  return a == HilbertAxis::bottleneck ? "bottleneck" : "input_feature";
}

HilbertAxis parse_axis(const std::string& s) {
  if (s == "bottleneck") return HilbertAxis::bottleneck;
  if (s == "input_feature") return HilbertAxis::input_feature;
  throw ConfigError("unknown hilbert axis '" + s + "'");
}

Backbone Backbone::generate(std::size_t d_in, std::size_t d_out, std::uint64_t seed) {
  auto rng = make_rng(seed, streams::backbone);
  std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
  Matrix w(d_in, d_out);
  for (double& v : w.data()) v = dist(rng);
  return Backbone(std::move(w), seed);
}

std::size_t AdapterParams::trainable_count() const {
  std::size_t n = b_down.size() + a_up.size();
  if (variant.kind == VariantKind::hlora) n += 1;
  if (variant.kind == VariantKind::qlora) n += qnn_angles.size();
  for (const auto& m : stacked) n += m.size();
  return n;
}

ClassifierHead ClassifierHead::init(std::size_t d_out, std::uint64_t seed) {
  auto rng = make_rng(seed, streams::head);
  ClassifierHead h;
  h.w = uniform_matrix(d_out, 1, 1.0 / std::sqrt(static_cast<double>(d_out)), rng);
  return h;
}

void validate(const AdapterParams& p, std::size_t d_in) {
  if (p.r < 1) throw ConfigError("adapter rank must be >= 1");
  if (p.b_down.rows() != d_in || p.b_down.cols() != static_cast<std::size_t>(p.r)) {
    throw ShapeError("B_down must be d_in x r");
  }
  if (p.a_up.rows() != static_cast<std::size_t>(p.r)) throw ShapeError("A_up must have r rows");
  switch (p.variant.kind) {
    case VariantKind::hlora:
      if (p.options.hilbert_axis == HilbertAxis::bottleneck && p.r < 2) {
        throw ConfigError("H-LoRA on the bottleneck axis needs r >= 2");
      }
      if (p.options.hilbert_axis == HilbertAxis::input_feature && d_in < 2) {
        throw ConfigError("H-LoRA on the input axis needs d_in >= 2");
      }
      break;
    case VariantKind::qlora:
      if (p.r != qsim::kQubits && !p.options.qubit_tiling) {
        throw ConfigError("Q-LoRA needs r = 4 (one bottleneck value per qubit), got r = " +
                          std::to_string(p.r));
      }
      if (p.qnn_angles.size() != p.options.qnn.param_count()) {
        throw ConfigError("Q-LoRA circuit angle count does not match the circuit spec");
      }
      break;
    case VariantKind::stacked_linear:
      if (p.variant.layers < 1) throw ConfigError("stacked_linear needs at least one layer");
      if (p.stacked.size() != static_cast<std::size_t>(p.variant.layers)) {
        throw ConfigError("stacked_linear map count does not match the layer count");
      }
      break;
    case VariantKind::lora:
    case VariantKind::act:
      break;
  }
}

AdapterParams init_adapter(std::size_t d_in, std::size_t d_out, int r, double alpha,
                           const Variant& variant, std::uint64_t seed,
                           const AdapterOptions& options) {
  if (d_in == 0 || d_out == 0 || r < 1) throw ConfigError("adapter dimensions must be positive");
  auto rng = make_rng(seed, streams::adapter);
  AdapterParams p;
  p.r = r;
  p.alpha = alpha;
  p.variant = variant;
  p.options = options;
  const auto ur = static_cast<std::size_t>(r);
  p.b_down = uniform_matrix(d_in, ur, 1.0 / std::sqrt(static_cast<double>(d_in)), rng);
  p.a_up = Matrix(ur, d_out);
  if (variant.kind == VariantKind::hlora) p.hlora_scale = alpha / static_cast<double>(r);
  if (variant.kind == VariantKind::qlora) {
    p.qnn_angles = uniform_matrix(1, options.qnn.param_count(), 0.1, rng);
  }
  if (variant.kind == VariantKind::stacked_linear) {
    for (int i = 0; i < variant.layers; ++i) p.stacked.push_back(Matrix::identity(ur));
  }
  validate(p, d_in);
  return p;
}

BoundAdapter bind(Tape& tape, const AdapterParams& p, bool trainable) {
  auto leaf = [&](const Matrix& m) { return trainable ? tape.parameter(m) : tape.constant(m); };
  BoundAdapter b;
  b.b_down = leaf(p.b_down);
  b.a_up = leaf(p.a_up);
  if (p.variant.kind == VariantKind::hlora) b.hlora_scale = leaf(Matrix(1, 1, p.hlora_scale));
  if (p.variant.kind == VariantKind::qlora) b.qnn_angles = leaf(p.qnn_angles);
  for (const auto& m : p.stacked) b.stacked.push_back(leaf(m));
  return b;
}

BoundHead bind(Tape& tape, const ClassifierHead& head, bool trainable) {
  if (trainable) return {tape.parameter(head.w), tape.parameter(Matrix(1, 1, head.b))};
  return {tape.constant(head.w), tape.constant(Matrix(1, 1, head.b))};
}

ForwardTrace record_forward(Tape& tape, Var x, const Backbone& backbone,
                            const AdapterParams& p, const BoundAdapter& bound) {
  validate(p, backbone.d_in());
  if (tape.value(x).cols() != backbone.d_in()) {
    throw ShapeError("input has " + std::to_string(tape.value(x).cols()) +
                     " features, backbone expects " + std::to_string(backbone.d_in()));
  }
  const Var frozen = tape.matmul(x, tape.constant(backbone.weights()));
  const Var xl = tape.matmul(x, bound.b_down);

  Var enhanced = xl;
  Var delta;
  switch (p.variant.kind) {
    case VariantKind::lora:
      delta = tape.scale(tape.matmul(xl, bound.a_up), p.fixed_scale());
      break;
    case VariantKind::act:
      enhanced = apply_activation(tape, xl, p.variant.activation);
      delta = tape.scale(tape.matmul(enhanced, bound.a_up), p.fixed_scale());
      break;
    case VariantKind::stacked_linear:
      for (const Var& m : bound.stacked) enhanced = tape.matmul(enhanced, m);
      delta = tape.scale(tape.matmul(enhanced, bound.a_up), p.fixed_scale());
      break;
    case VariantKind::hlora:
      if (p.options.hilbert_axis == HilbertAxis::bottleneck) {
        enhanced = phase_augment(tape, xl);
      } else {
        // B_down^T (x + env(x) + phase(x)) = x_l + B_down^T env + B_down^T phase.
        enhanced = tape.matmul(phase_augment(tape, x), bound.b_down);
      }
      delta = tape.scalar_mul(bound.hlora_scale, tape.matmul(enhanced, bound.a_up));
      break;
    case VariantKind::qlora: {
      Var angles = xl;
      if (p.options.qnn.encoding == qsim::Encoding::tanh_pi) {
        angles = tape.scale(tape.tanh(xl), std::numbers::pi);
      }
      enhanced = tape.qnn_eval(angles, bound.qnn_angles, p.options.qnn);
      if (p.options.qlora_residual) enhanced = tape.add(enhanced, xl);
      delta = tape.scale(tape.matmul(enhanced, bound.a_up), p.fixed_scale());
      break;
    }
  }
  return {xl, enhanced, tape.add(frozen, delta)};
}

Var record_logits(Tape& tape, Var features, const BoundHead& head) {
  return tape.add(tape.matmul(features, head.w), head.b);
}

EmbeddedBatch embed(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  Tape tape;
  const Var xv = tape.constant(x);
  const ForwardTrace t = record_forward(tape, xv, backbone, params, bind(tape, params, false));
  return {tape.value(t.bottleneck), tape.value(t.enhanced), tape.value(t.output)};
}

Matrix forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  Tape tape;
  const Var xv = tape.constant(x);
  const ForwardTrace t = record_forward(tape, xv, backbone, params, bind(tape, params, false));
  return tape.value(t.output);
}

Matrix lora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  if (params.variant.kind != VariantKind::lora) throw ConfigError("lora_forward needs the lora variant");
  return forward(x, backbone, params);
}

Matrix hlora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  if (params.variant.kind != VariantKind::hlora) throw ConfigError("hlora_forward needs the hlora variant");
  return forward(x, backbone, params);
}

Matrix qlora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  if (params.variant.kind != VariantKind::qlora) throw ConfigError("qlora_forward needs the qlora variant");
  return forward(x, backbone, params);
}

Matrix variant_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params) {
  if (params.variant.kind != VariantKind::act && params.variant.kind != VariantKind::stacked_linear) {
    throw ConfigError("variant_forward needs an act or stacked_linear variant");
  }
  return forward(x, backbone, params);
}

HeadLoss head_loss(const Matrix& h, const ClassifierHead& head, std::span<const int> labels) {
  if (labels.size() != h.rows()) throw ShapeError("head_loss: one label per feature row expected");
  Matrix y(h.rows(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InvalidInput("labels must be 0 or 1");
    y(i, 0) = labels[i];
  }
  HeadLoss out;
  const Var hv = out.tape.constant(h);
  out.head = bind(out.tape, head, true);
  const Var logits = record_logits(out.tape, hv, out.head);
  const Var total = out.tape.sum(out.tape.bce_with_logits(logits, y));
  out.loss_var = out.tape.scale(total, 1.0 / static_cast<double>(h.rows()));
  out.loss = out.tape.value(out.loss_var)(0, 0);
  return out;
}

}  // namespace phaselab::adapters
