#pragma once

// Frozen backbone, low-rank adapter variants and the linear classifier head.
//
// Features travel as row batches: X is batch x d_in, W0 is d_in x d_out,
// B_down is d_in x r and A_up is r x d_out, so X * B_down is the batch of
// bottleneck vectors B_down^T x.

#include <cstdint>
#include <string>
#include <vector>

#include "phaselab/matrix.hpp"
#include "phaselab/qsim.hpp"
#include "phaselab/tape.hpp"

namespace phaselab::adapters {

enum class VariantKind { lora, hlora, qlora, act, stacked_linear };
enum class Activation { identity, tanh, sigmoid, silu };
enum class HilbertAxis { bottleneck, input_feature };

struct Variant {
  VariantKind kind = VariantKind::lora;
  Activation activation = Activation::identity;  // act only
  int layers = 1;                                // stacked_linear only

  static Variant lora() { return {}; }
  static Variant hlora() { return {VariantKind::hlora}; }
  static Variant qlora() { return {VariantKind::qlora}; }
  static Variant act(Activation a) { return {VariantKind::act, a}; }
  static Variant stacked_linear(int n) { return {VariantKind::stacked_linear, Activation::identity, n}; }

  friend bool operator==(const Variant&, const Variant&) = default;
};

// "lora", "hlora", "qlora", "act:tanh", "stacked_linear:3".
std::string to_string(const Variant& v);
Variant parse_variant(const std::string& s);
std::string to_string(Activation a);
Activation parse_activation(const std::string& s);
std::string to_string(HilbertAxis a);
HilbertAxis parse_axis(const std::string& s);

struct AdapterOptions {
  HilbertAxis hilbert_axis = HilbertAxis::bottleneck;
  qsim::CircuitSpec qnn = qsim::CircuitSpec::double_block();
  bool qlora_residual = false;
  // Lets Q-LoRA run with r != 4 by tiling the bottleneck over 4-qubit groups.
  bool qubit_tiling = false;

  friend bool operator==(const AdapterOptions&, const AdapterOptions&) = default;
};

class Backbone {
 public:
  // Entries drawn N(0, 1/d_in) from `seed`.
  static Backbone generate(std::size_t d_in, std::size_t d_out, std::uint64_t seed);
  explicit Backbone(Matrix w0, std::uint64_t seed = 0) : w0_(std::move(w0)), seed_(seed) {}

  const Matrix& weights() const noexcept { return w0_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t d_in() const noexcept { return w0_.rows(); }
  std::size_t d_out() const noexcept { return w0_.cols(); }

 private:
  Matrix w0_;
  std::uint64_t seed_;
};

struct AdapterParams {
  Matrix b_down;  // d_in x r
  Matrix a_up;    // r x d_out
  double alpha = 1.0;
  int r = 1;
  Variant variant;
  AdapterOptions options;
  double hlora_scale = 0.0;    // H-LoRA only, trainable
  Matrix qnn_angles;           // 1 x P, Q-LoRA only
  std::vector<Matrix> stacked;  // r x r maps, stacked_linear only

  double fixed_scale() const { return alpha / static_cast<double>(r); }
  std::size_t trainable_count() const;
};

struct ClassifierHead {
  Matrix w;  // d_out x 1
  double b = 0.0;

  // w ~ U(-1/sqrt(d_out), 1/sqrt(d_out)), b = 0.
  static ClassifierHead init(std::size_t d_out, std::uint64_t seed);
  std::size_t trainable_count() const { return w.size() + 1; }
};

// Throws ConfigError on invalid rank / variant combinations.
void validate(const AdapterParams& params, std::size_t d_in);

AdapterParams init_adapter(std::size_t d_in, std::size_t d_out, int r, double alpha,
                           const Variant& variant, std::uint64_t seed,
                           const AdapterOptions& options = {});

// Tape handles of every trainable tensor. Unused slots stay unset.
struct BoundAdapter {
  Var b_down;
  Var a_up;
  Var hlora_scale;
  Var qnn_angles;
  std::vector<Var> stacked;
};

struct BoundHead {
  Var w;
  Var b;
};

BoundAdapter bind(Tape& tape, const AdapterParams& params, bool trainable);
BoundHead bind(Tape& tape, const ClassifierHead& head, bool trainable);

struct ForwardTrace {
  Var bottleneck;  // x_l
  Var enhanced;    // transformed bottleneck fed to A_up
  Var output;      // W0^T x + delta
};

// Records the adapter forward for the row batch `x` on `tape`.
ForwardTrace record_forward(Tape& tape, Var x, const Backbone& backbone,
                            const AdapterParams& params, const BoundAdapter& bound);

Var record_logits(Tape& tape, Var features, const BoundHead& head);

// Forward-only evaluation on a row batch (batch x d_in -> batch x d_out).
Matrix forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params);
Matrix lora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params);
Matrix hlora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params);
Matrix qlora_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params);
Matrix variant_forward(const Matrix& x, const Backbone& backbone, const AdapterParams& params);

struct EmbeddedBatch {
  Matrix bottleneck;
  Matrix enhanced;
  Matrix output;
};
EmbeddedBatch embed(const Matrix& x, const Backbone& backbone, const AdapterParams& params);

struct HeadLoss {
  double loss = 0.0;
  Tape tape;
  Var loss_var;
  BoundHead head;
};

// Mean binary cross-entropy with logits of the head over the rows of `h`
// (batch x d_out) against 0/1 labels. The tape is returned for backward().
HeadLoss head_loss(const Matrix& h, const ClassifierHead& head, std::span<const int> labels);

}  // namespace phaselab::adapters
