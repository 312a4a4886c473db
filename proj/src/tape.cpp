#include "phaselab/tape.hpp"

#include <cmath>
#include <string>

#include "phaselab/error.hpp"

namespace phaselab {

namespace {

using spectral::below_envelope_floor;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void accumulate(Matrix& into, const Matrix& g) {
  if (into.empty()) {
    into = g;
    return;
  }
  auto d = into.data();
  auto s = g.data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

template <class F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  auto src = a.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

Matrix hilbert_matrix_rows(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  spectral::kernels::hilbert_rows(a.data(), out.data(), a.rows(), a.cols());
  return out;
}

std::size_t tiles_for(std::size_t cols) {
  return (cols + qsim::kQubits - 1) / qsim::kQubits;
}

std::array<double, qsim::kQubits> tile_inputs(const Matrix& angles, std::size_t row,
                                              std::size_t tile) {
  std::array<double, qsim::kQubits> in{};
  for (std::size_t k = 0; k < static_cast<std::size_t>(qsim::kQubits); ++k) {
    const std::size_t c = tile * qsim::kQubits + k;
    if (c < angles.cols()) in[k] = angles(row, c);
  }
  return in;
}

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  return push(Node{Op::constant, {}, {}, std::move(value), 0.0, false, 0});
}

Var Tape::parameter(Matrix value) {
  return push(Node{Op::parameter, {}, {}, std::move(value), 0.0, true, 0});
}

Var Tape::matmul(Var a, Var b) {
  Matrix v = phaselab::matmul(value(a), value(b));
  return push(Node{Op::matmul, a, b, std::move(v), 0.0,
                   node(a).needs_grad || node(b).needs_grad, 0});
}

Var Tape::add(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  Matrix v = x;
  if (x.same_shape(y)) {
    v = x + y;
  } else if (y.rows() == 1 && (y.cols() == 1 || y.cols() == x.cols())) {
    for (std::size_t r = 0; r < v.rows(); ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) v(r, c) += y(0, y.cols() == 1 ? 0 : c);
    }
  } else {
    throw ShapeError("add: " + shape_str(x) + " + " + shape_str(y));
  }
  return push(Node{Op::add, a, b, std::move(v), 0.0, node(a).needs_grad || node(b).needs_grad, 0});
}

Var Tape::hadamard(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  if (!x.same_shape(y)) throw ShapeError("hadamard: " + shape_str(x) + " vs " + shape_str(y));
  Matrix v = x;
  for (std::size_t i = 0; i < v.size(); ++i) v.data()[i] *= y.data()[i];
  return push(Node{Op::hadamard, a, b, std::move(v), 0.0,
                   node(a).needs_grad || node(b).needs_grad, 0});
}

Var Tape::scale(Var a, double factor) {
  return push(Node{Op::scale, a, {}, factor * value(a), factor, node(a).needs_grad, 0});
}

Var Tape::scalar_mul(Var s, Var a) {
  const Matrix& sv = value(s);
  if (sv.rows() != 1 || sv.cols() != 1) throw ShapeError("scalar_mul: scale must be 1x1");
  return push(Node{Op::scalar_mul, s, a, sv(0, 0) * value(a), 0.0,
                   node(s).needs_grad || node(a).needs_grad, 0});
}

Var Tape::hilbert_linear(Var a) {
  return push(Node{Op::hilbert_linear, a, {}, hilbert_matrix_rows(value(a)), 0.0,
                   node(a).needs_grad, 0});
}

Var Tape::envelope(Var re, Var im, double eps) {
  const Matrix& x = value(re);
  const Matrix& y = value(im);
  if (!x.same_shape(y)) throw ShapeError("envelope: operand shapes differ");
  Matrix v(x.rows(), x.cols());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v.data()[i] = spectral::guarded_envelope(x.data()[i], y.data()[i], eps);
  }
  return push(Node{Op::envelope, re, im, std::move(v), eps,
                   node(re).needs_grad || node(im).needs_grad, 0});
}

Var Tape::phase(Var re, Var im, double eps) {
  const Matrix& x = value(re);
  const Matrix& y = value(im);
  if (!x.same_shape(y)) throw ShapeError("phase: operand shapes differ");
  Matrix v(x.rows(), x.cols());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v.data()[i] = spectral::guarded_phase(x.data()[i], y.data()[i], eps);
  }
  return push(Node{Op::phase, re, im, std::move(v), eps,
                   node(re).needs_grad || node(im).needs_grad, 0});
}

Var Tape::sum(Var a) {
  double acc = 0.0;
  for (double x : value(a).data()) acc += x;
  return push(Node{Op::sum, a, {}, Matrix(1, 1, acc), 0.0, node(a).needs_grad, 0});
}

Var Tape::sigmoid(Var a) {
  return push(Node{Op::sigmoid, a, {}, map(value(a), logistic), 0.0, node(a).needs_grad, 0});
}

Var Tape::tanh(Var a) {
  return push(Node{Op::tanh, a, {}, map(value(a), [](double x) { return std::tanh(x); }), 0.0,
                   node(a).needs_grad, 0});
}

Var Tape::silu(Var a) {
  return push(Node{Op::silu, a, {}, map(value(a), [](double x) { return x * logistic(x); }), 0.0,
                   node(a).needs_grad, 0});
}

Var Tape::bce_with_logits(Var logits, const Matrix& labels) {
  const Matrix& z = value(logits);
  if (!z.same_shape(labels)) throw ShapeError("bce_with_logits: labels shape mismatch");
  Matrix v(z.rows(), z.cols());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = z.data()[i];
    const double y = labels.data()[i];
    v.data()[i] = std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  labels_.push_back(labels);
  return push(Node{Op::bce_with_logits, logits, {}, std::move(v), 0.0, node(logits).needs_grad,
                   labels_.size() - 1});
}

Var Tape::qnn_eval(Var angles, Var params, const qsim::CircuitSpec& spec) {
  const Matrix& in = value(angles);
  const Matrix& th = value(params);
  if (th.rows() != 1 || th.cols() != spec.param_count()) {
    throw ConfigError("qnn_eval: expected 1x" + std::to_string(spec.param_count()) +
                      " circuit angles, got " + shape_str(th));
  }
  const std::size_t tiles = tiles_for(in.cols());
  const auto jobs = static_cast<long>(in.rows() * tiles);
  Matrix out(in.rows(), in.cols());
#pragma omp parallel for schedule(static) if (jobs >= 64)
  for (long job = 0; job < jobs; ++job) {
    const auto row = static_cast<std::size_t>(job) / tiles;
    const auto tile = static_cast<std::size_t>(job) % tiles;
    const auto x = tile_inputs(in, row, tile);
    const qsim::QnnOutput z = qsim::run_qnn(x, th.data(), spec);
    for (std::size_t k = 0; k < static_cast<std::size_t>(qsim::kQubits); ++k) {
      const std::size_t c = tile * qsim::kQubits + k;
      if (c < in.cols()) out(row, c) = z.expectations[k];
    }
  }
  circuits_.push_back(spec);
  return push(Node{Op::qnn_eval, angles, params, std::move(out), 0.0,
                   node(angles).needs_grad || node(params).needs_grad, circuits_.size() - 1});
}

Gradients Tape::backward(Var loss) const {
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward needs a 1x1 loss, got " + shape_str(lv));
  }
  Gradients out;
  auto& g = out.grads_;
  g.resize(nodes_.size());
  g[loss.id] = Matrix(1, 1, 1.0);

  for (std::size_t idx = loss.id + 1; idx-- > 0;) {
    const Node& n = nodes_[idx];
    if (g[idx].empty() || !n.needs_grad) continue;
    const Matrix& gy = g[idx];
    const bool ga = n.op != Op::constant && n.op != Op::parameter && node(n.a).needs_grad;
    const bool gb = (n.op == Op::matmul || n.op == Op::add || n.op == Op::hadamard ||
                     n.op == Op::scalar_mul || n.op == Op::envelope || n.op == Op::phase ||
                     n.op == Op::qnn_eval) &&
                    node(n.b).needs_grad;

    switch (n.op) {
      case Op::constant:
      case Op::parameter:
        break;
      case Op::matmul:
        if (ga) accumulate(g[n.a.id], matmul_nt(gy, value(n.b)));
        if (gb) accumulate(g[n.b.id], matmul_tn(value(n.a), gy));
        break;
      case Op::add: {
        if (ga) accumulate(g[n.a.id], gy);
        if (gb) {
          const Matrix& bv = value(n.b);
          if (bv.same_shape(gy)) {
            accumulate(g[n.b.id], gy);
          } else {
            Matrix red(1, bv.cols());
            for (std::size_t r = 0; r < gy.rows(); ++r) {
              for (std::size_t c = 0; c < gy.cols(); ++c) red(0, bv.cols() == 1 ? 0 : c) += gy(r, c);
            }
            accumulate(g[n.b.id], red);
          }
        }
        break;
      }
      case Op::hadamard: {
        const Matrix& av = value(n.a);
        const Matrix& bv = value(n.b);
        if (ga) {
          Matrix t = gy;
          for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] *= bv.data()[i];
          accumulate(g[n.a.id], t);
        }
        if (gb) {
          Matrix t = gy;
          for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] *= av.data()[i];
          accumulate(g[n.b.id], t);
        }
        break;
      }
      case Op::scale:
        if (ga) accumulate(g[n.a.id], n.scalar * gy);
        break;
      case Op::scalar_mul: {
        // a is the 1x1 scale, b the operand.
        const Matrix& m = value(n.b);
        if (ga) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m.size(); ++i) acc += gy.data()[i] * m.data()[i];
          accumulate(g[n.a.id], Matrix(1, 1, acc));
        }
        if (gb) accumulate(g[n.b.id], value(n.a)(0, 0) * gy);
        break;
      }
      case Op::hilbert_linear:
        // H^T = -H for the standard multiplier.
        if (ga) accumulate(g[n.a.id], -1.0 * hilbert_matrix_rows(gy));
        break;
      case Op::envelope:
      case Op::phase: {
        const Matrix& re = value(n.a);
        const Matrix& im = value(n.b);
        Matrix dre(re.rows(), re.cols());
        Matrix dim(re.rows(), re.cols());
        for (std::size_t i = 0; i < re.size(); ++i) {
          const double x = re.data()[i];
          const double y = im.data()[i];
          if (below_envelope_floor(x, y, n.scalar)) continue;
          if (n.op == Op::envelope) {
            const double e = n.value.data()[i];
            dre.data()[i] = gy.data()[i] * x / e;
            dim.data()[i] = gy.data()[i] * y / e;
          } else {
            const double den = x * x + y * y + n.scalar;
            dre.data()[i] = -gy.data()[i] * y / den;
            dim.data()[i] = gy.data()[i] * x / den;
          }
        }
        if (ga) accumulate(g[n.a.id], dre);
        if (gb) accumulate(g[n.b.id], dim);
        break;
      }
      case Op::sum:
        if (ga) accumulate(g[n.a.id], Matrix(value(n.a).rows(), value(n.a).cols(), gy(0, 0)));
        break;
      case Op::sigmoid: {
        Matrix t = gy;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double s = n.value.data()[i];
          t.data()[i] *= s * (1.0 - s);
        }
        if (ga) accumulate(g[n.a.id], t);
        break;
      }
      case Op::tanh: {
        Matrix t = gy;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double y = n.value.data()[i];
          t.data()[i] *= 1.0 - y * y;
        }
        if (ga) accumulate(g[n.a.id], t);
        break;
      }
      case Op::silu: {
        const Matrix& x = value(n.a);
        Matrix t = gy;
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double s = logistic(x.data()[i]);
          t.data()[i] *= s + x.data()[i] * s * (1.0 - s);
        }
        if (ga) accumulate(g[n.a.id], t);
        break;
      }
      case Op::bce_with_logits: {
        const Matrix& z = value(n.a);
        const Matrix& y = labels_[n.extra];
        Matrix t = gy;
        for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] *= logistic(z.data()[i]) - y.data()[i];
        if (ga) accumulate(g[n.a.id], t);
        break;
      }
      case Op::qnn_eval: {
        const Matrix& in = value(n.a);
        const Matrix& th = value(n.b);
        const qsim::CircuitSpec& spec = circuits_[n.extra];
        const std::size_t tiles = tiles_for(in.cols());
        const std::size_t jobs = in.rows() * tiles;
        constexpr auto kQ = static_cast<std::size_t>(qsim::kQubits);
        Matrix din(in.rows(), in.cols());
        // Per-job parameter contributions, reduced below in job order.
        Matrix dpar_jobs(jobs, th.cols());
        const auto jobs_l = static_cast<long>(jobs);
#pragma omp parallel for schedule(static) if (jobs >= 8)
        for (long job = 0; job < jobs_l; ++job) {
          const auto row = static_cast<std::size_t>(job) / tiles;
          const auto tile = static_cast<std::size_t>(job) % tiles;
          const auto x = tile_inputs(in, row, tile);
          const qsim::QnnJacobian jac = qsim::param_shift_grad(x, th.data(), spec);
          std::array<double, qsim::kQubits> gout{};
          for (std::size_t i = 0; i < kQ; ++i) {
            const std::size_t c = tile * kQ + i;
            if (c < in.cols()) gout[i] = gy(row, c);
          }
          for (std::size_t k = 0; k < kQ; ++k) {
            const std::size_t c = tile * kQ + k;
            if (c >= in.cols()) continue;
            double acc = 0.0;
            for (std::size_t i = 0; i < kQ; ++i) acc += gout[i] * jac.d_inputs(i, k);
            din(row, c) = acc;
          }
          for (std::size_t p = 0; p < th.cols(); ++p) {
            double acc = 0.0;
            for (std::size_t i = 0; i < kQ; ++i) acc += gout[i] * jac.d_params(i, p);
            dpar_jobs(static_cast<std::size_t>(job), p) = acc;
          }
        }
        if (ga) accumulate(g[n.a.id], din);
        if (gb) {
          Matrix dpar(1, th.cols());
          for (std::size_t j = 0; j < jobs; ++j) {
            for (std::size_t p = 0; p < th.cols(); ++p) dpar(0, p) += dpar_jobs(j, p);
          }
          accumulate(g[n.b.id], dpar);
        }
        break;
      }
    }
  }

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (g[i].empty()) g[i] = Matrix(nodes_[i].value.rows(), nodes_[i].value.cols());
  }
  return out;
}

Gradients backward(const Tape& tape, Var loss) { return tape.backward(loss); }

}  // namespace phaselab
