#include "phaselab/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "phaselab/metrics.hpp"
#include "phaselab/qsim.hpp"
#include "phaselab/reference.hpp"
#include "phaselab/spectral.hpp"

namespace phaselab {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

std::vector<double> random_reals(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<Complex> random_complex(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<Complex> v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  Matrix m(r, c);
  std::normal_distribution<double> d(0.0, scale);
  for (double& x : m.data()) x = d(rng);
  return m;
}

template <class A, class B>
double max_abs_diff(const A& a, const B& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::vector<double> to_vec(const spectral::RealSeries& s) { return {s.values().begin(), s.values().end()}; }
std::vector<Complex> to_vec(const spectral::ComplexSeries& s) {
  return {s.values().begin(), s.values().end()};
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Empty string on success, otherwise a description of the first violation.
using Check = std::function<std::string()>;

std::string fail(const std::string& what, double got, double tol) {
  std::ostringstream os;
  os << what << ": " << got << " > " << tol;
  return os.str();
}

std::string check_dft_oracle() {
  std::mt19937_64 rng(1);
  for (std::size_t n : {1, 2, 5, 8, 12, 17, 64, 100}) {
    const auto x = random_complex(n, rng);
    const auto fast = to_vec(spectral::dft(spectral::ComplexSeries(x)));
    const auto slow = reference::naive_dft(x);
    const double tol = 1e-12 * std::max(1.0, static_cast<double>(n) / 8.0);
    if (const double e = max_abs_diff(fast, slow); e > tol) return fail("dft n=" + std::to_string(n), e, tol);
    const auto ifast = to_vec(spectral::idft(spectral::ComplexSeries(x)));
    const auto islow = reference::naive_idft(x);
    if (const double e = max_abs_diff(ifast, islow); e > 1e-12) {
      return fail("idft n=" + std::to_string(n), e, 1e-12);
    }
    const auto back = to_vec(spectral::idft(spectral::dft(spectral::ComplexSeries(x))));
    if (const double e = max_abs_diff(back, x); e > 1e-10) return fail("round trip", e, 1e-10);
  }
  return {};
}

std::string check_parseval() {
  std::mt19937_64 rng(2);
  for (std::size_t n : {3, 16, 255, 1000, 1024}) {
    const auto x = random_complex(n, rng);
    const auto spec = spectral::dft(spectral::ComplexSeries(x));
    double time = 0.0, freq = 0.0;
    for (const auto& v : x) time += std::norm(v);
    for (const auto& v : spec.values()) freq += std::norm(v);
    freq /= static_cast<double>(n);
    if (const double rel = std::abs(time - freq) / time; rel > 1e-9) {
      return fail("parseval n=" + std::to_string(n), rel, 1e-9);
    }
  }
  return {};
}

std::string check_hilbert_oracle() {
  std::mt19937_64 rng(3);
  for (std::size_t n : {2, 7, 8, 16, 30}) {
    const auto x = random_reals(n, rng);
    const auto fast = to_vec(spectral::hilbert(spectral::RealSeries(x)));
    if (const double e = max_abs_diff(fast, reference::naive_hilbert(x)); e > 1e-12) {
      return fail("standard n=" + std::to_string(n), e, 1e-12);
    }
    const auto lit = to_vec(spectral::hilbert_sign_flip(spectral::RealSeries(x)));
    if (const double e = max_abs_diff(lit, reference::naive_hilbert_sign_flip(x)); e > 1e-12) {
      return fail("sign-flip n=" + std::to_string(n), e, 1e-12);
    }
  }
  return {};
}

std::string check_quadrature() {
  constexpr std::size_t n = 8;
  std::vector<double> c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::cos(2 * kPi * static_cast<double>(i) / n);
    s[i] = std::sin(2 * kPi * static_cast<double>(i) / n);
  }
  const auto hc = to_vec(spectral::hilbert(spectral::RealSeries(c)));
  if (const double e = max_abs_diff(hc, s); e > 1e-10) return fail("H(cos) - sin", e, 1e-10);
  const auto hs = to_vec(spectral::hilbert(spectral::RealSeries(s)));
  std::vector<double> neg_c(n);
  for (std::size_t i = 0; i < n; ++i) neg_c[i] = -c[i];
  if (const double e = max_abs_diff(hs, neg_c); e > 1e-10) return fail("H(sin) + cos", e, 1e-10);
  const auto xa = to_vec(spectral::analytic_signal(spectral::RealSeries(c)));
  for (std::size_t i = 0; i < n; ++i) {
    const Complex expect = std::polar(1.0, 2 * kPi * static_cast<double>(i) / n);
    if (const double e = std::abs(xa[i] - expect); e > 1e-10) return fail("analytic cos", e, 1e-10);
  }
  // Pure-tone envelope.
  std::vector<double> tone(16);
  for (std::size_t i = 0; i < 16; ++i) tone[i] = 3.0 * std::cos(2 * kPi * static_cast<double>(i) / 16);
  const auto ep = spectral::envelope_and_phase(spectral::analytic_signal(spectral::RealSeries(tone)));
  for (double v : ep.envelope.values()) {
    if (std::abs(v - 3.0) > 1e-6) return fail("tone envelope", std::abs(v - 3.0), 1e-6);
  }
  return {};
}

std::string check_hilbert_algebra() {
  std::mt19937_64 rng(4);
  for (std::size_t n : {6, 8, 9, 32, 50}) {
    const auto x = random_reals(n, rng);
    const auto y = random_reals(n, rng);
    const spectral::RealSeries xs(x), ys(y);
    const auto hx = to_vec(spectral::hilbert(xs));
    const auto hy = to_vec(spectral::hilbert(ys));

    // Linearity.
    const double a = 1.7, b = -0.4;
    std::vector<double> mix(n), expect(n);
    for (std::size_t i = 0; i < n; ++i) {
      mix[i] = a * x[i] + b * y[i];
      expect[i] = a * hx[i] + b * hy[i];
    }
    const auto hmix = to_vec(spectral::hilbert(spectral::RealSeries(mix)));
    if (const double e = max_abs_diff(hmix, expect); e > 1e-10) return fail("linearity", e, 1e-10);

    // Anti-self-adjointness.
    const double lhs = dot(hx, y), rhs = -dot(x, hy);
    if (const double e = std::abs(lhs - rhs); e > 1e-9) return fail("adjoint", e, 1e-9);

    // Involution up to the DC and Nyquist bins.
    if (n % 2 == 0) {
      const auto hhx = to_vec(spectral::hilbert(spectral::RealSeries(hx)));
      double dc = 0.0, nyq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dc += x[i];
        nyq += (i % 2 ? -1.0 : 1.0) * x[i];
      }
      dc /= static_cast<double>(n);
      nyq /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double proj = x[i] - dc - (i % 2 ? -1.0 : 1.0) * nyq;
        if (const double e = std::abs(hhx[i] + proj); e > 1e-9) return fail("involution", e, 1e-9);
      }
    }

    // One-sided analytic spectrum.
    const auto spec = to_vec(spectral::dft(spectral::analytic_signal(xs)));
    const double norm = std::sqrt(dot(x, x));
    for (std::size_t k = n / 2 + 1; k < n; ++k) {
      if (const double m = std::abs(spec[k]); m > 1e-9 * norm) return fail("negative bin", m, 1e-9 * norm);
    }
  }
  return {};
}

std::string check_matmul_oracle() {
  std::mt19937_64 rng(5);
  for (auto [r, k, c] : {std::tuple{4, 6, 2}, std::tuple{1, 1, 1}, std::tuple{33, 17, 9},
                         std::tuple{200, 64, 64}}) {
    const Matrix a = random_matrix(r, k, rng), b = random_matrix(k, c, rng);
    const Matrix fast = matmul(a, b);
    const Matrix slow = reference::naive_matmul(a, b);
    const double tol = 1e-12 * std::max(1.0, static_cast<double>(k) / 6.0);
    if (const double e = max_abs_diff(fast.data(), slow.data()); e > tol) return fail("matmul", e, tol);
    if (const double e = max_abs_diff(matmul_tn(a.transposed(), b).data(), slow.data()); e > tol) {
      return fail("matmul_tn", e, tol);
    }
    if (const double e = max_abs_diff(matmul_nt(a, b.transposed()).data(), slow.data()); e > tol) {
      return fail("matmul_nt", e, tol);
    }
  }
  return {};
}

std::string check_qsim_unitarity() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_int_distribution<int> pick(0, 3), qubit(1, 4);
  qsim::StateVector s;
  for (int step = 0; step < 10000; ++step) {
    const int q = qubit(rng);
    const int other = q % 4 + 1;
    switch (pick(rng)) {
      case 0:
        qsim::rotate_inplace(s, qsim::Axis::X, q, angle(rng));
        break;
      case 1:
        qsim::rotate_inplace(s, qsim::Axis::Y, q, angle(rng));
        break;
      case 2:
        qsim::entangle_inplace(s, qsim::Entangler::CZ, q, other);
        break;
      default:
        qsim::entangle_inplace(s, qsim::Entangler::CNOT, q, other);
        break;
    }
    if (const double e = std::abs(s.norm_squared() - 1.0); e > 1e-12) return fail("norm drift", e, 1e-12);
  }
  // Reversibility.
  const qsim::StateVector start = s;
  for (auto axis : {qsim::Axis::X, qsim::Axis::Y}) {
    auto t = qsim::apply_rotation(qsim::apply_rotation(start, axis, 2, 0.83), axis, 2, -0.83);
    for (std::size_t i = 0; i < qsim::kDim; ++i) {
      if (const double e = std::abs(t[i] - start[i]); e > 1e-12) return fail("rotation inverse", e, 1e-12);
    }
  }
  for (auto kind : {qsim::Entangler::CZ, qsim::Entangler::CNOT}) {
    auto t = qsim::apply_entangler(qsim::apply_entangler(start, kind, 3, 1), kind, 3, 1);
    if (t.amplitudes() != start.amplitudes()) return "entangler not self-inverse";
  }
  return {};
}

std::string check_qsim_dense() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> cases;
  cases.push_back({{kPi, 0, 0, 0}, std::vector<double>(12, 0.0)});
  for (int reps : {1, 2, 3}) {
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<double> in(4), p(static_cast<std::size_t>(12 * reps));
      for (double& v : in) v = angle(rng);
      for (double& v : p) v = angle(rng);
      cases.emplace_back(in, p);
    }
  }
  for (const auto& [in, p] : cases) {
    const int reps = static_cast<int>(p.size() / 12);
    const auto fast = qsim::run_qnn(in, p, {reps, qsim::Encoding::raw}).expectations;
    const auto slow = reference::dense_circuit_expectations(in, p, reps);
    for (std::size_t q = 0; q < 4; ++q) {
      if (std::abs(fast[q]) > 1.0 + 1e-12) return fail("expectation range", std::abs(fast[q]), 1.0);
      if (const double e = std::abs(fast[q] - slow[q]); e > 1e-12) return fail("dense oracle", e, 1e-12);
    }
  }
  return {};
}

std::string check_param_shift() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const qsim::CircuitSpec spec = qsim::CircuitSpec::double_block();
  std::vector<double> in(4), p(spec.param_count());
  for (double& v : in) v = angle(rng);
  for (double& v : p) v = angle(rng);
  const auto jac = qsim::param_shift_grad(in, p, spec);
  constexpr double h = 1e-6;
  auto fd = [&](std::vector<double>& vec, std::size_t k, std::size_t out) {
    const double keep = vec[k];
    vec[k] = keep + h;
    const double up = qsim::run_qnn(in, p, spec).expectations[out];
    vec[k] = keep - h;
    const double dn = qsim::run_qnn(in, p, spec).expectations[out];
    vec[k] = keep;
    return (up - dn) / (2 * h);
  };
  for (std::size_t out = 0; out < 4; ++out) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (const double e = std::abs(jac.d_params(out, k) - fd(p, k, out)); e > 1e-6) {
        return fail("d/dtheta", e, 1e-6);
      }
    }
    for (std::size_t k = 0; k < 4; ++k) {
      if (const double e = std::abs(jac.d_inputs(out, k) - fd(in, k, out)); e > 1e-6) {
        return fail("d/dinput", e, 1e-6);
      }
    }
  }
  return {};
}

std::string check_lora_dense() {
  std::mt19937_64 rng(9);
  for (auto [d, r] : {std::pair{6, 2}, std::pair{16, 8}, std::pair{9, 3}, std::pair{16, 1}}) {
    const auto du = static_cast<std::size_t>(d);
    const auto bb = adapters::Backbone::generate(du, du, 77);
    auto p = adapters::init_adapter(du, du, r, 1.5, adapters::Variant::lora(), 5);
    const Matrix x = random_matrix(5, du, rng);
    // Zero up-projection leaves the frozen path untouched.
    if (adapters::lora_forward(x, bb, p) != matmul(x, bb.weights())) return "frozen path differs";
    p.a_up = random_matrix(static_cast<std::size_t>(r), du, rng);
    const Matrix dense_w =
        bb.weights() + p.fixed_scale() * reference::naive_matmul(p.b_down, p.a_up);
    const Matrix expect = reference::naive_matmul(x, dense_w);
    if (const double e = max_abs_diff(adapters::lora_forward(x, bb, p).data(), expect.data()); e > 1e-10) {
      return fail("lora vs dense", e, 1e-10);
    }
  }
  return {};
}

std::string check_gradients() {
  using adapters::Variant;
  adapters::AdapterOptions bottleneck, input_axis, lit, tanh_enc, residual;
  input_axis.hilbert_axis = adapters::HilbertAxis::input_feature;
  lit.qnn = qsim::CircuitSpec::single_block();
  tanh_enc.qnn.encoding = qsim::Encoding::tanh_pi;
  residual.qlora_residual = true;
  const std::vector<std::pair<Variant, adapters::AdapterOptions>> cases{
      {Variant::lora(), bottleneck},
      {Variant::hlora(), bottleneck},
      {Variant::hlora(), input_axis},
      {Variant::qlora(), bottleneck},
      {Variant::qlora(), lit},
      {Variant::qlora(), tanh_enc},
      {Variant::qlora(), residual},
      {Variant::act(adapters::Activation::tanh), bottleneck},
      {Variant::act(adapters::Activation::sigmoid), bottleneck},
      {Variant::act(adapters::Activation::silu), bottleneck},
      {Variant::stacked_linear(2), bottleneck},
  };
  for (const auto& [v, opt] : cases) {
    const GradCheckResult g = check_adapter_gradients(v, opt, 21);
    if (!g.ok) {
      std::ostringstream os;
      os << adapters::to_string(v) << " " << g.worst_entry << ": abs " << g.worst_abs << " rel "
         << g.worst_rel;
      return os.str();
    }
  }
  return {};
}

std::string check_metrics() {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(trial) * 2;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(i % 2);
      scores[i] = d(rng) + 0.7 * labels[i];
      if (trial % 3 == 0) scores[i] = std::round(scores[i] * 2.0) / 2.0;  // force ties
    }
    if (const double e = std::abs(fewshot::compute_auc(scores, labels) - reference::brute_auc(scores, labels));
        e > 1e-12) {
      return fail("auc", e, 1e-12);
    }
    const auto t = fewshot::compute_threshold_metrics(scores, labels, 0.2);
    const auto b = reference::brute_threshold_metrics(scores, labels, 0.2);
    if (t.acc != b.acc || t.pr != b.pr || t.re != b.re || t.f1 != b.f1) return "confusion metrics differ";
    if (const double e = std::abs(fewshot::compute_eer(scores, labels).eer - reference::brute_eer(scores, labels));
        e > 1e-9) {
      return fail("eer", e, 1e-9);
    }
  }
  return {};
}

}  // namespace

GradCheckResult check_adapter_gradients(const adapters::Variant& variant,
                                        const adapters::AdapterOptions& options,
                                        std::uint64_t seed) {
  constexpr std::size_t d_in = 8, d_out = 6, batch = 5;
  constexpr int r = 4;
  std::mt19937_64 rng(seed);
  const auto bb = adapters::Backbone::generate(d_in, d_out, seed + 1);
  auto params = adapters::init_adapter(d_in, d_out, r, 2.0, variant, seed, options);
  params.a_up = random_matrix(r, d_out, rng, 0.5);
  for (auto& m : params.stacked) m = m + random_matrix(r, r, rng, 0.2);
  auto head = adapters::ClassifierHead::init(d_out, seed);
  head.b = 0.1;
  const Matrix x = random_matrix(batch, d_in, rng);
  Matrix y(batch, 1);
  for (std::size_t i = 0; i < batch; ++i) y(i, 0) = static_cast<double>(i % 2);

  struct Slot {
    std::string name;
    std::span<double> values;
    Var var;
  };
  auto loss_of = [&](Tape& tape, adapters::BoundAdapter& ab, adapters::BoundHead& hb) {
    const Var xv = tape.constant(x);
    ab = adapters::bind(tape, params, true);
    hb = adapters::bind(tape, head, true);
    const auto trace = adapters::record_forward(tape, xv, bb, params, ab);
    const Var logits = adapters::record_logits(tape, trace.output, hb);
    return tape.scale(tape.sum(tape.bce_with_logits(logits, y)), 1.0 / batch);
  };

  Tape tape;
  adapters::BoundAdapter ab;
  adapters::BoundHead hb;
  const Var loss = loss_of(tape, ab, hb);
  const Gradients grads = tape.backward(loss);

  std::vector<Slot> slots{{"b_down", params.b_down.data(), ab.b_down},
                          {"a_up", params.a_up.data(), ab.a_up},
                          {"head_w", head.w.data(), hb.w},
                          {"head_b", std::span<double>(&head.b, 1), hb.b}};
  if (variant.kind == adapters::VariantKind::hlora) {
    slots.push_back({"hlora_scale", std::span<double>(&params.hlora_scale, 1), ab.hlora_scale});
  }
  if (variant.kind == adapters::VariantKind::qlora) {
    slots.push_back({"qnn_angles", params.qnn_angles.data(), ab.qnn_angles});
  }
  for (std::size_t i = 0; i < params.stacked.size(); ++i) {
    slots.push_back({"stacked" + std::to_string(i), params.stacked[i].data(), ab.stacked[i]});
  }

  auto eval = [&]() {
    Tape t;
    adapters::BoundAdapter a;
    adapters::BoundHead h;
    return t.value(loss_of(t, a, h))(0, 0);
  };

  GradCheckResult res;
  double worst_excess = -1.0;
  constexpr double step = 1e-5;
  for (auto& slot : slots) {
    const auto analytic = grads[slot.var].data();
    for (std::size_t i = 0; i < slot.values.size(); ++i) {
      const double keep = slot.values[i];
      slot.values[i] = keep + step;
      const double up = eval();
      slot.values[i] = keep - step;
      const double dn = eval();
      slot.values[i] = keep;
      const double numeric = (up - dn) / (2 * step);
      const double abs_err = std::abs(analytic[i] - numeric);
      const double rel_err = abs_err / std::max(std::abs(analytic[i]), std::abs(numeric));
      const bool entry_ok = abs_err <= 1e-6 || rel_err <= 1e-4;
      const double excess = std::min(abs_err / 1e-6, rel_err / 1e-4);
      ++res.entries;
      if (excess > worst_excess) {
        worst_excess = excess;
        res.worst_abs = abs_err;
        res.worst_rel = std::isfinite(rel_err) ? rel_err : 0.0;
        res.worst_entry = slot.name + "[" + std::to_string(i) + "]";
      }
      res.ok = res.ok && entry_ok;
    }
  }
  return res;
}

int run_selftest(std::ostream& out) {
  const std::vector<std::pair<std::string, Check>> checks{
      {"dft/idft vs direct summation", check_dft_oracle},
      {"parseval", check_parseval},
      {"hilbert vs direct oracle", check_hilbert_oracle},
      {"quadrature pairs and tone envelope", check_quadrature},
      {"hilbert linearity, adjoint, involution, one-sided spectrum", check_hilbert_algebra},
      {"matmul vs triple loop", check_matmul_oracle},
      {"qsim norm preservation and reversibility", check_qsim_unitarity},
      {"qsim vs dense unitary", check_qsim_dense},
      {"parameter shift vs finite differences", check_param_shift},
      {"lora vs dense weight", check_lora_dense},
      {"adapter gradients vs finite differences", check_gradients},
      {"metrics vs brute force", check_metrics},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    std::string detail;
    try {
      detail = fn();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    if (detail.empty()) {
      out << "PASS " << name << '\n';
    } else {
      out << "FAIL " << name << ": " << detail << '\n';
      ++failures;
    }
  }
  out << (failures == 0 ? "selftest: all checks passed" : "selftest: failures present") << '\n';
  return failures;
}

}  // namespace phaselab
