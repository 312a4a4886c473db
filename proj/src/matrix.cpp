#include "phaselab/matrix.hpp"

#include <cmath>
#include <string>

#include "phaselab/error.hpp"

namespace phaselab {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                     std::to_string(rows_ * cols_));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_of(a) + " * " + shape_of(b));
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t inner = a.cols();
  const std::size_t ncols = b.cols();
  const auto nrows = static_cast<long>(a.rows());
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  // Each output row is owned by one thread and accumulated in a fixed k order,
  // so the result does not depend on the thread count.
#pragma omp parallel for schedule(static) if (a.rows() * inner * ncols >= kParallelWork)
  for (long i = 0; i < nrows; ++i) {
    double* orow = po + static_cast<std::size_t>(i) * ncols;
    const double* arow = pa + static_cast<std::size_t>(i) * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = pb + k * ncols;
      for (std::size_t j = 0; j < ncols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: " + shape_of(a) + "^T * " + shape_of(b));
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t inner = a.rows();
  const std::size_t ncols = b.cols();
  const auto nrows = static_cast<long>(a.cols());
#pragma omp parallel for schedule(static) if (a.cols() * inner * ncols >= kParallelWork)
  for (long i = 0; i < nrows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aki = a(k, ui);
      for (std::size_t j = 0; j < ncols; ++j) out(ui, j) += aki * b(k, j);
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: " + shape_of(a) + " * " + shape_of(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  const auto nrows = static_cast<long>(a.rows());
#pragma omp parallel for schedule(static) if (a.rows() * inner * b.rows() >= kParallelWork)
  for (long i = 0; i < nrows; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += a(ui, k) * b(j, k);
      out(ui, j) = acc;
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("add: " + shape_of(a) + " + " + shape_of(b));
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("sub: " + shape_of(a) + " - " + shape_of(b));
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace phaselab
