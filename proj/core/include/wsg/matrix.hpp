#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace wsg {

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense row-major matrix of doubles. The only numeric container in the
/// project; all learned state and activations live in these.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("negative matrix dimension");
  }
  Matrix(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (v_.size() != static_cast<size_t>(rows) * cols)
      throw ShapeError("value count does not match rows*cols");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  static Matrix random_normal(int rows, int cols, double stdev,
                              std::mt19937_64& rng) {
    Matrix m(rows, cols);
    std::normal_distribution<double> dist(0.0, stdev);
    for (double& x : m.v_) x = dist(rng);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& at(int i, int j) { return v_[static_cast<size_t>(i) * cols_ + j]; }
  double at(int i, int j) const {
    return v_[static_cast<size_t>(i) * cols_ + j];
  }
  double& operator[](size_t k) { return v_[k]; }
  double operator[](size_t k) const { return v_[k]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  const std::vector<double>& values() const { return v_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> v_;
};

// Plain (untracked) kernels. The tape ops reuse these for their forward pass.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
/// Adds a 1xN row vector to every row of a.
Matrix add_rowvec(const Matrix& a, const Matrix& row);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix concat_cols(const std::vector<const Matrix*>& parts);
Matrix concat_rows(const std::vector<const Matrix*>& parts);
Matrix slice_cols(const Matrix& a, int start, int len);
Matrix gather_rows(const Matrix& a, const std::vector<int>& idx);
Matrix sigmoid(const Matrix& a);
Matrix tanh_elem(const Matrix& a);

/// Row-wise softmax, stabilized by subtracting the row max.
Matrix softmax_rows(const Matrix& m);

/// -sum_ij y[i,j] * log(max(p[i,j], 1e-12)). All-zero label rows contribute 0.
double cross_entropy_rows(const Matrix& p, const Matrix& y);

/// Per-row argmax with smallest-index tie break.
std::vector<int> argmax_rows(const Matrix& m);

inline constexpr double kLogClamp = 1e-12;

}  // namespace wsg
