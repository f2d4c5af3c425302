#include "wsg/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace wsg {

bool Matrix::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul shape mismatch: " + a.shape_str() + " x " +
                     b.shape_str());
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c.at(i, j) += aik * b.at(k, j);
    }
  }
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw ShapeError("matmul_nt shape mismatch: " + a.shape_str() + " x " +
                     b.shape_str() + "^T");
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(j, k);
      c.at(i, j) = s;
    }
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw ShapeError("matmul_tn shape mismatch: " + a.shape_str() + "^T x " +
                     b.shape_str());
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k)
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = a.at(k, i);
      if (aki == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c.at(i, j) += aki * b.at(k, j);
    }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("add shape mismatch: " + a.shape_str() + " vs " +
                     b.shape_str());
  Matrix c = a;
  for (size_t k = 0; k < c.size(); ++k) c[k] += b[k];
  return c;
}

Matrix add_rowvec(const Matrix& a, const Matrix& row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw ShapeError("add_rowvec expects 1x" + std::to_string(a.cols()) +
                     ", got " + row.shape_str());
  Matrix c = a;
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j) c.at(i, j) += row.at(0, j);
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  for (size_t k = 0; k < c.size(); ++k) c[k] *= s;
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b))
    throw ShapeError("hadamard shape mismatch: " + a.shape_str() + " vs " +
                     b.shape_str());
  Matrix c = a;
  for (size_t k = 0; k < c.size(); ++k) c[k] *= b[k];
  return c;
}

Matrix concat_cols(const std::vector<const Matrix*>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  int rows = parts[0]->rows();
  int cols = 0;
  for (const Matrix* p : parts) {
    if (p->rows() != rows) throw ShapeError("concat_cols: row count mismatch");
    cols += p->cols();
  }
  Matrix c(rows, cols);
  int off = 0;
  for (const Matrix* p : parts) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < p->cols(); ++j) c.at(i, off + j) = p->at(i, j);
    off += p->cols();
  }
  return c;
}

Matrix concat_rows(const std::vector<const Matrix*>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  int cols = parts[0]->cols();
  int rows = 0;
  for (const Matrix* p : parts) {
    if (p->cols() != cols) throw ShapeError("concat_rows: col count mismatch");
    rows += p->rows();
  }
  Matrix c(rows, cols);
  int off = 0;
  for (const Matrix* p : parts) {
    for (int i = 0; i < p->rows(); ++i)
      for (int j = 0; j < cols; ++j) c.at(off + i, j) = p->at(i, j);
    off += p->rows();
  }
  return c;
}

Matrix slice_cols(const Matrix& a, int start, int len) {
  if (start < 0 || len < 0 || start + len > a.cols())
    throw ShapeError("slice_cols out of range");
  Matrix c(a.rows(), len);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < len; ++j) c.at(i, j) = a.at(i, start + j);
  return c;
}

Matrix gather_rows(const Matrix& a, const std::vector<int>& idx) {
  Matrix c(static_cast<int>(idx.size()), a.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= a.rows())
      throw ContractError("gather_rows index out of range");
    for (int j = 0; j < a.cols(); ++j)
      c.at(static_cast<int>(i), j) = a.at(idx[i], j);
  }
  return c;
}

Matrix sigmoid(const Matrix& a) {
  Matrix c = a;
  for (size_t k = 0; k < c.size(); ++k) c[k] = 1.0 / (1.0 + std::exp(-c[k]));
  return c;
}

Matrix tanh_elem(const Matrix& a) {
  Matrix c = a;
  for (size_t k = 0; k < c.size(); ++k) c[k] = std::tanh(c[k]);
  return c;
}

Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols(); ++j) mx = std::max(mx, m.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      out.at(i, j) = std::exp(m.at(i, j) - mx);
      sum += out.at(i, j);
    }
    for (int j = 0; j < m.cols(); ++j) out.at(i, j) /= sum;
  }
  return out;
}

double cross_entropy_rows(const Matrix& p, const Matrix& y) {
  if (!p.same_shape(y))
    throw ShapeError("cross_entropy shape mismatch: " + p.shape_str() +
                     " vs " + y.shape_str());
  double loss = 0.0;
  for (size_t k = 0; k < p.size(); ++k)
    if (y[k] != 0.0) loss -= y[k] * std::log(std::max(p[k], kLogClamp));
  return loss;
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(m.rows(), 0);
  for (int i = 0; i < m.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < m.cols(); ++j)
      if (m.at(i, j) > m.at(i, best)) best = j;
    out[i] = best;
  }
  return out;
}

}  // namespace wsg
