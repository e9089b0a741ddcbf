#include "sfae/numerics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace sfae {

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
  if (v.size() != m.cols) {
    throw std::invalid_argument("matvec: matrix is " + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + " but vector has length " +
                                std::to_string(v.size()));
  }
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.data.data() + r * m.cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

Image conv2d_valid(const Image& img, const Image& kernel) {
  if (kernel.height > img.height || kernel.width > img.width) {
    throw std::invalid_argument("conv2d_valid: kernel " + std::to_string(kernel.height) + "x" +
                                std::to_string(kernel.width) + " larger than image " +
                                std::to_string(img.height) + "x" + std::to_string(img.width));
  }
  Image out(img.height - kernel.height + 1, img.width - kernel.width + 1);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      double acc = 0.0;
      for (std::size_t ky = 0; ky < kernel.height; ++ky) {
        for (std::size_t kx = 0; kx < kernel.width; ++kx) {
          acc += img(y + ky, x + kx) * kernel(ky, kx);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Image conv2d_transposed(const Image& img, const Image& kernel) {
  Image out(img.height + kernel.height - 1, img.width + kernel.width - 1);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double v = img(y, x);
      if (v == 0.0) continue;
      for (std::size_t ky = 0; ky < kernel.height; ++ky) {
        for (std::size_t kx = 0; kx < kernel.width; ++kx) {
          out(y + ky, x + kx) += v * kernel(ky, kx);
        }
      }
    }
  }
  return out;
}

Matrix solve_linear(Matrix a, Matrix b) {
  if (a.rows != a.cols) {
    throw std::invalid_argument("solve_linear: matrix must be square, got " +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols));
  }
  if (b.rows != a.rows) {
    throw std::invalid_argument("solve_linear: rhs has " + std::to_string(b.rows) +
                                " rows, expected " + std::to_string(a.rows));
  }
  const std::size_t n = a.rows;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double cand = std::abs(a(r, k));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best == 0.0) throw std::runtime_error("solve_linear: singular matrix");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      for (std::size_t c = 0; c < b.cols; ++c) std::swap(b(k, c), b(piv, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      for (std::size_t c = 0; c < b.cols; ++c) b(r, c) -= f * b(k, c);
    }
  }
  Matrix x(n, b.cols);
  for (std::size_t ri = n; ri-- > 0;) {
    for (std::size_t c = 0; c < b.cols; ++c) {
      double acc = b(ri, c);
      for (std::size_t j = ri + 1; j < n; ++j) acc -= a(ri, j) * x(j, c);
      x(ri, c) = acc / a(ri, ri);
    }
  }
  return x;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
  }
  return out;
}

}  // namespace sfae
