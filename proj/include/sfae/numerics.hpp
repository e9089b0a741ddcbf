#pragma once

#include <cstddef>
#include <vector>

namespace sfae {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Grayscale image or feature map, row-major.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), data(h * w, fill) {}

  double& operator()(std::size_t y, std::size_t x) { return data[y * width + x]; }
  double operator()(std::size_t y, std::size_t x) const { return data[y * width + x]; }
};

std::vector<double> matvec(const Matrix& m, const std::vector<double>& v);

// Valid-mode cross-correlation (no kernel flip).
// Output is (H - kH + 1, W - kW + 1); the kernel must fit inside the image.
Image conv2d_valid(const Image& img, const Image& kernel);

// Adjoint of conv2d_valid: <conv2d_valid(a, k), b> == <a, conv2d_transposed(b, k)>.
// Output is (H + kH - 1, W + kW - 1).
Image conv2d_transposed(const Image& img, const Image& kernel);

// Solves A X = B by Gaussian elimination with partial pivoting. A must be square.
Matrix solve_linear(Matrix a, Matrix b);

Matrix transpose(const Matrix& m);

}  // namespace sfae
