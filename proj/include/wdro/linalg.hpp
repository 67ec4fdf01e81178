#pragma once
// Dense vectors and matrices sized for small networks, vector norms,
// induced operator norms and the dual-norm / projection primitives used by
// the attacks and certificates.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wdro {

enum class NormKind { L1, L2, LInf };

/// Hölder conjugate: 1/r + 1/s = 1.
constexpr NormKind dual(NormKind r) {
  switch (r) {
    case NormKind::L1: return NormKind::LInf;
    case NormKind::L2: return NormKind::L2;
    case NormKind::LInf: return NormKind::L1;
  }
  return NormKind::L2;
}

std::string_view to_string(NormKind r);
/// Accepts "1", "2", "inf" (also "l1", "l2", "linf").
NormKind parse_norm(std::string_view text);

inline constexpr NormKind kAllNorms[] = {NormKind::L1, NormKind::L2, NormKind::LInf};

class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n) : data_(n, 0.0) {}
  Vec(std::initializer_list<double> values);
  /// Throws ErrorCode::NonFinite on NaN/Inf entries.
  explicit Vec(std::vector<double> values);

  static Vec basis(std::size_t n, std::size_t k);

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double a);

  friend bool operator==(const Vec&, const Vec&) = default;

 private:
  std::vector<double> data_;
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double a, Vec v);
double dot(const Vec& a, const Vec& b);

/// Row-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  /// Throws ShapeMismatch when rows*cols != entries.size(), NonFinite on NaN/Inf.
  Mat(std::size_t rows, std::size_t cols, std::vector<double> entries);
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Mat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  Mat transpose() const;
  bool all_finite() const;

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);
/// Aᵀ y without forming the transpose.
Vec transpose_times(const Mat& a, const Vec& y);
/// diag(d) · A, scaling row i by d[i].
Mat scale_rows(const Mat& a, std::span<const double> d);

double vec_norm(const Vec& v, NormKind r);
double vec_norm(std::span<const double> v, NormKind r);

struct DualMaximizer {
  Vec h;
  /// g == 0: no ascent direction exists; h is the zero vector.
  bool stalled = false;
};

/// argmax { <g,h> : ||h||_r = 1 }. For L1, ties on |g_k| go to the lowest index.
DualMaximizer dual_norm_maximizer(const Vec& g, NormKind r);

/// Euclidean projection of xi onto { z : ||z - anchor||_r <= radius }.
Vec project_ball(const Vec& xi, const Vec& anchor, double radius, NormKind r);

struct PowerIterationOptions {
  int restarts = 10;
  int max_iterations = 10000;
  double relative_tolerance = 1e-10;
  std::uint64_t seed = 0x5eed;
};

/// Largest vertex count allowed for exact LInf-source enumeration (2^24).
inline constexpr std::size_t kMaxSignEnumerationDim = 24;

/// ||A||_{r->s} = sup_{||u||_r = 1} ||A u||_s.
/// Closed forms for L1 sources and LInf targets, power iteration for L2->L2,
/// sign-vertex enumeration for LInf->{L1,L2} and (through duality) L2->L1.
/// Throws DimensionTooLarge when enumeration would exceed 2^24 vertices.
double op_norm(const Mat& a, NormKind r, NormKind s, const PowerIterationOptions& opts = {});

/// Largest singular value by power iteration on the smaller Gram matrix.
double spectral_norm(const Mat& a, const PowerIterationOptions& opts = {});

}  // namespace wdro
