#include "wdro/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wdro/error.hpp"
#include "wdro/random.hpp"
#include "wdro/kernels.hpp"

namespace wdro {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::WrongActivation: return "WrongActivation";
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::EmptyInventory: return "EmptyInventory";
    case ErrorCode::AllDegenerate: return "AllDegenerate";
    case ErrorCode::NoRootSample: return "NoRootSample";
    case ErrorCode::CellEscape: return "CellEscape";
    case ErrorCode::NonPositiveSlope: return "NonPositiveSlope";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(NormKind r) {
  switch (r) {
    case NormKind::L1: return "1";
    case NormKind::L2: return "2";
    case NormKind::LInf: return "inf";
  }
  return "?";
}

NormKind parse_norm(std::string_view text) {
  if (text == "1" || text == "l1" || text == "L1") return NormKind::L1;
  if (text == "2" || text == "l2" || text == "L2") return NormKind::L2;
  if (text == "inf" || text == "linf" || text == "Linf" || text == "LInf") return NormKind::LInf;
  throw Error(ErrorCode::InvalidArgument, "unknown norm '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Vec / Mat

namespace {
bool finite_range(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace

Vec::Vec(std::initializer_list<double> values) : data_(values) {
  if (!finite_range(data_)) throw Error(ErrorCode::NonFinite, "vector entry is NaN or Inf");
}

Vec::Vec(std::vector<double> values) : data_(std::move(values)) {
  if (!finite_range(data_)) throw Error(ErrorCode::NonFinite, "vector entry is NaN or Inf");
}

Vec Vec::basis(std::size_t n, std::size_t k) {
  Vec e(n);
  e[k] = 1.0;
  return e;
}

bool Vec::all_finite() const { return finite_range(data_); }

Vec& Vec::operator+=(const Vec& o) {
  if (o.size() != size()) throw Error(ErrorCode::DimensionMismatch, "vector add");
  kernels::axpy(1.0, o.span(), span());
  return *this;
}

Vec& Vec::operator-=(const Vec& o) {
  if (o.size() != size()) throw Error(ErrorCode::DimensionMismatch, "vector subtract");
  kernels::axpy(-1.0, o.span(), span());
  return *this;
}

Vec& Vec::operator*=(double a) {
  for (double& x : data_) x *= a;
  return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double a, Vec v) { return v *= a; }

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "dot");
  return kernels::dot(a.span(), b.span());
}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows_ * cols_ != data_.size())
    throw Error(ErrorCode::ShapeMismatch, "matrix entry count does not match rows*cols");
  if (!finite_range(data_)) throw Error(ErrorCode::NonFinite, "matrix entry is NaN or Inf");
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::ShapeMismatch, "ragged matrix rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Mat(r, c, std::move(entries));
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Mat::all_finite() const { return finite_range(data_); }

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matrix product");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) kernels::axpy(aik, b.row(k), out);
    }
  }
  return c;
}

Vec operator*(const Mat& a, const Vec& x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
  Vec y(a.rows());
  kernels::active().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

Vec transpose_times(const Mat& a, const Vec& y) {
  if (a.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "transpose product");
  Vec x(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (y[i] != 0.0) kernels::axpy(y[i], a.row(i), x.span());
  return x;
}

Mat scale_rows(const Mat& a, std::span<const double> d) {
  if (d.size() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "row scaling");
  Mat out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (double& v : out.row(i)) v *= d[i];
  return out;
}

// ---------------------------------------------------------------------------
// Norms

double vec_norm(std::span<const double> v, NormKind r) {
  switch (r) {
    case NormKind::L1: return kernels::abs_sum(v);
    case NormKind::L2: return std::sqrt(kernels::sum_sq(v));
    case NormKind::LInf: return kernels::max_abs(v);
  }
  return 0.0;
}

double vec_norm(const Vec& v, NormKind r) { return vec_norm(v.span(), r); }

DualMaximizer dual_norm_maximizer(const Vec& g, NormKind r) {
  DualMaximizer out{Vec(g.size()), false};
  const bool zero = std::all_of(g.begin(), g.end(), [](double x) { return x == 0.0; });
  if (zero) {
    out.stalled = true;
    return out;
  }
  switch (r) {
    case NormKind::LInf:
      for (std::size_t i = 0; i < g.size(); ++i)
        out.h[i] = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
      break;
    case NormKind::L2: {
      const double n = vec_norm(g, NormKind::L2);
      for (std::size_t i = 0; i < g.size(); ++i) out.h[i] = g[i] / n;
      break;
    }
    case NormKind::L1: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < g.size(); ++i)
        if (std::fabs(g[i]) > std::fabs(g[best])) best = i;
      out.h[best] = g[best] > 0.0 ? 1.0 : -1.0;
      break;
    }
  }
  return out;
}

Vec project_ball(const Vec& xi, const Vec& anchor, double radius, NormKind r) {
  if (xi.size() != anchor.size()) throw Error(ErrorCode::DimensionMismatch, "projection");
  if (!(radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative projection radius");
  Vec d = xi - anchor;
  if (vec_norm(d, r) <= radius) return xi;
  if (radius == 0.0) return anchor;

  switch (r) {
    case NormKind::LInf:
      for (double& v : d) v = std::clamp(v, -radius, radius);
      break;
    case NormKind::L2:
      d *= radius / vec_norm(d, NormKind::L2);
      break;
    case NormKind::L1: {
      // Sort-based projection onto the simplex of magnitudes.
      std::vector<double> mag(d.size());
      std::transform(d.begin(), d.end(), mag.begin(), [](double v) { return std::fabs(v); });
      std::sort(mag.begin(), mag.end(), std::greater<>());
      double cumulative = 0.0;
      double tau = 0.0;
      for (std::size_t j = 0; j < mag.size(); ++j) {
        cumulative += mag[j];
        const double t = (cumulative - radius) / static_cast<double>(j + 1);
        if (mag[j] - t > 0.0) tau = t;
      }
      for (double& v : d) {
        const double shrunk = std::max(std::fabs(v) - tau, 0.0);
        v = v < 0.0 ? -shrunk : shrunk;
      }
      break;
    }
  }
  // Rounding can leave the norm a few ulps over the radius.
  const double excess = vec_norm(d, r);
  if (excess > radius) d *= radius / excess;
  return anchor + d;
}

// ---------------------------------------------------------------------------
// Operator norms

namespace {

double max_column_norm(const Mat& a, NormKind s) {
  const Mat t = a.transpose();
  double best = 0.0;
  for (std::size_t j = 0; j < t.rows(); ++j) best = std::max(best, vec_norm(t.row(j), s));
  return best;
}

double max_row_norm(const Mat& a, NormKind q) {
  double best = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) best = std::max(best, vec_norm(a.row(i), q));
  return best;
}

// max over sign vectors sigma in {-1,1}^cols of ||A sigma||_s; sigma_0 = +1 by symmetry.
double sign_vertex_max(const Mat& a, NormKind s) {
  const std::size_t n = a.cols();
  if (n > kMaxSignEnumerationDim)
    throw Error(ErrorCode::DimensionTooLarge,
                "sign-vertex enumeration over " + std::to_string(n) + " coordinates exceeds 2^24");
  if (n == 0 || a.rows() == 0) return 0.0;
  const Mat cols = a.transpose();
  const std::uint64_t count = std::uint64_t{1} << (n - 1);
  Vec y(a.rows());
  double best = 0.0;
  for (std::uint64_t code = 0; code < count; ++code) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const bool negative = j > 0 && ((code >> (j - 1)) & 1U);
      kernels::axpy(negative ? -1.0 : 1.0, cols.row(j), y.span());
    }
    best = std::max(best, vec_norm(y, s));
  }
  return best;
}

}  // namespace

double spectral_norm(const Mat& a, const PowerIterationOptions& opts) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  // Gram matrix on the smaller side; both share the nonzero spectrum.
  const Mat gram = a.rows() < a.cols() ? a * a.transpose() : a.transpose() * a;
  const std::size_t n = gram.rows();
  Rng rng(opts.seed);
  double best = 0.0;
  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    Vec v(n);
    for (double& x : v) x = rng.normal();
    double nv = vec_norm(v, NormKind::L2);
    if (nv == 0.0) continue;
    v *= 1.0 / nv;
    double lambda = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
      Vec w = gram * v;
      const double next = dot(v, w);
      const double nw = vec_norm(w, NormKind::L2);
      if (nw == 0.0) {
        lambda = 0.0;
        break;
      }
      w *= 1.0 / nw;
      const double change = vec_norm(w - v, NormKind::L2);
      v = std::move(w);
      const bool settled = std::fabs(next - lambda) <= opts.relative_tolerance * std::fabs(next);
      lambda = next;
      if (settled && change <= 1e-8) break;
    }
    best = std::max(best, lambda);
  }
  return std::sqrt(std::max(best, 0.0));
}

double op_norm(const Mat& a, NormKind r, NormKind s, const PowerIterationOptions& opts) {
  if (!a.all_finite()) throw Error(ErrorCode::NonFinite, "op_norm of non-finite matrix");
  if (r == NormKind::L1) return max_column_norm(a, s);
  if (s == NormKind::LInf) return max_row_norm(a, dual(r));
  if (r == NormKind::L2 && s == NormKind::L2) return spectral_norm(a, opts);
  if (r == NormKind::LInf) return sign_vertex_max(a, s);
  // L2 -> L1: ||A||_{2->1} = ||A^T||_{inf->2}.
  return sign_vertex_max(a.transpose(), NormKind::L2);
}

}  // namespace wdro
