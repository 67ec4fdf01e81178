#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdro::oracle {

Vec random_unit(Rng& rng, std::size_t n, NormKind r) {
  Vec u(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) {
      // Heavier tails for L1 so sparse directions get sampled.
      const double g = rng.normal();
      u[i] = r == NormKind::L1 ? g * g * g : g;
    }
    const double norm = vec_norm(u, r);
    if (norm > 0.0) return (1.0 / norm) * u;
  }
}

namespace {

Vec naive_matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

}  // namespace

double op_norm_search(const Mat& a, NormKind r, NormKind s, std::size_t samples, Rng& rng) {
  double best = 0.0;
  for (std::size_t t = 0; t < samples; ++t)
    best = std::max(best, vec_norm(naive_matvec(a, random_unit(rng, a.cols(), r)), s));
  return best;
}

double op_norm_sign_vertices(const Mat& a, NormKind s) {
  const std::size_t n = a.cols();
  double best = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    Vec sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = (bits >> j) & 1 ? -1.0 : 1.0;
    best = std::max(best, vec_norm(naive_matvec(a, sigma), s));
  }
  return best;
}

Vec naive_forward(const Mlp& net, const Vec& x) {
  Vec h = x;
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Vec z = naive_matvec(layers[l].weight, h);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += layers[l].bias[i];
    if (l + 1 < layers.size()) {
      for (auto& v : z) {
        switch (net.activation()) {
          case ActivationKind::ReLU: v = v > 0.0 ? v : 0.0; break;
          case ActivationKind::GELU: v = 0.5 * v * std::erfc(-v / std::sqrt(2.0)); break;
          case ActivationKind::SiLU: v = v / (1.0 + std::exp(-v)); break;
        }
      }
    }
    h = std::move(z);
  }
  return h;
}

Mat fd_jacobian(const Mlp& net, const Vec& x, double h) {
  const std::size_t n = x.size();
  const std::size_t k = net.output_dim();
  Mat j(k, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vec up = x, down = x;
    up[c] += h;
    down[c] -= h;
    const Vec fu = naive_forward(net, up), fd = naive_forward(net, down);
    for (std::size_t r = 0; r < k; ++r) j(r, c) = (fu[r] - fd[r]) / (2.0 * h);
  }
  return j;
}

double cone_box_grid(const Vec& c, const std::vector<Vec>& rows, const std::vector<int>& signs,
                     std::size_t steps) {
  const std::size_t n = c.size();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    Vec u(n);
    for (std::size_t i = 0; i < n; ++i)
      u[i] = -1.0 + 2.0 * static_cast<double>(idx[i]) / static_cast<double>(steps - 1);
    bool inside = true;
    for (std::size_t r = 0; r < rows.size() && inside; ++r) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += rows[r][i] * u[i];
      inside = signs[r] * d >= 0.0;
    }
    if (inside) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += c[i] * u[i];
      best = std::max(best, v);
    }
    std::size_t i = 0;
    while (i < n && ++idx[i] == steps) idx[i++] = 0;
    if (i == n) break;
  }
  return best;
}

namespace {

// Solves the square system; false when (nearly) singular.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> rhs, std::vector<double>& x) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (std::fabs(m[piv][col]) < 1e-10) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / m[i][i];
  return true;
}

}  // namespace

double lp_vertex_max(const Vec& objective, const std::vector<Vec>& a, const std::vector<double>& b,
                     bool* feasible) {
  const std::size_t n = objective.size();
  const std::size_t m = a.size();
  double best = -std::numeric_limits<double>::infinity();
  *feasible = false;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  if (m < n) return best;
  for (;;) {
    std::vector<std::vector<double>> sys(n, std::vector<double>(n));
    std::vector<double> rhs(n), x;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) sys[i][j] = a[pick[i]][j];
      rhs[i] = b[pick[i]];
    }
    if (solve_square(sys, rhs, x)) {
      bool ok = true;
      for (std::size_t r = 0; r < m && ok; ++r) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += a[r][j] * x[j];
        ok = lhs <= b[r] + 1e-9;
      }
      if (ok) {
        *feasible = true;
        double v = 0.0;
        for (std::size_t j = 0; j < n; ++j) v += objective[j] * x[j];
        best = std::max(best, v);
      }
    }
    // Next n-subset of {0..m-1} in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

}  // namespace wdro::oracle
