#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "grid.hpp"
#include "multi_index.hpp"

namespace amalgam {

/// Polynomial of degree <= delta in the monomials ((x - center) / scale)^beta.
struct PolyCoeffs {
  int dim = 1;
  int degree = 0;
  Point center{};
  double scale = 1;
  std::vector<double> coeffs;  ///< graded order, multi_indices(dim, degree)

  double operator()(const Point& x) const {
    if (coeffs.empty()) return 0.0;
    Point y{(x[0] - center[0]) / scale, (x[1] - center[1]) / scale};
    auto idx = multi_indices(dim, degree);
    double v = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) v += coeffs[k] * monomial(y, idx[k], dim);
    return v;
  }
};

struct Projection {
  PolyCoeffs poly;
  std::vector<double> on_cells;  ///< projection evaluated on the weight's cells
  double condition = 1;          ///< of the weighted Gram matrix of the monomials
  int rank = 0;
  bool ill_conditioned = false;
};

inline constexpr double ill_conditioned_limit = 1e12;

/// Weighted least-squares projector onto P_delta under
/// <u, v> = sum u v w / sum w over the cells of a weight, built by modified
/// Gram-Schmidt with one reorthogonalization pass over the shifted-scaled
/// monomials. Monomials that are numerically dependent on the cells are
/// dropped, so the result is the minimum-norm projection and all moments of
/// the residual still vanish.
class Projector {
 public:
  Projector(const GridSpec& g, const Patch& weight, int delta, const Point& center, double scale)
      : grid_(g), delta_(delta), center_(center), scale_(scale) {
    require(delta >= 0 && scale > 0, "projection needs delta >= 0 and a positive scale");
    double mass = 0;
    for (double w : weight.values) mass += w;
    if (!(mass > 0)) throw degenerate_weight("projection weight has nonpositive integral");

    n_ = weight.size();
    const auto idx = multi_indices(g.dim, delta);
    m_ = idx.size();
    w_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) w_[i] = weight.values[i] / mass;

    std::vector<std::vector<double>> mono(m_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      Point x = g.point(weight.cells[i]);
      Point y{(x[0] - center[0]) / scale, (x[1] - center[1]) / scale};
      for (std::size_t b = 0; b < m_; ++b) mono[b][i] = monomial(y, idx[b], g.dim);
    }

    Eigen::MatrixXd gram(m_, m_);
    for (std::size_t a = 0; a < m_; ++a)
      for (std::size_t b = a; b < m_; ++b) gram(a, b) = gram(b, a) = dot(mono[a], mono[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    double lmin = eig.eigenvalues().minCoeff(), lmax = eig.eigenvalues().maxCoeff();
    condition_ = lmin > 0 ? lmax / lmin : inf;

    for (std::size_t b = 0; b < m_; ++b) {
      std::vector<double> v = mono[b];
      std::vector<double> t(m_, 0.0);
      t[b] = 1;
      const double norm0 = std::sqrt(dot(v, v));
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k = 0; k < basis_.size(); ++k) {
          double c = dot(v, basis_[k]);
          for (std::size_t i = 0; i < n_; ++i) v[i] -= c * basis_[k][i];
          for (std::size_t j = 0; j < m_; ++j) t[j] -= c * coef_[k][j];
        }
      double norm = std::sqrt(dot(v, v));
      if (!(norm > 1e-10 * norm0)) continue;
      for (auto& x : v) x /= norm;
      for (auto& x : t) x /= norm;
      basis_.push_back(std::move(v));
      coef_.push_back(std::move(t));
    }
  }

  double condition() const { return condition_; }
  int rank() const { return static_cast<int>(basis_.size()); }

  /// Projection of `values` given on the weight's cells.
  Projection operator()(const std::vector<double>& values) const {
    require(values.size() == n_, "projection values and weight cells differ in length");
    Projection out;
    out.condition = condition_;
    out.ill_conditioned = condition_ > ill_conditioned_limit;
    out.rank = rank();
    out.poly = {grid_.dim, delta_, center_, scale_, std::vector<double>(m_, 0.0)};
    out.on_cells.assign(n_, 0.0);
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      double c = dot(values, basis_[k]);
      if (c == 0) continue;
      for (std::size_t i = 0; i < n_; ++i) out.on_cells[i] += c * basis_[k][i];
      for (std::size_t j = 0; j < m_; ++j) out.poly.coeffs[j] += c * coef_[k][j];
    }
    return out;
  }

 private:
  double dot(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += a[i] * b[i] * w_[i];
    return s;
  }

  GridSpec grid_;
  int delta_;
  Point center_;
  double scale_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<double> w_;
  std::vector<std::vector<double>> basis_, coef_;  // e_k = sum_b coef_[k][b] mono_b
  double condition_ = 1;
};

inline Projection project_poly(const GridSpec& g, const std::vector<double>& values,
                               const Patch& weight, int delta, const Point& center, double scale) {
  return Projector(g, weight, delta, center, scale)(values);
}

/// Unweighted projection onto P_delta over the cells of a cube.
template <class T>
Projection project_on_cube(const BasicField<T>& f, const Cube& q, int delta) {
  const auto& g = f.grid();
  Patch w;
  std::vector<double> v;
  for (std::size_t c : cells_in(g, q)) {
    w.push(c, 1.0);
    v.push_back(static_cast<double>(std::real(f[c])));
  }
  return project_poly(g, v, w, delta, q.center(), q.side);
}

/// Moments sum_i f_i ((x_i - center)/scale)^beta w_i h^d for |beta| <= delta.
inline std::vector<double> weighted_moments(const GridSpec& g, const std::vector<double>& values,
                                            const Patch& weight, int delta, const Point& center,
                                            double scale) {
  auto idx = multi_indices(g.dim, delta);
  std::vector<double> out(idx.size(), 0.0);
  for (std::size_t i = 0; i < weight.size(); ++i) {
    Point x = g.point(weight.cells[i]);
    Point y{(x[0] - center[0]) / scale, (x[1] - center[1]) / scale};
    for (std::size_t b = 0; b < idx.size(); ++b)
      out[b] += values[i] * weight.values[i] * monomial(y, idx[b], g.dim);
  }
  for (auto& v : out) v *= g.cell_volume();
  return out;
}

}  // namespace amalgam
