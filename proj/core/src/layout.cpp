#include <Eigen/Dense>
#include <cmath>

#include "tda/error.hpp"
#include "tda/spine.hpp"

namespace tda {
namespace {

double layout_stress(const Eigen::MatrixXd& x, const Eigen::MatrixXd& delta) {
  double stress = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      const double d = std::sqrt((x(i, 0) - x(j, 0)) * (x(i, 0) - x(j, 0)) + (x(i, 1) - x(j, 1)) * (x(i, 1) - x(j, 1)));
      stress += (d - delta(i, j)) * (d - delta(i, j));
    }
  return stress;
}

// Classical scaling of Euclidean distances is the projection of the centered
// points onto their two leading principal axes.
Eigen::MatrixXd classical_mds(std::span<const std::vector<double>> positions, std::size_t dims) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  const auto d = static_cast<Eigen::Index>(dims);
  Eigen::MatrixXd centered(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) centered(i, k) = positions[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  centered.rowwise() -= centered.colwise().mean();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered.transpose() * centered);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 2);
  // Eigenvalues ascend; take the two largest.
  for (Eigen::Index c = 0; c < 2 && c < d; ++c) x.col(c) = centered * solver.eigenvectors().col(d - 1 - c);
  return x;
}

// One Guttman transform with unit weights.
Eigen::MatrixXd guttman(const Eigen::MatrixXd& x, const Eigen::MatrixXd& delta) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd next = Eigen::MatrixXd::Zero(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = x(i, 0) - x(j, 0), dy = x(i, 1) - x(j, 1);
      const double d = std::sqrt(dx * dx + dy * dy);
      if (!(d > 0.0)) continue;
      const double w = delta(i, j) / d;
      next(i, 0) += w * dx;
      next(i, 1) += w * dy;
      next(j, 0) -= w * dx;
      next(j, 1) -= w * dy;
    }
  return next / static_cast<double>(n);
}

void normalize_pose(Eigen::MatrixXd& x) {
  const Eigen::RowVector2d mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::Matrix2d cov = x.transpose() * x;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  Eigen::Matrix2d rot;
  rot.col(0) = solver.eigenvectors().col(1);
  rot.col(1) = solver.eigenvectors().col(0);
  x = x * rot;
  constexpr double kZero = 1e-12;
  for (Eigen::Index c = 0; c < 2; ++c) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (std::abs(x(i, c)) <= kZero) continue;
      if (x(i, c) < 0.0) x.col(c) = -x.col(c);
      break;
    }
  }
}

}  // namespace

SpineLayout layout_spine(std::span<const std::vector<double>> positions,
                         std::size_t max_iterations, double tolerance) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  SpineLayout layout;
  if (n == 0) return layout;
  const std::size_t dims = positions.front().size();
  for (const auto& p : positions)
    if (p.size() != dims) throw Error(ErrorCode::config, "spine positions differ in dimension");

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < dims; ++k) {
        const double diff = positions[i][k] - positions[j][k];
        sum += diff * diff;
      }
      delta(i, j) = delta(j, i) = std::sqrt(sum);
    }

  Eigen::MatrixXd x = classical_mds(positions, dims);
  double stress = layout_stress(x, delta);
  for (std::size_t it = 0; it < max_iterations && stress > 0.0; ++it) {
    Eigen::MatrixXd next = guttman(x, delta);
    const double next_stress = layout_stress(next, delta);
    if (next_stress > stress) break;  // majorization never increases stress; guard rounding
    const double change = (stress - next_stress) / stress;
    x = std::move(next);
    stress = next_stress;
    if (change < tolerance) break;
  }
  normalize_pose(x);

  layout.stress = layout_stress(x, delta);
  layout.xy.resize(positions.size());
  for (Eigen::Index i = 0; i < n; ++i) layout.xy[static_cast<std::size_t>(i)] = {x(i, 0) + 0.0, x(i, 1) + 0.0};  // no negative zero
  return layout;
}

}  // namespace tda
