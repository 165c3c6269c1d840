#include "drope/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace drope {

PrincipalComponent first_principal_component(const Eigen::MatrixXd& contexts, int max_iter,
                                             double tol) {
  const Eigen::Index n = contexts.rows();
  const Eigen::Index d = contexts.cols();
  if (n < 2) throw std::invalid_argument("first_principal_component: need at least 2 rows");

  const Eigen::RowVectorXd mean = contexts.colwise().mean();
  const Eigen::MatrixXd centered = contexts.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  if (!(cov.diagonal().sum() > 0.0)) {
    throw std::invalid_argument("first_principal_component: data has zero variance");
  }

  // deterministic start: ones with a mild per-coordinate tilt so the start
  // is not orthogonal to eigenvectors with sign structure
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = 1.0 + 0.01 * static_cast<double>(j % 7);
  v.normalize();

  PrincipalComponent out;
  double lambda = 0.0;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    Eigen::VectorXd w = cov * v;
    const double norm = w.norm();
    if (!(norm > 0.0)) {
      throw std::invalid_argument("first_principal_component: degenerate iterate");
    }
    w /= norm;
    lambda = w.dot(cov * w);
    const double residual = (cov * w - lambda * w).norm();
    v = w;
    if (residual < tol) {
      ++iter;
      break;
    }
  }

  // sign convention: the largest-magnitude loading is positive
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;

  out.direction = v;
  out.eigenvalue = lambda;
  out.iterations = iter;
  return out;
}

Eigen::VectorXd first_principal_scores(const Eigen::MatrixXd& contexts) {
  const PrincipalComponent pc = first_principal_component(contexts);
  const Eigen::RowVectorXd mean = contexts.colwise().mean();
  return (contexts.rowwise() - mean) * pc.direction;
}

}  // namespace drope
