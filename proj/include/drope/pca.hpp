#pragma once

#include <Eigen/Core>

namespace drope {

struct PrincipalComponent {
  Eigen::VectorXd direction;  // unit vector, largest-|entry| coordinate positive
  double eigenvalue = 0.0;
  int iterations = 0;
};

/// Leading eigenvector of the covariance matrix by power iteration
/// (up to max_iter sweeps or a residual below tol). Throws when the data has
/// no variance.
PrincipalComponent first_principal_component(const Eigen::MatrixXd& contexts, int max_iter = 200,
                                             double tol = 1e-10);

/// Centered projections of each row onto the first principal component.
Eigen::VectorXd first_principal_scores(const Eigen::MatrixXd& contexts);

}  // namespace drope
