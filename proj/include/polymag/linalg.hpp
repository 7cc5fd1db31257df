#pragma once

#include <Eigen/Dense>

namespace polymag {

/// ||A||_2 = sqrt(lambda_max(A^T A)), with the eigenvalue taken by cyclic
/// Jacobi rotations on the symmetric matrix A^T A. Throws NumericalError on
/// non-finite input.
double spectral_norm(const Eigen::MatrixXd& a);

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a);

/// e^A by scaling and squaring around the degree-13 Pade approximant
/// (Higham 2005). Throws NumericalError on non-finite input.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a);

/// [A, B] = AB - BA
inline Eigen::MatrixXd commutator(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return a * b - b * a; }

}  // namespace polymag
