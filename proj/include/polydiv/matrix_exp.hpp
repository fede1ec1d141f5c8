#pragma once

#include <Eigen/Dense>

namespace polydiv {

// exp(A) for dense real square A via Pade approximation with scaling and
// squaring, degree chosen from the 1-norm (orders 3/5/7/9/13).  Relative
// accuracy on well-conditioned problems is near machine precision; the
// frozen tests pin 1e-12 against spectral references.  Throws
// numerical_error if A contains non-finite entries or the result overflows.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

} // namespace polydiv
