#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "polydiv/basis.hpp"

namespace polydiv {

// Matrix representation of the process generator on the degree-<=n monomial
// basis.  Row r holds the coordinates of (generator applied to monomial r),
// so conditional moments follow from
//     E_t[H(X_{t+dt})] = exp(entries * dt) * H(x).
// The constant monomial's row is identically zero.
struct GeneratorMatrix {
    int degree = 0;
    MonomialBasis basis;
    Eigen::MatrixXd entries;

    int dim() const { return static_cast<int>(entries.rows()); }
};

// exp(G*dt) with the constant-monomial row pinned to (1,0,...,0); the pin
// removes rounding noise in a row that is exact by construction.
Eigen::MatrixXd transition_matrix(const GeneratorMatrix& g, double dt);

// E_t[H_n(X_{t+dt})] given X_t = x.  The first entry is exactly 1.
Eigen::VectorXd moment_formula(const GeneratorMatrix& g, const Eigen::VectorXd& x,
                               double dt);

// E_t[ outer(X_{t1}) * E_{t1}[ inner(X_{t2}) ] ]:  pushes inner back from t2
// to t1 through exp(G'*(t2-t1)), multiplies by outer, and takes the
// conditional moment of the product over [t, t1].
// Requires t <= t1 <= t2 and deg(inner) + deg(outer) <= g.degree.
double two_date_moments(const GeneratorMatrix& g, const Eigen::VectorXd& x,
                        double t, double t1, double t2,
                        const PolyCoordinates& inner, const PolyCoordinates& outer);

// Sparse mirror of GeneratorMatrix::entries for large bases where only the
// action of exp(G*dt) is needed.
using SparseGenerator = Eigen::SparseMatrix<double>;

// B <- exp(A*dt) * B by a scaled-and-stepped Taylor sum.  Columns are
// treated independently; accuracy is driven to machine level per substep.
Eigen::MatrixXd sparse_expm_multiply(const SparseGenerator& a, Eigen::MatrixXd b,
                                     double dt);

} // namespace polydiv
