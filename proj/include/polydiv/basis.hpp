#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace polydiv {

// Exponent vector of a monomial x1^a1 * ... * xd^ad.
using MultiIndex = std::vector<int>;

std::int64_t binomial(int n, int k);

// Dimension of the space of d-variate polynomials of total degree <= n.
std::int64_t poly_dim(int d, int n);

// Monomials of degree <= n in d variables, graded lexicographic:
// ascending total degree, and within a degree block descending
// lexicographic with x1 > x2 > ... > xd.  For d=2, n=2 this reads
// 1, x1, x2, x1^2, x1*x2, x2^2.
class MonomialBasis {
public:
    MonomialBasis(int vars, int degree);

    int vars() const { return vars_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(exponents_.size()); }

    const MultiIndex& exponent(int rank) const { return exponents_[rank]; }
    int rank_of(const MultiIndex& alpha) const;

    // H(x): all basis monomials evaluated at x, in rank order.
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;

private:
    int vars_;
    int degree_;
    std::vector<MultiIndex> exponents_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

// Rank of alpha within the degree-n basis, computed combinatorially
// (no enumeration).  Throws validation_error if |alpha| > n or any
// entry is negative.
int basis_index(const MultiIndex& alpha, int n);

// Coefficient vector of a polynomial on a MonomialBasis of the stated
// degree.  coeffs has length poly_dim(vars, degree).
struct PolyCoordinates {
    int vars = 0;
    int degree = 0;
    Eigen::VectorXd coeffs;

    static PolyCoordinates zero(int vars, int degree);
    static PolyCoordinates constant(int vars, double c);
    // Zero-pad to a higher degree (no-op if already there).
    PolyCoordinates lifted(int degree) const;
    double evaluate(const Eigen::VectorXd& x) const;
};

// Product of two polynomials; result degree is the sum of degrees.
PolyCoordinates poly_multiply(const PolyCoordinates& a, const PolyCoordinates& b);

// Convenience: p^k by repeated multiplication (k >= 0).
PolyCoordinates poly_power(const PolyCoordinates& p, int k);

} // namespace polydiv
