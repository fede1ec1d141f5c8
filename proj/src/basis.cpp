#include "polydiv/basis.hpp"

#include <algorithm>

#include "polydiv/errors.hpp"

namespace polydiv {

std::int64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

std::int64_t poly_dim(int d, int n) {
    if (n < 0) return 0;
    return binomial(n + d, d);
}

namespace {

// Exponent vectors over `vars` variables summing to exactly `total`,
// descending lex, appended to out.
void enumerate_degree(int vars, int total, MultiIndex& scratch, int pos,
                      std::vector<MultiIndex>& out) {
    if (pos == vars - 1) {
        scratch[pos] = total;
        out.push_back(scratch);
        return;
    }
    for (int a = total; a >= 0; --a) {
        scratch[pos] = a;
        enumerate_degree(vars, total - a, scratch, pos + 1, out);
    }
}

std::uint64_t pack_key(const MultiIndex& alpha) {
    std::uint64_t key = 0;
    for (int a : alpha) key = (key << 6) | static_cast<std::uint64_t>(a);
    return key;
}

} // namespace

MonomialBasis::MonomialBasis(int vars, int degree) : vars_(vars), degree_(degree) {
    if (vars < 1 || vars > 10)
        throw validation_error("monomial basis: vars must be in [1,10]");
    if (degree < 0 || degree > 63)
        throw validation_error("monomial basis: degree must be in [0,63]");
    std::int64_t dim = poly_dim(vars, degree);
    if (dim > 2'000'000)
        throw validation_error("monomial basis: dimension too large");
    exponents_.reserve(static_cast<std::size_t>(dim));
    MultiIndex scratch(static_cast<std::size_t>(vars), 0);
    for (int m = 0; m <= degree; ++m)
        enumerate_degree(vars, m, scratch, 0, exponents_);
    lookup_.reserve(exponents_.size() * 2);
    for (int r = 0; r < size(); ++r)
        lookup_.emplace(pack_key(exponents_[static_cast<std::size_t>(r)]), r);
}

int MonomialBasis::rank_of(const MultiIndex& alpha) const {
    if (static_cast<int>(alpha.size()) != vars_)
        throw validation_error("rank_of: wrong number of variables");
    auto it = lookup_.find(pack_key(alpha));
    if (it == lookup_.end())
        throw validation_error("rank_of: monomial outside basis");
    return it->second;
}

Eigen::VectorXd MonomialBasis::evaluate(const Eigen::VectorXd& x) const {
    if (x.size() != vars_)
        throw validation_error("basis evaluate: state dimension mismatch");
    Eigen::VectorXd h(size());
    for (int r = 0; r < size(); ++r) {
        const MultiIndex& a = exponents_[static_cast<std::size_t>(r)];
        double v = 1.0;
        for (int j = 0; j < vars_; ++j)
            for (int k = 0; k < a[static_cast<std::size_t>(j)]; ++k) v *= x[j];
        h[r] = v;
    }
    return h;
}

int basis_index(const MultiIndex& alpha, int n) {
    const int d = static_cast<int>(alpha.size());
    if (d < 1) throw validation_error("basis_index: empty multi-index");
    int m = 0;
    for (int a : alpha) {
        if (a < 0) throw validation_error("basis_index: negative exponent");
        m += a;
    }
    if (m > n) throw validation_error("basis_index: degree exceeds basis degree");

    // Monomials of lower total degree come first; within the degree-m
    // block, count the vectors that precede alpha in descending lex.
    std::int64_t rank = poly_dim(d, m - 1);
    int consumed = 0;
    for (int j = 0; j < d; ++j) {
        const int remaining = m - consumed;
        const int t = remaining - alpha[static_cast<std::size_t>(j)] - 1;
        const int r = d - j - 1;
        if (t >= 0) rank += binomial(t + r, r);
        consumed += alpha[static_cast<std::size_t>(j)];
    }
    return static_cast<int>(rank);
}

PolyCoordinates PolyCoordinates::zero(int vars, int degree) {
    PolyCoordinates p;
    p.vars = vars;
    p.degree = degree;
    p.coeffs = Eigen::VectorXd::Zero(poly_dim(vars, degree));
    return p;
}

PolyCoordinates PolyCoordinates::constant(int vars, double c) {
    PolyCoordinates p = zero(vars, 0);
    p.coeffs[0] = c;
    return p;
}

PolyCoordinates PolyCoordinates::lifted(int target) const {
    if (target < degree)
        throw validation_error("lifted: target degree below current degree");
    if (target == degree) return *this;
    PolyCoordinates p = zero(vars, target);
    p.coeffs.head(coeffs.size()) = coeffs;
    return p;
}

double PolyCoordinates::evaluate(const Eigen::VectorXd& x) const {
    MonomialBasis basis(vars, degree);
    return coeffs.dot(basis.evaluate(x));
}

PolyCoordinates poly_multiply(const PolyCoordinates& a, const PolyCoordinates& b) {
    if (a.vars != b.vars)
        throw validation_error("poly_multiply: variable count mismatch");
    const int d = a.vars;
    PolyCoordinates out = PolyCoordinates::zero(d, a.degree + b.degree);
    MonomialBasis ba(d, a.degree), bb(d, b.degree), bo(d, out.degree);
    MultiIndex sum(static_cast<std::size_t>(d));
    for (int i = 0; i < ba.size(); ++i) {
        const double ai = a.coeffs[i];
        if (ai == 0.0) continue;
        const MultiIndex& ea = ba.exponent(i);
        for (int j = 0; j < bb.size(); ++j) {
            const double bj = b.coeffs[j];
            if (bj == 0.0) continue;
            const MultiIndex& eb = bb.exponent(j);
            for (int k = 0; k < d; ++k)
                sum[static_cast<std::size_t>(k)] =
                    ea[static_cast<std::size_t>(k)] + eb[static_cast<std::size_t>(k)];
            out.coeffs[bo.rank_of(sum)] += ai * bj;
        }
    }
    return out;
}

PolyCoordinates poly_power(const PolyCoordinates& p, int k) {
    if (k < 0) throw validation_error("poly_power: negative exponent");
    PolyCoordinates out = PolyCoordinates::constant(p.vars, 1.0);
    for (int i = 0; i < k; ++i) out = poly_multiply(out, p);
    return out;
}

} // namespace polydiv
