#include "polydiv/generator.hpp"

#include <cmath>
#include <vector>

#include "polydiv/errors.hpp"
#include "polydiv/matrix_exp.hpp"
#include "polydiv/model.hpp"

namespace polydiv {

Eigen::MatrixXd transition_matrix(const GeneratorMatrix& g, double dt) {
    if (dt < 0.0) throw validation_error("transition: dt must be >= 0");
    Eigen::MatrixXd e;
    try {
        e = matrix_exponential(g.entries * dt);
    } catch (const numerical_error&) {
        throw numerical_error("moment overflow");
    }
    e.row(0).setZero();
    e(0, 0) = 1.0;
    return e;
}

Eigen::VectorXd moment_formula(const GeneratorMatrix& g, const Eigen::VectorXd& x,
                               double dt) {
    Eigen::VectorXd v = transition_matrix(g, dt) * g.basis.evaluate(x);
    v[0] = 1.0;
    if (!v.allFinite()) throw numerical_error("moment overflow");
    return v;
}

double two_date_moments(const GeneratorMatrix& g, const Eigen::VectorXd& x,
                        double t, double t1, double t2,
                        const PolyCoordinates& inner, const PolyCoordinates& outer) {
    if (!(t <= t1 && t1 <= t2))
        throw validation_error("two_date_moments: need t <= t1 <= t2");
    if (inner.vars != g.basis.vars() || outer.vars != g.basis.vars())
        throw validation_error("two_date_moments: variable count mismatch");
    if (inner.degree + outer.degree > g.degree)
        throw validation_error("two_date_moments: combined degree exceeds generator degree");

    // Push inner back from t2 to t1.  The transpose transition is block
    // upper-triangular in the graded order, so coordinates above
    // inner.degree are zero up to rounding; drop them explicitly.
    Eigen::VectorXd pushed_full =
        transition_matrix(g, t2 - t1).transpose() * inner.lifted(g.degree).coeffs;
    PolyCoordinates pushed;
    pushed.vars = inner.vars;
    pushed.degree = inner.degree;
    pushed.coeffs = pushed_full.head(poly_dim(inner.vars, inner.degree));

    PolyCoordinates prod = poly_multiply(outer, pushed);
    Eigen::VectorXd fwd = moment_formula(g, x, t1 - t);
    return prod.lifted(g.degree).coeffs.dot(fwd);
}

Eigen::MatrixXd sparse_expm_multiply(const SparseGenerator& a, Eigen::MatrixXd b,
                                     double dt) {
    if (a.rows() != a.cols())
        throw validation_error("sparse_expm_multiply: matrix must be square");
    if (a.rows() != b.rows())
        throw validation_error("sparse_expm_multiply: dimension mismatch");
    if (dt == 0.0) return b;

    // 1-norm of A*dt decides how many Taylor substeps keep the series
    // short and cancellation bounded.
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(a.cols());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseGenerator::InnerIterator it(a, k); it; ++it)
            colsum[it.col()] += std::abs(it.value());
    const double norm1 = colsum.maxCoeff() * std::abs(dt);
    if (!std::isfinite(norm1) || norm1 > 1e6)
        throw numerical_error("moment overflow");

    const int substeps = std::max(1, static_cast<int>(std::ceil(norm1 / 4.0)));
    const double h = dt / substeps;

    for (int s = 0; s < substeps; ++s) {
        Eigen::MatrixXd sum = b;
        Eigen::MatrixXd term = b;
        int quiet = 0;
        for (int k = 1; k <= 120; ++k) {
            term = (a * term) * (h / k);
            sum += term;
            const double tn = term.cwiseAbs().maxCoeff();
            const double sn = sum.cwiseAbs().maxCoeff();
            if (tn <= 1e-18 * sn) {
                if (++quiet >= 2) break;
            } else {
                quiet = 0;
            }
            if (k == 120)
                throw numerical_error("sparse_expm_multiply: Taylor sum did not converge");
        }
        b.swap(sum);
    }
    if (!b.allFinite()) throw numerical_error("moment overflow");
    return b;
}

namespace {

template <typename Sink>
void generator_entries(const ModelSpec& spec, const MonomialBasis& basis, Sink&& sink) {
    const int d = spec.d;
    const Eigen::VectorXd kth = spec.kappa * spec.theta;
    const Eigen::MatrixXd a = spec.diffusion();
    const bool jumps = spec.jumps.active();
    const double xi = spec.jumps.intensity;

    std::vector<double> jump_mean(static_cast<std::size_t>(d), 0.0);
    if (jumps)
        for (int i = 0; i < d; ++i)
            jump_mean[static_cast<std::size_t>(i)] = spec.jumps.mean_component(i, d);

    MultiIndex shifted(static_cast<std::size_t>(d));
    for (int r = 0; r < basis.size(); ++r) {
        const MultiIndex& alpha = basis.exponent(r);

        for (int i = 0; i < d; ++i) {
            const int ai = alpha[static_cast<std::size_t>(i)];
            if (ai == 0) continue;
            shifted = alpha;
            shifted[static_cast<std::size_t>(i)] -= 1;
            if (kth[i] != 0.0) sink(r, basis.rank_of(shifted), ai * kth[i]);
            for (int j = 0; j < d; ++j) {
                const double kij = spec.kappa(i, j);
                if (kij == 0.0) continue;
                shifted[static_cast<std::size_t>(j)] += 1;
                sink(r, basis.rank_of(shifted), -ai * kij);
                shifted[static_cast<std::size_t>(j)] -= 1;
            }
        }

        double diag = 0.0;
        for (int i = 0; i < d; ++i) {
            const int ai = alpha[static_cast<std::size_t>(i)];
            if (ai == 0) continue;
            diag += 0.5 * a(i, i) * ai * (ai - 1);
            for (int j = i + 1; j < d; ++j)
                diag += a(i, j) * ai * alpha[static_cast<std::size_t>(j)];
        }
        if (jumps) {
            double lin = 0.0;
            for (int i = 0; i < d; ++i)
                lin += alpha[static_cast<std::size_t>(i)] *
                       jump_mean[static_cast<std::size_t>(i)];
            double t;
            try {
                t = spec.jumps.transformed_moment(alpha);
            } catch (const numerical_error&) {
                throw numerical_error("jump moments unavailable");
            }
            diag += xi * (t - 1.0 - lin);
        }
        if (diag != 0.0) sink(r, r, diag);
    }
}

} // namespace

GeneratorMatrix build_generator(const ModelSpec& spec, int degree) {
    MonomialBasis basis(spec.d, degree);
    GeneratorMatrix g{degree, basis,
                      Eigen::MatrixXd::Zero(basis.size(), basis.size())};
    generator_entries(spec, g.basis, [&](int r, int c, double v) {
        g.entries(r, c) += v;
    });
    return g;
}

SparseGenerator build_sparse_generator(const ModelSpec& spec, int degree) {
    MonomialBasis basis(spec.d, degree);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(basis.size()) * 8);
    generator_entries(spec, basis, [&](int r, int c, double v) {
        trip.emplace_back(r, c, v);
    });
    SparseGenerator s(basis.size(), basis.size());
    s.setFromTriplets(trip.begin(), trip.end());
    return s;
}

} // namespace polydiv
