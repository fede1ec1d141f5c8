#include "polydiv/payoffs.hpp"

#include <algorithm>
#include <cmath>

#include "polydiv/errors.hpp"
#include "polydiv/generator.hpp"

namespace polydiv {

namespace {

// Largest generator degree the moment machinery will build.  Degree-2
// payoff variables at moment order 8 need exp(G_16); at d=4 that basis
// has 4845 monomials, still cheap through the sparse exponential action.
constexpr int kMaxGeneratorDegree = 16;

int payoff_degree(const PayoffSpec& payoff) {
    switch (payoff.kind) {
    case PayoffSpec::Kind::swaption: return 1;
    case PayoffSpec::Kind::stock_option: return 2;
    case PayoffSpec::Kind::dividend_option: return 2;
    case PayoffSpec::Kind::generic: return payoff.g.degree;
    }
    throw validation_error("unknown payoff kind");
}

} // namespace

PayoffSpec PayoffSpec::swaption(SwapSchedule sched, double K) {
    PayoffSpec p;
    p.kind = Kind::swaption;
    p.sched = std::move(sched);
    p.strike = K;
    p.T = p.sched.t0;
    return p;
}

PayoffSpec PayoffSpec::stock_option(double T, double K) {
    PayoffSpec p;
    p.kind = Kind::stock_option;
    p.T = T;
    p.strike = K;
    return p;
}

PayoffSpec PayoffSpec::dividend_option(double T1, double T2, double K) {
    PayoffSpec p;
    p.kind = Kind::dividend_option;
    p.T1 = T1;
    p.T2 = T2;
    p.T = T2;
    p.strike = K;
    return p;
}

PayoffSpec PayoffSpec::generic(PolyCoordinates g, double T) {
    PayoffSpec p;
    p.kind = Kind::generic;
    p.g = std::move(g);
    p.T = T;
    return p;
}

double PayoffSpec::pay_date() const {
    switch (kind) {
    case Kind::swaption: return sched.t0;
    case Kind::dividend_option: return T2;
    default: return T;
    }
}

MomentEngine::MomentEngine(const ModelSpec& spec) : spec_(spec), pricer_(spec) {}

const SparseGenerator& MomentEngine::generator(int degree) {
    auto it = generators_.find(degree);
    if (it == generators_.end())
        it = generators_.emplace(degree, build_sparse_generator(spec_, degree)).first;
    return it->second;
}

const Eigen::VectorXd& MomentEngine::forward_moments(int degree, const Eigen::VectorXd& x,
                                                     double dt) {
    if (forward_x_ == nullptr || forward_x_->size() != x.size() || *forward_x_ != x) {
        forwards_.clear();
        forward_x_holder_ = x;
        forward_x_ = &forward_x_holder_;
    }
    auto key = std::make_pair(degree, dt);
    auto it = forwards_.find(key);
    if (it == forwards_.end()) {
        MonomialBasis basis(spec_.d, degree);
        Eigen::MatrixXd v = sparse_expm_multiply(generator(degree), basis.evaluate(x), dt);
        if (!v.allFinite()) throw numerical_error("moment overflow");
        it = forwards_.emplace(key, v.col(0)).first;
    }
    return it->second;
}

namespace {

PolyCoordinates linear_variable(int d, const Eigen::VectorXd& coords) {
    PolyCoordinates v;
    v.vars = d;
    v.degree = 1;
    v.coeffs = coords;
    return v;
}

// Extended-precision polynomial kit for the dividend-option moments.  The
// binomial split over the two settlement dates cancels the O(1) per-term
// expectations down to central moments that can sit near 1e-15, which is
// below double rounding noise once seven terms are summed.  Long double
// keeps roughly three more digits, enough for moment orders up to eight at
// realistic vol scales.
using WideVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
using WideMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

struct WidePoly {
    int vars = 0;
    int degree = 0;
    WideVec coeffs;
};

WidePoly widen(const PolyCoordinates& p) {
    WidePoly w;
    w.vars = p.vars;
    w.degree = p.degree;
    w.coeffs = p.coeffs.cast<long double>();
    return w;
}

WidePoly wide_one(int vars) {
    WidePoly w;
    w.vars = vars;
    w.degree = 0;
    w.coeffs = WideVec::Ones(1);
    return w;
}

WidePoly wide_multiply(const WidePoly& a, const WidePoly& b) {
    const int d = a.vars;
    WidePoly out;
    out.vars = d;
    out.degree = a.degree + b.degree;
    out.coeffs = WideVec::Zero(poly_dim(d, out.degree));
    MonomialBasis ba(d, a.degree), bb(d, b.degree), bo(d, out.degree);
    MultiIndex sum(static_cast<std::size_t>(d));
    for (int i = 0; i < ba.size(); ++i) {
        const long double ai = a.coeffs[i];
        if (ai == 0.0L) continue;
        const MultiIndex& ea = ba.exponent(i);
        for (int j = 0; j < bb.size(); ++j) {
            const long double bj = b.coeffs[j];
            if (bj == 0.0L) continue;
            const MultiIndex& eb = bb.exponent(j);
            for (int k = 0; k < d; ++k)
                sum[static_cast<std::size_t>(k)] =
                    ea[static_cast<std::size_t>(k)] + eb[static_cast<std::size_t>(k)];
            out.coeffs[bo.rank_of(sum)] += ai * bj;
        }
    }
    return out;
}

WideVec wide_lift(const WidePoly& p, int degree) {
    WideVec out = WideVec::Zero(poly_dim(p.vars, degree));
    out.head(p.coeffs.size()) = p.coeffs;
    return out;
}

WideVec wide_basis_values(const MonomialBasis& basis, const Eigen::VectorXd& x) {
    WideVec out(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        const MultiIndex& e = basis.exponent(i);
        long double v = 1.0L;
        for (std::size_t k = 0; k < e.size(); ++k)
            for (int r = 0; r < e[k]; ++r) v *= static_cast<long double>(x[static_cast<long>(k)]);
        out[i] = v;
    }
    return out;
}

WideMat wide_expm_multiply(const SparseGenerator& a, WideMat b, double dt) {
    if (dt == 0.0) return b;
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(a.cols());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SparseGenerator::InnerIterator it(a, k); it; ++it)
            colsum[it.col()] += std::abs(it.value());
    const double norm1 = colsum.maxCoeff() * std::abs(dt);
    if (!std::isfinite(norm1) || norm1 > 1e6)
        throw numerical_error("moment overflow");

    const int substeps = std::max(1, static_cast<int>(std::ceil(norm1 / 4.0)));
    const long double h = static_cast<long double>(dt) / substeps;
    Eigen::SparseMatrix<long double> aw = a.cast<long double>();
    for (int s = 0; s < substeps; ++s) {
        WideMat sum = b;
        WideMat term = b;
        int quiet = 0;
        for (int k = 1; k <= 160; ++k) {
            term = (aw * term) * (h / k);
            sum += term;
            const long double tn = term.cwiseAbs().maxCoeff();
            const long double sn = sum.cwiseAbs().maxCoeff();
            if (tn <= 1e-22L * sn) {
                if (++quiet >= 2) break;
            } else {
                quiet = 0;
            }
            if (k == 160)
                throw numerical_error("matrix exponential action did not converge");
        }
        b.swap(sum);
    }
    if (!b.allFinite()) throw numerical_error("moment overflow");
    return b;
}

} // namespace

MomentSet MomentEngine::payoff_moments(const Eigen::VectorXd& x, double t,
                                       const PayoffSpec& payoff, int order) {
    if (order < 1 || order > 8)
        throw validation_error("moment order must lie in [1, 8]");
    const int d = spec_.d;
    if (x.size() != d) throw validation_error("state dimension mismatch");

    const int deg = payoff_degree(payoff);
    const int gen_degree = std::max(1, order * deg);
    if (gen_degree > kMaxGeneratorDegree)
        throw validation_error("payoff moment degree exceeds the supported generator degree");

    Eigen::VectorXd moments = Eigen::VectorXd::Zero(order + 1);
    moments(0) = 1.0;

    if (payoff.kind == PayoffSpec::Kind::dividend_option) {
        if (!(t <= payoff.T1 && payoff.T1 <= payoff.T2))
            throw validation_error("dividend option dates must satisfy t <= T1 <= T2");

        // Y = c * (atil - b) with c, b the degree-1 cumulative-dividend and
        // deflator blocks; moments split across the two dates binomially.
        // Everything from the power expansion to the final dot stays in
        // extended precision; see the WidePoly note above.
        PolyCoordinates c = linear_variable(d, spec_.q);
        Eigen::VectorXd av = std::exp(spec_.beta * payoff.T2) * spec_.p;
        av(0) -= payoff.strike;
        PolyCoordinates atil = linear_variable(d, av);
        PolyCoordinates b = linear_variable(d, std::exp(spec_.beta * payoff.T1) * spec_.p);

        const WidePoly cw = widen(c);
        const WidePoly aw = wide_multiply(cw, widen(atil));
        const WidePoly bw = widen(b);
        std::vector<WidePoly> c_pow(order + 1), a_pow(order + 1), b_pow(order + 1);
        c_pow[0] = a_pow[0] = b_pow[0] = wide_one(d);
        for (int k = 1; k <= order; ++k) {
            c_pow[k] = wide_multiply(c_pow[k - 1], cw);
            a_pow[k] = wide_multiply(a_pow[k - 1], aw);
            b_pow[k] = wide_multiply(b_pow[k - 1], bw);
        }

        const long dim = poly_dim(d, gen_degree);
        struct Term {
            int n, k;
            long double weight;
            int inner_degree;
        };
        std::vector<Term> terms;
        WideMat inner(dim, 0);
        for (int n = 1; n <= order; ++n) {
            for (int k = 0; k <= n; ++k) {
                WidePoly ip = wide_multiply(c_pow[k], a_pow[n - k]);
                inner.conservativeResize(Eigen::NoChange, inner.cols() + 1);
                inner.col(inner.cols() - 1) = wide_lift(ip, gen_degree);
                long double w = static_cast<long double>(binomial(n, k)) *
                                ((k % 2 == 0) ? 1.0L : -1.0L);
                terms.push_back({n, k, w, ip.degree});
            }
        }

        SparseGenerator gt = generator(gen_degree).transpose();
        WideMat pushed = wide_expm_multiply(gt, std::move(inner), payoff.T2 - payoff.T1);
        MonomialBasis basis(d, gen_degree);
        WideMat fwd = wide_expm_multiply(generator(gen_degree),
                                         wide_basis_values(basis, x), payoff.T1 - t);

        WideVec acc = WideVec::Zero(order + 1);
        acc[0] = 1.0L;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            const Term& tm = terms[j];
            WidePoly psi;
            psi.vars = d;
            psi.degree = tm.inner_degree;
            psi.coeffs = pushed.col(static_cast<long>(j)).head(poly_dim(d, tm.inner_degree));
            WidePoly prod = wide_multiply(psi, b_pow[tm.k]);
            acc[tm.n] += tm.weight * wide_lift(prod, gen_degree).dot(fwd.col(0));
        }
        for (int n = 0; n <= order; ++n) moments(n) = static_cast<double>(acc[n]);
        if (!moments.allFinite()) throw numerical_error("moment overflow");
        return make_moment_set(moments, Support::full_line());
    }

    PolyCoordinates y;
    double expiry = payoff.T;
    switch (payoff.kind) {
    case PayoffSpec::Kind::swaption: {
        payoff.sched.validate();
        if (t > payoff.sched.t0)
            throw validation_error("swaption: valuation after expiry");
        expiry = payoff.sched.t0;
        Eigen::VectorXd a = spec_.q;
        const auto& dates = payoff.sched.fixed_dates;
        double tn = dates.back();
        a -= std::exp(-spec_.gamma * (tn - expiry)) *
             (transition_matrix(pricer_.g1(), tn - expiry).transpose() * spec_.q);
        auto acc = payoff.sched.accruals();
        for (std::size_t k = 0; k < dates.size(); ++k) {
            a -= payoff.strike * acc[k] * std::exp(-spec_.gamma * (dates[k] - expiry)) *
                 (transition_matrix(pricer_.g1(), dates[k] - expiry).transpose() * spec_.q);
        }
        y = linear_variable(d, a);
        break;
    }
    case PayoffSpec::Kind::stock_option: {
        if (t > payoff.T) throw validation_error("option expiry before valuation date");
        PolyCoordinates stock;
        stock.vars = d;
        stock.degree = 2;
        stock.coeffs = std::exp(spec_.beta * payoff.T) * pricer_.stock_w();
        PolyCoordinates kq = linear_variable(d, spec_.q).lifted(2);
        y = stock;
        y.coeffs -= payoff.strike * kq.coeffs;
        break;
    }
    case PayoffSpec::Kind::generic: {
        if (t > payoff.T) throw validation_error("option expiry before valuation date");
        if (payoff.g.vars != d) throw validation_error("payoff polynomial dimension mismatch");
        y = payoff.g;
        break;
    }
    default:
        throw validation_error("unknown payoff kind");
    }

    const Eigen::VectorXd& fwd = forward_moments(gen_degree, x, expiry - t);
    PolyCoordinates pw = PolyCoordinates::constant(d, 1.0);
    for (int k = 1; k <= order; ++k) {
        pw = poly_multiply(pw, y);
        moments(k) = pw.lifted(gen_degree).coeffs.dot(fwd);
    }
    if (!moments.allFinite()) throw numerical_error("moment overflow");
    return make_moment_set(moments, Support::full_line());
}

double MomentEngine::prefactor(const Eigen::VectorXd& x, double t,
                               const PayoffSpec& payoff) const {
    double den = spec_.q(0) + spec_.q.tail(spec_.d).dot(x);
    if (!(den > 0.0)) throw validation_error("invalid state for discounting");
    return std::exp(-spec_.gamma * (payoff.pay_date() - t)) / den;
}

PriceResult MomentEngine::price_option(const Eigen::VectorXd& x, double t,
                                       const PayoffSpec& payoff, int order) {
    if (order < 2) throw validation_error("pricing requires moment order >= 2");
    MomentSet ms = payoff_moments(x, t, payoff, order);
    double pre = prefactor(x, t, payoff);

    std::string note;
    for (const auto& w : ms.warnings) {
        if (!note.empty()) note += "; ";
        note += w;
    }

    double m1 = ms.moments(1);
    double m2 = ms.moments(2);
    double var = m2 - m1 * m1;
    if (var <= 1e-13 * std::max(std::abs(m2), m1 * m1)) {
        double intrinsic = payoff.put ? std::max(-m1, 0.0) : std::max(m1, 0.0);
        if (!note.empty()) note += "; ";
        note += "point mass";
        return {pre * intrinsic, 0.0, note};
    }

    MaxEntDensity density = fit_maxent(ms);
    double xlo = (density.lo - density.shift) / density.scale;
    double xhi = (density.hi - density.shift) / density.scale;
    double kink = -density.shift / density.scale;

    double lo = payoff.put ? xlo : std::max(xlo, kink);
    double hi = payoff.put ? std::min(xhi, kink) : xhi;
    double value = 0.0;
    if (hi > lo) {
        const Eigen::VectorXd& lam = density.std_lambdas;
        double shift = density.shift;
        double scale = density.scale;
        bool put = payoff.put;
        auto integrand = [&lam, shift, scale, put](double u, Eigen::VectorXd& out) {
            double poly = 0.0;
            for (int i = static_cast<int>(lam.size()) - 1; i >= 0; --i)
                poly = poly * u + lam(i);
            double payout = shift + scale * u;
            if (put) payout = -payout;
            out(0) = payout * std::exp(std::min(-poly, 700.0));
        };
        value = integrate_panels(integrand, 1, lo, hi, 1e-10)(0);
    }
    return {pre * value, density.condition, note};
}

MomentSet payoff_moments(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const PayoffSpec& payoff, int order) {
    MomentEngine engine(spec);
    return engine.payoff_moments(x, t, payoff, order);
}

PriceResult price_option(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const PayoffSpec& payoff, int order) {
    MomentEngine engine(spec);
    return engine.price_option(x, t, payoff, order);
}

} // namespace polydiv
