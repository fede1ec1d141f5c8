#include "polydiv/term_structures.hpp"

#include <cmath>

#include "polydiv/errors.hpp"

namespace polydiv {

SwapSchedule SwapSchedule::annual(double t0, int years) {
    if (years < 1) throw validation_error("swap schedule: tenor must be >= 1 year");
    SwapSchedule s;
    s.t0 = t0;
    s.fixed_dates.reserve(static_cast<std::size_t>(years));
    for (int k = 1; k <= years; ++k) s.fixed_dates.push_back(t0 + k);
    return s;
}

std::vector<double> SwapSchedule::accruals() const {
    std::vector<double> d(fixed_dates.size());
    double prev = t0;
    for (std::size_t k = 0; k < fixed_dates.size(); ++k) {
        d[k] = fixed_dates[k] - prev;
        prev = fixed_dates[k];
    }
    return d;
}

void SwapSchedule::validate() const {
    if (fixed_dates.empty())
        throw validation_error("swap schedule: no payment dates");
    double prev = t0;
    for (double tk : fixed_dates) {
        if (!(tk > prev))
            throw validation_error("swap schedule: dates must be strictly increasing");
        prev = tk;
    }
}

LinearPricer::LinearPricer(const ModelSpec& spec)
    : spec_(spec), g1_(build_generator(spec, 1)), g2_(build_generator(spec, 2)) {
    require_valid(spec_);
    g2_max_eig_ = g2_max_real_eigenvalue(spec_);

    // w solves ((gamma-beta) Id - G2') w = v where v encodes the product
    // of the dividend-rate form and the discount form.
    PolyCoordinates divform{spec_.d, 1,
                            (spec_.beta * Eigen::MatrixXd::Identity(g1_.dim(), g1_.dim()) +
                             g1_.entries)
                                .transpose() *
                                spec_.p};
    PolyCoordinates qform{spec_.d, 1, spec_.q};
    PolyCoordinates v = poly_multiply(divform, qform);

    const double gap = spec_.gamma - spec_.beta;
    Eigen::MatrixXd resolvent =
        gap * Eigen::MatrixXd::Identity(g2_.dim(), g2_.dim()) - g2_.entries.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(resolvent);
    cond_ = 1.0 / lu.rcond();
    w_ = lu.solve(v.coeffs);
    duration_lu_.compute(gap * Eigen::MatrixXd::Identity(g2_.dim(), g2_.dim()) -
                         g2_.entries);
}

Eigen::VectorXd LinearPricer::h1(const Eigen::VectorXd& x) const {
    if (x.size() != spec_.d)
        throw validation_error("state vector has wrong dimension");
    return g1_.basis.evaluate(x);
}

double LinearPricer::discount_denominator(const Eigen::VectorXd& x) const {
    const double denom = spec_.q.dot(h1(x));
    if (!(denom > 0.0)) throw validation_error("invalid state for discounting");
    return denom;
}

double LinearPricer::dividend_rate(const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd h = h1(x);
    return std::exp(spec_.beta * t) *
           (spec_.beta * spec_.p.dot(h) + spec_.p.dot(g1_.entries * h));
}

double LinearPricer::dividend_futures(const Eigen::VectorXd& x, double t, double T1,
                                      double T2) const {
    if (!(t <= T1 && T1 <= T2))
        throw validation_error("dividend futures: need t <= T1 <= T2");
    Eigen::VectorXd h = h1(x);
    const double leg2 =
        std::exp(spec_.beta * T2) * spec_.p.dot(transition_matrix(g1_, T2 - t) * h);
    const double leg1 =
        std::exp(spec_.beta * T1) * spec_.p.dot(transition_matrix(g1_, T1 - t) * h);
    return leg2 - leg1;
}

double LinearPricer::zero_coupon_bond(const Eigen::VectorXd& x, double t,
                                      double T) const {
    if (T < t) throw validation_error("bond: maturity before valuation time");
    const double denom = discount_denominator(x);
    if (T == t) return 1.0;
    return std::exp(-spec_.gamma * (T - t)) *
           spec_.q.dot(transition_matrix(g1_, T - t) * h1(x)) / denom;
}

double LinearPricer::short_rate(const Eigen::VectorXd& x) const {
    const double denom = discount_denominator(x);
    return spec_.gamma - spec_.q.dot(g1_.entries * h1(x)) / denom;
}

double LinearPricer::swap_value(const Eigen::VectorXd& x, double t,
                                const SwapSchedule& sched, double K) const {
    sched.validate();
    if (t > sched.t0) throw validation_error("swap: valuation after first reset");
    double v = zero_coupon_bond(x, t, sched.t0) -
               zero_coupon_bond(x, t, sched.fixed_dates.back());
    const std::vector<double> delta = sched.accruals();
    for (std::size_t k = 0; k < delta.size(); ++k)
        v -= K * delta[k] * zero_coupon_bond(x, t, sched.fixed_dates[k]);
    return v;
}

double LinearPricer::forward_swap_rate(const Eigen::VectorXd& x, double t,
                                       const SwapSchedule& sched) const {
    sched.validate();
    if (t > sched.t0) throw validation_error("swap: valuation after first reset");
    double annuity = 0.0;
    const std::vector<double> delta = sched.accruals();
    for (std::size_t k = 0; k < delta.size(); ++k)
        annuity += delta[k] * zero_coupon_bond(x, t, sched.fixed_dates[k]);
    if (annuity <= 0.0) throw validation_error("swap: zero annuity");
    return (zero_coupon_bond(x, t, sched.t0) -
            zero_coupon_bond(x, t, sched.fixed_dates.back())) /
           annuity;
}

double LinearPricer::fundamental_stock(const Eigen::VectorXd& x, double t) const {
    if (!(g2_max_eig_ < spec_.gamma - spec_.beta))
        throw numerical_error("stock price infinite");
    const double denom = discount_denominator(x);
    return std::exp(spec_.beta * t) * w_.dot(g2_.basis.evaluate(x)) / denom;
}

double LinearPricer::stock_duration(const Eigen::VectorXd& x) const {
    if (!(g2_max_eig_ < spec_.gamma - spec_.beta))
        throw numerical_error("stock price infinite");
    Eigen::VectorXd h2 = g2_.basis.evaluate(x);
    const double denom = w_.dot(h2);
    if (!(denom > 0.0))
        throw validation_error("duration undefined: stock value not positive");
    return w_.dot(duration_lu_.solve(h2)) / denom;
}

double LinearPricer::dividend_forward(const Eigen::VectorXd& x, double t, double T1,
                                      double T2) const {
    if (!(t <= T1 && T1 <= T2))
        throw validation_error("dividend forward: need t <= T1 <= T2");
    PolyCoordinates pform{spec_.d, 1, spec_.p};
    PolyCoordinates qnow{spec_.d, 1, spec_.q};
    PolyCoordinates qpushed{spec_.d, 1,
                            transition_matrix(g1_, T2 - T1).transpose() * spec_.q};

    Eigen::VectorXd w2 = poly_multiply(pform, qnow).coeffs;
    Eigen::VectorXd w1 = poly_multiply(pform, qpushed).coeffs;

    Eigen::VectorXd h2 = g2_.basis.evaluate(x);
    const double leg2 =
        std::exp(spec_.beta * T2) * w2.dot(transition_matrix(g2_, T2 - t) * h2);
    const double leg1 =
        std::exp(spec_.beta * T1) * w1.dot(transition_matrix(g2_, T1 - t) * h2);
    const double denom = spec_.q.dot(transition_matrix(g1_, T2 - t) * h1(x));
    if (!(denom > 0.0)) throw validation_error("invalid state for discounting");
    return (leg2 - leg1) / denom;
}

double dividend_rate(const ModelSpec& spec, const Eigen::VectorXd& x, double t) {
    return LinearPricer(spec).dividend_rate(x, t);
}

double dividend_futures(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T1, double T2) {
    return LinearPricer(spec).dividend_futures(x, t, T1, T2);
}

double zero_coupon_bond(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T) {
    return LinearPricer(spec).zero_coupon_bond(x, t, T);
}

double short_rate(const ModelSpec& spec, const Eigen::VectorXd& x) {
    return LinearPricer(spec).short_rate(x);
}

double swap_value(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                  const SwapSchedule& sched, double K) {
    return LinearPricer(spec).swap_value(x, t, sched, K);
}

double forward_swap_rate(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const SwapSchedule& sched) {
    return LinearPricer(spec).forward_swap_rate(x, t, sched);
}

double fundamental_stock(const ModelSpec& spec, const Eigen::VectorXd& x, double t) {
    return LinearPricer(spec).fundamental_stock(x, t);
}

double stock_duration(const ModelSpec& spec, const Eigen::VectorXd& x) {
    return LinearPricer(spec).stock_duration(x);
}

double dividend_forward(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T1, double T2) {
    return LinearPricer(spec).dividend_forward(x, t, T1, T2);
}

} // namespace polydiv
