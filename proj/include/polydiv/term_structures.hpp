#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiv/generator.hpp"
#include "polydiv/model.hpp"

namespace polydiv {

// Fixed leg of a payer swap: reset at t0, payment dates strictly
// increasing, accrual delta_k = T_k - T_{k-1} (T_0 = t0).
struct SwapSchedule {
    double t0 = 0.0;
    std::vector<double> fixed_dates;

    static SwapSchedule annual(double t0, int years);

    std::vector<double> accruals() const;
    double maturity() const { return fixed_dates.back(); }
    void validate() const;
};

struct PriceResult {
    double value = 0.0;
    double condition = 0.0;
    std::string note;
};

// Closed-form linear pricing engine.  Construction validates the model,
// builds the degree-1 and degree-2 generators, and factors the stock
// resolvent once; all pricing calls are then cheap and thread-safe.
class LinearPricer {
public:
    explicit LinearPricer(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    const GeneratorMatrix& g1() const { return g1_; }
    const GeneratorMatrix& g2() const { return g2_; }

    // Coordinates w of the stock numerator: e^{beta t} w'H_2(x) prices
    // the dividend stream.  Condition number of the resolvent solve is
    // exposed for diagnostics (warn above 1e12).
    const Eigen::VectorXd& stock_w() const { return w_; }
    double stock_solve_condition() const { return cond_; }

    double dividend_rate(const Eigen::VectorXd& x, double t) const;
    double dividend_futures(const Eigen::VectorXd& x, double t, double T1, double T2) const;
    double zero_coupon_bond(const Eigen::VectorXd& x, double t, double T) const;
    double short_rate(const Eigen::VectorXd& x) const;
    double swap_value(const Eigen::VectorXd& x, double t, const SwapSchedule& sched,
                      double K) const;
    double forward_swap_rate(const Eigen::VectorXd& x, double t,
                             const SwapSchedule& sched) const;
    double fundamental_stock(const Eigen::VectorXd& x, double t) const;
    double stock_duration(const Eigen::VectorXd& x) const;
    double dividend_forward(const Eigen::VectorXd& x, double t, double T1, double T2) const;

private:
    Eigen::VectorXd h1(const Eigen::VectorXd& x) const;
    double discount_denominator(const Eigen::VectorXd& x) const;

    ModelSpec spec_;
    GeneratorMatrix g1_;
    GeneratorMatrix g2_;
    Eigen::VectorXd w_;
    Eigen::PartialPivLU<Eigen::MatrixXd> duration_lu_;
    double cond_ = 0.0;
    double g2_max_eig_ = 0.0;
};

double dividend_rate(const ModelSpec& spec, const Eigen::VectorXd& x, double t);
double dividend_futures(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T1, double T2);
double zero_coupon_bond(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T);
double short_rate(const ModelSpec& spec, const Eigen::VectorXd& x);
double swap_value(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                  const SwapSchedule& sched, double K);
double forward_swap_rate(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const SwapSchedule& sched);
double fundamental_stock(const ModelSpec& spec, const Eigen::VectorXd& x, double t);
double stock_duration(const ModelSpec& spec, const Eigen::VectorXd& x);
double dividend_forward(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                        double T1, double T2);

} // namespace polydiv
