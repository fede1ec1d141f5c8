#pragma once

#include <map>
#include <utility>

#include <Eigen/Dense>

#include "polydiv/maxent.hpp"
#include "polydiv/model.hpp"
#include "polydiv/term_structures.hpp"

namespace polydiv {

// Option payoff expressed as F(g(X)) with F the positive part; the strike
// is folded into the polynomial g.  put=true flips F to max(-y, 0).
struct PayoffSpec {
    enum class Kind { swaption, stock_option, dividend_option, generic };

    Kind kind = Kind::generic;
    SwapSchedule sched;
    double strike = 0.0;
    double T = 0.0;
    double T1 = 0.0;
    double T2 = 0.0;
    PolyCoordinates g;
    bool put = false;

    static PayoffSpec swaption(SwapSchedule sched, double K);
    static PayoffSpec stock_option(double T, double K);
    static PayoffSpec dividend_option(double T1, double T2, double K);
    static PayoffSpec generic(PolyCoordinates g, double T);

    // payment (discounting) date
    double pay_date() const;
};

// Moment machinery shared by repeated pricing calls on one model: sparse
// generators per degree and forward moment vectors per horizon are cached,
// which is what keeps calibration loops fast.
class MomentEngine {
public:
    explicit MomentEngine(const ModelSpec& spec);

    const ModelSpec& spec() const { return spec_; }
    const LinearPricer& pricer() const { return pricer_; }

    MomentSet payoff_moments(const Eigen::VectorXd& x, double t,
                             const PayoffSpec& payoff, int order);

    // e^{-gamma (pay-t)} / q'H_1(x)
    double prefactor(const Eigen::VectorXd& x, double t, const PayoffSpec& payoff) const;

    PriceResult price_option(const Eigen::VectorXd& x, double t,
                             const PayoffSpec& payoff, int order);

private:
    const SparseGenerator& generator(int degree);
    const Eigen::VectorXd& forward_moments(int degree, const Eigen::VectorXd& x,
                                           double dt);

    ModelSpec spec_;
    LinearPricer pricer_;
    std::map<int, SparseGenerator> generators_;
    std::map<std::pair<int, double>, Eigen::VectorXd> forwards_;
    Eigen::VectorXd forward_x_holder_;
    const Eigen::VectorXd* forward_x_ = nullptr;
};

MomentSet payoff_moments(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const PayoffSpec& payoff, int order);

PriceResult price_option(const ModelSpec& spec, const Eigen::VectorXd& x, double t,
                         const PayoffSpec& payoff, int order);

} // namespace polydiv
