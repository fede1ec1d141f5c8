#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "polydiv/model.hpp"
#include "polydiv/term_structures.hpp"

namespace polydiv {

struct SimConfig {
    std::int64_t paths = 100000;
    double step = 1.0 / 52.0;
    double horizon = 0.0;
    std::uint64_t seed = 1;
    bool control_variate = true;
};

// Both engines write the same per-path buffers and combine them with the
// same pairwise reduction, so their results match bit for bit; the serial
// one exists as the reference the parallel kernel is tested against.
enum class McEngine { serial, openmp };

struct PathBundle {
    int d = 0;
    std::int64_t paths = 0;
    std::vector<double> times;
    // row (path * times.size() + k) holds the state at times[k]
    Eigen::MatrixXd states;
};

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    double raw_se = 0.0;
    double cv_beta = 0.0;
    double variance_ratio = 1.0;
    double tail_bound = 0.0;
    std::int64_t paths = 0;
};

struct Instrument {
    enum class Kind {
        div_future,
        bond,
        div_forward,
        stock,
        swaption,
        stock_option,
        div_option
    };

    Kind kind = Kind::bond;
    double T = 0.0;
    double T1 = 0.0;
    double T2 = 0.0;
    double strike = 0.0;
    double truncation = 200.0;
    SwapSchedule sched;

    static Instrument div_future(double T1, double T2);
    static Instrument bond(double T);
    static Instrument div_forward(double T1, double T2);
    static Instrument stock();
    static Instrument swaption(SwapSchedule sched, double K);
    static Instrument stock_option(double T, double K);
    static Instrument div_option(double T1, double T2, double K);

    double maturity() const;
};

PathBundle simulate_paths(const ModelSpec& spec, const SimConfig& cfg,
                          McEngine engine = McEngine::openmp);

// Simulation starts at (t=0, x0).  cfg.horizon must cover the instrument
// maturity (the stock uses its 200y truncation horizon); for the stock the
// closed-form value of the truncated tail is reported in tail_bound.
McEstimate estimate(const ModelSpec& spec, const SimConfig& cfg,
                    const Instrument& instrument, McEngine engine = McEngine::openmp);

struct SignStats {
    std::int64_t violations = 0;
    std::int64_t observations = 0;
};

// Grid-point counts of negative dividend rates / non-positive states.
SignStats dividend_sign_stats(const ModelSpec& spec, const SimConfig& cfg,
                              McEngine engine = McEngine::openmp);
SignStats positivity_stats(const ModelSpec& spec, const SimConfig& cfg,
                           McEngine engine = McEngine::openmp);

// Deterministic pairwise reduction used by every estimator.
double pairwise_sum(const double* data, std::size_t n);

} // namespace polydiv
