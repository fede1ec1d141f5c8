#include "polydiv/mc.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "polydiv/errors.hpp"
#include "polydiv/rng.hpp"

namespace polydiv {

Instrument Instrument::div_future(double T1, double T2) {
    Instrument ins;
    ins.kind = Kind::div_future;
    ins.T1 = T1;
    ins.T2 = T2;
    return ins;
}

Instrument Instrument::bond(double T) {
    Instrument ins;
    ins.kind = Kind::bond;
    ins.T = T;
    return ins;
}

Instrument Instrument::div_forward(double T1, double T2) {
    Instrument ins;
    ins.kind = Kind::div_forward;
    ins.T1 = T1;
    ins.T2 = T2;
    return ins;
}

Instrument Instrument::stock() {
    Instrument ins;
    ins.kind = Kind::stock;
    return ins;
}

Instrument Instrument::swaption(SwapSchedule sched, double K) {
    Instrument ins;
    ins.kind = Kind::swaption;
    ins.sched = std::move(sched);
    ins.strike = K;
    return ins;
}

Instrument Instrument::stock_option(double T, double K) {
    Instrument ins;
    ins.kind = Kind::stock_option;
    ins.T = T;
    ins.strike = K;
    return ins;
}

Instrument Instrument::div_option(double T1, double T2, double K) {
    Instrument ins;
    ins.kind = Kind::div_option;
    ins.T1 = T1;
    ins.T2 = T2;
    ins.strike = K;
    return ins;
}

double Instrument::maturity() const {
    switch (kind) {
    case Kind::div_future:
    case Kind::div_forward:
    case Kind::div_option:
        return T2;
    case Kind::bond:
    case Kind::stock_option:
        return T;
    case Kind::stock:
        return truncation;
    case Kind::swaption:
        return sched.t0;
    }
    return 0.0;
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const std::size_t m = n / 2;
    return pairwise_sum(data, m) + pairwise_sum(data + m, n - m);
}

namespace {

struct JumpSampler {
    bool active = false;
    JumpLaw::Kind kind = JumpLaw::Kind::none;
    double mean_per_step = 0.0;
    Eigen::VectorXd mu;
    Eigen::MatrixXd chol;
    double prob = 0.0;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    int blocks_per_jump = 0;
};

struct PathDynamics {
    int d = 0;
    std::int64_t nsteps = 0;
    double h = 0.0;
    double sqrt_h = 0.0;
    Eigen::MatrixXd kappa;
    Eigen::VectorXd theta;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd x0;
    Eigen::VectorXd comp_per_step; // xi * E[z] * h, componentwise
    JumpSampler jumps;
    int diffusion_blocks = 0;
};

PathDynamics make_dynamics(const ModelSpec& spec, const SimConfig& cfg,
                           std::int64_t nsteps) {
    if (cfg.paths < 1) throw validation_error("simulation: paths must be >= 1");
    if (!(cfg.step > 0.0)) throw validation_error("simulation: step must be > 0");
    if (spec.x0.size() != spec.d)
        throw validation_error("simulation: x0 has wrong dimension");

    PathDynamics dyn;
    dyn.d = spec.d;
    dyn.nsteps = nsteps;
    dyn.h = cfg.step;
    dyn.sqrt_h = std::sqrt(cfg.step);
    dyn.kappa = spec.kappa;
    dyn.theta = spec.theta;
    dyn.sigma = spec.sigma;
    dyn.x0 = spec.x0;
    dyn.comp_per_step = Eigen::VectorXd::Zero(spec.d);
    dyn.diffusion_blocks = (spec.d + 3) / 4;

    if (spec.jumps.active()) {
        if (!spec.jumps.simulatable())
            throw validation_error("custom jump law has no sampler");
        dyn.jumps.active = true;
        dyn.jumps.kind = spec.jumps.kind;
        dyn.jumps.mean_per_step = spec.jumps.intensity * cfg.step;
        for (int i = 0; i < spec.d; ++i)
            dyn.comp_per_step[i] =
                spec.jumps.intensity * cfg.step * spec.jumps.mean_component(i, spec.d);
        if (spec.jumps.kind == JumpLaw::Kind::lognormal) {
            dyn.jumps.mu = spec.jumps.mu;
            dyn.jumps.chol = spec.jumps.chol_lower();
            dyn.jumps.blocks_per_jump = (spec.d + 3) / 4;
        } else {
            dyn.jumps.prob = spec.jumps.prob;
            dyn.jumps.a = spec.jumps.a;
            dyn.jumps.b = spec.jumps.b;
            dyn.jumps.blocks_per_jump = 1;
        }
    }
    return dyn;
}

struct Scratch {
    std::vector<double> x, xplus, z, dx, y;
};

template <class Observer>
void walk_one(const PathDynamics& dyn, const CounterRng& rng, std::int64_t path,
              Scratch& s, Observer& obs) {
    const int d = dyn.d;
    s.x.assign(dyn.x0.data(), dyn.x0.data() + d);
    s.xplus.resize(static_cast<std::size_t>(d));
    s.z.resize(static_cast<std::size_t>(4 * dyn.diffusion_blocks));
    s.dx.resize(static_cast<std::size_t>(d));
    s.y.resize(static_cast<std::size_t>(d));

    const auto upath = static_cast<std::uint32_t>(path);
    obs(path, 0, s.x.data());

    for (std::int64_t k = 0; k < dyn.nsteps; ++k) {
        const auto ustep = static_cast<std::uint32_t>(k);
        for (int blk = 0; blk < dyn.diffusion_blocks; ++blk) {
            const std::array<double, 4> n =
                rng.normals(upath, ustep, 0, static_cast<std::uint32_t>(blk));
            for (int j = 0; j < 4; ++j) s.z[static_cast<std::size_t>(4 * blk + j)] = n[j];
        }

        for (int i = 0; i < d; ++i)
            s.xplus[static_cast<std::size_t>(i)] =
                std::max(s.x[static_cast<std::size_t>(i)], 0.0);

        for (int i = 0; i < d; ++i) {
            double drift = 0.0;
            double noise = 0.0;
            for (int j = 0; j < d; ++j) {
                drift += dyn.kappa(i, j) *
                         (dyn.theta[j] - s.xplus[static_cast<std::size_t>(j)]);
                noise += dyn.sigma(i, j) * s.z[static_cast<std::size_t>(j)];
            }
            s.dx[static_cast<std::size_t>(i)] =
                drift * dyn.h +
                s.xplus[static_cast<std::size_t>(i)] *
                    (noise * dyn.sqrt_h - dyn.comp_per_step[i]);
        }
        for (int i = 0; i < d; ++i) s.x[static_cast<std::size_t>(i)] += s.dx[static_cast<std::size_t>(i)];

        if (dyn.jumps.active) {
            const int njumps = rng.poisson(dyn.jumps.mean_per_step, upath, ustep, 1, 0);
            for (int e = 0; e < njumps; ++e) {
                if (dyn.jumps.kind == JumpLaw::Kind::lognormal) {
                    for (int blk = 0; blk < dyn.jumps.blocks_per_jump; ++blk) {
                        const std::array<double, 4> n = rng.normals(
                            upath, ustep, 2,
                            static_cast<std::uint32_t>(e * dyn.jumps.blocks_per_jump + blk));
                        for (int j = 0; j < 4 && 4 * blk + j < d; ++j)
                            s.z[static_cast<std::size_t>(4 * blk + j)] = n[j];
                    }
                    for (int i = 0; i < d; ++i) {
                        double g = dyn.jumps.mu[i];
                        for (int j = 0; j <= i; ++j)
                            g += dyn.jumps.chol(i, j) * s.z[static_cast<std::size_t>(j)];
                        s.y[static_cast<std::size_t>(i)] = std::expm1(g);
                    }
                } else {
                    const double u = rng.uniforms(upath, ustep, 2,
                                                  static_cast<std::uint32_t>(e))[0];
                    for (int i = 0; i < d; ++i)
                        s.y[static_cast<std::size_t>(i)] =
                            u < dyn.jumps.prob ? dyn.jumps.a[i] : dyn.jumps.b[i];
                }
                for (int i = 0; i < d; ++i) {
                    const double base = std::max(s.x[static_cast<std::size_t>(i)], 0.0);
                    s.x[static_cast<std::size_t>(i)] += base * s.y[static_cast<std::size_t>(i)];
                }
            }
        }
        obs(path, k + 1, s.x.data());
    }
}

template <class Observer>
void run_paths(const PathDynamics& dyn, const CounterRng& rng, std::int64_t paths,
               McEngine engine, Observer& obs) {
    if (engine == McEngine::serial) {
        Scratch s;
        for (std::int64_t p = 0; p < paths; ++p) walk_one(dyn, rng, p, s, obs);
    } else {
#pragma omp parallel
        {
            Scratch s;
#pragma omp for schedule(static)
            for (std::int64_t p = 0; p < paths; ++p) walk_one(dyn, rng, p, s, obs);
        }
    }
}

double dot1(const Eigen::VectorXd& coeff, const double* x, int d) {
    double s = coeff[0];
    for (int i = 0; i < d; ++i) s += coeff[i + 1] * x[i];
    return s;
}

struct SampleStats {
    double mean = 0.0;
    double svar = 0.0; // centered sum of squares
};

SampleStats stats_of(const std::vector<double>& v, std::vector<double>& scratch) {
    const std::size_t n = v.size();
    SampleStats st;
    st.mean = pairwise_sum(v.data(), n) / static_cast<double>(n);
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - st.mean;
        scratch[i] = d * d;
    }
    st.svar = pairwise_sum(scratch.data(), n);
    return st;
}

std::int64_t snap_index(double T, double h) {
    return static_cast<std::int64_t>(std::llround(T / h));
}

} // namespace

PathBundle simulate_paths(const ModelSpec& spec, const SimConfig& cfg,
                          McEngine engine) {
    if (!(cfg.horizon > 0.0)) throw validation_error("simulation: horizon must be > 0");
    const std::int64_t nsteps = snap_index(cfg.horizon, cfg.step);
    const PathDynamics dyn = make_dynamics(spec, cfg, std::max<std::int64_t>(nsteps, 1));

    const std::int64_t rows = cfg.paths * (dyn.nsteps + 1);
    if (rows * spec.d > 50'000'000)
        throw validation_error("path bundle too large; reduce paths or horizon");

    PathBundle bundle;
    bundle.d = spec.d;
    bundle.paths = cfg.paths;
    bundle.times.resize(static_cast<std::size_t>(dyn.nsteps + 1));
    for (std::int64_t k = 0; k <= dyn.nsteps; ++k)
        bundle.times[static_cast<std::size_t>(k)] = static_cast<double>(k) * cfg.step;
    bundle.states.resize(rows, spec.d);

    CounterRng rng(cfg.seed);
    const std::int64_t stride = dyn.nsteps + 1;
    auto obs = [&](std::int64_t path, std::int64_t k, const double* x) {
        for (int i = 0; i < spec.d; ++i) bundle.states(path * stride + k, i) = x[i];
    };
    run_paths(dyn, rng, cfg.paths, engine, obs);
    return bundle;
}

McEstimate estimate(const ModelSpec& spec, const SimConfig& cfg,
                    const Instrument& instrument, McEngine engine) {
    const double mat = instrument.maturity();
    if (cfg.horizon + 1e-12 < mat)
        throw validation_error("horizon shorter than instrument maturity");

    const std::int64_t nsteps = snap_index(mat, cfg.step);
    const PathDynamics dyn = make_dynamics(spec, cfg, nsteps);
    const CounterRng rng(cfg.seed);
    const int d = spec.d;
    const std::size_t n = static_cast<std::size_t>(cfg.paths);

    LinearPricer pricer(spec);
    const GeneratorMatrix& g1 = pricer.g1();
    const GeneratorMatrix& g2 = pricer.g2();
    const double beta = spec.beta;
    const double gamma = spec.gamma;
    const double zeta0 = spec.q.dot(g1.basis.evaluate(spec.x0));
    if (!(zeta0 > 0.0)) throw validation_error("invalid state for discounting");

    std::vector<double> y(n, 0.0);
    std::vector<double> c;
    double cv_mean_exact = 0.0;
    bool cv_on = false;
    double scale = 1.0;
    double tail_bound = 0.0;

    McEstimate out;
    out.paths = cfg.paths;

    switch (instrument.kind) {
    case Instrument::Kind::div_future: {
        const std::int64_t i1 = snap_index(instrument.T1, cfg.step);
        const std::int64_t i2 = snap_index(instrument.T2, cfg.step);
        const double e1 = std::exp(beta * instrument.T1);
        const double e2 = std::exp(beta * instrument.T2);
        std::vector<double> c1(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k == i1) c1[static_cast<std::size_t>(p)] = e1 * dot1(spec.p, x, d);
            if (k == i2)
                y[static_cast<std::size_t>(p)] =
                    e2 * dot1(spec.p, x, d) - c1[static_cast<std::size_t>(p)];
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        break;
    }
    case Instrument::Kind::bond: {
        const std::int64_t iT = snap_index(instrument.T, cfg.step);
        const double disc = std::exp(-gamma * instrument.T);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k == iT)
                y[static_cast<std::size_t>(p)] = disc * dot1(spec.q, x, d) / zeta0;
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        break;
    }
    case Instrument::Kind::div_forward: {
        const std::int64_t i1 = snap_index(instrument.T1, cfg.step);
        const std::int64_t i2 = snap_index(instrument.T2, cfg.step);
        const double e1 = std::exp(beta * instrument.T1);
        const double e2 = std::exp(beta * instrument.T2);
        const double disc = std::exp(-gamma * instrument.T2);
        std::vector<double> c1(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k == i1) c1[static_cast<std::size_t>(p)] = e1 * dot1(spec.p, x, d);
            if (k == i2)
                y[static_cast<std::size_t>(p)] =
                    disc * dot1(spec.q, x, d) *
                    (e2 * dot1(spec.p, x, d) - c1[static_cast<std::size_t>(p)]) / zeta0;
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        scale = 1.0 / pricer.zero_coupon_bond(spec.x0, 0.0, instrument.T2);
        break;
    }
    case Instrument::Kind::stock: {
        // discounted dividend integral, trapezoid on the grid,
        // truncated at instrument.truncation
        const Eigen::VectorXd dr =
            (beta * Eigen::MatrixXd::Identity(g1.dim(), g1.dim()) + g1.entries)
                .transpose() *
            spec.p;
        std::vector<double> prev(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            const double t = static_cast<double>(k) * cfg.step;
            const double g = std::exp((beta - gamma) * t) * dot1(spec.q, x, d) *
                             dot1(dr, x, d);
            if (k > 0)
                y[static_cast<std::size_t>(p)] +=
                    0.5 * (prev[static_cast<std::size_t>(p)] + g) * cfg.step / zeta0;
            prev[static_cast<std::size_t>(p)] = g;
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        const double H = instrument.truncation;
        tail_bound = std::exp((beta - gamma) * H) *
                     pricer.stock_w().dot(transition_matrix(g2, H) *
                                          g2.basis.evaluate(spec.x0)) /
                     zeta0;
        break;
    }
    case Instrument::Kind::swaption: {
        instrument.sched.validate();
        const double T0 = instrument.sched.t0;
        const std::int64_t i0 = snap_index(T0, cfg.step);
        const int m = g1.dim();
        Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
        const double Tn = instrument.sched.fixed_dates.back();
        a -= std::exp(-gamma * (Tn - T0)) * transition_matrix(g1, Tn - T0);
        const std::vector<double> delta = instrument.sched.accruals();
        for (std::size_t kk = 0; kk < delta.size(); ++kk) {
            const double Tk = instrument.sched.fixed_dates[kk];
            a -= instrument.strike * delta[kk] * std::exp(-gamma * (Tk - T0)) *
                 transition_matrix(g1, Tk - T0);
        }
        const Eigen::VectorXd aq = a.transpose() * spec.q;
        const double disc = std::exp(-gamma * T0);
        cv_on = cfg.control_variate;
        if (cv_on) c.assign(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k != i0) return;
            const double swap = disc * dot1(aq, x, d) / zeta0;
            y[static_cast<std::size_t>(p)] = std::max(swap, 0.0);
            if (cv_on) c[static_cast<std::size_t>(p)] = swap;
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        if (cv_on)
            cv_mean_exact = disc *
                            aq.dot(transition_matrix(g1, T0) *
                                   g1.basis.evaluate(spec.x0)) /
                            zeta0;
        break;
    }
    case Instrument::Kind::stock_option: {
        const double T = instrument.T;
        const std::int64_t iT = snap_index(T, cfg.step);
        const double disc = std::exp(-gamma * T);
        const double grow = std::exp(beta * T);
        const Eigen::VectorXd& w = pricer.stock_w();
        const double K = instrument.strike;
        cv_on = cfg.control_variate;
        if (cv_on) c.assign(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k != iT) return;
            Eigen::VectorXd xloc = Eigen::Map<const Eigen::VectorXd>(x, d);
            const double num = grow * w.dot(g2.basis.evaluate(xloc));
            const double den = dot1(spec.q, x, d);
            const double fwd = disc * (num - K * den) / zeta0;
            y[static_cast<std::size_t>(p)] = std::max(fwd, 0.0);
            if (cv_on) c[static_cast<std::size_t>(p)] = fwd;
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        if (cv_on) {
            const double e1 = grow * pricer.stock_w().dot(transition_matrix(g2, T) *
                                                          g2.basis.evaluate(spec.x0));
            const double e2 =
                K * spec.q.dot(transition_matrix(g1, T) * g1.basis.evaluate(spec.x0));
            cv_mean_exact = disc * (e1 - e2) / zeta0;
        }
        break;
    }
    case Instrument::Kind::div_option: {
        const std::int64_t i1 = snap_index(instrument.T1, cfg.step);
        const std::int64_t i2 = snap_index(instrument.T2, cfg.step);
        const double e1 = std::exp(beta * instrument.T1);
        const double e2 = std::exp(beta * instrument.T2);
        const double disc = std::exp(-gamma * instrument.T2);
        const double K = instrument.strike;
        std::vector<double> c1(n, 0.0);
        cv_on = cfg.control_variate;
        if (cv_on) c.assign(n, 0.0);
        auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
            if (k == i1) c1[static_cast<std::size_t>(p)] = e1 * dot1(spec.p, x, d);
            if (k == i2) {
                const double zeta = disc * dot1(spec.q, x, d) / zeta0;
                const double accrual =
                    e2 * dot1(spec.p, x, d) - c1[static_cast<std::size_t>(p)] - K;
                y[static_cast<std::size_t>(p)] = zeta * std::max(accrual, 0.0);
                if (cv_on) c[static_cast<std::size_t>(p)] = zeta * accrual;
            }
        };
        run_paths(dyn, rng, cfg.paths, engine, obs);
        if (cv_on) {
            const double p0t2 = pricer.zero_coupon_bond(spec.x0, 0.0, instrument.T2);
            cv_mean_exact =
                p0t2 *
                (pricer.dividend_forward(spec.x0, 0.0, instrument.T1, instrument.T2) - K);
        }
        break;
    }
    }

    std::vector<double> scratch;
    const SampleStats sy = stats_of(y, scratch);
    const double nn = static_cast<double>(n);
    out.raw_se = n > 1 ? std::sqrt(sy.svar / (nn - 1.0) / nn) : 0.0;
    out.mean = sy.mean;
    out.se = out.raw_se;
    out.tail_bound = tail_bound * scale;

    if (cv_on && n > 1) {
        const SampleStats sc = stats_of(c, scratch);
        scratch.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            scratch[i] = (y[i] - sy.mean) * (c[i] - sc.mean);
        const double syc = pairwise_sum(scratch.data(), n);
        if (sc.svar > 0.0) {
            const double bcv = syc / sc.svar;
            const double adj = sy.svar - syc * syc / sc.svar;
            out.cv_beta = bcv;
            out.mean = sy.mean - bcv * (sc.mean - cv_mean_exact);
            out.se = adj > 0.0 ? std::sqrt(adj / (nn - 1.0) / nn) : 0.0;
            out.variance_ratio = adj > 0.0 ? sy.svar / adj
                                 : (sy.svar > 0.0 ? std::numeric_limits<double>::infinity()
                                                  : 1.0);
        }
    }

    out.mean *= scale;
    out.se *= scale;
    out.raw_se *= scale;
    if (!std::isfinite(out.mean)) throw numerical_error("simulation produced non-finite estimate");
    return out;
}

SignStats dividend_sign_stats(const ModelSpec& spec, const SimConfig& cfg,
                              McEngine engine) {
    if (!(cfg.horizon > 0.0)) throw validation_error("simulation: horizon must be > 0");
    const std::int64_t nsteps = snap_index(cfg.horizon, cfg.step);
    const PathDynamics dyn = make_dynamics(spec, cfg, nsteps);
    const CounterRng rng(cfg.seed);

    // dividend rate sign = sign of p'(beta Id + G1) H1(x)
    GeneratorMatrix g1 = build_generator(spec, 1);
    const Eigen::VectorXd dr =
        (spec.beta * Eigen::MatrixXd::Identity(g1.dim(), g1.dim()) + g1.entries)
            .transpose() *
        spec.p;

    std::vector<std::int64_t> neg(static_cast<std::size_t>(cfg.paths), 0);
    const int d = spec.d;
    auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
        (void)k;
        if (dot1(dr, x, d) < 0.0) ++neg[static_cast<std::size_t>(p)];
    };
    run_paths(dyn, rng, cfg.paths, engine, obs);

    SignStats st;
    for (std::int64_t v : neg) st.violations += v;
    st.observations = cfg.paths * (nsteps + 1);
    return st;
}

SignStats positivity_stats(const ModelSpec& spec, const SimConfig& cfg,
                           McEngine engine) {
    if (!(cfg.horizon > 0.0)) throw validation_error("simulation: horizon must be > 0");
    const std::int64_t nsteps = snap_index(cfg.horizon, cfg.step);
    const PathDynamics dyn = make_dynamics(spec, cfg, nsteps);
    const CounterRng rng(cfg.seed);

    std::vector<std::int64_t> bad(static_cast<std::size_t>(cfg.paths), 0);
    const int d = spec.d;
    auto obs = [&](std::int64_t p, std::int64_t k, const double* x) {
        (void)k;
        for (int i = 0; i < d; ++i)
            if (x[i] <= 0.0) {
                ++bad[static_cast<std::size_t>(p)];
                return;
            }
    };
    run_paths(dyn, rng, cfg.paths, engine, obs);

    SignStats st;
    for (std::int64_t v : bad) st.violations += v;
    st.observations = cfg.paths * (nsteps + 1);
    return st;
}

} // namespace polydiv
