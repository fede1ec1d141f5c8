#include "polydiv/implied_vol.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "polydiv/errors.hpp"

namespace polydiv {

namespace {

std::string fmt(const char* pattern, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

void check_quote_inputs(double expiry, double discount) {
    if (!(expiry > 0.0)) throw validation_error("option expiry must be positive");
    if (!(discount > 0.0)) throw validation_error("discount factor must be positive");
}

// Bisection to a tight bracket, then a few Newton steps with the
// analytic vega.  price(vol) is increasing; the caller guarantees a
// bracket [0, hi] with price(hi) >= target.
double invert_increasing(const std::function<double(double)>& price,
                         const std::function<double(double)>& vega,
                         double target, double hi) {
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        double mid = 0.5 * (lo + hi);
        (price(mid) < target ? lo : hi) = mid;
    }
    double v = 0.5 * (lo + hi);
    for (int i = 0; i < 8; ++i) {
        double g = vega(v);
        if (!(g > 0.0)) break;
        double step = (price(v) - target) / g;
        double next = v - step;
        if (next <= lo || next >= hi) break;
        v = next;
        if (std::abs(step) < 1e-12 * (1.0 + v)) break;
    }
    return v;
}

} // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

double black_call_price(double forward, double strike, double expiry, double vol,
                        double discount) {
    check_quote_inputs(expiry, discount);
    if (!(forward > 0.0) || !(strike > 0.0))
        throw validation_error("Black quoting requires positive forward and strike");
    if (vol < 0.0) throw validation_error("volatility must be non-negative");
    if (vol == 0.0) return discount * std::max(forward - strike, 0.0);
    double s = vol * std::sqrt(expiry);
    double d1 = std::log(forward / strike) / s + 0.5 * s;
    return discount * (forward * norm_cdf(d1) - strike * norm_cdf(d1 - s));
}

double bachelier_call_price(double forward, double strike, double expiry, double vol,
                            double discount) {
    check_quote_inputs(expiry, discount);
    if (vol < 0.0) throw validation_error("volatility must be non-negative");
    if (vol == 0.0) return discount * std::max(forward - strike, 0.0);
    double s = vol * std::sqrt(expiry);
    double d = (forward - strike) / s;
    return discount * ((forward - strike) * norm_cdf(d) + s * norm_pdf(d));
}

double black_implied_vol(double price, double forward, double strike, double expiry,
                         double discount) {
    check_quote_inputs(expiry, discount);
    if (!(forward > 0.0) || !(strike > 0.0))
        throw validation_error("Black quoting requires positive forward and strike");
    double lower = discount * std::max(forward - strike, 0.0);
    double upper = discount * forward;
    if (price < lower)
        throw validation_error(
            fmt("price %.10g below no-arbitrage lower bound %.10g", price, lower));
    if (price >= upper)
        throw validation_error(
            fmt("price %.10g at or above no-arbitrage upper bound %.10g", price, upper));
    if (price == lower) return 0.0;

    auto pr = [&](double v) { return black_call_price(forward, strike, expiry, v, discount); };
    auto vega = [&](double v) {
        double s = v * std::sqrt(expiry);
        double d1 = std::log(forward / strike) / s + 0.5 * s;
        return discount * forward * norm_pdf(d1) * std::sqrt(expiry);
    };
    double hi = 0.5;
    while (pr(hi) < price) {
        hi *= 2.0;
        if (hi > 1e6) throw numerical_error("implied vol bracket expansion failed");
    }
    return invert_increasing(pr, vega, price, hi);
}

double bachelier_implied_vol(double price, double forward, double strike, double expiry,
                             double discount) {
    check_quote_inputs(expiry, discount);
    double lower = discount * std::max(forward - strike, 0.0);
    if (price < lower)
        throw validation_error(
            fmt("price %.10g below no-arbitrage lower bound %.10g", price, lower));
    if (price == lower) return 0.0;

    auto pr = [&](double v) {
        return bachelier_call_price(forward, strike, expiry, v, discount);
    };
    auto vega = [&](double v) {
        double s = v * std::sqrt(expiry);
        return discount * norm_pdf((forward - strike) / s) * std::sqrt(expiry);
    };
    double scale = std::max({std::abs(forward), std::abs(strike), 1e-4});
    double hi = 0.5 * scale;
    while (pr(hi) < price) {
        hi *= 2.0;
        if (hi > 1e9 * scale) throw numerical_error("implied vol bracket expansion failed");
    }
    return invert_increasing(pr, vega, price, hi);
}

double interp_total_variance(double t1, double vol1, double t2, double vol2, double t) {
    if (!(t1 > 0.0) || !(t2 > t1)) throw validation_error("pillar times must satisfy 0 < t1 < t2");
    if (!(t >= t1 && t <= t2)) throw validation_error("interpolation time outside pillar range");
    double w1 = vol1 * vol1 * t1;
    double w2 = vol2 * vol2 * t2;
    double w = w1 + (w2 - w1) * (t - t1) / (t2 - t1);
    if (w < 0.0) throw validation_error("negative interpolated total variance");
    return std::sqrt(w / t);
}

} // namespace polydiv
