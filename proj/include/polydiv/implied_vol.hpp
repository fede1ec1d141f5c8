#pragma once

namespace polydiv {

double norm_cdf(double x);
double norm_pdf(double x);

// Undiscounted-forward option quoting conventions.  `discount` is the
// numeraire factor in front of the expectation: the zero-coupon bond for
// stock and dividend options, the annuity for swaptions.
double black_call_price(double forward, double strike, double expiry, double vol,
                        double discount);
double bachelier_call_price(double forward, double strike, double expiry, double vol,
                            double discount);

// Inversions by bisection with a Newton polish, tolerance 1e-10 in vol.
// A price outside the no-arbitrage band is rejected, naming the bound.
double black_implied_vol(double price, double forward, double strike, double expiry,
                         double discount);
double bachelier_implied_vol(double price, double forward, double strike, double expiry,
                             double discount);

// Linear interpolation in total variance vol^2 * t between two quoted pillars.
double interp_total_variance(double t1, double vol1, double t2, double vol2, double t);

} // namespace polydiv
