#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polydiv {

struct Support {
    enum class Kind { full_line, half_line, interval };

    Kind kind = Kind::full_line;
    double a = 0.0;
    double b = 0.0;

    static Support full_line() { return {Kind::full_line, 0.0, 0.0}; }
    static Support half_line(double a) { return {Kind::half_line, a, 0.0}; }
    static Support interval(double a, double b) { return {Kind::interval, a, b}; }

    bool bounded_below() const { return kind != Kind::full_line; }
    bool bounded_above() const { return kind == Kind::interval; }
};

// Raw moments M_0..M_N of a scalar variable plus its support.  Feasibility
// problems (indefinite Hankel matrix, negative even central moments) are
// recorded as warnings, not errors: noisy moment inputs are expected.
struct MomentSet {
    Eigen::VectorXd moments;
    Support support;
    std::vector<std::string> warnings;

    int order() const { return static_cast<int>(moments.size()) - 1; }
};

MomentSet make_moment_set(Eigen::VectorXd moments, Support support);

// exp(-sum lambda_i y^i) density matching a MomentSet.  The fit runs on
// the affinely standardized variable x = (y - shift)/scale; lambdas are
// reported in original units, std_lambdas in fit units (numerically the
// safe ones to evaluate).  [lo, hi] is the integration window in original
// units; unbounded supports are truncated there with negligible tail mass.
struct MaxEntDensity {
    Eigen::VectorXd lambdas;
    Eigen::VectorXd std_lambdas;
    Support support;
    double shift = 0.0;
    double scale = 1.0;
    double lo = 0.0;
    double hi = 0.0;
    int newton_iterations = 0;
    double gradient_norm = 0.0;
    double condition = 0.0;

    double density(double y) const;
    double moment(int k) const;
};

MaxEntDensity fit_maxent(const MomentSet& ms);

// Composite Gauss-Legendre with doubling refinement; integrates the
// vector integrand f(x) -> (K+1 values) over [lo, hi] to absolute
// tolerance; used by the Newton loop and by option pricing.
Eigen::VectorXd integrate_panels(const std::function<void(double, Eigen::VectorXd&)>& f,
                                 int values, double lo, double hi, double abs_tol);

std::string moments_to_text(const MomentSet& ms);
MomentSet moments_from_text(const std::string& text);
MomentSet load_moments(const std::string& path);
void save_moments(const MomentSet& ms, const std::string& path);

// fitted coefficients in the moments-file layout (lambda0..lambdaN)
std::string lambdas_to_text(const MaxEntDensity& density);

} // namespace polydiv
