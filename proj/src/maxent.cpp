#include "polydiv/maxent.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "polydiv/basis.hpp"
#include "polydiv/errors.hpp"

namespace polydiv {

namespace {

constexpr int kGaussPoints = 20;
const double kGaussX[kGaussPoints / 2] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195,
    0.5108670019508271, 0.6360536807265150, 0.7463319064601508,
    0.8391169718222188, 0.9122344282513259, 0.9639719272779138,
    0.9931285991850949};
const double kGaussW[kGaussPoints / 2] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820,
    0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869,
    0.0176140071391521};

Eigen::VectorXd panel_pass(const std::function<void(double, Eigen::VectorXd&)>& f,
                           int values, double lo, double hi, int panels) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(values);
    Eigen::VectorXd sample(values);
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        const double half = 0.5 * width;
        for (int g = 0; g < kGaussPoints / 2; ++g) {
            for (double sign : {-1.0, 1.0}) {
                f(mid + sign * half * kGaussX[g], sample);
                total += kGaussW[g] * half * sample;
            }
        }
    }
    return total;
}

double poly_eval(const Eigen::VectorXd& coef, double x) {
    double v = 0.0;
    for (int i = static_cast<int>(coef.size()) - 1; i >= 0; --i) v = v * x + coef[i];
    return v;
}

double poly_deriv_eval(const Eigen::VectorXd& coef, double x) {
    double v = 0.0;
    for (int i = static_cast<int>(coef.size()) - 1; i >= 1; --i)
        v = v * x + i * coef[i];
    return v;
}

// exp(-poly) saturated so that diverging line-search trials produce huge
// but finite potentials instead of NaN
double density_kernel(const Eigen::VectorXd& lambda, double x) {
    return std::exp(std::min(-poly_eval(lambda, x), 700.0));
}

// Normalized probabilists' Hermite values He_j(x)/sqrt(j!) for j < n.  The
// standardized fits live near N(0,1), where these are orthonormal, so the
// Newton system assembled in this basis stays well conditioned at orders
// where raw powers on a wide window are hopeless (E[x^12] ~ 1e4 noise floor).
void hermite_values(int n, double x, Eigen::VectorXd& phi) {
    phi[0] = 1.0;
    if (n > 1) phi[1] = x;
    for (int j = 1; j + 1 < n; ++j) phi[j + 1] = x * phi[j] - j * phi[j - 1];
    double fact = 1.0;
    for (int j = 2; j < n; ++j) {
        fact *= j;
        phi[j] /= std::sqrt(fact);
    }
}

// row j = power coefficients of He_j(x)/sqrt(j!); lower triangular
Eigen::MatrixXd hermite_to_power(int n) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    b(0, 0) = 1.0;
    if (n > 1) b(1, 1) = 1.0;
    for (int j = 1; j + 1 < n; ++j) {
        b.row(j + 1).segment(1, j + 1) += b.row(j).head(j + 1);
        b.row(j + 1).head(j) -= static_cast<double>(j) * b.row(j - 1).head(j);
    }
    double fact = 1.0;
    for (int j = 2; j < n; ++j) {
        fact *= j;
        b.row(j) /= std::sqrt(fact);
    }
    return b;
}

struct NewtonResult {
    Eigen::VectorXd lambda;
    int iterations = 0;
    double gradient_norm = 0.0;
    double condition = 0.0;
};

NewtonResult newton_fit(const Eigen::VectorXd& target, Eigen::VectorXd lambda,
                        double lo, double hi) {
    const int n = static_cast<int>(target.size());
    const Eigen::MatrixXd basis = hermite_to_power(n);
    const Eigen::VectorXd tmu = basis * target;
    Eigen::VectorXd mu =
        basis.transpose().triangularView<Eigen::Upper>().solve(lambda);

    Eigen::VectorXd phi(n);
    auto exponent = [&](const Eigen::VectorXd& m, double x) {
        hermite_values(n, x, phi);
        return m.dot(phi);
    };
    auto potential = [&](const Eigen::VectorXd& m) {
        auto f = [&](double x, Eigen::VectorXd& out) {
            out[0] = std::exp(std::min(-exponent(m, x), 700.0));
        };
        // a saturated kernel on a diverging trial defeats the adaptive
        // refinement; report such trials as infinitely bad instead
        double mass;
        try {
            mass = integrate_panels(f, 1, lo, hi, 1e-12)[0];
        } catch (const numerical_error&) {
            return std::numeric_limits<double>::infinity();
        }
        return mass + m.dot(tmu);
    };

    // packed integrals: E[phi_i] then the upper triangle of E[phi_i phi_j]
    const int packed = n + n * (n + 1) / 2;
    auto system_integrals = [&](const Eigen::VectorXd& m) {
        auto f = [&](double x, Eigen::VectorXd& out) {
            const double w = std::exp(std::min(-exponent(m, x), 700.0));
            int idx = 0;
            for (int i = 0; i < n; ++i) out[idx++] = w * phi[i];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) out[idx++] = w * phi[i] * phi[j];
        };
        return integrate_panels(f, packed, lo, hi, 1e-12);
    };

    NewtonResult res;
    double p_cur = potential(mu);
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd ints = system_integrals(mu);
        Eigen::VectorXd grad = tmu - ints.head(n);
        Eigen::MatrixXd hess(n, n);
        {
            int idx = n;
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    hess(i, j) = ints[idx];
                    hess(j, i) = ints[idx];
                    ++idx;
                }
        }
        res.gradient_norm = grad.cwiseAbs().maxCoeff();
        res.iterations = iter;

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
        const double lmin = es.eigenvalues().minCoeff();
        const double lmax = es.eigenvalues().maxCoeff();
        if (res.gradient_norm <= 1e-9) {
            res.lambda = basis.transpose() * mu;
            res.condition =
                lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
            return res;
        }

        double damping = 0.0;
        if (!(lmin > 0.0) || lmax / lmin > 1e12) damping = std::max(1e-12 * lmax, 1e-300);

        Eigen::VectorXd step;
        for (;;) {
            Eigen::MatrixXd h = hess;
            if (damping > 0.0) h.diagonal().array() += damping;
            step = h.ldlt().solve(-grad);
            if (step.allFinite()) break;
            damping = damping > 0.0 ? damping * 10.0 : 1e-12 * std::max(lmax, 1.0);
            if (damping > 1e12 * std::max(lmax, 1.0))
                throw numerical_error("maxent fit failed: singular Hessian");
        }

        // coordinates are O(1) near any sane fit; a runaway step means the
        // local model is garbage, so clip it trust-region style
        const double step_norm = step.cwiseAbs().maxCoeff();
        if (step_norm > 4.0) step *= 4.0 / step_norm;

        // Backtracking guards the global phase; near the optimum the
        // Armijo test drowns in rounding of P, so take the pure Newton
        // step there (P is convex).
        if (res.gradient_norm > 1e-6) {
            const double slope = grad.dot(step);
            double t = 1.0;
            double p_next = 0.0;
            for (;;) {
                p_next = potential(mu + t * step);
                if (p_next <= p_cur + 1e-4 * t * slope) break;
                t *= 0.5;
                if (t < 1e-12) break;
            }
            mu += t * step;
            p_cur = p_next;
        } else {
            mu += step;
            p_cur = potential(mu);
        }
    }

    char buf[96];
    std::snprintf(buf, sizeof(buf), "maxent fit failed; gradient norm %.3e",
                  static_cast<double>(res.gradient_norm));
    throw numerical_error(buf);
}

} // namespace

Eigen::VectorXd integrate_panels(const std::function<void(double, Eigen::VectorXd&)>& f,
                                 int values, double lo, double hi, double abs_tol) {
    if (!(hi > lo)) throw validation_error("quadrature: empty interval");
    int panels = std::max(8, std::min(256, static_cast<int>(std::ceil(hi - lo))));
    Eigen::VectorXd prev = panel_pass(f, values, lo, hi, panels);
    for (;;) {
        panels *= 2;
        Eigen::VectorXd cur = panel_pass(f, values, lo, hi, panels);
        const double err = (cur - prev).cwiseAbs().maxCoeff();
        const double tol = abs_tol * std::max(1.0, cur.cwiseAbs().maxCoeff());
        if (err <= tol) return cur;
        if (panels >= 4096) throw numerical_error("quadrature failed to converge");
        prev = cur;
    }
}

MomentSet make_moment_set(Eigen::VectorXd moments, Support support) {
    if (moments.size() < 1) throw validation_error("moment set: no moments");
    const int n = static_cast<int>(moments.size()) - 1;
    if (n > 8) throw validation_error("moment set: order exceeds 8");
    if (!moments.allFinite()) throw validation_error("moment set: non-finite moment");
    if (std::abs(moments[0] - 1.0) > 1e-9)
        throw validation_error("moment set: M_0 must equal 1");
    if (support.kind == Support::Kind::interval && !(support.b > support.a))
        throw validation_error("moment set: empty interval support");

    MomentSet ms;
    ms.moments = std::move(moments);
    ms.support = support;

    if (n >= 2) {
        const double mu = ms.moments[1];
        // central moments by binomial expansion
        Eigen::VectorXd central = Eigen::VectorXd::Zero(n + 1);
        for (int k = 0; k <= n; ++k) {
            double c = 0.0;
            for (int j = 0; j <= k; ++j)
                c += binomial(k, j) * std::pow(-mu, k - j) * ms.moments[j];
            central[k] = c;
        }
        for (int k = 2; k <= n; k += 2)
            if (!(central[k] > 0.0)) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "central moment %d not positive", k);
                ms.warnings.emplace_back(buf);
            }

        const int h = n / 2 + 1;
        Eigen::MatrixXd hank(h, h);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < h; ++j) hank(i, j) = ms.moments[i + j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hank);
        const double floor = -1e-8 * std::max(1.0, hank.cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() < floor)
            ms.warnings.emplace_back("moment Hankel matrix not positive semidefinite");
    }
    return ms;
}

double MaxEntDensity::density(double y) const {
    if (support.bounded_below() && y < support.a) return 0.0;
    if (support.bounded_above() && y > support.b) return 0.0;
    const double x = (y - shift) / scale;
    return std::exp(std::min(-poly_eval(std_lambdas, x), 700.0)) / scale;
}

double MaxEntDensity::moment(int k) const {
    const double xlo = (lo - shift) / scale;
    const double xhi = (hi - shift) / scale;
    auto f = [&](double x, Eigen::VectorXd& out) {
        out[0] = std::pow(shift + scale * x, k) *
                 std::exp(std::min(-poly_eval(std_lambdas, x), 700.0));
    };
    return integrate_panels(f, 1, xlo, xhi, 1e-12)[0];
}

MaxEntDensity fit_maxent(const MomentSet& ms) {
    const int n = ms.order();
    const Eigen::VectorXd& m = ms.moments;

    double shift = n >= 1 ? m[1] : 0.0;
    double scale = 1.0;
    if (n >= 2) {
        const double var = m[2] - m[1] * m[1];
        if (!(var > 0.0))
            throw validation_error("maxent: zero variance; use the point-mass price");
        scale = std::sqrt(var);
    } else if (ms.support.bounded_below()) {
        scale = std::max(std::abs(shift - ms.support.a), 1e-8);
    }

    // standardized target moments E[x^k], x = (y - shift)/scale
    Eigen::VectorXd target(n + 1);
    for (int k = 0; k <= n; ++k) {
        double c = 0.0;
        for (int j = 0; j <= k; ++j)
            c += binomial(k, j) * std::pow(-shift, k - j) * m[j];
        target[k] = c / std::pow(scale, k);
    }

    double xlo = -12.0, xhi = 12.0;
    switch (ms.support.kind) {
    case Support::Kind::full_line:
        xlo = -12.0;
        xhi = 12.0;
        break;
    case Support::Kind::half_line:
        xlo = (ms.support.a - shift) / scale;
        xhi = std::max(12.0, xlo + 12.0);
        break;
    case Support::Kind::interval:
        xlo = (ms.support.a - shift) / scale;
        xhi = (ms.support.b - shift) / scale;
        break;
    }
    if (!(xhi > xlo)) throw validation_error("maxent: degenerate support window");

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n + 1);
    if (ms.support.kind == Support::Kind::full_line && n >= 2) {
        lambda[0] = 0.5 * std::log(2.0 * M_PI);
        lambda[2] = 0.5;
    }

    NewtonResult res;
    for (int round = 0;; ++round) {
        // high-order targets get a poor basin from a cold start, so walk
        // the order up, re-fitting with one more moment each time
        for (int k = std::min(n, 2); k <= n; ++k) {
            res = newton_fit(target.head(k + 1), lambda.head(k + 1), xlo, xhi);
            lambda.head(k + 1) = res.lambda;
            if (k < n) lambda[k + 1] = 0.0;
        }

        if (ms.support.kind == Support::Kind::interval) break;
        const double tail_hi = density_kernel(lambda, xhi) /
                               std::max(std::abs(poly_deriv_eval(lambda, xhi)), 1e-2);
        double tail_lo = 0.0;
        if (ms.support.kind == Support::Kind::full_line)
            tail_lo = density_kernel(lambda, xlo) /
                      std::max(std::abs(poly_deriv_eval(lambda, xlo)), 1e-2);
        if (tail_hi <= 1e-10 && tail_lo <= 1e-10) break;

        // widening only helps when the fitted exponent keeps growing
        // outward; otherwise the windowed fit is the defined object
        const bool decays = lambda[n] > 0.0 &&
                            (ms.support.kind == Support::Kind::half_line || n % 2 == 0);
        if (!decays) break;
        if (round == 3)
            throw numerical_error("maxent fit failed: tail mass does not vanish");
        xhi = xhi > 0.0 ? xhi * 1.5 : xhi / 1.5;
        if (ms.support.kind == Support::Kind::full_line)
            xlo = xlo < 0.0 ? xlo * 1.5 : xlo / 1.5;
    }

    MaxEntDensity out;
    out.std_lambdas = lambda;
    out.support = ms.support;
    out.shift = shift;
    out.scale = scale;
    out.lo = shift + scale * xlo;
    out.hi = shift + scale * xhi;
    out.newton_iterations = res.iterations;
    out.gradient_norm = res.gradient_norm;
    out.condition = res.condition;

    // lambda'(y): sum_i lambda_i ((y-shift)/scale)^i expanded in powers of y,
    // plus log(scale) on the constant term (density Jacobian)
    out.lambdas = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i <= n; ++i) {
        const double li = lambda[i] / std::pow(scale, i);
        for (int k = 0; k <= i; ++k)
            out.lambdas[k] += li * binomial(i, k) * std::pow(-shift, i - k);
    }
    out.lambdas[0] += std::log(scale);
    return out;
}

std::string moments_to_text(const MomentSet& ms) {
    std::ostringstream out;
    out.precision(17);
    switch (ms.support.kind) {
    case Support::Kind::full_line:
        out << "support full_line\n";
        break;
    case Support::Kind::half_line:
        out << "support half_line " << ms.support.a << "\n";
        break;
    case Support::Kind::interval:
        out << "support interval " << ms.support.a << " " << ms.support.b << "\n";
        break;
    }
    out << "N " << ms.order() << "\n";
    for (int k = 0; k <= ms.order(); ++k)
        out << "M" << k << " " << ms.moments[k] << "\n";
    return out.str();
}

MomentSet moments_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Support support = Support::full_line();
    int n = -1;
    Eigen::VectorXd moments;
    std::vector<bool> seen;

    while (std::getline(in, line)) {
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        if (key == "support") {
            std::string kind;
            fields >> kind;
            if (kind == "full_line") {
                support = Support::full_line();
            } else if (kind == "half_line") {
                double a;
                if (!(fields >> a))
                    throw validation_error("moments file: half_line needs an endpoint");
                support = Support::half_line(a);
            } else if (kind == "interval") {
                double a, b;
                if (!(fields >> a >> b))
                    throw validation_error("moments file: interval needs two endpoints");
                support = Support::interval(a, b);
            } else {
                throw validation_error("moments file: unknown support " + kind);
            }
        } else if (key == "N") {
            if (!(fields >> n) || n < 0 || n > 8)
                throw validation_error("moments file: N must be in [0,8]");
            moments = Eigen::VectorXd::Zero(n + 1);
            seen.assign(static_cast<std::size_t>(n + 1), false);
        } else if (key.size() > 1 && key[0] == 'M') {
            if (n < 0) throw validation_error("moments file: N must precede moments");
            char* end = nullptr;
            const long k = std::strtol(key.c_str() + 1, &end, 10);
            if (*end != '\0' || k < 0 || k > n)
                throw validation_error("moments file: bad key " + key);
            double v;
            if (!(fields >> v))
                throw validation_error("moments file: bad value for " + key);
            moments[k] = v;
            seen[static_cast<std::size_t>(k)] = true;
        } else {
            throw validation_error("moments file: unknown key " + key);
        }
    }
    if (n < 0) throw validation_error("moments file: missing N");
    for (int k = 0; k <= n; ++k)
        if (!seen[static_cast<std::size_t>(k)]) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "moments file: missing M%d", k);
            throw validation_error(buf);
        }
    return make_moment_set(std::move(moments), support);
}

MomentSet load_moments(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open moments file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return moments_from_text(buf.str());
}

void save_moments(const MomentSet& ms, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot open output file: " + path);
    out << moments_to_text(ms);
    if (!out) throw validation_error("failed writing moments file: " + path);
}

std::string lambdas_to_text(const MaxEntDensity& density) {
    std::ostringstream out;
    out.precision(17);
    switch (density.support.kind) {
    case Support::Kind::full_line:
        out << "support full_line\n";
        break;
    case Support::Kind::half_line:
        out << "support half_line " << density.support.a << "\n";
        break;
    case Support::Kind::interval:
        out << "support interval " << density.support.a << " " << density.support.b
            << "\n";
        break;
    }
    const int n = static_cast<int>(density.lambdas.size()) - 1;
    out << "N " << n << "\n";
    for (int k = 0; k <= n; ++k)
        out << "lambda" << k << " " << density.lambdas[k] << "\n";
    return out.str();
}

} // namespace polydiv
