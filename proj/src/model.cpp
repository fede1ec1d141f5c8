#include "polydiv/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "polydiv/errors.hpp"

namespace polydiv {

namespace {

std::string fmt(const char* pattern, int a, int b = 0) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

bool shapes_ok(const ModelSpec& spec, std::vector<std::string>& out) {
    bool ok = true;
    auto need = [&](bool cond, const char* msg) {
        if (!cond) {
            out.emplace_back(msg);
            ok = false;
        }
    };
    need(spec.d >= 1, "d must be positive");
    if (spec.d < 1) return false;
    need(spec.kappa.rows() == spec.d && spec.kappa.cols() == spec.d,
         "kappa must be d x d");
    need(spec.theta.size() == spec.d, "theta must have d entries");
    need(spec.sigma.rows() == spec.d && spec.sigma.cols() == spec.d,
         "sigma must be d x d");
    need(spec.p.size() == spec.d + 1, "p must have d+1 entries");
    need(spec.q.size() == spec.d + 1, "q must have d+1 entries");
    need(spec.x0.size() == spec.d, "x0 must have d entries");
    return ok;
}

} // namespace

std::vector<std::string> validate_spec(const ModelSpec& spec) {
    std::vector<std::string> v;
    if (!shapes_ok(spec, v)) return v;

    if (!spec.kappa.allFinite()) v.emplace_back("kappa has a non-finite entry");
    if (!spec.theta.allFinite()) v.emplace_back("theta has a non-finite entry");
    if (!spec.sigma.allFinite()) v.emplace_back("sigma has a non-finite entry");
    if (!spec.p.allFinite()) v.emplace_back("p has a non-finite entry");
    if (!spec.q.allFinite()) v.emplace_back("q has a non-finite entry");
    if (!spec.x0.allFinite()) v.emplace_back("x0 has a non-finite entry");
    if (!std::isfinite(spec.beta)) v.emplace_back("beta is not finite");
    if (!std::isfinite(spec.gamma)) v.emplace_back("gamma is not finite");
    if (!v.empty()) return v;

    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j)
            if (i != j && spec.kappa(i, j) > 0.0)
                v.push_back(fmt("off-diagonal kappa_{%d%d}>0", i + 1, j + 1));

    Eigen::VectorXd kth = spec.kappa * spec.theta;
    for (int i = 0; i < spec.d; ++i)
        if (kth[i] < 0.0) v.push_back(fmt("(kappa theta)_%d<0", i + 1));

    for (int i = 0; i < spec.d; ++i) {
        if (spec.sigma(i, i) < 0.0) v.push_back(fmt("sigma_{%d%d}<0 on diagonal", i + 1, i + 1));
        for (int j = i + 1; j < spec.d; ++j)
            if (spec.sigma(i, j) != 0.0)
                v.push_back(fmt("sigma_{%d%d}!=0 above diagonal", i + 1, j + 1));
    }

    for (int i = 0; i <= spec.d; ++i) {
        if (spec.p[i] < 0.0) v.push_back(fmt("p_%d<0", i));
        if (spec.q[i] < 0.0) v.push_back(fmt("q_%d<0", i));
    }
    if (spec.p.maxCoeff() <= 0.0) v.emplace_back("p has no positive entry");
    if (spec.q.maxCoeff() <= 0.0) v.emplace_back("q has no positive entry");

    for (int i = 0; i < spec.d; ++i)
        if (spec.x0[i] <= 0.0) v.push_back(fmt("x0_%d<=0", i + 1));

    for (const std::string& s : spec.jumps.validate(spec.d)) v.push_back(s);

    if (!v.empty()) return v;

    try {
        if (spec.beta < beta_lower_bound(spec) - 1e-12)
            v.emplace_back("beta below dividend-rate bound");
    } catch (const validation_error&) {
        // deterministic dividends: non-negativity reduces to beta >= 0
        if (spec.beta < 0.0) v.emplace_back("beta<0 with deterministic dividends");
    }

    try {
        if (!(spec.gamma - spec.beta > g2_max_real_eigenvalue(spec)))
            v.emplace_back("stock price not finite");
    } catch (const numerical_error&) {
        v.emplace_back("stock price not finite");
    }

    return v;
}

void require_valid(const ModelSpec& spec) {
    std::vector<std::string> v = validate_spec(spec);
    if (v.empty()) return;
    std::string msg = "invalid model:";
    for (const std::string& s : v) {
        msg += ' ';
        msg += s;
        msg += ';';
    }
    msg.pop_back();
    throw validation_error(msg);
}

double beta_lower_bound(const ModelSpec& spec) {
    if (spec.p.size() != spec.d + 1)
        throw validation_error("beta_lower_bound: p must have d+1 entries");
    const Eigen::VectorXd ptil = spec.p.tail(spec.d);
    if (ptil.maxCoeff() <= 0.0) throw validation_error("deterministic dividends");

    double bound = -std::numeric_limits<double>::infinity();
    if (spec.p[0] > 0.0)
        bound = std::max(bound, -ptil.dot(spec.kappa * spec.theta) / spec.p[0]);
    for (int j = 0; j < spec.d; ++j)
        if (ptil[j] > 0.0)
            bound = std::max(bound, ptil.dot(spec.kappa.col(j)) / ptil[j]);
    return bound;
}

bool kappa_is_triangular(const ModelSpec& spec) {
    bool lower = true, upper = true;
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j) {
            if (i < j && spec.kappa(i, j) != 0.0) lower = false;
            if (i > j && spec.kappa(i, j) != 0.0) upper = false;
        }
    return lower || upper;
}

std::vector<double> g2_eigenvalues_closed_form(const ModelSpec& spec) {
    if (!kappa_is_triangular(spec))
        throw validation_error("closed form unavailable; use numeric eigenvalues");
    const int d = spec.d;
    const Eigen::MatrixXd a = spec.diffusion();
    const bool jumps = spec.jumps.active();
    const double xi = spec.jumps.intensity;

    std::vector<double> eig;
    eig.reserve(static_cast<std::size_t>(1 + d + d * (d + 1) / 2));
    eig.push_back(0.0);
    for (int i = 0; i < d; ++i) eig.push_back(-spec.kappa(i, i));
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            double lam = -spec.kappa(i, i) - spec.kappa(j, j) + a(i, j);
            if (jumps) lam += xi * spec.jumps.cross_moment(i, j, d);
            eig.push_back(lam);
        }
    std::sort(eig.begin(), eig.end());
    return eig;
}

double g2_max_real_eigenvalue(const ModelSpec& spec) {
    if (kappa_is_triangular(spec)) {
        std::vector<double> eig = g2_eigenvalues_closed_form(spec);
        return eig.back();
    }
    GeneratorMatrix g2 = build_generator(spec, 2);
    Eigen::EigenSolver<Eigen::MatrixXd> es(g2.entries, false);
    if (es.info() != Eigen::Success)
        throw numerical_error("eigenvalue computation failed");
    return es.eigenvalues().real().maxCoeff();
}

std::vector<std::string> validate_four_factor(const FourFactorParams& params) {
    std::vector<std::string> v;
    auto pos = [&](double x, const char* name) {
        if (!(x > 0.0)) v.push_back(std::string(name) + " must be > 0");
    };
    pos(params.kappa0I, "kappa0I");
    pos(params.kappa1I, "kappa1I");
    pos(params.kappa0D, "kappa0D");
    pos(params.kappa1D, "kappa1D");
    pos(params.thetaD, "thetaD");
    pos(params.sigmaI, "sigmaI");
    pos(params.sigmaD, "sigmaD");
    pos(params.x00I, "x00I");
    pos(params.x10I, "x10I");
    pos(params.x10D, "x10D");
    if (!(params.rho >= -1.0 && params.rho <= 1.0))
        v.emplace_back("rho must lie in [-1,1]");
    if (!std::isfinite(params.gamma)) v.emplace_back("gamma is not finite");
    if (!v.empty()) return v;

    const double cap = std::max(
        {0.0, params.sigmaI * params.sigmaI - 2.0 * params.kappa1I,
         params.sigmaD * params.sigmaD - 2.0 * params.kappa1D,
         params.sigmaI * params.sigmaD * params.rho - params.kappa1I - params.kappa1D});
    if (!(params.gamma - params.beta() > cap)) v.emplace_back("stock price not finite");
    return v;
}

ModelSpec four_factor_to_spec(const FourFactorParams& params) {
    std::vector<std::string> v = validate_four_factor(params);
    if (!v.empty()) {
        std::string msg = "four-factor params:";
        for (const std::string& s : v) {
            msg += ' ';
            msg += s;
            msg += ';';
        }
        msg.pop_back();
        throw validation_error(msg);
    }

    ModelSpec spec;
    spec.d = 4;
    spec.kappa = Eigen::MatrixXd::Zero(4, 4);
    spec.kappa(0, 0) = params.kappa0I;
    spec.kappa(0, 1) = -params.kappa0I;
    spec.kappa(1, 1) = params.kappa1I;
    spec.kappa(2, 2) = params.kappa0D;
    spec.kappa(2, 3) = -params.kappa0D;
    spec.kappa(3, 3) = params.kappa1D;

    spec.theta.resize(4);
    spec.theta << 1.0, 1.0, params.thetaD, params.thetaD;

    spec.sigma = Eigen::MatrixXd::Zero(4, 4);
    spec.sigma(1, 1) = params.sigmaI;
    spec.sigma(3, 1) = params.sigmaD * params.rho;
    spec.sigma(3, 3) = params.sigmaD * std::sqrt(1.0 - params.rho * params.rho);

    spec.jumps = JumpLaw::none_law();

    spec.p = Eigen::VectorXd::Zero(5);
    spec.p[3] = 1.0;
    spec.q = Eigen::VectorXd::Zero(5);
    spec.q[1] = 1.0;

    spec.beta = params.beta();
    spec.gamma = params.gamma;

    spec.x0.resize(4);
    spec.x0 << params.x00I, params.x10I, 1.0, params.x10D;

    require_valid(spec);
    return spec;
}

} // namespace polydiv
