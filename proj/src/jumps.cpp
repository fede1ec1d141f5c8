#include "polydiv/jumps.hpp"

#include <cmath>

#include "polydiv/errors.hpp"

namespace polydiv {

JumpLaw JumpLaw::none_law() {
    return JumpLaw{};
}

JumpLaw JumpLaw::lognormal_law(double intensity, Eigen::VectorXd mu,
                               Eigen::MatrixXd cov) {
    JumpLaw j;
    j.kind = Kind::lognormal;
    j.intensity = intensity;
    j.mu = std::move(mu);
    j.cov = std::move(cov);
    return j;
}

JumpLaw JumpLaw::two_point_law(double intensity, double prob, Eigen::VectorXd a,
                               Eigen::VectorXd b) {
    JumpLaw j;
    j.kind = Kind::two_point;
    j.intensity = intensity;
    j.prob = prob;
    j.a = std::move(a);
    j.b = std::move(b);
    return j;
}

JumpLaw JumpLaw::custom_law(double intensity,
                            std::function<double(const MultiIndex&)> oracle) {
    JumpLaw j;
    j.kind = Kind::custom;
    j.intensity = intensity;
    j.custom_moment = std::move(oracle);
    return j;
}

double JumpLaw::transformed_moment(const MultiIndex& alpha) const {
    double t = 1.0;
    switch (kind) {
        case Kind::none:
            t = 1.0;
            break;
        case Kind::lognormal: {
            Eigen::VectorXd av(mu.size());
            for (int i = 0; i < av.size(); ++i)
                av[i] = static_cast<double>(alpha[static_cast<std::size_t>(i)]);
            t = std::exp(av.dot(mu) + 0.5 * av.dot(cov * av));
            break;
        }
        case Kind::two_point: {
            double ta = 1.0, tb = 1.0;
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                for (int k = 0; k < alpha[i]; ++k) {
                    ta *= 1.0 + a[static_cast<int>(i)];
                    tb *= 1.0 + b[static_cast<int>(i)];
                }
            }
            t = prob * ta + (1.0 - prob) * tb;
            break;
        }
        case Kind::custom:
            t = custom_moment(alpha);
            break;
    }
    if (!std::isfinite(t))
        throw numerical_error("jump law: transformed moment is not finite");
    return t;
}

double JumpLaw::mean_component(int i, int d) const {
    MultiIndex e(static_cast<std::size_t>(d), 0);
    e[static_cast<std::size_t>(i)] = 1;
    return transformed_moment(e) - 1.0;
}

double JumpLaw::cross_moment(int i, int j, int d) const {
    MultiIndex eij(static_cast<std::size_t>(d), 0);
    eij[static_cast<std::size_t>(i)] += 1;
    eij[static_cast<std::size_t>(j)] += 1;
    MultiIndex ei(static_cast<std::size_t>(d), 0);
    ei[static_cast<std::size_t>(i)] = 1;
    MultiIndex ej(static_cast<std::size_t>(d), 0);
    ej[static_cast<std::size_t>(j)] = 1;
    return transformed_moment(eij) - transformed_moment(ei) -
           transformed_moment(ej) + 1.0;
}

Eigen::MatrixXd JumpLaw::chol_lower() const {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        // semidefinite covariances are allowed; fall back to LDLT
        Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12).any())
            throw validation_error("jump law: covariance is not positive semidefinite");
        Eigen::VectorXd droot =
            ldlt.vectorD().array().max(0.0).sqrt().matrix();
        Eigen::MatrixXd l = ldlt.matrixL();
        return ldlt.transpositionsP().transpose() * (l * droot.asDiagonal());
    }
    return llt.matrixL();
}

std::vector<std::string> JumpLaw::validate(int d) const {
    std::vector<std::string> problems;
    if (intensity < 0.0) problems.push_back("jump intensity must be >= 0");
    switch (kind) {
        case Kind::none:
            break;
        case Kind::lognormal:
            if (mu.size() != d) problems.push_back("jump mu has wrong dimension");
            if (cov.rows() != d || cov.cols() != d)
                problems.push_back("jump covariance has wrong dimension");
            else if (!cov.isApprox(cov.transpose(), 1e-12))
                problems.push_back("jump covariance must be symmetric");
            break;
        case Kind::two_point:
            if (prob < 0.0 || prob > 1.0)
                problems.push_back("jump branch probability must be in [0,1]");
            if (a.size() != d || b.size() != d)
                problems.push_back("jump branch vectors have wrong dimension");
            else if ((a.array() <= -1.0).any() || (b.array() <= -1.0).any())
                problems.push_back("jump sizes must stay above -1");
            break;
        case Kind::custom:
            if (!custom_moment) problems.push_back("custom jump law lacks an oracle");
            break;
    }
    return problems;
}

} // namespace polydiv
