#pragma once

#include <functional>

#include <Eigen/Dense>

#include "polydiv/basis.hpp"

namespace polydiv {

// Compound-Poisson jump component.  Jump sizes z live on (-1, inf)^d so
// that states stay positive under x -> x * (1 + z) componentwise.  The
// quantity the generator needs is the transformed moment
//     T(alpha) = E[ prod_j (1 + z_j)^alpha_j ],
// finite for every multi-index for both built-in laws.
struct JumpLaw {
    enum class Kind { none, lognormal, two_point, custom };

    Kind kind = Kind::none;
    double intensity = 0.0;

    // lognormal: 1 + z = exp(Y), Y ~ N(mu, cov)
    Eigen::VectorXd mu;
    Eigen::MatrixXd cov;

    // two_point: z = a with probability prob, else b
    double prob = 0.0;
    Eigen::VectorXd a;
    Eigen::VectorXd b;

    // custom: moment oracle only (no sampler), used by tests
    std::function<double(const MultiIndex&)> custom_moment;

    static JumpLaw none_law();
    static JumpLaw lognormal_law(double intensity, Eigen::VectorXd mu,
                                 Eigen::MatrixXd cov);
    static JumpLaw two_point_law(double intensity, double prob,
                                 Eigen::VectorXd a, Eigen::VectorXd b);
    static JumpLaw custom_law(double intensity,
                              std::function<double(const MultiIndex&)> oracle);

    bool active() const { return kind != Kind::none && intensity > 0.0; }
    bool simulatable() const { return kind != Kind::custom; }

    // T(alpha); throws numerical_error if the oracle produces a
    // non-finite value.
    double transformed_moment(const MultiIndex& alpha) const;

    // E[z_i] and E[z_i z_j], derived from T.
    double mean_component(int i, int d) const;
    double cross_moment(int i, int j, int d) const;

    // Lower Cholesky factor of cov (lognormal only), cached on first use
    // by the simulator; kept here so validation can fail early.
    Eigen::MatrixXd chol_lower() const;

    std::vector<std::string> validate(int d) const;
};

} // namespace polydiv
