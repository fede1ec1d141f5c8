#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polydiv/generator.hpp"
#include "polydiv/jumps.hpp"

namespace polydiv {

// Linear jump-diffusion factor model on (0,inf)^d,
//     dX = kappa (theta - X) dt + diag(X_-) (Sigma dB + dJ),
// J a compensated compound Poisson process, plus the loadings that turn the
// factors into prices: cumulative dividends C_t = e^{beta t} p'H_1(X_t) and
// discount deflator zeta_t = e^{-gamma t} q'H_1(X_t).  p and q have d+1
// entries; entry 0 multiplies the constant monomial.
struct ModelSpec {
    int d = 0;
    Eigen::MatrixXd kappa;
    Eigen::VectorXd theta;
    Eigen::MatrixXd sigma;
    JumpLaw jumps;
    Eigen::VectorXd p;
    Eigen::VectorXd q;
    double beta = 0.0;
    double gamma = 0.0;
    Eigen::VectorXd x0;

    Eigen::MatrixXd diffusion() const { return sigma * sigma.transpose(); }
};

// Two mean-reverting curve factors per leg: an interest-rate leg
// (X0I, X1I) feeding the deflator and a dividend leg (X0D, X1D) feeding
// cumulative dividends, with the single Brownian correlation rho tying
// X1D's driver to X1I's.  thetaI = 1 and X00D = 1 are normalizations;
// beta is tied to kappa0D so the dividend rate stays non-negative.
struct FourFactorParams {
    double kappa0I = 0.0, kappa1I = 0.0;
    double kappa0D = 0.0, kappa1D = 0.0;
    double thetaD = 0.0;
    double sigmaI = 0.0, sigmaD = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    double x00I = 0.0, x10I = 0.0, x10D = 0.0;

    double beta() const { return kappa0D; }
};

GeneratorMatrix build_generator(const ModelSpec& spec, int degree);

// Triplet form of the same matrix for sparse exponentials.
SparseGenerator build_sparse_generator(const ModelSpec& spec, int degree);

// Empty iff every structural and spectral invariant holds.  Each entry
// names the failing condition (and indices where that helps).
std::vector<std::string> validate_spec(const ModelSpec& spec);
void require_valid(const ModelSpec& spec);

// Smallest beta compatible with a non-negative dividend rate:
//   max over { -p~'kappa theta / p_0 (if p_0 > 0) } and
//            { p~'kappa_col_j / p_j : p_j > 0 }.
// Throws validation_error when p has no positive stochastic loading.
double beta_lower_bound(const ModelSpec& spec);

// Closed-form spectrum of the degree-2 generator when kappa is triangular:
// { 0 } u { -kappa_ii } u { -kappa_ii - kappa_jj + (SS')_ij + xi E[z_i z_j] }.
// Sorted ascending.  Throws when kappa is not triangular.
std::vector<double> g2_eigenvalues_closed_form(const ModelSpec& spec);

bool kappa_is_triangular(const ModelSpec& spec);

// Max real part of the G_2 spectrum: closed form when triangular, dense
// eigensolver otherwise.
double g2_max_real_eigenvalue(const ModelSpec& spec);

std::vector<std::string> validate_four_factor(const FourFactorParams& params);
ModelSpec four_factor_to_spec(const FourFactorParams& params);

// Text round-trip (flat key-value document, exact to the last bit).
std::string model_to_text(const ModelSpec& spec);
ModelSpec model_from_text(const std::string& text);
ModelSpec load_model(const std::string& path);
void save_model(const ModelSpec& spec, const std::string& path);

} // namespace polydiv
