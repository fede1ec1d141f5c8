#include "polydiv/matrix_exp.hpp"

#include <cmath>

#include "polydiv/errors.hpp"

namespace polydiv {

namespace {

using Eigen::MatrixXd;

MatrixXd pade_solve(const MatrixXd& u, const MatrixXd& v) {
    // (v - u) x = (v + u)
    return (v - u).partialPivLu().solve(v + u);
}

MatrixXd pade3(const MatrixXd& a, const MatrixXd& a2) {
    static const double b[] = {120, 60, 12, 1};
    const MatrixXd i = MatrixXd::Identity(a.rows(), a.cols());
    MatrixXd u = a * (b[3] * a2 + b[1] * i);
    MatrixXd v = b[2] * a2 + b[0] * i;
    return pade_solve(u, v);
}

MatrixXd pade5(const MatrixXd& a, const MatrixXd& a2, const MatrixXd& a4) {
    static const double b[] = {30240, 15120, 3360, 420, 30, 1};
    const MatrixXd i = MatrixXd::Identity(a.rows(), a.cols());
    MatrixXd u = a * (b[5] * a4 + b[3] * a2 + b[1] * i);
    MatrixXd v = b[4] * a4 + b[2] * a2 + b[0] * i;
    return pade_solve(u, v);
}

MatrixXd pade7(const MatrixXd& a, const MatrixXd& a2, const MatrixXd& a4,
               const MatrixXd& a6) {
    static const double b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    const MatrixXd i = MatrixXd::Identity(a.rows(), a.cols());
    MatrixXd u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * i);
    MatrixXd v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * i;
    return pade_solve(u, v);
}

MatrixXd pade9(const MatrixXd& a, const MatrixXd& a2, const MatrixXd& a4,
               const MatrixXd& a6) {
    static const double b[] = {17643225600.0, 8821612800.0, 2075673600.0,
                               302702400.0,   30270240.0,   2162160.0,
                               110880.0,      3960.0,       90.0,
                               1.0};
    const MatrixXd i = MatrixXd::Identity(a.rows(), a.cols());
    const MatrixXd a8 = a6 * a2;
    MatrixXd u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * i);
    MatrixXd v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * i;
    return pade_solve(u, v);
}

MatrixXd pade13(const MatrixXd& a, const MatrixXd& a2, const MatrixXd& a4,
                const MatrixXd& a6) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};
    const MatrixXd i = MatrixXd::Identity(a.rows(), a.cols());
    MatrixXd u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                      b[5] * a4 + b[3] * a2 + b[1] * i);
    MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                 b[4] * a4 + b[2] * a2 + b[0] * i;
    return pade_solve(u, v);
}

} // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw validation_error("matrix_exponential: matrix must be square");
    if (!a.allFinite())
        throw numerical_error("matrix_exponential: non-finite entries");
    if (a.rows() == 0) return a;

    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();

    const double theta3 = 1.495585217958292e-2;
    const double theta5 = 2.539398330063230e-1;
    const double theta7 = 9.504178996162932e-1;
    const double theta9 = 2.097847961257068;
    const double theta13 = 5.371920351148152;

    MatrixXd result;
    if (norm <= theta9) {
        const MatrixXd a2 = a * a;
        if (norm <= theta3) {
            result = pade3(a, a2);
        } else {
            const MatrixXd a4 = a2 * a2;
            if (norm <= theta5) {
                result = pade5(a, a2, a4);
            } else {
                const MatrixXd a6 = a4 * a2;
                result = (norm <= theta7) ? pade7(a, a2, a4, a6)
                                          : pade9(a, a2, a4, a6);
            }
        }
    } else {
        int s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        if (s < 0) s = 0;
        if (s > 1023)
            throw numerical_error("matrix_exponential: norm too large to scale");
        const MatrixXd as = a / std::pow(2.0, s);
        const MatrixXd a2 = as * as;
        const MatrixXd a4 = a2 * a2;
        const MatrixXd a6 = a4 * a2;
        result = pade13(as, a2, a4, a6);
        for (int k = 0; k < s; ++k) result = result * result;
    }

    if (!result.allFinite())
        throw numerical_error("matrix_exponential: overflow in result");
    return result;
}

} // namespace polydiv
