#pragma once

#include <vector>

namespace pmsm {

/// Dense tall-skinny linear least squares min ||A x - b||_2 for the small
/// regression problems of the identification fits (rows = sweep points,
/// columns <= 4).
struct LeastSquaresResult {
    std::vector<double> x;
    double residual_norm = 0.0;  ///< ||A x - b||_2
};

/// Householder-QR solve. Throws ConvergenceError listing the design matrix
/// when it is rank deficient.
LeastSquaresResult solve_qr(const std::vector<std::vector<double>>& A,
                            const std::vector<double>& b);

/// Normal-equations solve (A^T A x = A^T b, Cholesky); kept as the
/// cross-check route for the QR path.
LeastSquaresResult solve_normal(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b);

}  // namespace pmsm
