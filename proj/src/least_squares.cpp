#include "pmsm/least_squares.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

void check_shape(const std::vector<std::vector<double>>& A, const std::vector<double>& b) {
    if (A.empty() || A.size() != b.size())
        throw ConvergenceError("least squares: empty system or row mismatch");
    const size_t ncol = A[0].size();
    if (ncol == 0 || ncol > A.size())
        throw ConvergenceError("least squares: need at least as many rows as columns");
    for (const auto& row : A)
        if (row.size() != ncol) throw ConvergenceError("least squares: ragged design matrix");
}

std::string matrix_str(const std::vector<std::vector<double>>& A) {
    std::string s = "[";
    for (const auto& row : A) {
        s += "[";
        for (size_t j = 0; j < row.size(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4g%s", row[j], j + 1 < row.size() ? ", " : "");
            s += buf;
        }
        s += "]";
    }
    return s + "]";
}

double residual_of(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                   const std::vector<double>& x) {
    double acc = 0.0;
    for (size_t r = 0; r < A.size(); ++r) {
        double e = -b[r];
        for (size_t c = 0; c < x.size(); ++c) e += A[r][c] * x[c];
        acc += e * e;
    }
    return std::sqrt(acc);
}

}  // namespace

LeastSquaresResult solve_qr(const std::vector<std::vector<double>>& A,
                            const std::vector<double>& b) {
    check_shape(A, b);
    const size_t m = A.size(), n = A[0].size();
    std::vector<std::vector<double>> R = A;
    std::vector<double> qtb = b;

    // column norm scale for the rank test
    double scale = 0.0;
    for (size_t r = 0; r < m; ++r)
        for (size_t c = 0; c < n; ++c) scale = std::max(scale, std::abs(R[r][c]));
    if (scale == 0.0)
        throw ConvergenceError("least squares: zero design matrix " + matrix_str(A));

    for (size_t j = 0; j < n; ++j) {
        double normx = 0.0;
        for (size_t r = j; r < m; ++r) normx += R[r][j] * R[r][j];
        normx = std::sqrt(normx);
        if (normx < 1e-12 * scale)
            throw ConvergenceError("least squares: rank-deficient design matrix " + matrix_str(A));
        const double s = R[j][j] > 0.0 ? -1.0 : 1.0;
        const double u1 = R[j][j] - s * normx;
        std::vector<double> w(m - j, 0.0);
        w[0] = 1.0;
        for (size_t r = j + 1; r < m; ++r) w[r - j] = R[r][j] / u1;
        const double tau = -s * u1 / normx;
        R[j][j] = s * normx;
        for (size_t r = j + 1; r < m; ++r) R[r][j] = 0.0;
        for (size_t c = j + 1; c < n; ++c) {
            double acc = 0.0;
            for (size_t r = j; r < m; ++r) acc += w[r - j] * R[r][c];
            acc *= tau;
            for (size_t r = j; r < m; ++r) R[r][c] -= w[r - j] * acc;
        }
        double acc = 0.0;
        for (size_t r = j; r < m; ++r) acc += w[r - j] * qtb[r];
        acc *= tau;
        for (size_t r = j; r < m; ++r) qtb[r] -= w[r - j] * acc;
    }

    LeastSquaresResult out;
    out.x.assign(n, 0.0);
    for (size_t jj = n; jj-- > 0;) {
        double acc = qtb[jj];
        for (size_t c = jj + 1; c < n; ++c) acc -= R[jj][c] * out.x[c];
        out.x[jj] = acc / R[jj][jj];
    }
    out.residual_norm = residual_of(A, b, out.x);
    return out;
}

LeastSquaresResult solve_normal(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b) {
    check_shape(A, b);
    const size_t m = A.size(), n = A[0].size();
    std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
    std::vector<double> atb(n, 0.0);
    for (size_t r = 0; r < m; ++r) {
        for (size_t i = 0; i < n; ++i) {
            atb[i] += A[r][i] * b[r];
            for (size_t j = i; j < n; ++j) ata[i][j] += A[r][i] * A[r][j];
        }
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < i; ++j) ata[i][j] = ata[j][i];

    // Cholesky ata = L L^T
    std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            double acc = ata[i][j];
            for (size_t k = 0; k < j; ++k) acc -= L[i][k] * L[j][k];
            if (i == j) {
                if (acc <= 0.0)
                    throw ConvergenceError("least squares: rank-deficient design matrix " +
                                           matrix_str(A));
                L[i][i] = std::sqrt(acc);
            } else {
                L[i][j] = acc / L[j][j];
            }
        }
    }
    std::vector<double> y(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double acc = atb[i];
        for (size_t k = 0; k < i; ++k) acc -= L[i][k] * y[k];
        y[i] = acc / L[i][i];
    }
    LeastSquaresResult out;
    out.x.assign(n, 0.0);
    for (size_t ii = n; ii-- > 0;) {
        double acc = y[ii];
        for (size_t k = ii + 1; k < n; ++k) acc -= L[k][ii] * out.x[k];
        out.x[ii] = acc / L[ii][ii];
    }
    out.residual_norm = residual_of(A, b, out.x);
    return out;
}

}  // namespace pmsm
