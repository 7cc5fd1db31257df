#include "polymag/linalg.hpp"

#include "polymag/errors.hpp"

#include <algorithm>
#include <cmath>

namespace polymag {

namespace {

void require_finite(const Eigen::MatrixXd& a, const char* what) {
    if (!a.allFinite()) throw NumericalError(std::string(what) + ": non-finite matrix entry");
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
    require_finite(a, "symmetric_eigenvalues");
    const double scale = a.cwiseAbs().maxCoeff();
    for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (std::sqrt(off) <= 1e-15 * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Eigen::VectorXd ev = a.diagonal();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

double spectral_norm(const Eigen::MatrixXd& a) {
    require_finite(a, "spectral_norm");
    if (a.size() == 0) return 0.0;
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::VectorXd ev = symmetric_eigenvalues(ata);
    return std::sqrt(std::max(ev[ev.size() - 1], 0.0));
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& a) {
    require_finite(a, "matrix_exp");
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("matrix_exp: matrix is not square");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (n == 0) return id;

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    static constexpr double theta13 = 5.371920351148152;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const Eigen::MatrixXd x = a / std::ldexp(1.0, squarings);

    const Eigen::MatrixXd x2 = x * x;
    const Eigen::MatrixXd x4 = x2 * x2;
    const Eigen::MatrixXd x6 = x4 * x2;
    const Eigen::MatrixXd u_inner = b[13] * x6 + b[11] * x4 + b[9] * x2;
    const Eigen::MatrixXd u = x * (x6 * u_inner + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    const Eigen::MatrixXd v_inner = b[12] * x6 + b[10] * x4 + b[8] * x2;
    const Eigen::MatrixXd v = x6 * v_inner + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;

    Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) r = r * r;
    require_finite(r, "matrix_exp result");
    return r;
}

}  // namespace polymag
