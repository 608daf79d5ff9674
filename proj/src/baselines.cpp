#include "netscope/baselines.hpp"

#include "netscope/error.hpp"
#include "netscope/metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace netscope {

namespace {

constexpr double kCcaRidge = 1e-10;

std::string shape_str(const Matrix& m) {
    return "(" + std::to_string(m.rows()) + "," + std::to_string(m.cols()) + ")";
}

void require_same_samples(const Matrix& a, const Matrix& b, const char* measure) {
    if (a.rows() != b.rows())
        throw InputError(std::string(measure) + ": sample counts differ " + shape_str(a) +
                         " vs " + shape_str(b));
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* measure) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InputError(std::string(measure) + ": shapes differ " + shape_str(a) + " vs " +
                         shape_str(b));
}

Matrix centered(const Matrix& x) { return x.rowwise() - x.colwise().mean(); }

Vector upper_triangle(const Matrix& d) {
    const Eigen::Index n = d.rows();
    Vector v(n * (n - 1) / 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = d(i, j);
    return v;
}

// X V diag(1/sqrt(lambda + ridge)): whitens the centered data so its columns
// span the same space with (near-)orthonormal columns.
Matrix whiten(const Matrix& xc) {
    Matrix cov = xc.transpose() * xc;
    cov.diagonal().array() += kCcaRidge;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("cca: eigendecomposition failed");
    const Vector inv_sqrt = eig.eigenvalues().cwiseMax(kCcaRidge).cwiseSqrt().cwiseInverse();
    return xc * eig.eigenvectors() * inv_sqrt.asDiagonal();
}

}  // namespace

double euclidean_layer_distance(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "euclidean");
    return (a - b).rowwise().norm().mean();
}

double cosine_layer_distance(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "cosine");
    const Vector na = a.rowwise().norm();
    const Vector nb = b.rowwise().norm();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        if (na(i) == 0.0 || nb(i) == 0.0)
            throw InputError("cosine: zero-norm row at sample " + std::to_string(i));
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double c = a.row(i).dot(b.row(i)) / (na(i) * nb(i));
        total += 1.0 - std::clamp(c, -1.0, 1.0);
    }
    return total / static_cast<double>(a.rows());
}

double rsm_distance(const Matrix& a, const Matrix& b) {
    require_same_samples(a, b, "rsm");
    const Matrix da = pairwise_distances(a).matrix;
    const Matrix db = pairwise_distances(b).matrix;
    return (da - db).norm() / static_cast<double>(a.rows());
}

double rsa_distance(const Matrix& a, const Matrix& b) {
    require_same_samples(a, b, "rsa");
    if (a.rows() < 3) throw InputError("rsa: needs at least 3 samples");
    const Vector x = upper_triangle(pairwise_distances(a).matrix);
    const Vector y = upper_triangle(pairwise_distances(b).matrix);
    const Vector xc = x.array() - x.mean();
    const Vector yc = y.array() - y.mean();
    const double sx = xc.norm();
    const double sy = yc.norm();
    if (sx == 0.0 || sy == 0.0)
        throw InputError("rsa: zero-variance distance pattern (constant layer)");
    const double r = std::clamp(xc.dot(yc) / (sx * sy), -1.0, 1.0);
    return 1.0 - r;
}

double cka_similarity(const Matrix& a, const Matrix& b) {
    require_same_samples(a, b, "cka");
    if (a.rows() < 2) throw InputError("cka: needs at least 2 samples");
    const Matrix ac = centered(a);
    const Matrix bc = centered(b);
    const double aa = (ac.transpose() * ac).norm();
    const double bb = (bc.transpose() * bc).norm();
    if (aa == 0.0 || bb == 0.0) throw InputError("cka: all-zero centered representation");
    const double ab = (ac.transpose() * bc).squaredNorm();
    return ab / (aa * bb);
}

Vector canonical_correlations(const Matrix& a, const Matrix& b) {
    require_same_samples(a, b, "cca");
    const Matrix ac = centered(a);
    const Matrix bc = centered(b);
    if (ac.squaredNorm() == 0.0 || bc.squaredNorm() == 0.0)
        throw InputError("cca: rank-0 input (constant representation)");
    const Matrix qa = whiten(ac);
    const Matrix qb = whiten(bc);
    Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
    const Eigen::Index k =
        std::min({a.cols(), b.cols(), std::max<Eigen::Index>(a.rows() - 1, 1)});
    Vector rho = svd.singularValues().head(std::min(k, svd.singularValues().size()));
    return rho.cwiseMax(0.0).cwiseMin(1.0);
}

double cca_distance(const Matrix& a, const Matrix& b) {
    return 1.0 - canonical_correlations(a, b).mean();
}

}  // namespace netscope
