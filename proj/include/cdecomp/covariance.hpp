#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "cdecomp/errors.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

// Symmetric 2x2 or 3x3 covariance of the joint mediator errors.
class CovarianceMatrix {
  public:
    CovarianceMatrix() : m_(Eigen::Matrix2d::Identity()) {}

    explicit CovarianceMatrix(const Eigen::MatrixXd& m) : m_(m) { validate(); }

    static CovarianceMatrix from_correlations(const std::vector<double>& sigmas,
                                              const std::vector<double>& rhos) {
        int d = static_cast<int>(sigmas.size());
        if (d != 2 && d != 3) throw domain_error("covariance: dimension must be 2 or 3");
        std::size_t need = (d == 2) ? 1 : 3;
        if (rhos.size() != need) throw domain_error("covariance: wrong number of correlations");
        Eigen::MatrixXd m(d, d);
        int r = 0;
        for (int i = 0; i < d; ++i) {
            m(i, i) = sigmas[i] * sigmas[i];
            for (int j = i + 1; j < d; ++j, ++r) {
                m(i, j) = m(j, i) = rhos[r] * sigmas[i] * sigmas[j];
            }
        }
        return CovarianceMatrix(m);
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }

    double sigma(int i) const { return std::sqrt(m_(i, i)); }

    double correlation(int i, int j) const { return m_(i, j) / (sigma(i) * sigma(j)); }

    // Upper-triangle correlations in row order: (0,1) [, (0,2), (1,2)].
    std::vector<double> correlations() const {
        std::vector<double> out;
        for (int i = 0; i < dim(); ++i)
            for (int j = i + 1; j < dim(); ++j) out.push_back(correlation(i, j));
        return out;
    }

  private:
    void validate() const {
        int d = dim();
        if ((d != 2 && d != 3) || m_.cols() != d)
            throw domain_error("covariance: dimension must be 2 or 3");
        for (int i = 0; i < d; ++i) {
            if (!(m_(i, i) > 0.0) || !std::isfinite(m_(i, i)))
                throw domain_error("covariance: variance " + std::to_string(i + 1) +
                                   " must be positive");
            for (int j = i + 1; j < d; ++j) {
                if (std::fabs(m_(i, j) - m_(j, i)) > 1e-12 * std::max(1.0, std::fabs(m_(i, j))))
                    throw domain_error("covariance: matrix is not symmetric");
                double r = m_(i, j) / std::sqrt(m_(i, i) * m_(j, j));
                if (!(std::fabs(r) < 1.0 + 1e-12))
                    throw domain_error("covariance: correlation (" + std::to_string(i + 1) + "," +
                                       std::to_string(j + 1) + ") out of range");
            }
        }
    }

    Eigen::MatrixXd m_;
};

// Lower Cholesky factor; a pivot below tol names the failing row.
inline Eigen::MatrixXd chol_lower(const CovarianceMatrix& cov, double tol = 1e-10) {
    int d = cov.dim();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        double pivot = cov(j, j);
        for (int k = 0; k < j; ++k) pivot -= L(j, k) * L(j, k);
        if (pivot <= tol)
            throw numerical_error("cholesky: pivot " + std::to_string(j + 1) +
                                  " is not positive (matrix not positive definite)");
        L(j, j) = std::sqrt(pivot);
        for (int i = j + 1; i < d; ++i) {
            double s = cov(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

// count x dim matrix of draws from N(mean, cov). Row-major draw order: all
// coordinates of row 0, then row 1, ... so sequences are reproducible.
inline Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean, const CovarianceMatrix& cov,
                                  Sampler& sampler, std::size_t count) {
    int d = cov.dim();
    if (mean.size() != d) throw domain_error("mvn_sample: mean dimension mismatch");
    Eigen::MatrixXd L = chol_lower(cov);
    Eigen::MatrixXd out(count, d);
    Eigen::VectorXd z(d);
    for (std::size_t r = 0; r < count; ++r) {
        for (int j = 0; j < d; ++j) z(j) = sampler.normal();
        out.row(r) = (mean + L * z).transpose();
    }
    return out;
}

}  // namespace cdecomp
