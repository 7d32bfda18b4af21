#include "phslab/linalg.hpp"

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

namespace phslab {

Mat left_annihilator(const Mat& G, const Mat* reference) {
  const Eigen::Index n = G.rows();
  const Eigen::Index m = G.cols();
  if (m >= n) return Mat(0, n);

  Eigen::JacobiSVD<Mat> svd(G, Eigen::ComputeFullU);
  if (svd.rank() < m) throw InvalidArgument("left_annihilator: G is rank deficient");
  const Mat basis = svd.matrixU().rightCols(n - m);  // n x (n - m)

  Mat target;
  if (reference != nullptr && reference->rows() == n - m && reference->cols() == n) {
    target = reference->transpose();
  } else {
    const Mat projector =
        Mat::Identity(n, n) - G * (G.transpose() * G).ldlt().solve(G.transpose());
    Eigen::ColPivHouseholderQR<Mat> qr(projector);
    // Pivot columns, kept in natural coordinate order.
    std::vector<Eigen::Index> idx(qr.colsPermutation().indices().data(),
                                  qr.colsPermutation().indices().data() + (n - m));
    std::sort(idx.begin(), idx.end());
    Mat picked(n, n - m);
    for (Eigen::Index k = 0; k < n - m; ++k) picked.col(k) = projector.col(idx[k]);
    target = picked;
  }

  Eigen::JacobiSVD<Mat> procrustes(basis.transpose() * target,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat rotation = procrustes.matrixU() * procrustes.matrixV().transpose();
  Mat result = (basis * rotation).transpose();
  // Clean round-off so structurally zero entries stay zero.
  for (Eigen::Index i = 0; i < result.size(); ++i) {
    if (std::abs(result(i)) < 1e-15) result(i) = 0.0;
  }
  return result;
}

double min_symmetric_eigenvalue(const Mat& A) {
  const Mat sym = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace phslab
