#pragma once

#include "phslab/common.hpp"

namespace phslab {

/// Orthonormal full-row-rank left annihilator of G (n x m, rank m): a
/// (n - m) x n matrix A with A G = 0.
///
/// The basis is rotated (orthogonal Procrustes) to be as close as possible to
/// `reference` when given, otherwise to the pivoted columns of the projector
/// I - G (G^T G)^{-1} G^T. For G = e3 this yields exactly [e1 e2]^T.
Mat left_annihilator(const Mat& G, const Mat* reference = nullptr);

/// Symmetric part's smallest eigenvalue.
double min_symmetric_eigenvalue(const Mat& A);

}  // namespace phslab
