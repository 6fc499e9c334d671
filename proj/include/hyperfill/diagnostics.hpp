#pragma once

#include <vector>

#include "hyperfill/matrix.hpp"

namespace hyperfill {

// Spectrum of the column-centered covariance (1/(n-1)) Zc^T Zc: eigenvalues
// sorted descending and clamped at zero (they are its singular values), the
// same values relative to the largest, and the count above 1e-3 times the
// largest. A constant embedding yields an all-zero spectrum and rank 0.
struct SpectrumReport {
  Eigen::VectorXd singular_values;
  Eigen::VectorXd relative;  // singular_values / max, zeros when max == 0
  int effective_rank = 0;
};

SpectrumReport singular_spectrum(const Mat& z);

// Both metrics operate on rows scaled to unit norm; zero-norm rows are
// excluded and their count reported through `zero_rows` when non-null.
// alignment: mean squared distance over distinct same-class pairs (needs at
// least one such pair after exclusion). uniformity: log of the mean of
// exp(-2 ||u - v||^2) over all distinct pairs (needs at least two rows).
double alignment(const Mat& z, const std::vector<int>& labels, int* zero_rows = nullptr);
double uniformity(const Mat& z, int* zero_rows = nullptr);

}  // namespace hyperfill
