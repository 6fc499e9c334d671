#include "hyperfill/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace hyperfill {

SpectrumReport singular_spectrum(const Mat& z) {
  if (z.rows() < 2) throw std::invalid_argument("singular_spectrum: need at least 2 rows");
  if (z.cols() < 1) throw std::invalid_argument("singular_spectrum: empty rows");
  if (!all_finite(z)) throw std::invalid_argument("singular_spectrum: non-finite entries");

  Mat centered = z;
  Eigen::RowVectorXd mean = z.colwise().mean();
  centered.rowwise() -= mean;
  Mat cov = (centered.transpose() * centered) / static_cast<double>(z.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Mat> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("singular_spectrum: eigendecomposition failed");

  const long d = cov.rows();
  SpectrumReport report;
  report.singular_values.resize(d);
  for (long i = 0; i < d; ++i)
    report.singular_values(i) = std::max(0.0, solver.eigenvalues()(d - 1 - i));

  const double top = report.singular_values(0);
  report.relative = top > 0.0 ? (report.singular_values / top).eval()
                              : Eigen::VectorXd::Zero(d).eval();
  report.effective_rank = 0;
  if (top > 0.0) {
    for (long i = 0; i < d; ++i) {
      if (report.singular_values(i) > 1e-3 * top) ++report.effective_rank;
    }
  }
  return report;
}

namespace {

// Unit-normalized nonzero rows plus, for callers that need them, the labels
// that survived alongside.
Mat unit_rows(const Mat& z, const std::vector<int>* labels, std::vector<int>* kept_labels,
              int* zero_rows) {
  Mat out(z.rows(), z.cols());
  long kept = 0;
  int dropped = 0;
  for (long i = 0; i < z.rows(); ++i) {
    double norm = z.row(i).norm();
    if (norm == 0.0) {
      ++dropped;
      continue;
    }
    out.row(kept) = z.row(i) / norm;
    if (labels) kept_labels->push_back((*labels)[i]);
    ++kept;
  }
  if (zero_rows) *zero_rows = dropped;
  out.conservativeResize(kept, z.cols());
  return out;
}

}  // namespace

double alignment(const Mat& z, const std::vector<int>& labels, int* zero_rows) {
  if (z.rows() < 2) throw std::invalid_argument("alignment: need at least 2 rows");
  if (static_cast<long>(labels.size()) != z.rows())
    throw std::invalid_argument("alignment: one label per row required");
  if (!all_finite(z)) throw std::invalid_argument("alignment: non-finite entries");

  std::vector<int> kept_labels;
  Mat u = unit_rows(z, &labels, &kept_labels, zero_rows);
  if (u.rows() == 0) throw std::invalid_argument("alignment: every row has zero norm");

  double total = 0.0;
  long pairs = 0;
  for (long i = 0; i < u.rows(); ++i) {
    for (long j = i + 1; j < u.rows(); ++j) {
      if (kept_labels[i] != kept_labels[j]) continue;
      total += (u.row(i) - u.row(j)).squaredNorm();
      ++pairs;
    }
  }
  if (pairs == 0) throw std::invalid_argument("alignment: no class has two nonzero members");
  return total / static_cast<double>(pairs);
}

double uniformity(const Mat& z, int* zero_rows) {
  if (z.rows() < 2) throw std::invalid_argument("uniformity: need at least 2 rows");
  if (!all_finite(z)) throw std::invalid_argument("uniformity: non-finite entries");

  Mat u = unit_rows(z, nullptr, nullptr, zero_rows);
  if (u.rows() == 0) throw std::invalid_argument("uniformity: every row has zero norm");
  if (u.rows() < 2) throw std::invalid_argument("uniformity: fewer than two nonzero rows");

  double total = 0.0;
  long pairs = 0;
  for (long i = 0; i < u.rows(); ++i) {
    for (long j = i + 1; j < u.rows(); ++j) {
      total += std::exp(-2.0 * (u.row(i) - u.row(j)).squaredNorm());
      ++pairs;
    }
  }
  return std::log(total / static_cast<double>(pairs));
}

}  // namespace hyperfill
