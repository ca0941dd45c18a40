#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vinebud/kmeans.hpp"

namespace vinebud::svm {

// Bud is the positive class.
enum class Label : int { NonBud = -1, Bud = +1 };

inline double sign_of(Label l) { return static_cast<double>(static_cast<int>(l)); }

struct SvmConfig {
  double C = 1.0;
  double gamma = 1.0;
  double kkt_tolerance = 1e-3;
  // Solver iteration cap; 0 picks max(10^7, 100 n).
  std::int64_t max_passes = 0;
  // Kernel row cache budget.
  std::size_t cache_bytes = std::size_t{256} << 20;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SvmModel {
  RowMatrix<double> support_vectors;  // one row per vector
  Eigen::VectorXd dual_coefs;         // alpha_i * y_i
  double bias = 0.0;
  double gamma = 1.0;
  double C = 1.0;

  int dimension() const { return static_cast<int>(support_vectors.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(support_vectors.rows()); }
};

// Solver state kept for inspection by tests and tooling.
struct TrainingReport {
  Eigen::VectorXd alpha;                   // full dual solution, one per example
  std::vector<double> objective_history;   // dual objective after each accepted step
  double max_violation = 0.0;              // m(alpha) - M(alpha) at exit
  std::int64_t iterations = 0;
};

template <typename DerivedA, typename DerivedB>
double rbf_kernel(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y, double gamma) {
  if (x.size() != y.size()) throw ArgumentError("rbf_kernel: dimension mismatch");
  double d2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x.derived().coeff(i)) - static_cast<double>(y.derived().coeff(i));
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// C-SVC dual with an RBF kernel, solved by pairwise (SMO) updates on the
// maximal-violating pair until m(alpha) - M(alpha) <= kkt_tolerance.
SvmModel train(const RowMatrix<double>& x, std::span<const Label> y, const SvmConfig& cfg,
               TrainingReport* report = nullptr);

double decision_value(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Zero maps to NonBud.
Label predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
inline Label label_for_decision(double d) { return d > 0.0 ? Label::Bud : Label::NonBud; }

// Layout (little-endian): magic "VBSVM\0\0\0", u32 version, f64 gamma, f64 C,
// f64 bias, i32 positive label, i32 negative label, u32 sv count, u32 dim,
// count f64 dual coefs, count*dim f64 support vectors row-major.
void save_model(const SvmModel& model, const std::filesystem::path& path);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace vinebud::svm
