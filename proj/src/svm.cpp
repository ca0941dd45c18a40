#include "vinebud/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>

#include "vinebud/binary_io.hpp"
#include "vinebud/image_io.hpp"

namespace vinebud::svm {
namespace {

constexpr double kTau = 1e-12;
constexpr double kSupportThreshold = 1e-12;
constexpr std::string_view kMagic{"VBSVM\0\0\0", 8};
constexpr std::uint32_t kVersion = 1;

// LRU cache of kernel rows K(i, .) over the training set.
class KernelCache {
 public:
  KernelCache(const RowMatrix<double>& x, double gamma, std::size_t budget_bytes)
      : x_(x), gamma_(gamma), rows_(static_cast<std::size_t>(x.rows())), where_(rows_.size()) {
    norms_ = x.rowwise().squaredNorm();
    const std::size_t row_bytes = std::max<std::size_t>(1, rows_.size() * sizeof(double));
    capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
  }

  const std::vector<double>& row(int i) {
    auto& r = rows_[i];
    if (!r.empty()) {
      lru_.splice(lru_.begin(), lru_, where_[i]);
      return r;
    }
    if (lru_.size() >= capacity_) {
      const int victim = lru_.back();
      lru_.pop_back();
      std::vector<double>().swap(rows_[victim]);
    }
    r.resize(rows_.size());
    const Eigen::VectorXd dots = x_ * x_.row(i).transpose();
    for (std::size_t t = 0; t < r.size(); ++t) {
      const double d2 = std::max(0.0, norms_[i] + norms_[t] - 2.0 * dots[t]);
      r[t] = std::exp(-gamma_ * d2);
    }
    r[i] = 1.0;
    lru_.push_front(i);
    where_[i] = lru_.begin();
    return r;
  }

 private:
  const RowMatrix<double>& x_;
  double gamma_;
  Eigen::VectorXd norms_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::list<int>::iterator> where_;
  std::list<int> lru_;
  std::size_t capacity_ = 2;
};

}  // namespace

void SvmConfig::validate() const {
  if (!(C > 0)) throw ArgumentError("SVM C must be positive");
  if (!(gamma > 0)) throw ArgumentError("SVM gamma must be positive");
  if (!(kkt_tolerance > 0)) throw ArgumentError("SVM kkt_tolerance must be positive");
  if (max_passes < 0) throw ArgumentError("SVM max_passes must be >= 0");
}

SvmModel train(const RowMatrix<double>& x, std::span<const Label> labels, const SvmConfig& cfg,
               TrainingReport* report) {
  cfg.validate();
  const int n = static_cast<int>(x.rows());
  if (static_cast<std::size_t>(n) != labels.size()) throw ArgumentError("SVM train: label count mismatch");
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Bud; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::NonBud; });
  if (!has_pos || !has_neg) throw ArgumentError("SVM train needs examples of both classes");

  const double C = cfg.C;
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = sign_of(labels[i]);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e
  KernelCache cache(x, cfg.gamma, cfg.cache_bytes);
  const std::int64_t max_iter =
      cfg.max_passes > 0 ? cfg.max_passes : std::max<std::int64_t>(10'000'000, 100LL * n);

  auto up = [&](int t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto low = [&](int t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };
  auto dual_objective = [&]() {
    double f = 0.0;
    for (int t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  std::int64_t iter = 0;
  double violation = std::numeric_limits<double>::infinity();
  for (;;) {
    int i = -1, j = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    violation = gmax - gmin;
    if (i < 0 || j < 0 || violation <= cfg.kkt_tolerance) break;
    if (iter >= max_iter)
      throw TrainingError("SVM solver did not converge within " + std::to_string(max_iter) +
                              " iterations; residual KKT violation " + std::to_string(violation),
                          violation);
    ++iter;

    // Copies: fetching one row may evict the other.
    const std::vector<double> ki = cache.row(i);
    const std::vector<double> kj = cache.row(j);
    const double old_i = alpha[i], old_j = alpha[j];
    const double kij = ki[j];

    if (y[i] != y[j]) {
      // Q_ii + Q_jj + 2 Q_ij with Q_ij = -K_ij
      double quad = ki[i] + kj[j] - 2.0 * kij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = ki[i] + kj[j] - 2.0 * kij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (int t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
    if (report) report->objective_history.push_back(dual_objective());
  }

  // Bias from free vectors, else the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  int n_free = 0;
  for (int t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);

  SvmModel model;
  model.bias = -rho;
  model.gamma = cfg.gamma;
  model.C = C;
  std::vector<int> sv;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > kSupportThreshold) sv.push_back(t);
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
  model.dual_coefs.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t k = 0; k < sv.size(); ++k) {
    model.support_vectors.row(static_cast<Eigen::Index>(k)) = x.row(sv[k]);
    model.dual_coefs[static_cast<Eigen::Index>(k)] = alpha[sv[k]] * y[sv[k]];
  }
  if (report) {
    report->alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
    report->max_violation = violation;
    report->iterations = iter;
  }
  return model;
}

double decision_value(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.dimension())
    throw ArgumentError("decision_value: vector dimension " + std::to_string(x.size()) + " does not match model " +
                        std::to_string(model.dimension()));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i)
    sum += model.dual_coefs[i] * rbf_kernel(model.support_vectors.row(i), x.transpose(), model.gamma);
  return sum + model.bias;
}

Label predict(const SvmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return label_for_decision(decision_value(model, x));
}

void save_model(const SvmModel& model, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.f64(model.gamma);
  w.f64(model.C);
  w.f64(model.bias);
  w.i32(static_cast<int>(Label::Bud));
  w.i32(static_cast<int>(Label::NonBud));
  w.u32(static_cast<std::uint32_t>(model.size()));
  w.u32(static_cast<std::uint32_t>(model.dimension()));
  for (Eigen::Index i = 0; i < model.dual_coefs.size(); ++i) w.f64(model.dual_coefs[i]);
  for (Eigen::Index i = 0; i < model.support_vectors.size(); ++i) w.f64(model.support_vectors.data()[i]);
  write_file_atomic(path, w.buffer());
}

SvmModel load_model(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  binio::Reader r(data, "model " + path.string());
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("model version " + std::to_string(version) + " unsupported");
  SvmModel m;
  m.gamma = r.f64();
  m.C = r.f64();
  m.bias = r.f64();
  const int pos = r.i32(), neg = r.i32();
  if (pos != static_cast<int>(Label::Bud) || neg != static_cast<int>(Label::NonBud))
    throw FormatError("model class map is not bud=+1/non-bud=-1");
  const std::uint32_t count = r.u32(), dim = r.u32();
  const std::size_t expected = (static_cast<std::size_t>(count) + static_cast<std::size_t>(count) * dim) * 8;
  if (r.remaining() != expected)
    throw FormatError("model header declares " + std::to_string(count) + " vectors of dimension " +
                      std::to_string(dim) + " but payload holds " + std::to_string(r.remaining()) + " bytes");
  m.dual_coefs.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) m.dual_coefs[i] = r.f64();
  m.support_vectors.resize(count, dim);
  for (Eigen::Index i = 0; i < m.support_vectors.size(); ++i) m.support_vectors.data()[i] = r.f64();
  return m;
}

}  // namespace vinebud::svm
