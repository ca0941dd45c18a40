#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vinebud/bof.hpp"
#include "vinebud/corpus.hpp"
#include "vinebud/features.hpp"
#include "vinebud/svm.hpp"

namespace vinebud::evaluation {

using svm::Label;

struct ConfusionCounts {
  long long tp = 0;
  long long tn = 0;
  long long fp = 0;
  long long fn = 0;

  long long total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Bud is the positive class.
ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> labels);

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  // Set when the corresponding denominator was zero; the value is then 0.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
};

Metrics metrics(const ConfusionCounts& c);
double f_measure(double precision, double recall);

struct TuningGrid {
  std::vector<double> gammas;
  std::vector<double> Cs;
  int folds = 5;

  // gamma in 2^-14..2^-7, C in 2^5..2^14.
  static TuningGrid defaults();
  std::size_t size() const { return gammas.size() * Cs.size(); }
};

struct GridPoint {
  double gamma = 0.0;
  double C = 0.0;
  double mean_error = 0.0;  // mean over folds of 1 - f(bud)
  std::vector<double> fold_errors;
};

struct TuningResult {
  double best_gamma = 0.0;
  double best_C = 0.0;
  double best_error = 0.0;
  std::vector<GridPoint> table;  // gamma-major, both axes ascending as given
};

struct CvOptions {
  // Balance rate applied to each training fold; 0 leaves folds as drawn.
  int balance_rate = 1;
  std::uint64_t seed = 0;
  svm::SvmConfig svm;  // C and gamma are overridden per grid point
  int workers = 1;
};

// Stratified k-fold assignment: fold id per example.
std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed);

// Grid search on encoded histograms (one row per example).
TuningResult cross_validate_grid(const RowMatrix<double>& x, std::span<const Label> labels, const TuningGrid& grid,
                                 const CvOptions& opt);

void write_tuning_table(std::ostream& os, const TuningResult& result);

struct MetricSummary {
  Metrics mean;
  Metrics sd;  // sample standard deviation; degenerate flags unused
};

MetricSummary summarize(std::span<const Metrics> runs);

// Pre-extracted descriptors for a fixed train/test split.
struct ExperimentData {
  std::vector<features::PatchDescriptors> train;
  std::vector<Label> train_labels;
  std::vector<features::PatchDescriptors> test;
  std::vector<Label> test_labels;
  std::vector<std::optional<corpus::Subcategory>> test_tags;
};

ExperimentData prepare_experiment(const corpus::Corpus& corpus, features::ImageStore& store,
                                  const corpus::Split& split, std::span<const std::size_t> usable,
                                  const sift::SiftConfig& sift_cfg, int workers);

struct TrainConfig {
  int vocab_size = 25;
  int balance_rate = 1;
  double C = 1.0;
  double gamma = 1.0;
  // Cap on descriptors fed to k-means; 0 = all.
  std::size_t vocab_sample_cap = 20000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct TrainedClassifier {
  bof::Vocabulary vocab;
  svm::SvmModel model;
  std::vector<std::size_t> balanced;  // indices into the training set
};

// Vocabulary from the training descriptors, then SVM on the balanced set.
TrainedClassifier train_classifier(const ExperimentData& data, const TrainConfig& cfg);

struct TestOutcome {
  ConfusionCounts counts;
  Metrics metrics;
  std::vector<Label> predictions;
};

TestOutcome evaluate_classifier(const TrainedClassifier& clf, const ExperimentData& data, int workers = 1);

struct RepeatedConfig {
  TrainConfig train;
  int repetitions = 10;
  // Repetition r uses seed train.seed + r when true, train.seed otherwise.
  bool redraw = true;
};

struct RepeatedResult {
  std::vector<TestOutcome> runs;
  std::vector<TrainedClassifier> classifiers;
  MetricSummary summary;
};

RepeatedResult repeated_training(const ExperimentData& data, const RepeatedConfig& cfg);

// Rows: metric, mean, sd.
void write_metrics_table(std::ostream& os, const MetricSummary& summary, std::size_t runs);

// tn / (tn + fp) per tag, over non-bud examples.
std::map<corpus::Subcategory, double> subcategory_recall(std::span<const Label> predictions,
                                                         std::span<const std::optional<corpus::Subcategory>> tags);
std::map<corpus::Subcategory, double> subcategory_recall(const TrainedClassifier& clf,
                                                         const std::vector<features::PatchDescriptors>& non_bud,
                                                         std::span<const std::optional<corpus::Subcategory>> tags);

void write_subcategory_table(std::ostream& os, const std::map<corpus::Subcategory, std::vector<double>>& per_run);

struct PerturbationCell {
  double kept_lo = 0, kept_hi = 100;
  double relative_lo = 0, relative_hi = 100;

  // Regular 10x10 grid: kept band i, relative band j, each (10k, 10k+10].
  static PerturbationCell grid(int kept_index, int relative_index);
  bool contains(double kept, double relative) const {
    return kept > kept_lo && kept <= kept_hi && relative > relative_lo && relative <= relative_hi;
  }
};

struct RealisticPatch {
  std::string source_id;
  Rect rect;
  long long bud_pixels_in_rect = 0;
  long long bud_pixels_total = 0;
  double kept = 0.0;      // percent of the source bud's pixels inside rect
  double relative = 0.0;  // percent of rect pixels that are bud
};

// Exact (kept, relative) of `rect` for the masked bud patch.
RealisticPatch measure_window(const corpus::Patch& bud, const Rect& rect);

// Smallest realistic patch side; anything smaller cannot go through SIFT.
inline constexpr int kMinRealisticSide = 16;

// Random rescale/offset of the bud rect until the measurement lands in
// `target`; nullopt after max_attempts. The result stays inside image_w x image_h
// and has both sides >= kMinRealisticSide.
std::optional<RealisticPatch> generate_realistic_patch(const corpus::Patch& bud, int image_w, int image_h,
                                                       const PerturbationCell& target, std::mt19937_64& rng,
                                                       int max_attempts = 200);

struct BudSource {
  const corpus::Patch* patch = nullptr;
  const GrayImage* image = nullptr;
};

struct HeatmapCell {
  std::size_t count = 0;
  bool discarded = true;
  std::optional<double> mean_recall;
};

struct Heatmap {
  // cells[kept][relative]
  std::array<std::array<HeatmapCell, 10>, 10> cells;
  std::size_t required_per_cell = 0;
  std::size_t populated() const;
};

struct HeatmapConfig {
  int per_cell = 4;
  int max_attempts = 200;
  std::uint64_t seed = 0;
  int workers = 1;
  sift::SiftConfig sift;
};

Heatmap heatmap_experiment(std::span<const TrainedClassifier> models, std::span<const BudSource> buds,
                           const HeatmapConfig& cfg);

// Rows: kept band, relative band, count, discarded, mean recall.
void write_heatmap_table(std::ostream& os, const Heatmap& heatmap);
// Grayscale image, one block per cell, kept increasing upwards; discarded cells black.
Plane<std::uint8_t> render_heatmap(const Heatmap& heatmap, int cell_pixels = 24);

}  // namespace vinebud::evaluation
