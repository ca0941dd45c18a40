#include "vinebud/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <tuple>

namespace vinebud::evaluation {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RowMatrix<double> select_rows(const RowMatrix<double>& x, std::span<const std::size_t> rows) {
  RowMatrix<double> out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<Label> predict_rows(const svm::SvmModel& model, const RowMatrix<double>& x) {
  std::vector<Label> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = svm::predict(model, x.row(i).transpose());
  return out;
}

using Integral = Eigen::Array<long long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Integral integral_of(const Mask& m) {
  Integral s = Integral::Zero(m.rows() + 1, m.cols() + 1);
  for (Eigen::Index y = 0; y < m.rows(); ++y)
    for (Eigen::Index x = 0; x < m.cols(); ++x)
      s(y + 1, x + 1) = (m(y, x) != 0 ? 1 : 0) + s(y, x + 1) + s(y + 1, x) - s(y, x);
  return s;
}

// Bud pixels of `bud` inside `rect`, via the mask's integral image.
long long bud_pixels_in(const corpus::Patch& bud, const Integral& sat, const Rect& rect) {
  const int x0 = std::max(rect.x, bud.rect.x) - bud.rect.x;
  const int y0 = std::max(rect.y, bud.rect.y) - bud.rect.y;
  const int x1 = std::min(rect.x + rect.w, bud.rect.x + bud.rect.w) - bud.rect.x;
  const int y1 = std::min(rect.y + rect.h, bud.rect.y + bud.rect.h) - bud.rect.y;
  if (x1 <= x0 || y1 <= y0) return 0;
  return sat(y1, x1) - sat(y0, x1) - sat(y1, x0) + sat(y0, x0);
}

RealisticPatch make_measurement(const corpus::Patch& bud, const Rect& rect, long long inside, long long total) {
  RealisticPatch r;
  r.source_id = bud.id;
  r.rect = rect;
  r.bud_pixels_in_rect = inside;
  r.bud_pixels_total = total;
  r.kept = 100.0 * static_cast<double>(inside) / static_cast<double>(total);
  r.relative = 100.0 * static_cast<double>(inside) / static_cast<double>(rect.area());
  return r;
}

// Sample mean and SD, accumulated relative to the first value so identical
// runs give a bit-exact mean and a zero SD.
std::pair<double, double> mean_sd(std::span<const double> v) {
  const double n = static_cast<double>(v.size()), x0 = v.front();
  double shift = 0.0;
  for (double x : v) shift += x - x0;
  const double mean = x0 + shift / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size())
    throw ArgumentError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                        std::to_string(labels.size()) + " labels");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred_bud = predictions[i] == Label::Bud;
    const bool is_bud = labels[i] == Label::Bud;
    if (pred_bud && is_bud) ++c.tp;
    else if (!pred_bud && !is_bud) ++c.tn;
    else if (pred_bud) ++c.fp;
    else ++c.fn;
  }
  return c;
}

double f_measure(double precision, double recall) {
  return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Metrics metrics(const ConfusionCounts& c) {
  if (c.tp < 0 || c.tn < 0 || c.fp < 0 || c.fn < 0) throw ArgumentError("confusion counts must be non-negative");
  if (c.total() == 0) throw ArgumentError("metrics of an empty confusion table");
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else m.precision_degenerate = true;
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else m.recall_degenerate = true;
  m.f_measure = f_measure(m.precision, m.recall);
  return m;
}

TuningGrid TuningGrid::defaults() {
  TuningGrid g;
  for (int e = -14; e <= -7; ++e) g.gammas.push_back(std::ldexp(1.0, e));
  for (int e = 5; e <= 14; ++e) g.Cs.push_back(std::ldexp(1.0, e));
  return g;
}

std::vector<int> stratified_folds(std::span<const Label> labels, int folds, std::uint64_t seed) {
  std::vector<std::size_t> bud, non_bud;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::Bud ? bud : non_bud).push_back(i);
  if (folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");
  if (bud.size() < static_cast<std::size_t>(folds) || non_bud.size() < static_cast<std::size_t>(folds))
    throw ArgumentError(std::to_string(folds) + " folds need at least that many examples per class (have " +
                        std::to_string(bud.size()) + " bud, " + std::to_string(non_bud.size()) + " non-bud)");
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  for (auto* cls : {&bud, &non_bud}) {
    auto& v = *cls;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      std::uniform_int_distribution<std::size_t> d(i, v.size() - 1);
      std::swap(v[i], v[d(rng)]);
    }
    for (std::size_t i = 0; i < v.size(); ++i) fold[v[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  }
  return fold;
}

TuningResult cross_validate_grid(const RowMatrix<double>& x, std::span<const Label> labels, const TuningGrid& grid,
                                 const CvOptions& opt) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) throw ArgumentError("cross_validate_grid: row/label mismatch");
  if (grid.gammas.empty() || grid.Cs.empty()) throw ArgumentError("cross_validate_grid: empty grid");
  const int k = grid.folds;
  const std::vector<int> fold = stratified_folds(labels, k, opt.seed);

  struct FoldData {
    RowMatrix<double> train_x, valid_x;
    std::vector<Label> train_y, valid_y;
  };
  std::vector<FoldData> folds(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, valid;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? valid : train).push_back(i);
    std::vector<Label> train_labels;
    for (std::size_t i : train) train_labels.push_back(labels[i]);
    if (opt.balance_rate > 0) {
      const auto picked = corpus::balance(train_labels, {opt.balance_rate, opt.seed + static_cast<std::uint64_t>(f)});
      std::vector<std::size_t> rows;
      for (std::size_t p : picked) rows.push_back(train[p]);
      train = std::move(rows);
    }
    auto& fd = folds[static_cast<std::size_t>(f)];
    fd.train_x = select_rows(x, train);
    fd.valid_x = select_rows(x, valid);
    for (std::size_t i : train) fd.train_y.push_back(labels[i]);
    for (std::size_t i : valid) fd.valid_y.push_back(labels[i]);
  }

  TuningResult result;
  result.table.resize(grid.size());
  for (std::size_t g = 0; g < grid.gammas.size(); ++g)
    for (std::size_t c = 0; c < grid.Cs.size(); ++c) {
      auto& p = result.table[g * grid.Cs.size() + c];
      p.gamma = grid.gammas[g];
      p.C = grid.Cs[c];
      p.fold_errors.assign(static_cast<std::size_t>(k), 0.0);
    }
  features::parallel_for(grid.size() * static_cast<std::size_t>(k), opt.workers, [&](std::size_t task) {
    auto& p = result.table[task / static_cast<std::size_t>(k)];
    const auto& fd = folds[task % static_cast<std::size_t>(k)];
    svm::SvmConfig cfg = opt.svm;
    cfg.C = p.C;
    cfg.gamma = p.gamma;
    const svm::SvmModel model = svm::train(fd.train_x, fd.train_y, cfg);
    const auto pred = predict_rows(model, fd.valid_x);
    p.fold_errors[task % static_cast<std::size_t>(k)] = 1.0 - metrics(confusion(pred, fd.valid_y)).f_measure;
  });

  const GridPoint* best = nullptr;
  for (auto& p : result.table) {
    p.mean_error = std::accumulate(p.fold_errors.begin(), p.fold_errors.end(), 0.0) / k;
    if (!best || p.mean_error < best->mean_error ||
        (p.mean_error == best->mean_error && (p.C < best->C || (p.C == best->C && p.gamma < best->gamma))))
      best = &p;
  }
  result.best_gamma = best->gamma;
  result.best_C = best->C;
  result.best_error = best->mean_error;
  return result;
}

void write_tuning_table(std::ostream& os, const TuningResult& r) {
  os << "# vinebud tuning v1\n";
  os << "# best\tgamma=" << num(std::log2(r.best_gamma)) << "(log2)\tC=" << num(std::log2(r.best_C))
     << "(log2)\terror=" << num(r.best_error) << '\n';
  os << "log2_gamma\tlog2_C\tmean_error";
  const std::size_t k = r.table.empty() ? 0 : r.table.front().fold_errors.size();
  for (std::size_t f = 0; f < k; ++f) os << "\tfold" << f;
  os << '\n';
  for (const auto& p : r.table) {
    os << num(std::log2(p.gamma)) << '\t' << num(std::log2(p.C)) << '\t' << num(p.mean_error);
    for (double e : p.fold_errors) os << '\t' << num(e);
    os << '\n';
  }
}

MetricSummary summarize(std::span<const Metrics> runs) {
  if (runs.empty()) throw ArgumentError("summarize: no runs");
  MetricSummary s;
  std::vector<double> v(runs.size());
  auto stat = [&](double Metrics::*field, double& mean, double& sd) {
    std::transform(runs.begin(), runs.end(), v.begin(), [&](const Metrics& m) { return m.*field; });
    std::tie(mean, sd) = mean_sd(v);
  };
  stat(&Metrics::accuracy, s.mean.accuracy, s.sd.accuracy);
  stat(&Metrics::precision, s.mean.precision, s.sd.precision);
  stat(&Metrics::recall, s.mean.recall, s.sd.recall);
  stat(&Metrics::f_measure, s.mean.f_measure, s.sd.f_measure);
  return s;
}

ExperimentData prepare_experiment(const corpus::Corpus& corpus, features::ImageStore& store, const corpus::Split& split,
                                  std::span<const std::size_t> usable, const sift::SiftConfig& sift_cfg, int workers) {
  ExperimentData d;
  std::vector<std::size_t> train, test;
  for (std::size_t i : split.train) train.push_back(usable[i]);
  for (std::size_t i : split.test) test.push_back(usable[i]);
  d.train = features::extract_patches(corpus, store, train, sift_cfg, workers);
  d.test = features::extract_patches(corpus, store, test, sift_cfg, workers);
  d.train_labels = corpus.labels(train);
  d.test_labels = corpus.labels(test);
  for (std::size_t i : test) d.test_tags.push_back(corpus.patches[i].subcategory);
  return d;
}

TrainedClassifier train_classifier(const ExperimentData& data, const TrainConfig& cfg) {
  if (cfg.vocab_size < 1) throw ArgumentError("vocabulary size must be >= 1");
  std::vector<std::size_t> all(data.train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const RowMatrix<double> pool = features::pool_descriptors(data.train, all, cfg.vocab_sample_cap, cfg.seed);
  if (pool.rows() < cfg.vocab_size)
    throw ArgumentError("only " + std::to_string(pool.rows()) + " training descriptors for a vocabulary of " +
                        std::to_string(cfg.vocab_size));
  KMeansConfig km;
  km.k = cfg.vocab_size;
  km.seed = cfg.seed;
  TrainedClassifier out;
  out.vocab = bof::build_vocabulary(pool, km).vocabulary;
  const RowMatrix<double> hist = features::encode_all(out.vocab, data.train, cfg.workers);
  out.balanced = corpus::balance(data.train_labels, {cfg.balance_rate, cfg.seed});
  std::vector<Label> y;
  for (std::size_t i : out.balanced) y.push_back(data.train_labels[i]);
  svm::SvmConfig sc;
  sc.C = cfg.C;
  sc.gamma = cfg.gamma;
  out.model = svm::train(select_rows(hist, out.balanced), y, sc);
  return out;
}

TestOutcome evaluate_classifier(const TrainedClassifier& clf, const ExperimentData& data, int workers) {
  TestOutcome t;
  t.predictions = predict_rows(clf.model, features::encode_all(clf.vocab, data.test, workers));
  t.counts = confusion(t.predictions, data.test_labels);
  t.metrics = metrics(t.counts);
  return t;
}

RepeatedResult repeated_training(const ExperimentData& data, const RepeatedConfig& cfg) {
  if (cfg.repetitions < 2) throw ArgumentError("repeated training needs at least 2 repetitions");
  RepeatedResult r;
  std::vector<Metrics> ms;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    TrainConfig tc = cfg.train;
    if (cfg.redraw) tc.seed = cfg.train.seed + static_cast<std::uint64_t>(rep);
    r.classifiers.push_back(train_classifier(data, tc));
    r.runs.push_back(evaluate_classifier(r.classifiers.back(), data, tc.workers));
    ms.push_back(r.runs.back().metrics);
  }
  r.summary = summarize(ms);
  return r;
}

void write_metrics_table(std::ostream& os, const MetricSummary& s, std::size_t runs) {
  os << "# vinebud metrics v1\truns=" << runs << '\n';
  os << "metric\tmean\tsd\n";
  os << "accuracy\t" << num(s.mean.accuracy) << '\t' << num(s.sd.accuracy) << '\n';
  os << "precision\t" << num(s.mean.precision) << '\t' << num(s.sd.precision) << '\n';
  os << "recall\t" << num(s.mean.recall) << '\t' << num(s.sd.recall) << '\n';
  os << "f_measure\t" << num(s.mean.f_measure) << '\t' << num(s.sd.f_measure) << '\n';
}

std::map<corpus::Subcategory, double> subcategory_recall(std::span<const Label> predictions,
                                                         std::span<const std::optional<corpus::Subcategory>> tags) {
  if (predictions.size() != tags.size()) throw ArgumentError("subcategory_recall: prediction/tag count mismatch");
  std::map<corpus::Subcategory, std::pair<long long, long long>> tally;  // tn, total
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!tags[i]) throw ArgumentError("subcategory_recall: non-bud example " + std::to_string(i) + " has no tag");
    auto& t = tally[*tags[i]];
    if (predictions[i] == Label::NonBud) ++t.first;
    ++t.second;
  }
  std::map<corpus::Subcategory, double> out;
  for (const auto& [tag, t] : tally) out[tag] = static_cast<double>(t.first) / static_cast<double>(t.second);
  return out;
}

std::map<corpus::Subcategory, double> subcategory_recall(const TrainedClassifier& clf,
                                                         const std::vector<features::PatchDescriptors>& non_bud,
                                                         std::span<const std::optional<corpus::Subcategory>> tags) {
  return subcategory_recall(predict_rows(clf.model, features::encode_all(clf.vocab, non_bud)), tags);
}

void write_subcategory_table(std::ostream& os, const std::map<corpus::Subcategory, std::vector<double>>& per_run) {
  os << "# vinebud subcategory-recall v1\n";
  os << "subcategory\tmean\tsd\truns\n";
  for (const auto& [tag, v] : per_run) {
    const auto [mean, sd] = mean_sd(v);
    os << corpus::to_string(tag) << '\t' << num(mean) << '\t' << num(sd) << '\t' << v.size() << '\n';
  }
}

PerturbationCell PerturbationCell::grid(int kept_index, int relative_index) {
  if (kept_index < 0 || kept_index > 9 || relative_index < 0 || relative_index > 9)
    throw ArgumentError("perturbation cell index out of range");
  return PerturbationCell{10.0 * kept_index, 10.0 * kept_index + 10.0, 10.0 * relative_index,
                          10.0 * relative_index + 10.0};
}

RealisticPatch measure_window(const corpus::Patch& bud, const Rect& rect) {
  if (!bud.mask) throw ArgumentError("patch " + bud.id + " has no mask");
  if (rect.w < 1 || rect.h < 1) throw ArgumentError("empty window " + to_string(rect));
  const long long total = corpus::mask_pixel_counts(bud).first;
  if (total == 0) throw ArgumentError("patch " + bud.id + " mask has no bud pixels");
  long long inside = 0;
  for (int y = 0; y < bud.rect.h; ++y)
    for (int x = 0; x < bud.rect.w; ++x)
      if ((*bud.mask)(y, x) != 0 && rect.contains(bud.rect.x + x, bud.rect.y + y)) ++inside;
  return make_measurement(bud, rect, inside, total);
}

std::optional<RealisticPatch> generate_realistic_patch(const corpus::Patch& bud, int image_w, int image_h,
                                                       const PerturbationCell& target, std::mt19937_64& rng,
                                                       int max_attempts) {
  if (!bud.mask) throw ArgumentError("patch " + bud.id + " has no mask");
  if (!bud.rect.inside(image_w, image_h)) throw ArgumentError("patch " + bud.id + " lies outside its image");
  if (std::min(image_w, image_h) < kMinRealisticSide) throw ArgumentError("image of patch " + bud.id + " is too small");
  const Integral sat = integral_of(*bud.mask);
  const long long total = sat(sat.rows() - 1, sat.cols() - 1);
  if (total == 0) throw ArgumentError("patch " + bud.id + " mask has no bud pixels");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double aspect0 = static_cast<double>(bud.rect.w) / bud.rect.h;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    // Aim at a random point of the target cell, then pick a rect of the implied area.
    const double kept = (target.kept_lo + (target.kept_hi - target.kept_lo) * (1.0 - unit(rng))) / 100.0;
    const double rel = (target.relative_lo + (target.relative_hi - target.relative_lo) * (1.0 - unit(rng))) / 100.0;
    const double area = kept * static_cast<double>(total) / rel;
    const double aspect = aspect0 * std::exp(unit(rng) - 0.5);
    const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect))), kMinRealisticSide, image_w);
    const int h = std::clamp(static_cast<int>(std::lround(area / w)), kMinRealisticSide, image_h);
    // Offsets for which the rect overlaps the bud rect, within the image.
    const int x_lo = std::max(0, bud.rect.x - w + 1), x_hi = std::min(image_w - w, bud.rect.x + bud.rect.w - 1);
    const int y_lo = std::max(0, bud.rect.y - h + 1), y_hi = std::min(image_h - h, bud.rect.y + bud.rect.h - 1);
    if (x_lo > x_hi || y_lo > y_hi) continue;
    const Rect rect{std::uniform_int_distribution<int>(x_lo, x_hi)(rng),
                    std::uniform_int_distribution<int>(y_lo, y_hi)(rng), w, h};
    const long long inside = bud_pixels_in(bud, sat, rect);
    if (inside == 0) continue;
    RealisticPatch r = make_measurement(bud, rect, inside, total);
    if (target.contains(r.kept, r.relative)) return r;
  }
  return std::nullopt;
}

std::size_t Heatmap::populated() const {
  std::size_t n = 0;
  for (const auto& row : cells)
    for (const auto& c : row) n += c.discarded ? 0 : 1;
  return n;
}

Heatmap heatmap_experiment(std::span<const TrainedClassifier> models, std::span<const BudSource> buds,
                           const HeatmapConfig& cfg) {
  if (models.empty()) throw ArgumentError("heatmap needs at least one trained model");
  if (buds.empty()) throw ArgumentError("heatmap needs at least one bud patch");
  if (cfg.per_cell < 1) throw ArgumentError("heatmap per_cell must be >= 1");
  const std::size_t nb = buds.size();
  const std::size_t quota = static_cast<std::size_t>(cfg.per_cell);

  // Generation per (cell, bud), each with its own seeded stream.
  std::vector<std::vector<RealisticPatch>> generated(100 * nb);
  features::parallel_for(100 * nb, cfg.workers, [&](std::size_t task) {
    const std::size_t cell = task / nb, b = task % nb;
    const BudSource& src = buds[b];
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    const auto target = PerturbationCell::grid(static_cast<int>(cell / 10), static_cast<int>(cell % 10));
    for (std::size_t k = 0; k < quota; ++k) {
      auto r = generate_realistic_patch(*src.patch, static_cast<int>(src.image->cols()),
                                        static_cast<int>(src.image->rows()), target, rng, cfg.max_attempts);
      if (!r) break;
      generated[task].push_back(std::move(*r));
    }
  });

  Heatmap hm;
  hm.required_per_cell = quota * nb;
  std::vector<std::size_t> work;  // tasks of populated cells
  for (std::size_t cell = 0; cell < 100; ++cell) {
    auto& c = hm.cells[cell / 10][cell % 10];
    for (std::size_t b = 0; b < nb; ++b) c.count += generated[cell * nb + b].size();
    c.discarded = c.count < hm.required_per_cell;
    if (!c.discarded)
      for (std::size_t b = 0; b < nb; ++b) work.push_back(cell * nb + b);
  }

  // hits[task][model]: realistic patches classified as bud.
  std::vector<std::vector<std::size_t>> hits(100 * nb, std::vector<std::size_t>(models.size(), 0));
  features::parallel_for(work.size(), cfg.workers, [&](std::size_t w) {
    const std::size_t task = work[w];
    const BudSource& src = buds[task % nb];
    for (const auto& rp : generated[task]) {
      const auto desc = features::extract_patch(*src.image, rp.rect, cfg.sift);
      for (std::size_t m = 0; m < models.size(); ++m)
        if (features::classify_descriptors(desc, models[m].vocab, models[m].model).label == Label::Bud) ++hits[task][m];
    }
  });

  for (std::size_t cell = 0; cell < 100; ++cell) {
    auto& c = hm.cells[cell / 10][cell % 10];
    if (c.discarded) continue;
    double sum = 0.0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      std::size_t tp = 0;
      for (std::size_t b = 0; b < nb; ++b) tp += hits[cell * nb + b][m];
      sum += static_cast<double>(tp) / static_cast<double>(c.count);
    }
    c.mean_recall = sum / static_cast<double>(models.size());
  }
  return hm;
}

void write_heatmap_table(std::ostream& os, const Heatmap& hm) {
  os << "# vinebud heatmap v1\trequired_per_cell=" << hm.required_per_cell << '\n';
  os << "kept_lo\tkept_hi\trelative_lo\trelative_hi\tcount\tdiscarded\tmean_recall\n";
  for (int k = 0; k < 10; ++k)
    for (int r = 0; r < 10; ++r) {
      const auto& c = hm.cells[k][r];
      os << 10 * k << '\t' << 10 * k + 10 << '\t' << 10 * r << '\t' << 10 * r + 10 << '\t' << c.count << '\t'
         << (c.discarded ? 1 : 0) << '\t' << (c.mean_recall ? num(*c.mean_recall) : std::string("-")) << '\n';
    }
}

Plane<std::uint8_t> render_heatmap(const Heatmap& hm, int cell_pixels) {
  if (cell_pixels < 1) throw ArgumentError("render_heatmap: cell size must be >= 1");
  Plane<std::uint8_t> img = Plane<std::uint8_t>::Zero(10 * cell_pixels, 10 * cell_pixels);
  for (int k = 0; k < 10; ++k)
    for (int r = 0; r < 10; ++r) {
      const auto& c = hm.cells[k][r];
      if (c.discarded || !c.mean_recall) continue;
      const auto v = static_cast<std::uint8_t>(40 + std::lround(215.0 * std::clamp(*c.mean_recall, 0.0, 1.0)));
      img.block((9 - k) * cell_pixels, r * cell_pixels, cell_pixels, cell_pixels).setConstant(v);
    }
  return img;
}

}  // namespace vinebud::evaluation
