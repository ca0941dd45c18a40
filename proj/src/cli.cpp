#include "vinebud/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "vinebud/annotation.hpp"
#include "vinebud/bof.hpp"
#include "vinebud/corpus.hpp"
#include "vinebud/evaluation.hpp"
#include "vinebud/features.hpp"
#include "vinebud/image_io.hpp"
#include "vinebud/scanwin.hpp"
#include "vinebud/svm.hpp"
#include "vinebud/synthetic.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

namespace vinebud::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string corpus;
  std::string out = "vinebud-out";
  int vocab_size = 25;
  int balance_rate = 1;
  std::uint64_t seed = 1;
  std::string grid_gamma = "-14:-7";
  std::string grid_c = "5:14";
  int folds = 5;
  int repetitions = 10;
  std::string window = "128x128";
  std::string stride = "64x64";
  std::string scales = "1";
  int workers = 1;
  std::string listen = "127.0.0.1:8080";
  int test_bud = 133;
  int test_non_bud = 133;
  double C = 1024.0;
  double gamma = 0.0078125;
  std::size_t vocab_cap = 20000;
  std::string image;
  std::string vocab_path;
  std::string model_path;
  int per_cell = 4;
  int max_attempts = 200;
  int buds = 80;
  int non_buds = 80;
};

json options_json(const std::string& sub, const Options& o) {
  return json{{"tool", "vinebud"},
              {"format_version", 1},
              {"subcommand", sub},
              {"corpus", o.corpus},
              {"out", o.out},
              {"vocab_size", o.vocab_size},
              {"balance_rate", o.balance_rate},
              {"seed", o.seed},
              {"grid_gamma", o.grid_gamma},
              {"grid_c", o.grid_c},
              {"folds", o.folds},
              {"repetitions", o.repetitions},
              {"window", o.window},
              {"stride", o.stride},
              {"scales", o.scales},
              {"workers", o.workers},
              {"listen", o.listen},
              {"test_bud", o.test_bud},
              {"test_non_bud", o.test_non_bud},
              {"C", o.C},
              {"gamma", o.gamma},
              {"vocab_cap", o.vocab_cap},
              {"image", o.image},
              {"vocab", o.vocab_path},
              {"model", o.model_path},
              {"per_cell", o.per_cell},
              {"max_attempts", o.max_attempts},
              {"buds", o.buds},
              {"non_buds", o.non_buds}};
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// "a:b" inclusive integer exponent range of base 2.
std::vector<double> pow2_range(const std::string& spec, const char* flag) {
  const auto colon = spec.find(':');
  try {
    const int lo = std::stoi(spec.substr(0, colon));
    const int hi = colon == std::string::npos ? lo : std::stoi(spec.substr(colon + 1));
    if (hi < lo) throw ArgumentError(std::string(flag) + " range is empty");
    std::vector<double> v;
    for (int e = lo; e <= hi; ++e) v.push_back(std::ldexp(1.0, e));
    return v;
  } catch (const std::logic_error&) {
    throw ArgumentError(std::string(flag) + " expects lo:hi exponents, got '" + spec + "'");
  }
}

// "WxH" or "N".
std::pair<int, int> dims(const std::string& spec, const char* flag) {
  const auto x = spec.find('x');
  try {
    const int a = std::stoi(spec.substr(0, x));
    const int b = x == std::string::npos ? a : std::stoi(spec.substr(x + 1));
    return {a, b};
  } catch (const std::logic_error&) {
    throw ArgumentError(std::string(flag) + " expects WxH, got '" + spec + "'");
  }
}

fs::path manifest_path(const Options& o) {
  if (o.corpus.empty()) throw ArgumentError(std::string("no corpus given (use --corpus or set ") + kCorpusEnv + ")");
  const fs::path p(o.corpus);
  return fs::is_directory(p) ? p / "manifest.jsonl" : p;
}

class Pipeline {
 public:
  Pipeline(const Options& o, std::ostream& log) : o_(o), log_(log) {
    corpus_ = corpus::load_manifest(manifest_path(o));
    const auto st = corpus_.stats();
    log_ << "corpus: " << st.bud << " bud, " << st.non_bud << " non-bud patches, " << st.flagged << " flagged\n";
    if (st.bud_size_out_of_range > 0)
      log_ << "warning: " << st.bud_size_out_of_range << " bud patches outside the " << corpus::kMinBudSide << ".."
           << corpus::kMaxBudSide << " px side range\n";
    usable_ = corpus_.usable();
    const auto labels = corpus_.labels(usable_);
    split_ = corpus::split(labels, o.seed, static_cast<std::size_t>(o.test_bud), static_cast<std::size_t>(o.test_non_bud));
  }

  // Descriptors of all usable patches, cached under the output directory.
  const std::vector<features::PatchDescriptors>& descriptors() {
    if (loaded_) return desc_;
    const fs::path cache = fs::path(o_.out) / "descriptors.vbdesc";
    std::vector<std::string> ids;
    for (std::size_t i : usable_) ids.push_back(corpus_.patches[i].id);
    if (fs::exists(cache)) {
      std::vector<std::string> cached_ids;
      auto d = features::load_descriptors(cache, &cached_ids);
      if (cached_ids == ids) {
        desc_ = std::move(d);
        loaded_ = true;
        log_ << "descriptors: reused " << cache.string() << '\n';
        return desc_;
      }
    }
    features::ImageStore store(corpus_);
    desc_ = features::extract_patches(corpus_, store, usable_, {}, o_.workers);
    features::save_descriptors(ids, desc_, cache);
    loaded_ = true;
    std::size_t total = 0;
    for (const auto& d : desc_) total += d.size();
    log_ << "descriptors: extracted " << total << " from " << desc_.size() << " patches\n";
    return desc_;
  }

  evaluation::ExperimentData data() {
    const auto& d = descriptors();
    evaluation::ExperimentData e;
    for (std::size_t i : split_.train) {
      e.train.push_back(d[i]);
      e.train_labels.push_back(corpus_.patches[usable_[i]].label);
    }
    for (std::size_t i : split_.test) {
      e.test.push_back(d[i]);
      e.test_labels.push_back(corpus_.patches[usable_[i]].label);
      e.test_tags.push_back(corpus_.patches[usable_[i]].subcategory);
    }
    return e;
  }

  bof::Vocabulary vocabulary() {
    const fs::path path = o_.vocab_path.empty() ? fs::path(o_.out) / "vocab.vbvoc" : fs::path(o_.vocab_path);
    if (fs::exists(path)) {
      auto v = bof::load_vocabulary(path);
      if (v.size() == o_.vocab_size) return v;
      if (!o_.vocab_path.empty())
        throw ArgumentError("vocabulary " + path.string() + " has " + std::to_string(v.size()) + " words, not " +
                            std::to_string(o_.vocab_size));
    }
    return build_vocabulary();
  }

  bof::Vocabulary build_vocabulary() {
    const auto e = data();
    std::vector<std::size_t> all(e.train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto pool = features::pool_descriptors(e.train, all, o_.vocab_cap, o_.seed);
    KMeansConfig km;
    km.k = o_.vocab_size;
    km.seed = o_.seed;
    const auto built = bof::build_vocabulary(pool, km);
    const fs::path path = fs::path(o_.out) / "vocab.vbvoc";
    bof::save_vocabulary(built.vocabulary, path);
    std::ostringstream t;
    t << "# vinebud vocabulary v1\nwords\tdescriptors\titerations\tobjective\n"
      << built.vocabulary.size() << '\t' << pool.rows() << '\t' << built.iterations << '\t' << built.objective << '\n';
    write_text(fs::path(o_.out) / "vocab.tsv", t.str());
    log_ << "vocabulary: " << built.vocabulary.size() << " words from " << pool.rows() << " descriptors -> "
         << path.string() << '\n';
    return built.vocabulary;
  }

  const corpus::Corpus& corpus() const { return corpus_; }
  const corpus::Split& split() const { return split_; }
  const std::vector<std::size_t>& usable() const { return usable_; }

 private:
  const Options& o_;
  std::ostream& log_;
  corpus::Corpus corpus_;
  std::vector<std::size_t> usable_;
  corpus::Split split_;
  std::vector<features::PatchDescriptors> desc_;
  bool loaded_ = false;
};

RowMatrix<double> rows_of(const RowMatrix<double>& x, std::span<const std::size_t> idx) {
  RowMatrix<double> out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

evaluation::RepeatedConfig repeated_config(const Options& o) {
  evaluation::RepeatedConfig rc;
  rc.train.vocab_size = o.vocab_size;
  rc.train.balance_rate = o.balance_rate;
  rc.train.C = o.C;
  rc.train.gamma = o.gamma;
  rc.train.vocab_sample_cap = o.vocab_cap;
  rc.train.seed = o.seed;
  rc.train.workers = o.workers;
  rc.repetitions = o.repetitions;
  return rc;
}

void write_runs(const fs::path& path, const std::vector<evaluation::TestOutcome>& runs) {
  std::ostringstream t;
  t << "# vinebud runs v1\nrun\ttp\ttn\tfp\tfn\taccuracy\tprecision\trecall\tf_measure\n";
  char buf[160];
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& c = runs[r].counts;
    const auto& m = runs[r].metrics;
    std::snprintf(buf, sizeof buf, "%zu\t%lld\t%lld\t%lld\t%lld\t%.6f\t%.6f\t%.6f\t%.6f\n", r, c.tp, c.tn, c.fp, c.fn,
                  m.accuracy, m.precision, m.recall, m.f_measure);
    t << buf;
  }
  write_text(path, t.str());
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.corpus.empty()) throw ArgumentError("synth needs --corpus (target directory)");
  synthetic::DeskCorpusConfig cfg;
  cfg.buds = o.buds;
  cfg.non_buds = o.non_buds;
  cfg.seed = o.seed;
  const auto c = synthetic::generate_desk_corpus(o.corpus, cfg);
  out << "synthetic corpus: " << c.patches.size() << " patches in " << o.corpus << '\n';
  return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  p.descriptors();
  return kExitOk;
}

int cmd_vocab(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  p.build_vocabulary();
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  const auto vocab = p.vocabulary();
  const auto e = p.data();
  const auto hist = features::encode_all(vocab, e.train, o.workers);
  const auto picked = corpus::balance(e.train_labels, {o.balance_rate, o.seed});
  std::vector<svm::Label> y;
  for (std::size_t i : picked) y.push_back(e.train_labels[i]);
  svm::SvmConfig sc;
  sc.C = o.C;
  sc.gamma = o.gamma;
  svm::TrainingReport report;
  const auto model = svm::train(rows_of(hist, picked), y, sc, &report);
  const fs::path path = o.model_path.empty() ? fs::path(o.out) / "model.vbsvm" : fs::path(o.model_path);
  svm::save_model(model, path);
  if (o.vocab_path.empty() && !fs::exists(fs::path(o.out) / "vocab.vbvoc"))
    bof::save_vocabulary(vocab, fs::path(o.out) / "vocab.vbvoc");
  std::ostringstream t;
  t << "# vinebud train v1\ntraining_examples\tsupport_vectors\tbias\titerations\n"
    << picked.size() << '\t' << model.size() << '\t' << model.bias << '\t' << report.iterations << '\n';
  write_text(fs::path(o.out) / "train.tsv", t.str());
  out << "model: " << model.size() << " support vectors -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_tune(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  const auto vocab = p.vocabulary();
  const auto e = p.data();
  const auto hist = features::encode_all(vocab, e.train, o.workers);
  evaluation::TuningGrid grid;
  grid.gammas = pow2_range(o.grid_gamma, "--grid-gamma");
  grid.Cs = pow2_range(o.grid_c, "--grid-c");
  grid.folds = o.folds;
  evaluation::CvOptions cv;
  cv.balance_rate = o.balance_rate;
  cv.seed = o.seed;
  cv.workers = o.workers;
  const auto r = evaluation::cross_validate_grid(hist, e.train_labels, grid, cv);
  std::ostringstream t;
  evaluation::write_tuning_table(t, r);
  write_text(fs::path(o.out) / "tuning.tsv", t.str());
  out << "tune: " << r.table.size() << " combinations; best gamma=2^" << std::log2(r.best_gamma) << " C=2^"
      << std::log2(r.best_C) << " error=" << r.best_error << '\n';
  return kExitOk;
}

void write_subcategories(const fs::path& path, const evaluation::ExperimentData& e,
                         const std::vector<evaluation::TestOutcome>& runs) {
  std::vector<std::optional<corpus::Subcategory>> tags;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < e.test_labels.size(); ++i)
    if (e.test_labels[i] == svm::Label::NonBud && e.test_tags[i]) {
      rows.push_back(i);
      tags.push_back(e.test_tags[i]);
    }
  std::map<corpus::Subcategory, std::vector<double>> per_run;
  for (const auto& run : runs) {
    std::vector<svm::Label> pred;
    for (std::size_t i : rows) pred.push_back(run.predictions[i]);
    for (const auto& [tag, v] : evaluation::subcategory_recall(pred, tags)) per_run[tag].push_back(v);
  }
  std::ostringstream t;
  evaluation::write_subcategory_table(t, per_run);
  write_text(path, t.str());
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  const auto e = p.data();
  std::vector<evaluation::TestOutcome> runs;
  if (!o.model_path.empty()) {
    if (o.vocab_path.empty()) throw ArgumentError("--model needs --vocab");
    evaluation::TrainedClassifier clf;
    clf.vocab = bof::load_vocabulary(o.vocab_path);
    clf.model = svm::load_model(o.model_path);
    runs.push_back(evaluation::evaluate_classifier(clf, e, o.workers));
  } else {
    runs = evaluation::repeated_training(e, repeated_config(o)).runs;
  }
  std::vector<evaluation::Metrics> ms;
  for (const auto& r : runs) ms.push_back(r.metrics);
  const auto summary = evaluation::summarize(ms);
  std::ostringstream t;
  evaluation::write_metrics_table(t, summary, runs.size());
  write_text(fs::path(o.out) / "metrics.tsv", t.str());
  write_runs(fs::path(o.out) / "runs.tsv", runs);
  write_subcategories(fs::path(o.out) / "subcategory_recall.tsv", e, runs);
  out << "evaluate: " << runs.size() << " run(s); mean f-measure " << summary.mean.f_measure << '\n';
  return kExitOk;
}

int cmd_heatmap(const Options& o, std::ostream& out) {
  Pipeline p(o, out);
  const auto e = p.data();
  std::vector<evaluation::TrainedClassifier> models;
  if (!o.model_path.empty()) {
    if (o.vocab_path.empty()) throw ArgumentError("--model needs --vocab");
    models.push_back({bof::load_vocabulary(o.vocab_path), svm::load_model(o.model_path), {}});
  } else {
    models = evaluation::repeated_training(e, repeated_config(o)).classifiers;
  }
  features::ImageStore store(p.corpus());
  std::vector<evaluation::BudSource> buds;
  for (std::size_t i : p.split().test) {
    const auto& patch = p.corpus().patches[p.usable()[i]];
    if (patch.label == svm::Label::Bud) buds.push_back({&patch, &store.gray(patch.source_image)});
  }
  evaluation::HeatmapConfig hc;
  hc.per_cell = o.per_cell;
  hc.max_attempts = o.max_attempts;
  hc.seed = o.seed;
  hc.workers = o.workers;
  const auto hm = evaluation::heatmap_experiment(models, buds, hc);
  std::ostringstream t;
  evaluation::write_heatmap_table(t, hm);
  write_text(fs::path(o.out) / "heatmap.tsv", t.str());
  write_file_atomic(fs::path(o.out) / "heatmap.png", encode_png(evaluation::render_heatmap(hm)));
  out << "heatmap: " << hm.populated() << " of 100 cells populated\n";
  return kExitOk;
}

int cmd_scan(const Options& o, std::ostream& out) {
  if (o.image.empty() || o.vocab_path.empty() || o.model_path.empty())
    throw ArgumentError("scan needs --image, --vocab and --model");
  const GrayImage img = to_grayscale(read_image(o.image));
  scanwin::ScanConfig cfg;
  std::tie(cfg.window_w, cfg.window_h) = dims(o.window, "--window");
  std::tie(cfg.stride_x, cfg.stride_y) = dims(o.stride, "--stride");
  cfg.scales.clear();
  std::stringstream ss(o.scales);
  for (std::string tok; std::getline(ss, tok, ',');) cfg.scales.push_back(std::stod(tok));
  const auto windows =
      scanwin::scan_classify(img, bof::load_vocabulary(o.vocab_path), svm::load_model(o.model_path), cfg, {}, o.workers);
  std::ostringstream t;
  scanwin::write_windows(t, windows);
  write_text(fs::path(o.out) / "scan.tsv", t.str());
  write_file_atomic(fs::path(o.out) / "scan-overlay.png", encode_png(scanwin::overlay(img, windows)));
  std::size_t positives = 0;
  for (const auto& w : windows) positives += w.label == svm::Label::Bud ? 1 : 0;
  out << "scan: " << windows.size() << " windows, " << positives << " classified bud\n";
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  if (o.corpus.empty()) throw ArgumentError(std::string("serve needs --corpus or ") + kCorpusEnv);
  const auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw ArgumentError("--listen expects host:port");
  const std::string host = o.listen.substr(0, colon);
  const int port = std::stoi(o.listen.substr(colon + 1));
  annotation::AnnotationService svc(o.corpus);
  auto server = annotation::make_http_server(svc);
  out << "serving " << o.corpus << " on " << host << ':' << port << '\n' << std::flush;
  if (!server->listen(host, port)) throw Error("cannot listen on " + o.listen);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"vinebud: grapevine bud patch classification pipeline", "vinebud"};
  app.require_subcommand(1);
  if (const char* env = std::getenv(kCorpusEnv)) o.corpus = env;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--corpus", o.corpus, std::string("corpus root or manifest (default $") + kCorpusEnv + ")");
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "seed for splits, sampling and clustering")->capture_default_str();
    sub->add_option("--workers", o.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };
  auto experiment = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--vocab-size", o.vocab_size, "visual words S")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--balance-rate", o.balance_rate, "balance rate R")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--test-bud", o.test_bud, "bud patches held out for testing")->capture_default_str();
    sub->add_option("--test-non-bud", o.test_non_bud, "non-bud patches held out for testing")->capture_default_str();
    sub->add_option("--vocab-cap", o.vocab_cap, "max descriptors fed to k-means (0 = all)")->capture_default_str();
    sub->add_option("--vocab", o.vocab_path, "vocabulary file");
  };
  auto classifier = [&](CLI::App* sub) {
    sub->add_option("--C", o.C, "SVM C")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "RBF gamma")->capture_default_str();
    sub->add_option("--model", o.model_path, "model file");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic desk-scale corpus");
  common(synth);
  synth->add_option("--buds", o.buds, "bud patches")->capture_default_str();
  synth->add_option("--non-buds", o.non_buds, "non-bud patches")->capture_default_str();

  auto* extract = app.add_subcommand("extract", "extract and cache SIFT descriptors");
  experiment(extract);
  auto* vocab = app.add_subcommand("vocab", "build the visual vocabulary");
  experiment(vocab);
  auto* train = app.add_subcommand("train", "train the SVM on the balanced training split");
  experiment(train);
  classifier(train);
  auto* tune = app.add_subcommand("tune", "cross-validated grid search over gamma and C");
  experiment(tune);
  tune->add_option("--grid-gamma", o.grid_gamma, "log2 gamma range lo:hi")->capture_default_str();
  tune->add_option("--grid-c", o.grid_c, "log2 C range lo:hi")->capture_default_str();
  tune->add_option("--folds", o.folds, "cross-validation folds")->capture_default_str();
  auto* evaluate = app.add_subcommand("evaluate", "repeated training and test-set metrics");
  experiment(evaluate);
  classifier(evaluate);
  evaluate->add_option("--repetitions", o.repetitions, "trained classifiers")->capture_default_str();
  auto* heatmap = app.add_subcommand("heatmap", "realistic-patch perturbation heatmap");
  experiment(heatmap);
  classifier(heatmap);
  heatmap->add_option("--repetitions", o.repetitions, "trained classifiers")->capture_default_str();
  heatmap->add_option("--per-cell", o.per_cell, "realistic patches per bud and cell")->capture_default_str();
  heatmap->add_option("--max-attempts", o.max_attempts, "rejection-sampling attempts")->capture_default_str();
  auto* scan = app.add_subcommand("scan", "classify sliding windows over an image");
  common(scan);
  scan->add_option("--image", o.image, "input image");
  scan->add_option("--vocab", o.vocab_path, "vocabulary file");
  scan->add_option("--model", o.model_path, "model file");
  scan->add_option("--window", o.window, "window WxH")->capture_default_str();
  scan->add_option("--stride", o.stride, "stride DXxDY")->capture_default_str();
  scan->add_option("--scales", o.scales, "comma-separated window multipliers")->capture_default_str();
  auto* serve = app.add_subcommand("serve", "run the annotation backend");
  common(serve);
  serve->add_option("--listen", o.listen, "host:port")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    if (name != "serve") {
      fs::create_directories(o.out);
      write_text(fs::path(o.out) / "run.json", options_json(name, o).dump(2) + "\n");
    }
    if (name == "synth") return cmd_synth(o, out);
    if (name == "extract") return cmd_extract(o, out);
    if (name == "vocab") return cmd_vocab(o, out);
    if (name == "train") return cmd_train(o, out);
    if (name == "tune") return cmd_tune(o, out);
    if (name == "evaluate") return cmd_evaluate(o, out);
    if (name == "heatmap") return cmd_heatmap(o, out);
    if (name == "scan") return cmd_scan(o, out);
    return cmd_serve(o, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace vinebud::cli
