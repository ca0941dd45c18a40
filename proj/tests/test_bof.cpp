#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <set>

#include "support.hpp"
#include "vinebud/bof.hpp"
#include "vinebud/image_io.hpp"
#include "vinebud/kmeans.hpp"

using namespace vinebud;

namespace {

RowMatrix<double> random_points(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  RowMatrix<double> p(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) p(i, j) = d(rng);
  return p;
}

int scan_nearest(const RowMatrix<double>& centers, const Eigen::VectorXd& v) {
  int best = 0;
  double bd = 1e300;
  for (int c = 0; c < centers.rows(); ++c) {
    double d = 0;
    for (int j = 0; j < centers.cols(); ++j) d += (centers(c, j) - v[j]) * (centers(c, j) - v[j]);
    if (d < bd) bd = d, best = c;
  }
  return best;
}

bof::Vocabulary vocab_of(const RowMatrix<double>& centers) {
  bof::Vocabulary v;
  v.centers = centers;
  v.config.k = static_cast<int>(centers.rows());
  return v;
}

}  // namespace

TEST_CASE("k-means++ seeding") {
  std::mt19937_64 rng(1);
  SUBCASE("k equal to the number of distinct points returns them") {
    RowMatrix<double> p(6, 2);
    p << 0, 0, 1, 1, 0, 0, 5, 5, 1, 1, 5, 5;
    for (int trial = 0; trial < 50; ++trial) {
      const RowMatrix<double> c = kmeans_init_pp(p, 3, rng);
      std::set<std::pair<double, double>> got;
      for (int i = 0; i < 3; ++i) got.insert({c(i, 0), c(i, 1)});
      CHECK(got == std::set<std::pair<double, double>>{{0, 0}, {1, 1}, {5, 5}});
    }
  }
  SUBCASE("k = 1 picks an input point") {
    const RowMatrix<double> p = random_points(20, 3, 2);
    const RowMatrix<double> c = kmeans_init_pp(p, 1, rng);
    bool found = false;
    for (int i = 0; i < 20; ++i) found = found || (p.row(i) == c.row(0));
    CHECK(found);
  }
  SUBCASE("two far clusters get one seed each") {
    RowMatrix<double> p = random_points(200, 2, 3);
    p.topRows(100).array() += 1000.0;
    int split = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const RowMatrix<double> c = kmeans_init_pp(p, 2, rng);
      if ((c(0, 0) > 500) != (c(1, 0) > 500)) ++split;
    }
    CHECK(split >= 990);
  }
  SUBCASE("seeds are distinct points") {
    const RowMatrix<double> p = random_points(300, 8, 4);
    const RowMatrix<double> c = kmeans_init_pp(p, 25, rng);
    for (int i = 0; i < 25; ++i)
      for (int j = i + 1; j < 25; ++j) CHECK(c.row(i) != c.row(j));
  }
  CHECK_THROWS_AS(kmeans_init_pp(random_points(3, 2, 5), 4, rng), ArgumentError);
}

TEST_CASE("Lloyd iterations") {
  SUBCASE("four-point fixture against exhaustive partition enumeration") {
    RowMatrix<double> p(4, 2);
    p << 0, 0, 0, 1, 10, 0, 10, 1;
    // Best 2-partition by brute force.
    double best = 1e300;
    for (int mask = 1; mask < 15; ++mask) {
      double sse = 0;
      for (int side = 0; side < 2; ++side) {
        Eigen::RowVector2d m = Eigen::RowVector2d::Zero();
        int n = 0;
        for (int i = 0; i < 4; ++i)
          if (((mask >> i) & 1) == side) m += p.row(i), ++n;
        m /= n;
        for (int i = 0; i < 4; ++i)
          if (((mask >> i) & 1) == side) sse += (p.row(i) - m).squaredNorm();
      }
      best = std::min(best, sse);
    }
    CHECK(best == doctest::Approx(1.0));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      KMeansConfig cfg;
      cfg.k = 2;
      const auto r = kmeans(p, cfg, rng);
      CHECK(r.objective == doctest::Approx(best).epsilon(1e-12));
      const int lo = r.centers(0, 0) < r.centers(1, 0) ? 0 : 1;
      CHECK(std::abs(r.centers(lo, 0) - 0.0) <= 1e-9);
      CHECK(std::abs(r.centers(lo, 1) - 0.5) <= 1e-9);
      CHECK(std::abs(r.centers(1 - lo, 0) - 10.0) <= 1e-9);
      CHECK(std::abs(r.centers(1 - lo, 1) - 0.5) <= 1e-9);
    }
  }
  SUBCASE("k = n gives zero objective") {
    const RowMatrix<double> p = random_points(7, 3, 6);
    std::mt19937_64 rng(1);
    KMeansConfig cfg;
    cfg.k = 7;
    const auto r = kmeans(p, cfg, rng);
    CHECK(r.objective == 0.0);
    std::vector<std::vector<double>> a, b;
    for (int i = 0; i < 7; ++i) {
      a.push_back({p(i, 0), p(i, 1), p(i, 2)});
      b.push_back({r.centers(i, 0), r.centers(i, 1), r.centers(i, 2)});
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
  SUBCASE("objective never increases, termination and epsilon honoured") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const RowMatrix<double> p = random_points(400, 16, 100 + seed);
      std::mt19937_64 rng(seed);
      KMeansConfig cfg;
      cfg.k = 12;
      const auto r = kmeans(p, cfg, rng);
      REQUIRE(!r.objective_history.empty());
      for (std::size_t i = 1; i < r.objective_history.size(); ++i)
        CHECK(r.objective_history[i] <= r.objective_history[i - 1] * (1 + 1e-12));
      CHECK(r.objective <= r.objective_history.back() * (1 + 1e-12));
      CHECK(r.iterations <= cfg.max_iterations);
      // A converged run leaves a further Lloyd update moving no center by epsilon.
      if (r.converged) {
        RowMatrix<double> sums = RowMatrix<double>::Zero(cfg.k, p.cols());
        std::vector<int> counts(cfg.k, 0);
        for (int i = 0; i < p.rows(); ++i) {
          const int c = scan_nearest(r.centers, p.row(i).transpose());
          sums.row(c) += p.row(i);
          ++counts[c];
        }
        for (int c = 0; c < cfg.k; ++c)
          if (counts[c] > 0) CHECK((sums.row(c) / counts[c] - r.centers.row(c)).norm() < 5 * cfg.epsilon);
      }
    }
  }
  SUBCASE("iteration cap") {
    const RowMatrix<double> p = random_points(500, 8, 7);
    std::mt19937_64 rng(3);
    KMeansConfig cfg;
    cfg.k = 30;
    cfg.max_iterations = 2;
    const auto r = kmeans(p, cfg, rng);
    CHECK(r.iterations <= 2);
  }
  SUBCASE("config validation") {
    std::mt19937_64 rng(0);
    KMeansConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(kmeans(random_points(5, 2, 1), cfg, rng), ArgumentError);
    cfg.k = 2;
    cfg.epsilon = 0;
    CHECK_THROWS_AS(kmeans(random_points(5, 2, 1), cfg, rng), ArgumentError);
    cfg.epsilon = 1e-3;
    cfg.k = 6;
    CHECK_THROWS_AS(kmeans(random_points(5, 2, 1), cfg, rng), ArgumentError);
  }
}

TEST_CASE("vocabulary building") {
  const RowMatrix<double> p = random_points(600, sift::kDescriptorSize, 9).array().abs();
  KMeansConfig cfg;
  cfg.k = 25;
  cfg.seed = 42;
  const auto a = bof::build_vocabulary(p, cfg), b = bof::build_vocabulary(p, cfg);
  CHECK(a.vocabulary.size() == 25);
  CHECK(a.vocabulary.dimension() == sift::kDescriptorSize);
  CHECK(a.vocabulary.centers == b.vocabulary.centers);
  CHECK(a.vocabulary.provenance == b.vocabulary.provenance);
  CHECK(a.vocabulary.provenance == bof::fingerprint(p));
  for (int i = 0; i < 25; ++i)
    for (int j = i + 1; j < 25; ++j) CHECK(a.vocabulary.centers.row(i) != a.vocabulary.centers.row(j));
  for (std::size_t i = 1; i < a.objective_history.size(); ++i)
    CHECK(a.objective_history[i] <= a.objective_history[i - 1] * (1 + 1e-12));
  cfg.seed = 43;
  CHECK(bof::build_vocabulary(p, cfg).vocabulary.centers != a.vocabulary.centers);
}

TEST_CASE("nearest center") {
  RowMatrix<double> c(5, 2);
  c << 0, 0, 1, 0, 5, 5, 7, 7, -1, 0;
  const auto v = vocab_of(c);
  CHECK(bof::nearest_center(v, Eigen::Vector2d(7, 7)) == 3);
  // (0,0) is equidistant from centers 1 and 4 once center 0 is gone.
  RowMatrix<double> c2(5, 2);
  c2 << 9, 9, 1, 0, 5, 5, 7, 7, -1, 0;
  CHECK(bof::nearest_center(vocab_of(c2), Eigen::Vector2d(0, 0)) == 1);

  const RowMatrix<double> centers = random_points(25, 16, 11);
  const RowMatrix<double> queries = random_points(500, 16, 12);
  const auto vocab = vocab_of(centers);
  for (int i = 0; i < queries.rows(); ++i)
    CHECK(bof::nearest_center(vocab, queries.row(i).transpose()) == scan_nearest(centers, queries.row(i).transpose()));

  CHECK_THROWS_AS(bof::nearest_center(v, Eigen::Vector3d(1, 2, 3)), ArgumentError);
}

TEST_CASE("histogram encoding") {
  RowMatrix<double> c(3, 2);
  c << 0, 0, 10, 0, 0, 10;
  const auto v = vocab_of(c);
  SUBCASE("all descriptors in one bin") {
    RowMatrix<double> d(3, 2);
    d << 9, 1, 11, 0, 10, -1;
    const auto h = bof::encode(v, d);
    CHECK(h.descriptor_count == 3);
    CHECK(h.bins == Eigen::Vector3d(0, 1, 0));
  }
  SUBCASE("empty input") {
    const auto h = bof::encode(v, RowMatrix<double>(0, 2));
    CHECK(h.descriptor_count == 0);
    CHECK(h.bins.size() == 3);
    CHECK(h.bins.isZero(0));
  }
  SUBCASE("split counts") {
    RowMatrix<double> c2(2, 2);
    c2 << 0, 0, 10, 10;
    RowMatrix<double> d(4, 2);
    d << 1, 1, 9, 9, 8, 10, 10, 7;
    const auto h = bof::encode(vocab_of(c2), d);
    CHECK(h.bins[0] == doctest::Approx(0.25));
    CHECK(h.bins[1] == doctest::Approx(0.75));
  }
  SUBCASE("count oracle on random data") {
    const RowMatrix<double> centers = random_points(25, 16, 13);
    const RowMatrix<double> d = random_points(333, 16, 14);
    const auto h = bof::encode(vocab_of(centers), d);
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(25);
    for (int i = 0; i < d.rows(); ++i) oracle[scan_nearest(centers, d.row(i).transpose())] += 1;
    oracle /= 333.0;
    CHECK((h.bins - oracle).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(h.bins.sum() - 1.0) <= 1e-9);
    CHECK(h.bins.minCoeff() >= 0);
  }
  SUBCASE("raw counts when normalisation is off") {
    auto raw = v;
    raw.normalize = false;
    RowMatrix<double> d(2, 2);
    d << 0, 1, 1, 0;
    CHECK(bof::encode(raw, d).bins == Eigen::Vector3d(2, 0, 0));
  }
  SUBCASE("SIFT descriptors") {
    const auto ds = sift::extract(testing::texture_image(96, 96, 3, 120));
    REQUIRE(!ds.empty());
    const RowMatrix<double> stacked = bof::stack(ds);
    CHECK(stacked.rows() == static_cast<Eigen::Index>(ds.size()));
    CHECK(stacked.cols() == sift::kDescriptorSize);
    KMeansConfig cfg;
    cfg.k = 4;
    const auto vocab = bof::build_vocabulary(stacked, cfg).vocabulary;
    const auto h = bof::encode(vocab, std::span<const sift::KeypointDescriptor>(ds));
    CHECK(h.descriptor_count == ds.size());
    CHECK(h.bins.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  RowMatrix<double> wrong(1, 3);
  wrong << 1, 2, 3;
  CHECK_THROWS_AS(bof::encode(v, wrong), ArgumentError);
}

TEST_CASE("vocabulary files") {
  testing::TempDir dir("bof");
  KMeansConfig cfg;
  cfg.k = 25;
  cfg.seed = 5;
  const auto vocab = bof::build_vocabulary(random_points(200, sift::kDescriptorSize, 15), cfg).vocabulary;
  const auto path = dir / "v.vbvoc";
  bof::save_vocabulary(vocab, path);
  const auto back = bof::load_vocabulary(path);
  CHECK(back.centers == vocab.centers);
  CHECK(back.config.k == 25);
  CHECK(back.config.seed == 5);
  CHECK(back.config.max_iterations == vocab.config.max_iterations);
  CHECK(back.config.epsilon == vocab.config.epsilon);
  CHECK(back.provenance == vocab.provenance);
  CHECK(back.normalize == vocab.normalize);

  const Bytes bytes = read_file(path);
  SUBCASE("truncated") {
    write_file_atomic(dir / "t.vbvoc", Bytes(bytes.begin(), bytes.end() - 9));
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "t.vbvoc"), FormatError);
    write_file_atomic(dir / "h.vbvoc", Bytes(bytes.begin(), bytes.begin() + 6));
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "h.vbvoc"), FormatError);
  }
  SUBCASE("header claims 25 centers, file holds 24") {
    // Drop the last center row.
    Bytes cut(bytes.begin(), bytes.end() - sift::kDescriptorSize * 8);
    write_file_atomic(dir / "k.vbvoc", cut);
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "k.vbvoc"), FormatError);
  }
  SUBCASE("bad magic and version") {
    Bytes m = bytes;
    m[0] = 'X';
    write_file_atomic(dir / "m.vbvoc", m);
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "m.vbvoc"), FormatError);
    Bytes v = bytes;
    v[8] = 99;  // version, after the 8-byte magic
    write_file_atomic(dir / "v.vbvoc", v);
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "v.vbvoc"), FormatError);
  }
  SUBCASE("trailing bytes") {
    Bytes t = bytes;
    t.push_back(0);
    write_file_atomic(dir / "x.vbvoc", t);
    CHECK_THROWS_AS(bof::load_vocabulary(dir / "x.vbvoc"), FormatError);
  }
}
