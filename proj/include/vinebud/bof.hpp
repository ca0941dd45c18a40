#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vinebud/kmeans.hpp"
#include "vinebud/sift.hpp"

namespace vinebud::bof {

struct Vocabulary {
  RowMatrix<double> centers;  // k x dimension
  KMeansConfig config;
  // FNV-1a over the training points, hex.
  std::string provenance;
  // L1-normalise encoded histograms.
  bool normalize = true;

  int size() const { return static_cast<int>(centers.rows()); }
  int dimension() const { return static_cast<int>(centers.cols()); }
};

struct BofHistogram {
  Eigen::VectorXd bins;
  std::size_t descriptor_count = 0;
};

struct BuildResult {
  Vocabulary vocabulary;
  double objective = 0.0;
  std::vector<double> objective_history;
  int iterations = 0;
};

std::string fingerprint(const RowMatrix<double>& points);

// Clusters descriptor rows into cfg.k visual words.
BuildResult build_vocabulary(const RowMatrix<double>& points, const KMeansConfig& cfg);

// Stacks descriptor vectors into a row matrix.
RowMatrix<double> stack(std::span<const sift::KeypointDescriptor> descriptors);

int nearest_center(const Vocabulary& vocab, const Eigen::Ref<const Eigen::VectorXd>& v);

BofHistogram encode(const Vocabulary& vocab, const RowMatrix<double>& descriptors);
BofHistogram encode(const Vocabulary& vocab, std::span<const sift::KeypointDescriptor> descriptors);

// Layout (little-endian): magic "VBVOCAB\0", u32 version, u32 k, u32 dim,
// u32 max_iterations, f64 epsilon, u64 seed, u8 normalize, u32 provenance
// length + bytes, then k*dim f64 centers row-major.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace vinebud::bof
