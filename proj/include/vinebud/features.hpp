#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "vinebud/bof.hpp"
#include "vinebud/corpus.hpp"
#include "vinebud/sift.hpp"
#include "vinebud/svm.hpp"

namespace vinebud::features {

using PatchDescriptors = std::vector<sift::KeypointDescriptor>;

// Runs fn(0..n-1) on up to `workers` threads. Each index is visited exactly
// once; callers write results into per-index slots so output order never
// depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Decodes corpus source images on first use and keeps their grayscale planes.
class ImageStore {
 public:
  explicit ImageStore(const corpus::Corpus& corpus) : corpus_(corpus) {}
  const GrayImage& gray(const std::string& image_id);

 private:
  const corpus::Corpus& corpus_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const GrayImage>> cache_;
};

PatchDescriptors extract_patch(const GrayImage& source, const Rect& rect, const sift::SiftConfig& cfg = {});

// Descriptors for corpus.patches[indices[i]] in slot i.
std::vector<PatchDescriptors> extract_patches(const corpus::Corpus& corpus, ImageStore& store,
                                              std::span<const std::size_t> indices,
                                              const sift::SiftConfig& cfg, int workers);

// Stacks descriptors of the selected patches, keeping at most `cap` rows
// (uniform subsample without replacement when over the cap; 0 = no cap).
RowMatrix<double> pool_descriptors(const std::vector<PatchDescriptors>& patches,
                                   std::span<const std::size_t> which, std::size_t cap,
                                   std::uint64_t seed);

// One BoF histogram per row.
RowMatrix<double> encode_all(const bof::Vocabulary& vocab, const std::vector<PatchDescriptors>& patches,
                             int workers = 1);

struct Classification {
  svm::Label label = svm::Label::NonBud;
  double decision = 0.0;
  std::size_t keypoints = 0;
};

// Extract, encode and predict for one patch image.
Classification classify_patch(const GrayImage& patch, const bof::Vocabulary& vocab, const svm::SvmModel& model,
                              const sift::SiftConfig& cfg = {});
Classification classify_descriptors(const PatchDescriptors& descriptors, const bof::Vocabulary& vocab,
                                    const svm::SvmModel& model);

// Descriptor cache, little-endian: magic "VBDESC\0\0", u32 version, u32 patch
// count, then per patch: id string, u32 descriptor count, and per descriptor
// f64 x, y, scale, orientation followed by 128 f64 values.
void save_descriptors(const std::vector<std::string>& ids, const std::vector<PatchDescriptors>& patches,
                      const std::filesystem::path& path);
std::vector<PatchDescriptors> load_descriptors(const std::filesystem::path& path, std::vector<std::string>* ids);

}  // namespace vinebud::features
