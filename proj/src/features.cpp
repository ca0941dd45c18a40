#include "vinebud/features.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "vinebud/binary_io.hpp"
#include "vinebud/image_io.hpp"

namespace vinebud::features {
namespace {
constexpr std::string_view kMagic{"VBDESC\0\0", 8};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

const GrayImage& ImageStore::gray(const std::string& image_id) {
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(image_id); it != cache_.end()) return *it->second;
  }
  const corpus::ImageEntry* entry = corpus_.find_image(image_id);
  if (!entry) throw ArgumentError("unknown image id " + image_id);
  auto img = std::make_shared<const GrayImage>(to_grayscale(read_image(corpus_.image_path(*entry))));
  std::lock_guard lock(mu_);
  return *cache_.emplace(image_id, std::move(img)).first->second;
}

PatchDescriptors extract_patch(const GrayImage& source, const Rect& rect, const sift::SiftConfig& cfg) {
  return sift::extract(crop(source, rect), cfg);
}

std::vector<PatchDescriptors> extract_patches(const corpus::Corpus& corpus, ImageStore& store,
                                              std::span<const std::size_t> indices,
                                              const sift::SiftConfig& cfg, int workers) {
  std::vector<PatchDescriptors> out(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t i) {
    const corpus::Patch& p = corpus.patches.at(indices[i]);
    out[i] = extract_patch(store.gray(p.source_image), p.rect, cfg);
  });
  return out;
}

RowMatrix<double> pool_descriptors(const std::vector<PatchDescriptors>& patches,
                                   std::span<const std::size_t> which, std::size_t cap, std::uint64_t seed) {
  std::vector<const sift::KeypointDescriptor*> all;
  for (std::size_t i : which)
    for (const auto& d : patches.at(i)) all.push_back(&d);
  if (cap > 0 && all.size() > cap) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, all.size() - 1);
      std::swap(all[i], all[d(rng)]);
    }
    all.resize(cap);
  }
  RowMatrix<double> m(static_cast<Eigen::Index>(all.size()), sift::kDescriptorSize);
  for (std::size_t i = 0; i < all.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = all[i]->vector.transpose();
  return m;
}

RowMatrix<double> encode_all(const bof::Vocabulary& vocab, const std::vector<PatchDescriptors>& patches, int workers) {
  RowMatrix<double> out(static_cast<Eigen::Index>(patches.size()), vocab.size());
  parallel_for(patches.size(), workers, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = bof::encode(vocab, patches[i]).bins.transpose();
  });
  return out;
}

Classification classify_descriptors(const PatchDescriptors& descriptors, const bof::Vocabulary& vocab,
                                    const svm::SvmModel& model) {
  const bof::BofHistogram h = bof::encode(vocab, descriptors);
  Classification c;
  c.keypoints = h.descriptor_count;
  c.decision = svm::decision_value(model, h.bins);
  c.label = svm::label_for_decision(c.decision);
  return c;
}

Classification classify_patch(const GrayImage& patch, const bof::Vocabulary& vocab, const svm::SvmModel& model,
                              const sift::SiftConfig& cfg) {
  return classify_descriptors(sift::extract(patch, cfg), vocab, model);
}

void save_descriptors(const std::vector<std::string>& ids, const std::vector<PatchDescriptors>& patches,
                      const std::filesystem::path& path) {
  if (ids.size() != patches.size()) throw ArgumentError("save_descriptors: id count does not match patch count");
  binio::Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(patches.size()));
  for (std::size_t i = 0; i < patches.size(); ++i) {
    w.str(ids[i]);
    w.u32(static_cast<std::uint32_t>(patches[i].size()));
    for (const auto& d : patches[i]) {
      w.f64(d.keypoint.x);
      w.f64(d.keypoint.y);
      w.f64(d.keypoint.scale);
      w.f64(d.orientation);
      for (int k = 0; k < sift::kDescriptorSize; ++k) w.f64(d.vector[k]);
    }
  }
  write_file_atomic(path, w.buffer());
}

std::vector<PatchDescriptors> load_descriptors(const std::filesystem::path& path, std::vector<std::string>* ids) {
  const Bytes data = read_file(path);
  binio::Reader r(data, "descriptor cache " + path.string());
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("descriptor cache version " + std::to_string(version) + " unsupported");
  const std::uint32_t n = r.u32();
  std::vector<PatchDescriptors> out(n);
  if (ids) ids->assign(n, {});
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string id = r.str();
    if (ids) (*ids)[i] = std::move(id);
    const std::uint32_t count = r.u32();
    r.need(static_cast<std::size_t>(count) * (4 + sift::kDescriptorSize) * 8);
    out[i].resize(count);
    for (auto& d : out[i]) {
      d.keypoint.x = r.f64();
      d.keypoint.y = r.f64();
      d.keypoint.scale = r.f64();
      d.orientation = r.f64();
      for (int k = 0; k < sift::kDescriptorSize; ++k) d.vector[k] = r.f64();
    }
  }
  r.expect_end();
  return out;
}

}  // namespace vinebud::features
