#include "vinebud/bof.hpp"

#include <cstdio>
#include <random>

#include "vinebud/binary_io.hpp"
#include "vinebud/image_io.hpp"

namespace vinebud::bof {
namespace {
constexpr std::string_view kMagic{"VBVOCAB\0", 8};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::string fingerprint(const RowMatrix<double>& points) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(points.rows()));
  mix(static_cast<std::uint64_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.size(); ++i) mix(std::bit_cast<std::uint64_t>(points.data()[i]));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BuildResult build_vocabulary(const RowMatrix<double>& points, const KMeansConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto km = kmeans(points, cfg, rng);
  BuildResult out;
  out.vocabulary.centers = std::move(km.centers);
  out.vocabulary.config = cfg;
  out.vocabulary.provenance = fingerprint(points);
  out.objective = km.objective;
  out.objective_history = std::move(km.objective_history);
  out.iterations = km.iterations;
  return out;
}

RowMatrix<double> stack(std::span<const sift::KeypointDescriptor> descriptors) {
  RowMatrix<double> m(static_cast<Eigen::Index>(descriptors.size()), sift::kDescriptorSize);
  for (std::size_t i = 0; i < descriptors.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = descriptors[i].vector.transpose();
  return m;
}

int nearest_center(const Vocabulary& vocab, const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != vocab.dimension())
    throw ArgumentError("descriptor dimension " + std::to_string(v.size()) + " does not match vocabulary dimension " +
                        std::to_string(vocab.dimension()));
  return nearest_row(vocab.centers, v);
}

BofHistogram encode(const Vocabulary& vocab, const RowMatrix<double>& descriptors) {
  BofHistogram h;
  h.bins = Eigen::VectorXd::Zero(vocab.size());
  h.descriptor_count = static_cast<std::size_t>(descriptors.rows());
  if (descriptors.rows() == 0) return h;
  if (descriptors.cols() != vocab.dimension()) throw ArgumentError("descriptor dimension does not match vocabulary");
  for (Eigen::Index i = 0; i < descriptors.rows(); ++i) h.bins[nearest_row(vocab.centers, descriptors.row(i).transpose())] += 1.0;
  if (vocab.normalize) h.bins /= static_cast<double>(descriptors.rows());
  return h;
}

BofHistogram encode(const Vocabulary& vocab, std::span<const sift::KeypointDescriptor> descriptors) {
  return encode(vocab, stack(descriptors));
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  binio::Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(vocab.size()));
  w.u32(static_cast<std::uint32_t>(vocab.dimension()));
  w.u32(static_cast<std::uint32_t>(vocab.config.max_iterations));
  w.f64(vocab.config.epsilon);
  w.u64(vocab.config.seed);
  w.u8(vocab.normalize ? 1 : 0);
  w.str(vocab.provenance);
  for (Eigen::Index i = 0; i < vocab.centers.size(); ++i) w.f64(vocab.centers.data()[i]);
  write_file_atomic(path, w.buffer());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  binio::Reader r(data, "vocabulary " + path.string());
  r.expect_magic(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw FormatError("vocabulary version " + std::to_string(version) + " unsupported");
  Vocabulary v;
  const std::uint32_t k = r.u32();
  const std::uint32_t dim = r.u32();
  if (k == 0 || dim == 0) throw FormatError("vocabulary has zero centers or dimension");
  v.config.k = static_cast<int>(k);
  v.config.max_iterations = static_cast<int>(r.u32());
  v.config.epsilon = r.f64();
  v.config.seed = r.u64();
  v.normalize = r.u8() != 0;
  v.provenance = r.str();
  const std::size_t count = static_cast<std::size_t>(k) * dim;
  if (r.remaining() != count * 8)
    throw FormatError("vocabulary header declares " + std::to_string(k) + "x" + std::to_string(dim) +
                      " centers but payload holds " + std::to_string(r.remaining()) + " bytes");
  v.centers.resize(k, dim);
  for (std::size_t i = 0; i < count; ++i) v.centers.data()[i] = r.f64();
  return v;
}

}  // namespace vinebud::bof
