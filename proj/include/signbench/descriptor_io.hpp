#ifndef SIGNBENCH_DESCRIPTOR_IO_HPP
#define SIGNBENCH_DESCRIPTOR_IO_HPP

#include <string>
#include <vector>

#include "signbench/binio.hpp"
#include "signbench/features.hpp"

namespace signbench {

// Descriptor cache produced by the `extract` subcommand: per-image
// descriptor blocks with labels, so vocabularies can be rebuilt without
// touching the original images.
// Layout: "SDSC", version, set count, dim; per set: image id, label,
// descriptor count, then count*dim little-endian f32.

constexpr char kDescriptorMagic[4] = {'S', 'D', 'S', 'C'};
constexpr std::uint32_t kDescriptorVersion = 1;

inline void save_descriptor_sets(const std::vector<DescriptorSet<float>>& sets,
                                 const std::vector<int>& labels, const std::string& path) {
  if (!labels.empty() && labels.size() != sets.size())
    throw Error("descriptor cache: labels/sets misaligned");
  auto os = binio::open_out(path);
  binio::write_magic(os, kDescriptorMagic);
  binio::write_u32(os, kDescriptorVersion);
  binio::write_u32(os, static_cast<std::uint32_t>(sets.size()));
  binio::write_u32(os, static_cast<std::uint32_t>(kDescriptorDim));
  for (std::size_t i = 0; i < sets.size(); ++i) {
    binio::write_u32(os, static_cast<std::uint32_t>(sets[i].source_image_id));
    binio::write_u32(os, static_cast<std::uint32_t>(labels.empty() ? -1 : labels[i]));
    binio::write_u32(os, static_cast<std::uint32_t>(sets[i].count()));
    binio::write_f32s(os, sets[i].data.data(), sets[i].data.size());
  }
  if (!os) throw DataError("failed writing descriptor cache: " + path);
}

inline std::pair<std::vector<DescriptorSet<float>>, std::vector<int>> load_descriptor_sets(
    const std::string& path) {
  auto is = binio::open_in(path);
  binio::expect_magic(is, kDescriptorMagic, "descriptor cache");
  std::uint32_t version = binio::read_u32(is);
  if (version != kDescriptorVersion)
    throw DataError("unsupported descriptor cache version " + std::to_string(version));
  std::uint32_t count = binio::read_u32(is);
  std::uint32_t dim = binio::read_u32(is);
  if (dim != kDescriptorDim)
    throw DataError("descriptor cache has dim " + std::to_string(dim) + ", expected " +
                    std::to_string(kDescriptorDim));
  std::vector<DescriptorSet<float>> sets(count);
  std::vector<int> labels(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    sets[i].source_image_id = binio::read_u32(is);
    labels[i] = static_cast<int>(binio::read_u32(is));
    std::uint32_t n = binio::read_u32(is);
    sets[i].data.resize(std::size_t(n) * kDescriptorDim);
    binio::read_f32s(is, sets[i].data.data(), sets[i].data.size());
  }
  return {std::move(sets), std::move(labels)};
}

}  // namespace signbench

#endif  // SIGNBENCH_DESCRIPTOR_IO_HPP
