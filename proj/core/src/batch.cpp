#include "gea/batch.hpp"

#include <fstream>
#include <iterator>
#include <map>

#include <fmt/format.h>

#include "gea/error.hpp"
#include "gea/rng.hpp"

namespace gea {

void SyntheticBatchSpec::validate() const {
  if (num_classes < 1 || channels < 1 || hw < 1) throw ConfigError("batch dimensions must be >= 1");
  if (batch_size < 2 * num_classes) {
    throw ConfigError(fmt::format("batch_size {} leaves some of the {} classes with fewer than 2 "
                                  "samples",
                                  batch_size, num_classes));
  }
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be >= 0");
}

Batch make_batch(const SyntheticBatchSpec& spec) {
  spec.validate();
  const std::size_t d = spec.channels * spec.hw * spec.hw;
  const Rng root(spec.seed);
  std::vector<std::vector<double>> templates(spec.num_classes, std::vector<double>(d));
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    Rng r = root.split(1).split(k);
    for (double& v : templates[k]) v = r.normal();
  }
  Batch batch{Tensor({spec.batch_size, spec.channels, spec.hw, spec.hw}), {}};
  for (std::size_t i = 0; i < spec.batch_size; ++i) {
    const auto label = static_cast<Label>(i % spec.num_classes);
    batch.labels.push_back(label);
    Rng r = root.split(2).split(i);
    for (std::size_t j = 0; j < d; ++j) {
      batch.images[i * d + j] = templates[static_cast<std::size_t>(label)][j] + spec.noise_scale * r.normal();
    }
  }
  return batch;
}

Batch parse_raw_batch(const std::vector<std::uint8_t>& bytes, std::size_t count,
                      std::vector<std::string>* warnings) {
  const std::size_t pixels = kCifarRecordBytes - 1;
  const std::size_t complete = bytes.size() / kCifarRecordBytes;
  if (complete < count) {
    const std::size_t offset = complete * kCifarRecordBytes;
    if (bytes.size() % kCifarRecordBytes != 0) {
      throw FormatError(fmt::format("truncated record {} at byte offset {}", complete, offset), offset);
    }
    throw FormatError(fmt::format("file holds {} records, {} requested", complete, count), offset);
  }

  std::map<Label, std::size_t> class_counts;
  for (std::size_t r = 0; r < count; ++r) ++class_counts[static_cast<Label>(bytes[r * kCifarRecordBytes])];

  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < count; ++r) {
    const auto label = static_cast<Label>(bytes[r * kCifarRecordBytes]);
    if (class_counts[label] >= 2) {
      kept.push_back(r);
    } else if (warnings) {
      warnings->push_back(fmt::format("dropping record {}: class {} has a single sample", r, label));
    }
  }

  Batch batch{Tensor({kept.size(), 3, kCifarHw, kCifarHw}), {}};
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const std::size_t base = kept[k] * kCifarRecordBytes;
    batch.labels.push_back(static_cast<Label>(bytes[base]));
    for (std::size_t p = 0; p < pixels; ++p) {
      batch.images[k * pixels + p] = static_cast<double>(bytes[base + 1 + p]) / 255.0;
    }
  }
  return batch;
}

Batch load_raw_batch(const std::filesystem::path& path, std::size_t count,
                     std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open raw batch file '{}'", path.string()));
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_raw_batch(bytes, count, warnings);
}

}  // namespace gea
