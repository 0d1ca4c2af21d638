#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gea/cellspace.hpp"

namespace gea {

struct FitnessRecord {
  double val_acc = 0.0;       // percent
  double test_acc = 0.0;      // percent
  double train_time_s = 0.0;  // simulated training cost

  friend bool operator==(const FitnessRecord&, const FitnessRecord&) = default;
};

// Total map from every cell in the space to its trained performance.
struct Benchmark {
  SpaceDescriptor space;
  std::string dataset_name;
  std::vector<FitnessRecord> records;                // indexed by ArchEncoding::index()
  std::optional<std::vector<double>> synthetic_proxy;  // same indexing

  const FitnessRecord& query(const ArchEncoding& arch) const { return records[arch.index()]; }
  std::optional<double> proxy(const ArchEncoding& arch) const;
};

// Reads the UTF-8 JSON tabular format:
//   {"space": {"nodes": 4, "ops": [...]}, "dataset": "...",
//    "records": [{"arch": "|...|", "val_acc": x, "test_acc": x, "train_time_s": x
//                 [, "proxy": x]}, ...]}
// Records may come in any order. Throws ParseError (with byte offset or record
// index), FormatError, or IncompleteBenchmarkError.
Benchmark load_tabular(const std::filesystem::path& path);
Benchmark parse_tabular(const std::string& text);

// Writes records in enumeration order; includes "proxy" when present.
void save_tabular(const Benchmark& bench, const std::filesystem::path& path);
std::string dump_tabular(const Benchmark& bench);

FitnessRecord query(const Benchmark& bench, const ArchEncoding& arch);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  double noise_std = 0.5;          // per-architecture noise on the raw landscape
  double target_proxy_tau = 0.6;   // Kendall tau between synthetic proxy and val_acc
  double interaction_std = 0.5;    // scale of pairwise terms between edges that share a node
  std::string dataset_name = "synthetic";

  void validate() const;
};

// Raw additive landscape behind a synthetic benchmark.
struct SyntheticLandscape {
  std::array<std::array<double, kNumOps>, kNumEdges> utilities{};
  struct Interaction {
    std::size_t edge_a, edge_b;
    std::array<std::array<double, kNumOps>, kNumOps> weights{};
  };
  std::vector<Interaction> interactions;

  // Sum of utilities and interaction terms (no noise).
  double raw(const ArchEncoding& arch) const;
};

SyntheticLandscape make_landscape(const SyntheticSpec& spec);

// Seeded landscape: val_acc is the raw landscape plus Normal(0, noise_std),
// mapped affinely onto [10, 95]; test_acc = val_acc + Normal(0, 0.3) clipped
// to [0, 100]; train_time_s ~ U[5, 15]. The synthetic proxy is a standardized
// val_acc plus Gaussian noise whose amplitude is bisected until the Kendall
// tau over the whole space is within 0.05 of the target.
Benchmark gen_synthetic(const SyntheticSpec& spec);

// Exhaustive argmax of val_acc; ties go to the lowest encoding.
std::pair<ArchEncoding, FitnessRecord> best_of(const Benchmark& bench);

// Canonical validation shared by the loader and generator.
void validate_benchmark(const Benchmark& bench);

}  // namespace gea
