#include "gea/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gea/error.hpp"
#include "gea/rng.hpp"
#include "gea/stats.hpp"

namespace gea {

using nlohmann::json;

std::optional<double> Benchmark::proxy(const ArchEncoding& arch) const {
  if (!synthetic_proxy) return std::nullopt;
  return (*synthetic_proxy)[arch.index()];
}

FitnessRecord query(const Benchmark& bench, const ArchEncoding& arch) { return bench.query(arch); }

namespace {

void check_record(const FitnessRecord& r, const std::string& where) {
  auto bad_acc = [](double v) { return !std::isfinite(v) || v < 0.0 || v > 100.0; };
  if (bad_acc(r.val_acc) || bad_acc(r.test_acc)) {
    throw FormatError(fmt::format("{}: accuracies must be finite and within [0, 100]", where), 0);
  }
  if (!std::isfinite(r.train_time_s) || r.train_time_s < 0.0) {
    throw FormatError(fmt::format("{}: train_time_s must be finite and >= 0", where), 0);
  }
}

}  // namespace

void validate_benchmark(const Benchmark& bench) {
  if (bench.space != SpaceDescriptor{}) {
    throw FormatError("benchmark space does not match the 4-node, 5-op cell space", 0);
  }
  if (bench.records.size() != kSpaceSize) {
    throw IncompleteBenchmarkError(
        fmt::format("incomplete benchmark: {} of {} records", bench.records.size(), kSpaceSize));
  }
  for (std::size_t i = 0; i < bench.records.size(); ++i) {
    check_record(bench.records[i], encode_str(ArchEncoding::from_index(i)));
  }
  if (bench.synthetic_proxy && bench.synthetic_proxy->size() != kSpaceSize) {
    throw FormatError("synthetic proxy map is not total over the space", 0);
  }
}

Benchmark parse_tabular(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("benchmark JSON parse error at byte {}: {}", e.byte, e.what()),
                     e.byte);
  }

  Benchmark bench;
  try {
    const json& space = doc.at("space");
    bench.space.num_nodes = space.at("nodes").get<std::size_t>();
    bench.space.op_names = space.at("ops").get<std::vector<std::string>>();
    bench.dataset_name = doc.at("dataset").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("benchmark header malformed: {}", e.what()), 0);
  }
  if (bench.space != SpaceDescriptor{}) {
    throw FormatError("benchmark space descriptor does not match the cell space "
                      "(expected 4 nodes and ops none, skip_connect, nor_conv_1x1, "
                      "nor_conv_3x3, avg_pool_3x3)",
                      0);
  }

  const json* records = nullptr;
  try {
    records = &doc.at("records");
  } catch (const json::exception&) {
    throw ParseError("benchmark has no \"records\" array", 0);
  }
  if (!records->is_array()) throw ParseError("\"records\" must be an array", 0);

  std::vector<std::optional<FitnessRecord>> slots(kSpaceSize);
  std::vector<double> proxy(kSpaceSize, 0.0);
  std::size_t with_proxy = 0;
  for (std::size_t i = 0; i < records->size(); ++i) {
    const json& rec = (*records)[i];
    ArchEncoding arch;
    FitnessRecord fr;
    try {
      arch = decode_str(rec.at("arch").get<std::string>());
      fr.val_acc = rec.at("val_acc").get<double>();
      fr.test_acc = rec.at("test_acc").get<double>();
      fr.train_time_s = rec.at("train_time_s").get<double>();
      if (rec.contains("proxy")) {
        proxy[arch.index()] = rec.at("proxy").get<double>();
        ++with_proxy;
      }
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("malformed record {}: {}", i, e.what()), i);
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("malformed record {}: {}", i, e.what()), i);
    }
    check_record(fr, fmt::format("record {}", i));
    auto& slot = slots[arch.index()];
    if (slot) {
      throw FormatError(fmt::format("duplicate arch {} at record {}", encode_str(arch), i), i);
    }
    slot = fr;
  }

  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  for (std::size_t i = 0; i < kSpaceSize; ++i) {
    if (slots[i]) continue;
    ++missing_count;
    if (missing.size() < 5) missing.push_back(encode_str(ArchEncoding::from_index(i)));
  }
  if (missing_count > 0) {
    std::string sample;
    for (const auto& m : missing) sample += (sample.empty() ? "" : ", ") + m;
    throw IncompleteBenchmarkError(fmt::format(
        "incomplete benchmark: {} of {} architectures missing (e.g. {})", missing_count,
        kSpaceSize, sample));
  }
  bench.records.reserve(kSpaceSize);
  for (auto& s : slots) bench.records.push_back(*s);
  if (with_proxy == kSpaceSize) {
    bench.synthetic_proxy = std::move(proxy);
  } else if (with_proxy != 0) {
    throw FormatError(fmt::format("\"proxy\" present on {} of {} records; it must be on all or none",
                                  with_proxy, kSpaceSize),
                      0);
  }
  return bench;
}

Benchmark load_tabular(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open benchmark file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_tabular(ss.str());
}

std::string dump_tabular(const Benchmark& bench) {
  json doc;
  doc["space"] = {{"nodes", bench.space.num_nodes}, {"ops", bench.space.op_names}};
  doc["dataset"] = bench.dataset_name;
  json records = json::array();
  for (std::size_t i = 0; i < bench.records.size(); ++i) {
    const FitnessRecord& r = bench.records[i];
    json rec = {{"arch", encode_str(ArchEncoding::from_index(i))},
                {"val_acc", r.val_acc},
                {"test_acc", r.test_acc},
                {"train_time_s", r.train_time_s}};
    if (bench.synthetic_proxy) rec["proxy"] = (*bench.synthetic_proxy)[i];
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  return doc.dump(1) + "\n";
}

void save_tabular(const Benchmark& bench, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write benchmark file '{}'", path.string()));
  out << dump_tabular(bench);
  if (!out) throw IoError(fmt::format("write failed for '{}'", path.string()));
}

void SyntheticSpec::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("noise_std must be >= 0");
  if (!(interaction_std >= 0.0) || !std::isfinite(interaction_std)) {
    throw ConfigError("interaction_std must be >= 0");
  }
  if (!std::isfinite(target_proxy_tau)) throw ConfigError("target_proxy_tau must be finite");
}

double SyntheticLandscape::raw(const ArchEncoding& arch) const {
  double v = 0.0;
  for (std::size_t e = 0; e < kNumEdges; ++e) {
    v += utilities[e][static_cast<std::size_t>(arch.edge_ops[e])];
  }
  for (const auto& it : interactions) {
    v += it.weights[static_cast<std::size_t>(arch.edge_ops[it.edge_a])]
                   [static_cast<std::size_t>(arch.edge_ops[it.edge_b])];
  }
  return v;
}

namespace {

enum Stream : std::uint64_t {
  kUtilities = 1,
  kInteractions = 2,
  kNoise = 3,
  kTestPerturbation = 4,
  kTrainTime = 5,
  kProxyNoise = 6,
};

constexpr double kAccLow = 10.0;
constexpr double kAccHigh = 95.0;
constexpr double kTestNoise = 0.3;
constexpr double kTauTolerance = 0.05;

bool share_node(const Edge& a, const Edge& b) {
  return a.from == b.from || a.from == b.to || a.to == b.from || a.to == b.to;
}

}  // namespace

SyntheticLandscape make_landscape(const SyntheticSpec& spec) {
  spec.validate();
  const Rng root(spec.seed);
  SyntheticLandscape land;
  Rng u = root.split(kUtilities);
  for (auto& edge : land.utilities)
    for (double& v : edge) v = u.normal();
  if (spec.interaction_std > 0.0) {
    Rng w = root.split(kInteractions);
    for (std::size_t a = 0; a < kNumEdges; ++a) {
      for (std::size_t b = a + 1; b < kNumEdges; ++b) {
        if (!share_node(kEdges[a], kEdges[b])) continue;
        SyntheticLandscape::Interaction it{a, b, {}};
        for (auto& row : it.weights)
          for (double& v : row) v = spec.interaction_std * w.normal();
        land.interactions.push_back(it);
      }
    }
  }
  return land;
}

namespace {

std::vector<double> proxy_with_amplitude(std::span<const double> base, std::span<const double> noise,
                                         double sign, double amplitude) {
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = sign * base[i] + amplitude * noise[i];
  return out;
}

std::vector<double> calibrate_proxy(std::span<const double> val, double target, const Rng& root) {
  if (std::abs(target) > 1.0) {
    throw CalibrationError(fmt::format("target proxy tau {} is outside [-1, 1]", target));
  }
  const double m = mean(val), s = stddev(val);
  std::vector<double> base(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) base[i] = s > 0.0 ? (val[i] - m) / s : 0.0;
  const double sign = target < 0.0 ? -1.0 : 1.0;
  const double goal = std::abs(target);

  // Amplitude 0 reproduces the ordering of val_acc exactly.
  if (goal >= 1.0 - kTauTolerance) return proxy_with_amplitude(base, base, sign, 0.0);

  Rng nr = root.split(kProxyNoise);
  std::vector<double> noise(val.size());
  for (double& v : noise) v = nr.normal();

  auto tau_at = [&](double amp) {
    return std::abs(kendall_tau(val, proxy_with_amplitude(base, noise, sign, amp)));
  };
  // |tau| falls from 1 towards the tau of pure noise as the amplitude grows;
  // bracket the goal, then bisect.
  const double accept = kTauTolerance / 10.0;
  double lo = 0.0, hi = 1.0;
  while (tau_at(hi) > goal && hi < 1e6) hi *= 2.0;
  double amp = hi;
  for (int iter = 0; iter < 60; ++iter) {
    amp = 0.5 * (lo + hi);
    const double tau = tau_at(amp);
    if (std::abs(tau - goal) <= accept) break;
    (tau > goal ? lo : hi) = amp;
  }
  std::vector<double> proxy = proxy_with_amplitude(base, noise, sign, amp);
  const double achieved = kendall_tau(val, proxy);
  if (std::abs(achieved - target) > kTauTolerance) {
    throw CalibrationError(
        fmt::format("proxy calibration reached tau {:.4f}, target {:.4f}", achieved, target));
  }
  return proxy;
}

}  // namespace

Benchmark gen_synthetic(const SyntheticSpec& spec) {
  const SyntheticLandscape land = make_landscape(spec);
  const Rng root(spec.seed);

  std::vector<double> raw(kSpaceSize);
  Rng noise = root.split(kNoise);
  for (std::size_t i = 0; i < kSpaceSize; ++i) {
    raw[i] = land.raw(ArchEncoding::from_index(i));
    const double eps = noise.normal();
    if (spec.noise_std > 0.0) raw[i] += spec.noise_std * eps;
  }
  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  const double lo = *lo_it, span = *hi_it - *lo_it;

  Benchmark bench;
  bench.dataset_name = spec.dataset_name;
  bench.records.resize(kSpaceSize);
  Rng test = root.split(kTestPerturbation);
  Rng time = root.split(kTrainTime);
  std::vector<double> val(kSpaceSize);
  for (std::size_t i = 0; i < kSpaceSize; ++i) {
    FitnessRecord& r = bench.records[i];
    r.val_acc = span > 0.0 ? kAccLow + (kAccHigh - kAccLow) * (raw[i] - lo) / span
                           : 0.5 * (kAccLow + kAccHigh);
    r.test_acc = std::clamp(r.val_acc + kTestNoise * test.normal(), 0.0, 100.0);
    r.train_time_s = 5.0 + 10.0 * time.uniform();
    val[i] = r.val_acc;
  }
  bench.synthetic_proxy = calibrate_proxy(val, spec.target_proxy_tau, root);
  return bench;
}

std::pair<ArchEncoding, FitnessRecord> best_of(const Benchmark& bench) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < bench.records.size(); ++i) {
    if (bench.records[i].val_acc > bench.records[best].val_acc) best = i;
  }
  return {ArchEncoding::from_index(best), bench.records[best]};
}

}  // namespace gea
