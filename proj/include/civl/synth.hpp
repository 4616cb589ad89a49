#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "civl/dataset.hpp"
#include "civl/overlap.hpp"
#include "civl/scorers.hpp"

namespace civl {

/// Portable seeded generator: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with explicit conversions, so batches are reproducible
/// across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (two uniforms per draw).
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

enum class SynthMode { uniform_hb, gaussian_center, marginal_pure };

std::string to_string(SynthMode m);
SynthMode synth_mode_from_string(const std::string& s);

/// Empirical per-attribute marginals of a set of member cases.
struct MarginalRegion {
  std::vector<std::string> attributes;
  std::vector<std::vector<double>> values;  // values[attr] = member values

  static MarginalRegion from_cases(const Dataset& d, const std::set<CaseId>& members);
  std::size_t dim() const { return values.size(); }
};

struct SyntheticBatch {
  std::vector<std::string> attributes;
  std::vector<double> values;  // row-major
  SynthMode mode = SynthMode::uniform_hb;
  std::uint64_t seed = 0;
  std::string region_hash;
  bool degenerate = false;

  std::size_t dim() const { return attributes.size(); }
  std::size_t size() const { return dim() ? values.size() / dim() : 0; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim(), dim()}; }
};

/// uniform_hb or gaussian_center inside a hyperblock. Gaussian draws use
/// sigma = range/6 per attribute and are clipped to the block.
SyntheticBatch generate_synthetic(const Hyperblock& region, SynthMode mode, std::size_t n,
                                  std::uint64_t seed,
                                  std::vector<std::string> attribute_names = {});

/// marginal_pure: each attribute drawn independently from the members' values.
SyntheticBatch generate_synthetic(const MarginalRegion& region, std::size_t n, std::uint64_t seed);

/// Copy of the batch without the rows lying inside `block` (closed bounds).
SyntheticBatch drop_inside(const SyntheticBatch& batch, const Hyperblock& block);

/// CSV with a leading "# mode=... seed=... region=..." provenance comment.
void write_batch_csv(std::ostream& out, const SyntheticBatch& b);

std::string region_hash(const Hyperblock& hb);
std::string region_hash(const MarginalRegion& r);

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;  // [true][predicted]

  std::size_t total() const;
  std::size_t row_total(std::size_t true_class) const;
};

struct EvalReport {
  std::size_t n_overlap = 0;
  std::size_t n_mis = 0;
  double error_rate = 0.0;
  double accuracy = 1.0;
  ConfusionMatrix confusion;
  std::optional<double> weighted_accuracy;
  double overlap_hit_fraction = 0.0;
};

/// Core evaluation from predictions plus the interval-defining scores.
EvalReport evaluate_predictions(std::span<const std::string> truth,
                                std::span<const std::string> predicted,
                                std::span<const CaseId> ids, std::span<const double> scores,
                                const OverlapInterval& interval,
                                const std::optional<OverlapWeights>& weights = std::nullopt,
                                const std::set<CaseId>& formerly_mis = {});

/// Evaluates a linear model on overlap cases; hit fraction uses the same model's scores.
EvalReport evaluate_overlap(const LinearScorer& model, const Dataset& overlap_cases,
                            const OverlapInterval& interval,
                            const std::optional<OverlapWeights>& weights = std::nullopt,
                            const std::set<CaseId>& formerly_mis = {});

/// Evaluates imported scores under a cut (black-box models).
EvalReport evaluate_overlap(const ScoreVector& scores, const Cut& cut, const Dataset& overlap_cases,
                            const OverlapInterval& interval);

enum class EvidenceVerdict { pure_evidence, boost_both_areas };

std::string to_string(EvidenceVerdict v);

struct EvidenceReport {
  EvidenceVerdict verdict = EvidenceVerdict::pure_evidence;
  double fraction = 0.0;
  std::size_t inside = 0;
  std::size_t total = 0;
};

/// Share of a batch (generated outside the overlap block) scoring inside [a,b].
/// When `overlap_block` is given, every case must lie outside it on at least one attribute.
EvidenceReport pure_area_evidence(const LinearScorer& model, const SyntheticBatch& batch,
                                  const OverlapInterval& interval,
                                  const Hyperblock* overlap_block = nullptr);

/// Ratio of synthetic to real in-interval hit rates; nullopt when the real rate is 0.
std::optional<double> hit_rate_discrepancy(double real_fraction, double synthetic_fraction);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace civl
