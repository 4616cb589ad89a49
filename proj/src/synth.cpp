#include "civl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "civl/csv.hpp"
#include "civl/error.hpp"
#include "civl/kernels.hpp"

namespace civl {

double SeededRng::normal() {
  const double u1 = 1.0 - uniform01();  // (0,1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw Error("SeededRng::below: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::string to_string(SynthMode m) {
  switch (m) {
    case SynthMode::uniform_hb: return "uniform_hb";
    case SynthMode::gaussian_center: return "gaussian_center";
    case SynthMode::marginal_pure: return "marginal_pure";
  }
  return "uniform_hb";
}

SynthMode synth_mode_from_string(const std::string& s) {
  if (s == "uniform_hb") return SynthMode::uniform_hb;
  if (s == "gaussian_center") return SynthMode::gaussian_center;
  if (s == "marginal_pure") return SynthMode::marginal_pure;
  throw Error("unknown synthesis mode '" + s + "'");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string region_hash(const Hyperblock& hb) {
  std::string text = "hb";
  for (std::size_t k = 0; k < hb.dim(); ++k)
    text += ";" + csv::format_double(hb.lo[k]) + "," + csv::format_double(hb.hi[k]);
  return fnv1a_hex(text);
}

std::string region_hash(const MarginalRegion& r) {
  std::string text = "marginal";
  for (const auto& col : r.values) {
    text += ";";
    for (double v : col) text += csv::format_double(v) + ",";
  }
  return fnv1a_hex(text);
}

MarginalRegion MarginalRegion::from_cases(const Dataset& d, const std::set<CaseId>& members) {
  if (members.empty()) throw Error("MarginalRegion: no member cases");
  MarginalRegion r;
  r.attributes = d.attributes();
  r.values.resize(d.dim());
  for (CaseId id : members) {
    auto idx = d.index_of(id);
    if (!idx) throw Error("MarginalRegion: unknown case id " + std::to_string(id));
    for (std::size_t a = 0; a < d.dim(); ++a) r.values[a].push_back(d.at(*idx, a));
  }
  return r;
}

SyntheticBatch generate_synthetic(const Hyperblock& region, SynthMode mode, std::size_t n,
                                  std::uint64_t seed, std::vector<std::string> attribute_names) {
  if (n == 0) throw Error("generate_synthetic: n must be at least 1");
  if (mode == SynthMode::marginal_pure)
    throw Error("generate_synthetic: marginal_pure needs a MarginalRegion, not a hyperblock");
  const std::size_t m = region.dim();
  if (attribute_names.empty())
    for (std::size_t k = 0; k < m; ++k) attribute_names.push_back("x" + std::to_string(k + 1));
  if (attribute_names.size() != m) throw Error("generate_synthetic: attribute name count mismatch");
  for (std::size_t k = 0; k < m; ++k)
    if (region.lo[k] > region.hi[k]) throw Error("generate_synthetic: block has lo > hi");

  SyntheticBatch b;
  b.attributes = std::move(attribute_names);
  b.mode = mode;
  b.seed = seed;
  b.region_hash = region_hash(region);
  b.degenerate = std::all_of(region.lo.begin(), region.lo.end(), [&, k = std::size_t{0}](double) mutable {
    bool flat = region.lo[k] == region.hi[k];
    ++k;
    return flat;
  });
  b.values.resize(n * m);
  if (b.degenerate) {
    for (std::size_t i = 0; i < n; ++i) std::copy(region.lo.begin(), region.lo.end(), b.values.begin() + i * m);
    return b;
  }
  SeededRng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double lo = region.lo[k], hi = region.hi[k], span = hi - lo;
      double v;
      if (mode == SynthMode::uniform_hb) {
        v = lo + rng.uniform01() * span;
      } else {
        v = (lo + span / 2.0) + rng.normal() * (span / 6.0);
      }
      b.values[i * m + k] = std::clamp(v, lo, hi);
    }
  }
  return b;
}

SyntheticBatch generate_synthetic(const MarginalRegion& region, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("generate_synthetic: n must be at least 1");
  const std::size_t m = region.dim();
  SyntheticBatch b;
  b.attributes = region.attributes;
  if (b.attributes.size() != m) {
    b.attributes.clear();
    for (std::size_t k = 0; k < m; ++k) b.attributes.push_back("x" + std::to_string(k + 1));
  }
  b.mode = SynthMode::marginal_pure;
  b.seed = seed;
  b.region_hash = region_hash(region);
  b.degenerate = std::all_of(region.values.begin(), region.values.end(), [](const auto& col) {
    return std::adjacent_find(col.begin(), col.end(), std::not_equal_to<>()) == col.end();
  });
  b.values.resize(n * m);
  SeededRng rng(seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      const auto& col = region.values[k];
      if (col.empty()) throw Error("generate_synthetic: empty marginal");
      b.values[i * m + k] = col[rng.below(col.size())];
    }
  return b;
}

void write_batch_csv(std::ostream& out, const SyntheticBatch& b) {
  out << "# mode=" << to_string(b.mode) << " seed=" << b.seed << " region=" << b.region_hash
      << (b.degenerate ? " degenerate=1" : "") << '\n';
  for (std::size_t k = 0; k < b.dim(); ++k) out << (k ? "," : "") << csv::escape(b.attributes[k]);
  out << '\n';
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t k = 0; k < b.dim(); ++k)
      out << (k ? "," : "") << csv::format_double(b.values[i * b.dim() + k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Evaluation

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& r : counts)
    for (std::size_t c : r) t += c;
  return t;
}

std::size_t ConfusionMatrix::row_total(std::size_t true_class) const {
  std::size_t t = 0;
  for (std::size_t c : counts[true_class]) t += c;
  return t;
}

EvalReport evaluate_predictions(std::span<const std::string> truth,
                                std::span<const std::string> predicted,
                                std::span<const CaseId> ids, std::span<const double> scores,
                                const OverlapInterval& interval,
                                const std::optional<OverlapWeights>& weights,
                                const std::set<CaseId>& formerly_mis) {
  const std::size_t n = truth.size();
  if (n == 0) throw Error("evaluate_overlap: no overlap cases");
  if (predicted.size() != n || ids.size() != n || scores.size() != n)
    throw Error("evaluate_overlap: inputs are not aligned");

  EvalReport rep;
  rep.n_overlap = n;
  std::set<std::string> cls(truth.begin(), truth.end());
  cls.insert(predicted.begin(), predicted.end());
  rep.confusion.classes.assign(cls.begin(), cls.end());
  const std::size_t k = rep.confusion.classes.size();
  rep.confusion.counts.assign(k, std::vector<std::size_t>(k, 0));
  auto index = [&](const std::string& c) {
    return static_cast<std::size_t>(std::lower_bound(rep.confusion.classes.begin(),
                                                     rep.confusion.classes.end(), c) -
                                    rep.confusion.classes.begin());
  };
  double aw = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.confusion.counts[index(truth[i])][index(predicted[i])] += 1;
    const bool correct = truth[i] == predicted[i];
    if (!correct) ++rep.n_mis;
    if (weights && correct)
      aw += formerly_mis.count(ids[i]) ? weights->formerly_misclassified : weights->other;
    if (interval.contains(scores[i])) ++hits;
  }
  rep.error_rate = static_cast<double>(rep.n_mis) / static_cast<double>(n);
  rep.accuracy = 1.0 - rep.error_rate;
  if (weights) rep.weighted_accuracy = aw;
  rep.overlap_hit_fraction = static_cast<double>(hits) / static_cast<double>(n);
  return rep;
}

EvalReport evaluate_overlap(const LinearScorer& model, const Dataset& overlap_cases,
                            const OverlapInterval& interval,
                            const std::optional<OverlapWeights>& weights,
                            const std::set<CaseId>& formerly_mis) {
  auto s = score_dataset(model, overlap_cases);
  std::vector<std::string> pred;
  pred.reserve(s.size());
  const Cut cut = model.cut();
  for (double v : s.scores) pred.push_back(cut.decide(v));
  return evaluate_predictions(overlap_cases.labels(), pred, overlap_cases.case_ids(), s.scores,
                              interval, weights, formerly_mis);
}

EvalReport evaluate_overlap(const ScoreVector& scores, const Cut& cut, const Dataset& overlap_cases,
                            const OverlapInterval& interval) {
  std::vector<double> aligned(overlap_cases.size());
  std::vector<std::string> pred(overlap_cases.size());
  for (std::size_t i = 0; i < overlap_cases.size(); ++i) {
    auto it = std::find(scores.case_ids.begin(), scores.case_ids.end(), overlap_cases.case_id(i));
    if (it == scores.case_ids.end())
      throw Error("evaluate_overlap: no score for case id " + std::to_string(overlap_cases.case_id(i)));
    aligned[i] = scores.scores[static_cast<std::size_t>(it - scores.case_ids.begin())];
    pred[i] = cut.decide(aligned[i]);
  }
  return evaluate_predictions(overlap_cases.labels(), pred, overlap_cases.case_ids(), aligned, interval);
}

std::string to_string(EvidenceVerdict v) {
  return v == EvidenceVerdict::pure_evidence ? "pure_evidence" : "boost_both_areas";
}

EvidenceReport pure_area_evidence(const LinearScorer& model, const SyntheticBatch& batch,
                                  const OverlapInterval& interval, const Hyperblock* overlap_block) {
  if (batch.dim() != model.coefficients.size())
    throw Error("pure_area_evidence: batch dimension does not match the model");
  EvidenceReport rep;
  rep.total = batch.size();
  if (rep.total == 0) return rep;
  if (overlap_block) {
    for (std::size_t i = 0; i < batch.size(); ++i)
      if (overlap_block->contains(batch.row(i)))
        throw Error("pure_area_evidence: synthetic case " + std::to_string(i) +
                    " lies inside the overlap hyperblock");
  }
  std::vector<double> s(batch.size());
  kernels::dot_rows(batch.values, batch.dim(), model.coefficients, s);
  for (double v : s)
    if (interval.contains(v)) ++rep.inside;
  rep.fraction = static_cast<double>(rep.inside) / static_cast<double>(rep.total);
  rep.verdict = rep.inside == 0 ? EvidenceVerdict::pure_evidence : EvidenceVerdict::boost_both_areas;
  return rep;
}

SyntheticBatch drop_inside(const SyntheticBatch& batch, const Hyperblock& block) {
  if (block.dim() != batch.dim()) throw Error("drop_inside: block dimension does not match the batch");
  SyntheticBatch out = batch;
  out.values.clear();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto r = batch.row(i);
    if (!block.contains(r)) out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

std::optional<double> hit_rate_discrepancy(double real_fraction, double synthetic_fraction) {
  if (real_fraction <= 0.0) return std::nullopt;
  return synthetic_fraction / real_fraction;
}

}  // namespace civl
