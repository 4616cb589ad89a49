#pragma once

#include <cstddef>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "civl/dataset.hpp"

namespace civl {

enum class Provenance { trained, imported, reduced };

/// The decision side of a single-valued classifier: F(x) > threshold means
/// top_class, anything else (including equality) means bottom_class.
struct Cut {
  double threshold = 0.0;
  std::string top_class;
  std::string bottom_class;

  const std::string& decide(double score) const {
    return score > threshold ? top_class : bottom_class;
  }
  bool operator==(const Cut&) const = default;
};

/// Linear scorer F(x) = sum_i k_i x_i with a threshold cut.
struct LinearScorer {
  std::vector<double> coefficients;
  double threshold = 0.0;
  std::string top_class;
  std::string bottom_class;
  Provenance provenance = Provenance::trained;

  Cut cut() const { return {threshold, top_class, bottom_class}; }
  double score(std::span<const double> x) const;
  const std::string& classify(std::span<const double> x) const {
    return score(x) > threshold ? top_class : bottom_class;
  }
  /// Coefficients plus threshold.
  std::size_t parameter_count() const { return coefficients.size() + 1; }

  bool operator==(const LinearScorer&) const = default;
};

/// One score per case, aligned to the dataset's case ids.
struct ScoreVector {
  std::vector<CaseId> case_ids;
  std::vector<double> scores;
  Provenance provenance = Provenance::trained;

  std::size_t size() const { return scores.size(); }
  bool operator==(const ScoreVector&) const = default;
};

/// Scores every case of `d` (batched through the SIMD kernel).
ScoreVector score_dataset(const LinearScorer& f, const Dataset& d);

enum class ThresholdStrategy { min_error, mid_gap };

struct ThresholdChoice {
  double threshold = 0.0;
  std::size_t errors = 0;
  bool degenerate = false;
};

/// Chooses T among midpoints of adjacent distinct scores. Labels other than
/// top/bottom are rejected.
ThresholdChoice select_threshold(std::span<const double> scores,
                                 std::span<const std::string> labels, const std::string& top,
                                 const std::string& bottom, ThresholdStrategy strategy);

/// Two-class Fisher discriminant with ridge-regularized pooled scatter,
/// oriented so `top` has the higher mean score; threshold by min_error.
LinearScorer train_fisher(const Dataset& d, const std::string& top, const std::string& bottom);

/// Fisher direction only: S_w^-1 (mu_top - mu_bottom) with optional per-case weights.
std::vector<double> fisher_direction(const Dataset& d, const std::string& top,
                                     const std::string& bottom,
                                     std::span<const double> case_weights = {});

/// Collapses the two-function model F1(x) > F2(x) into F1 - F2 > 0.
/// The result's top class is f1's top class and its bottom class is f2's top class.
LinearScorer reduce_pair(const LinearScorer& f1, const LinearScorer& f2);

/// Reads (case_id, score) rows; header must name `case_id` and `score` columns.
ScoreVector import_scores(const Dataset& d, std::istream& in);
ScoreVector import_scores_file(const Dataset& d, const std::string& path);
/// Uses a numeric column of a CSV keyed by row order (one row per case, same order).
ScoreVector import_score_column(const Dataset& d, std::span<const double> column);

void write_scores_csv(std::ostream& out, const Dataset& d, const ScoreVector& s);

struct OverlapWeights {
  double formerly_misclassified = 2.0;  // w1
  double other = 1.0;                   // w2
};

/// Weighted-accuracy objective A_w evaluated for one candidate.
struct WeightedFit {
  LinearScorer scorer;
  double weighted_accuracy = 0.0;
  std::size_t correct = 0;
  double margin = 0.0;
  std::string source;  // which candidate direction produced it
};

/// A direction to sweep, with a short provenance tag.
struct CandidateDirection {
  std::vector<double> direction;
  std::string source;
};

/// Candidate directions examined by train_weighted_overlap, in sweep order.
std::vector<CandidateDirection> overlap_candidate_directions(
    const Dataset& overlap, const std::set<CaseId>& formerly_mis, const OverlapWeights& w,
    const std::string& top, const std::string& bottom, std::span<const double> global_direction);

/// Best threshold for one direction under A_w (ties: accuracy, then margin, then lower T).
WeightedFit best_threshold_for_direction(const Dataset& overlap,
                                         const std::set<CaseId>& formerly_mis,
                                         const OverlapWeights& w, const std::string& top,
                                         const std::string& bottom,
                                         std::span<const double> direction);

/// Maximizes w1 * (formerly misclassified now correct) + w2 * (other overlap
/// cases correct) over the candidate directions, each swept over all thresholds.
WeightedFit train_weighted_overlap(const Dataset& overlap, const std::set<CaseId>& formerly_mis,
                                   const OverlapWeights& w, const std::string& top,
                                   const std::string& bottom,
                                   std::span<const double> global_direction = {});

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

}  // namespace civl
