#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "civl/dataset.hpp"
#include "civl/overlap.hpp"
#include "civl/scorers.hpp"

namespace civl {

// ---------------------------------------------------------------------------
// Boosting

/// F1 outside [a,b], F2 inside (closed interval on F1's score).
struct BoostedModel {
  LinearScorer f1;
  LinearScorer f2;
  OverlapInterval interval;
  bool f2_ignored = false;  // empty interval: the model is f1 alone

  std::size_t parameter_count() const {
    return f1.parameter_count() + (f2_ignored ? 0 : f2.parameter_count());
  }
  bool routes_to_f2(std::span<const double> x) const;
  const std::string& predict(std::span<const double> x) const;

  bool operator==(const BoostedModel&) const = default;
};

BoostedModel compose_boosted(const LinearScorer& f1, const LinearScorer& f2,
                             const OverlapInterval& interval);

const std::string& predict_boosted(const BoostedModel& m, std::span<const double> x);

/// Predicted labels for every case of `d`.
std::vector<std::string> predict_boosted(const BoostedModel& m, const Dataset& d);

// ---------------------------------------------------------------------------
// Interval rules and Divide-and-Classify

struct AttributeRange {
  std::size_t attribute = 0;
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  bool operator==(const AttributeRange&) const = default;
};

/// Pure rule: all conditions hold (closed ranges) => label.
struct IntervalRule {
  std::vector<AttributeRange> conditions;
  std::string label;
  std::size_t iteration = 1;
  std::size_t coverage = 0;  // cases covered on the induction snapshot
  double class_share = 0.0;
  double dataset_share = 0.0;

  bool matches(std::span<const double> x) const;
  bool operator==(const IntervalRule&) const = default;
};

/// Maximal single-class runs over one attribute with coverage >= min_coverage,
/// ordered by lower bound. Values shared by two classes break a run.
std::vector<IntervalRule> discover_pure_intervals(const Dataset& d, std::size_t attribute,
                                                  std::size_t min_coverage);

/// Ids of cases in `d` the rule covers.
std::set<CaseId> covered_cases(const IntervalRule& r, const Dataset& d);

/// Ranking used inside an iteration: coverage desc, attribute asc, lower bound asc.
bool rule_rank_less(const IntervalRule& x, const IntervalRule& y);

/// Greedy set cover in rank order; drops rules whose coverage is already covered.
std::vector<IntervalRule> prune_redundant(std::vector<IntervalRule> rules, const Dataset& d);

enum class FallbackKind { abstain, majority_class, user_merge };

struct Fallback {
  FallbackKind kind = FallbackKind::abstain;
  std::string label;  // for majority_class / user_merge

  bool operator==(const Fallback&) const = default;
};

std::string to_string(FallbackKind k);
FallbackKind fallback_kind_from_string(const std::string& s);

/// First-match rule list; rules are stored in iteration order.
struct DecisionList {
  std::vector<std::string> attributes;
  std::vector<IntervalRule> rules;
  Fallback fallback;

  std::size_t iterations() const;
  /// Index of the first matching rule.
  std::optional<std::size_t> first_match(std::span<const double> x) const;
  /// nullopt means abstain.
  std::optional<std::string> classify(std::span<const double> x) const;

  bool operator==(const DecisionList&) const = default;
};

/// Re-evaluates each rule's coverage on the full dataset: cases not matched by
/// any rule of an earlier iteration that satisfy the rule.
std::vector<std::size_t> recount_coverage(const DecisionList& dl, const Dataset& d);

/// Rendering such as "If Int11(x) = true then L = Virginica".
std::string render_rules(const DecisionList& dl);

/// Called once per iteration with the remaining cases and ranked, pruned candidates.
/// Returns the rules to accept (each must be pure on `remaining`).
using DncHook = std::function<std::vector<IntervalRule>(
    std::size_t iteration, const Dataset& remaining, const std::vector<IntervalRule>& candidates)>;

struct DncOptions {
  std::optional<std::size_t> min_coverage;  // default: max(3, ceil(5% of smallest class))
  std::size_t max_iterations = 100;
  DncHook hook;                      // interactive mode when set
  std::optional<Fallback> fallback;  // interactive mode: explicit user merge
};

struct DncResult {
  DecisionList list;
  std::vector<CaseId> leftovers;
  std::size_t min_coverage = 0;
};

std::size_t default_min_coverage(const Dataset& d);

DncResult dnc_run(const Dataset& d, const DncOptions& options = {});

/// Non-binary tree: level i holds iteration-i rules as pure leaves, else-spine between levels.
struct GeneralizedDt {
  struct Level {
    std::size_t iteration = 0;
    std::vector<IntervalRule> leaves;
  };
  std::vector<std::string> attributes;
  std::vector<Level> levels;
  Fallback fallback;

  std::optional<std::string> classify(std::span<const double> x) const;
  std::size_t depth() const { return levels.size(); }
  std::string render() const;
};

GeneralizedDt to_generalized_dt(const DecisionList& dl);

// ---------------------------------------------------------------------------
// First-order-logic rules

struct MonotonicRule {
  std::vector<std::size_t> order;
  std::string target;
};

/// True iff values strictly decrease along `order`.
bool monotonic_chain_holds(std::span<const double> x, std::span<const std::size_t> order);

struct ChainCounts {
  std::size_t satisfied = 0;
  std::size_t total = 0;
};

/// Per-class count of cases whose values strictly decrease along `order`.
std::map<std::string, ChainCounts> test_monotonic_chain(const Dataset& d,
                                                        std::span<const std::size_t> order);

std::optional<std::string> classify_monotonic(const MonotonicRule& r, std::span<const double> x);

enum class SlopeDirection { ge, le };

/// (x_i - x_j)(w) compared against reference-class extrema.
struct SlopeTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  SlopeDirection direction = SlopeDirection::ge;
  double threshold = 0.0;
};

struct SlopeRule {
  std::string reference_class;
  std::string inferred_class;
  std::vector<SlopeTerm> terms;
  bool degenerate = false;  // no terms: fires everywhere

  /// ge-term holds iff diff < min over reference cases; le-term iff diff > max.
  bool fires(std::span<const double> x) const;
};

struct SlopeReport {
  SlopeRule rule;
  std::size_t inferred_total = 0;
  std::size_t inferred_fired = 0;
  std::size_t reference_total = 0;
  std::size_t false_fires = 0;
  double coverage = 0.0;   // inferred_fired / inferred_total
  double precision = 0.0;  // correct fires / all fires
  double accuracy = 0.0;   // fire => inferred, else reference, over both classes
};

struct SlopeTermSpec {
  std::size_t i = 0;
  std::size_t j = 0;
  SlopeDirection direction = SlopeDirection::ge;
};

SlopeReport evaluate_slope_rules(const Dataset& d, const std::string& reference_class,
                                 const std::string& inferred_class,
                                 std::span<const SlopeTermSpec> terms);

std::string render_slope_rule(const SlopeRule& r, std::span<const std::string> attributes);
std::string render_monotonic_rule(const MonotonicRule& r, std::span<const std::string> attributes);

}  // namespace civl
