#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "civl/dataset.hpp"
#include "civl/scorers.hpp"

namespace civl {

/// Smallest score interval [a,b] around the threshold holding every
/// misclassified case. c is the lowest-scoring misclassified top-class case,
/// d the highest-scoring misclassified bottom-class case.
struct OverlapInterval {
  double a = 0.0;
  double b = 0.0;
  std::optional<CaseId> case_c;
  std::optional<CaseId> case_d;
  bool empty = true;
  bool one_sided = false;

  bool contains(double score) const { return !empty && a <= score && score <= b; }
  double length() const { return empty ? 0.0 : b - a; }
  bool operator==(const OverlapInterval&) const = default;
};

enum class BlockRole { overlap_area, pure_rectangle };

/// Axis-aligned box: closed range per attribute.
struct Hyperblock {
  std::vector<double> lo;
  std::vector<double> hi;
  BlockRole role = BlockRole::overlap_area;
  std::string provenance;

  std::size_t dim() const { return lo.size(); }
  bool contains(std::span<const double> x) const;
  bool operator==(const Hyperblock&) const = default;
};

using Rational = boost::multiprecision::cpp_rational;

/// Envelope boundary at one breakpoint of a strip, exact.
struct EnvelopePoint {
  Rational t;
  Rational upper;
  Rational lower;

  bool operator==(const EnvelopePoint&) const = default;
};

/// The region between two adjacent parallel axes, parameterized by t in [0,1].
struct EnvelopeStrip {
  std::size_t from_axis = 0;  // attribute indices
  std::size_t to_axis = 0;
  std::vector<EnvelopePoint> points;  // sorted by t, first t = 0, last t = 1

  bool operator==(const EnvelopeStrip&) const = default;
};

/// Piecewise-linear upper/lower boundary following only member polylines.
struct Envelope {
  std::vector<std::size_t> axis_order;
  std::vector<double> axis_upper;  // max member value at each axis position
  std::vector<double> axis_lower;
  std::vector<EnvelopeStrip> strips;

  bool operator==(const Envelope&) const = default;
};

/// Ids whose strict-threshold decision under `cut` differs from the label.
std::vector<CaseId> find_misclassified(const ScoreVector& scores,
                                       std::span<const std::string> labels, const Cut& cut);

OverlapInterval compute_overlap_interval(const ScoreVector& scores,
                                         std::span<const std::string> labels, const Cut& cut);

/// Verifies the purity conditions: below a only bottom class, above b only top class.
/// Returns the ids that violate them (empty when the interval is sound).
std::vector<CaseId> purity_violations(const OverlapInterval& iv, const ScoreVector& scores,
                                      std::span<const std::string> labels, const Cut& cut);

/// Componentwise min/max over the given cases (role = overlap_area).
Hyperblock compute_overlap_hyperblock(const Dataset& d, std::span<const CaseId> cases);

/// Cases of `d` inside the block.
std::vector<CaseId> cases_in_block(const Dataset& d, const Hyperblock& hb);

/// Polylines are rows of values in attribute-index order; `axis_order` picks
/// which attributes appear on the axes and in which order.
Envelope build_modified_envelope(std::span<const std::vector<double>> polylines,
                                 std::span<const std::size_t> axis_order);
Envelope build_modified_envelope(const Dataset& d, std::span<const CaseId> members,
                                 std::span<const std::size_t> axis_order);

/// True iff the case's polyline stays within [lower, upper] at every breakpoint.
bool envelope_contains(const Envelope& e, std::span<const double> x);

/// Upper/lower boundary values at parameter t of a strip (double precision).
std::pair<double, double> envelope_bounds_at(const EnvelopeStrip& s, double t);

/// Maximal runs in ascending score order.
struct ScoreRun {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::optional<std::string> label;  // set for pure runs
};

struct MulticlassOverlap {
  std::vector<std::string> class_order;  // by ascending class mean score
  std::vector<ScoreRun> overlap_intervals;
  std::vector<ScoreRun> pure_runs;
  bool fully_interleaved = false;
  /// Cases that are out of class order (they lie inside an overlap interval).
  std::vector<CaseId> misordered;
};

MulticlassOverlap multiclass_overlap_intervals(const ScoreVector& scores,
                                               std::span<const std::string> labels);

enum class Representativeness { representative, not_representative };

struct RepresentativenessResult {
  Representativeness verdict = Representativeness::representative;
  double ratio = 1.0;
};

RepresentativenessResult representativeness_test(const OverlapInterval& train,
                                                 const OverlapInterval& full, double rho = 0.8);

enum class ContainmentVerdict { proven_contained, shrink_advice, not_applicable };

struct ContainmentResult {
  ContainmentVerdict verdict = ContainmentVerdict::not_applicable;
  double score_bottom = 0.0;  // F(e_bot)
  double score_top = 0.0;     // F(e_top)
  /// For shrink_advice: the block shrunk along its diagonal e_bot -> e_top so
  /// that both new corner cases score inside [a,b]. Absent when no point of
  /// the diagonal scores inside the interval.
  std::optional<Hyperblock> shrunk;
};

/// With all coefficients positive, F over the block ranges over
/// [F(e_bot), F(e_top)], so endpoint checks decide containment.
ContainmentResult check_linear_containment(const LinearScorer& f, const Hyperblock& hb,
                                           const OverlapInterval& interval);

std::string to_string(BlockRole r);
std::string to_string(Representativeness r);
std::string to_string(ContainmentVerdict v);

}  // namespace civl
