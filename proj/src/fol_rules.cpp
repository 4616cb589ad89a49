#include <algorithm>
#include <limits>

#include "civl/csv.hpp"
#include "civl/error.hpp"
#include "civl/rules.hpp"

namespace civl {

bool monotonic_chain_holds(std::span<const double> x, std::span<const std::size_t> order) {
  if (order.size() < 2) throw Error("monotonic chain needs at least two attributes");
  for (std::size_t k = 0; k < order.size(); ++k)
    if (order[k] >= x.size()) throw Error("monotonic chain refers to a missing attribute");
  for (std::size_t k = 0; k + 1 < order.size(); ++k)
    if (!(x[order[k]] > x[order[k + 1]])) return false;
  return true;
}

std::map<std::string, ChainCounts> test_monotonic_chain(const Dataset& d,
                                                        std::span<const std::size_t> order) {
  std::map<std::string, ChainCounts> out;
  for (const auto& c : d.classes()) out[c];
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto& c = out[d.label(i)];
    ++c.total;
    if (monotonic_chain_holds(d.row(i), order)) ++c.satisfied;
  }
  return out;
}

std::optional<std::string> classify_monotonic(const MonotonicRule& r, std::span<const double> x) {
  if (monotonic_chain_holds(x, r.order)) return r.target;
  return std::nullopt;
}

bool SlopeRule::fires(std::span<const double> x) const {
  for (const auto& t : terms) {
    if (t.i >= x.size() || t.j >= x.size()) throw Error("slope rule refers to a missing attribute");
    const double diff = x[t.i] - x[t.j];
    if (t.direction == SlopeDirection::ge ? !(diff < t.threshold) : !(diff > t.threshold)) return false;
  }
  return true;
}

SlopeReport evaluate_slope_rules(const Dataset& d, const std::string& reference_class,
                                 const std::string& inferred_class,
                                 std::span<const SlopeTermSpec> terms) {
  SlopeReport rep;
  rep.reference_total = d.count_label(reference_class);
  rep.inferred_total = d.count_label(inferred_class);
  if (rep.reference_total == 0)
    throw Error("evaluate_slope_rules: reference class '" + reference_class + "' has no cases");
  if (rep.inferred_total == 0)
    throw Error("evaluate_slope_rules: inferred class '" + inferred_class + "' has no cases");

  SlopeRule& rule = rep.rule;
  rule.reference_class = reference_class;
  rule.inferred_class = inferred_class;
  rule.degenerate = terms.empty();
  for (const auto& spec : terms) {
    if (spec.i >= d.dim() || spec.j >= d.dim())
      throw Error("evaluate_slope_rules: attribute index out of range");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r = 0; r < d.size(); ++r) {
      if (d.label(r) != reference_class) continue;
      const double diff = d.at(r, spec.i) - d.at(r, spec.j);
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    rule.terms.push_back({spec.i, spec.j, spec.direction, spec.direction == SlopeDirection::ge ? lo : hi});
  }

  std::size_t fired = 0, correct = 0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    const bool is_ref = d.label(r) == reference_class;
    const bool is_inf = d.label(r) == inferred_class;
    if (!is_ref && !is_inf) continue;
    const bool f = rule.fires(d.row(r));
    if (f) ++fired;
    if (f && is_inf) ++rep.inferred_fired;
    if (f && is_ref) ++rep.false_fires;
    if (f == is_inf) ++correct;
  }
  rep.coverage = static_cast<double>(rep.inferred_fired) / static_cast<double>(rep.inferred_total);
  rep.precision = fired ? static_cast<double>(rep.inferred_fired) / static_cast<double>(fired) : 0.0;
  rep.accuracy = static_cast<double>(correct) /
                 static_cast<double>(rep.inferred_total + rep.reference_total);
  return rep;
}

std::string render_slope_rule(const SlopeRule& r, std::span<const std::string> attributes) {
  auto name = [&](std::size_t a) {
    return a < attributes.size() ? attributes[a] : "x" + std::to_string(a + 1);
  };
  std::string s = "If ";
  if (r.terms.empty()) s += "true";
  for (std::size_t k = 0; k < r.terms.size(); ++k) {
    const auto& t = r.terms[k];
    if (k) s += " & ";
    s += name(t.i) + "(w) - " + name(t.j) + "(w) " + (t.direction == SlopeDirection::ge ? "< " : "> ") +
         csv::format_double(t.threshold);
  }
  return s + " then w in " + r.inferred_class + " (thresholds from all " + r.reference_class + " cases)";
}

std::string render_monotonic_rule(const MonotonicRule& r, std::span<const std::string> attributes) {
  std::string s = "If ";
  for (std::size_t k = 0; k < r.order.size(); ++k) {
    if (k) s += " > ";
    s += r.order[k] < attributes.size() ? attributes[r.order[k]] : "x" + std::to_string(r.order[k] + 1);
    s += "(x)";
  }
  return s + " then x in " + r.target;
}

}  // namespace civl
