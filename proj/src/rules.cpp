#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "civl/csv.hpp"
#include "civl/error.hpp"
#include "civl/rules.hpp"

namespace civl {

namespace {

std::string pct(double share) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g%%", share * 100.0);
  return buf;
}

std::string rule_name(std::size_t iteration, std::size_t j) {
  if (iteration < 10 && j < 10) return std::to_string(iteration) + std::to_string(j);
  return std::to_string(iteration) + "." + std::to_string(j);
}

std::string attr_name(std::span<const std::string> attributes, std::size_t a) {
  return a < attributes.size() ? attributes[a] : "x" + std::to_string(a + 1);
}

std::string render_conditions(const IntervalRule& r, std::span<const std::string> attributes) {
  std::string s;
  for (std::size_t k = 0; k < r.conditions.size(); ++k) {
    const auto& c = r.conditions[k];
    if (k) s += " & ";
    s += csv::format_double(c.lo) + " <= " + attr_name(attributes, c.attribute) +
         "(x) <= " + csv::format_double(c.hi);
  }
  return s.empty() ? "true" : s;
}

std::string majority_label(const std::vector<std::string>& labels) {
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  std::string best;
  std::size_t best_n = 0;
  for (const auto& [l, n] : counts)
    if (n > best_n) {
      best = l;
      best_n = n;
    }
  return best;
}

void fill_shares(IntervalRule& r, const Dataset& snapshot) {
  const std::size_t in_class = snapshot.count_label(r.label);
  r.class_share = in_class ? static_cast<double>(r.coverage) / static_cast<double>(in_class) : 0.0;
  r.dataset_share =
      snapshot.size() ? static_cast<double>(r.coverage) / static_cast<double>(snapshot.size()) : 0.0;
}

}  // namespace

bool IntervalRule::matches(std::span<const double> x) const {
  for (const auto& c : conditions) {
    if (c.attribute >= x.size()) throw Error("rule refers to attribute " + std::to_string(c.attribute) +
                                             " but the case has " + std::to_string(x.size()));
    if (!c.contains(x[c.attribute])) return false;
  }
  return true;
}

std::vector<IntervalRule> discover_pure_intervals(const Dataset& d, std::size_t attribute,
                                                  std::size_t min_coverage) {
  if (min_coverage < 1) throw Error("discover_pure_intervals: min_coverage must be at least 1");
  if (attribute >= d.dim())
    throw Error("discover_pure_intervals: attribute index " + std::to_string(attribute) + " out of range");
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) { return d.at(x, attribute) < d.at(y, attribute); });

  std::vector<IntervalRule> out;
  std::optional<IntervalRule> run;
  auto close = [&] {
    if (run && run->coverage >= min_coverage) {
      fill_shares(*run, d);
      out.push_back(std::move(*run));
    }
    run.reset();
  };
  for (std::size_t g = 0; g < idx.size();) {
    const double v = d.at(idx[g], attribute);
    std::size_t e = g;
    bool pure = true;
    while (e < idx.size() && d.at(idx[e], attribute) == v) {
      if (d.label(idx[e]) != d.label(idx[g])) pure = false;
      ++e;
    }
    if (!pure) {
      close();
    } else {
      const std::string& lab = d.label(idx[g]);
      if (run && run->label != lab) close();
      if (!run) {
        run.emplace();
        run->label = lab;
        run->conditions.push_back({attribute, v, v});
      }
      run->conditions[0].hi = v;
      run->coverage += e - g;
    }
    g = e;
  }
  close();
  return out;
}

std::set<CaseId> covered_cases(const IntervalRule& r, const Dataset& d) {
  std::set<CaseId> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (r.matches(d.row(i))) out.insert(d.case_id(i));
  return out;
}

bool rule_rank_less(const IntervalRule& x, const IntervalRule& y) {
  if (x.coverage != y.coverage) return x.coverage > y.coverage;
  auto key = [](const IntervalRule& r) {
    std::vector<std::tuple<std::size_t, double, double>> k;
    for (const auto& c : r.conditions) k.emplace_back(c.attribute, c.lo, c.hi);
    return k;
  };
  auto kx = key(x), ky = key(y);
  if (kx != ky) return kx < ky;
  return x.label < y.label;
}

std::vector<IntervalRule> prune_redundant(std::vector<IntervalRule> rules, const Dataset& d) {
  std::stable_sort(rules.begin(), rules.end(), rule_rank_less);
  std::vector<IntervalRule> kept;
  std::set<CaseId> covered;
  for (auto& r : rules) {
    const auto mine = covered_cases(r, d);
    if (std::includes(covered.begin(), covered.end(), mine.begin(), mine.end())) continue;
    covered.insert(mine.begin(), mine.end());
    kept.push_back(std::move(r));
  }
  return kept;
}

std::string to_string(FallbackKind k) {
  switch (k) {
    case FallbackKind::abstain: return "abstain";
    case FallbackKind::majority_class: return "majority_class";
    case FallbackKind::user_merge: return "user_merge";
  }
  return "abstain";
}

FallbackKind fallback_kind_from_string(const std::string& s) {
  if (s == "abstain") return FallbackKind::abstain;
  if (s == "majority_class") return FallbackKind::majority_class;
  if (s == "user_merge") return FallbackKind::user_merge;
  throw Error("unknown fallback kind '" + s + "'");
}

std::size_t DecisionList::iterations() const {
  std::size_t m = 0;
  for (const auto& r : rules) m = std::max(m, r.iteration);
  return m;
}

std::optional<std::size_t> DecisionList::first_match(std::span<const double> x) const {
  for (std::size_t k = 0; k < rules.size(); ++k)
    if (rules[k].matches(x)) return k;
  return std::nullopt;
}

std::optional<std::string> DecisionList::classify(std::span<const double> x) const {
  if (auto k = first_match(x)) return rules[*k].label;
  if (fallback.kind == FallbackKind::abstain) return std::nullopt;
  return fallback.label;
}

std::vector<std::size_t> recount_coverage(const DecisionList& dl, const Dataset& d) {
  std::vector<std::size_t> counts(dl.rules.size(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    std::optional<std::size_t> active;
    for (std::size_t k = 0; k < dl.rules.size(); ++k) {
      const auto& r = dl.rules[k];
      if (active && r.iteration != *active) break;
      if (r.matches(x)) {
        active = r.iteration;
        ++counts[k];
      }
    }
  }
  return counts;
}

std::string render_rules(const DecisionList& dl) {
  std::ostringstream os;
  std::size_t current = 0, j = 0;
  for (const auto& r : dl.rules) {
    if (r.iteration != current) {
      if (current != 0)
        os << "Iteration " << r.iteration << " (only when no earlier rule matched)\n";
      else
        os << "Iteration " << r.iteration << "\n";
      current = r.iteration;
      j = 0;
    }
    ++j;
    const std::string n = rule_name(r.iteration, j);
    os << "  Int" << n << "(x) := " << render_conditions(r, dl.attributes) << "\n";
    os << "  R" << n << ": If Int" << n << "(x) = true then L = " << r.label << "   [" << r.coverage
       << " cases, " << pct(r.class_share) << " of class, " << pct(r.dataset_share) << " of data]\n";
  }
  os << "Otherwise: ";
  if (dl.fallback.kind == FallbackKind::abstain)
    os << "abstain\n";
  else
    os << "L = " << dl.fallback.label << " (" << to_string(dl.fallback.kind) << ")\n";
  return os.str();
}

std::size_t default_min_coverage(const Dataset& d) {
  std::size_t smallest = 0;
  bool first = true;
  for (const auto& c : d.classes()) {
    const std::size_t n = d.count_label(c);
    if (first || n < smallest) smallest = n;
    first = false;
  }
  return std::max<std::size_t>(3, (smallest * 5 + 99) / 100);
}

DncResult dnc_run(const Dataset& d, const DncOptions& options) {
  DncResult res;
  res.min_coverage = options.min_coverage.value_or(default_min_coverage(d));
  if (res.min_coverage < 1) throw Error("dnc_run: min_coverage must be at least 1");
  res.list.attributes = d.attributes();

  Dataset remaining = d;
  for (std::size_t it = 1; it <= options.max_iterations && !remaining.empty(); ++it) {
    std::vector<IntervalRule> candidates;
    for (std::size_t a = 0; a < remaining.dim(); ++a) {
      auto found = discover_pure_intervals(remaining, a, res.min_coverage);
      candidates.insert(candidates.end(), found.begin(), found.end());
    }
    candidates = prune_redundant(std::move(candidates), remaining);
    for (auto& c : candidates) c.iteration = it;

    std::vector<IntervalRule> accepted =
        options.hook ? options.hook(it, remaining, candidates) : candidates;
    if (accepted.empty()) break;

    std::set<CaseId> removed;
    for (auto& r : accepted) {
      const auto cov = covered_cases(r, remaining);
      std::vector<CaseId> violators;
      for (CaseId id : cov)
        if (remaining.label(*remaining.index_of(id)) != r.label) violators.push_back(id);
      if (!violators.empty()) {
        std::string ids;
        for (CaseId v : violators) ids += (ids.empty() ? "" : ",") + std::to_string(v);
        throw Error("dnc_run: accepted rule for " + r.label + " is not pure; violating case ids " + ids);
      }
      if (cov.empty()) throw Error("dnc_run: accepted rule covers no remaining case");
      r.iteration = it;
      r.coverage = cov.size();
      fill_shares(r, remaining);
      removed.insert(cov.begin(), cov.end());
    }
    res.list.rules.insert(res.list.rules.end(), accepted.begin(), accepted.end());
    remaining = remove_covered(remaining, removed);
  }

  res.leftovers = remaining.case_ids();
  if (options.fallback) {
    res.list.fallback = *options.fallback;
  } else if (options.hook && !res.leftovers.empty()) {
    res.list.fallback = {FallbackKind::abstain, ""};
  } else {
    res.list.fallback = {FallbackKind::majority_class,
                         majority_label(remaining.empty() ? d.labels() : remaining.labels())};
  }
  return res;
}

std::optional<std::string> GeneralizedDt::classify(std::span<const double> x) const {
  for (const auto& level : levels)
    for (const auto& leaf : level.leaves)
      if (leaf.matches(x)) return leaf.label;
  if (fallback.kind == FallbackKind::abstain) return std::nullopt;
  return fallback.label;
}

std::string GeneralizedDt::render() const {
  std::ostringstream os;
  os << "root\n";
  std::string indent;
  for (const auto& level : levels) {
    for (const auto& leaf : level.leaves)
      os << indent << "+- [" << render_conditions(leaf, attributes) << "] -> " << leaf.label << " ("
         << leaf.coverage << " cases)\n";
    os << indent << "+- else\n";
    indent += "   ";
  }
  os << indent << "+- ";
  if (fallback.kind == FallbackKind::abstain)
    os << "abstain\n";
  else
    os << fallback.label << " (" << to_string(fallback.kind) << ")\n";
  return os.str();
}

GeneralizedDt to_generalized_dt(const DecisionList& dl) {
  GeneralizedDt t;
  t.attributes = dl.attributes;
  t.fallback = dl.fallback;
  for (const auto& r : dl.rules) {
    if (t.levels.empty() || t.levels.back().iteration != r.iteration)
      t.levels.push_back({r.iteration, {}});
    t.levels.back().leaves.push_back(r);
  }
  return t;
}

}  // namespace civl
