#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "civl/error.hpp"
#include "civl/kernels.hpp"
#include "civl/overlap.hpp"

namespace civl {

bool Hyperblock::contains(std::span<const double> x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (x[k] < lo[k] || x[k] > hi[k]) return false;
  return true;
}

std::string to_string(BlockRole r) {
  return r == BlockRole::overlap_area ? "overlap_area" : "pure_rectangle";
}

std::string to_string(Representativeness r) {
  return r == Representativeness::representative ? "representative" : "not_representative";
}

std::string to_string(ContainmentVerdict v) {
  switch (v) {
    case ContainmentVerdict::proven_contained: return "proven_contained";
    case ContainmentVerdict::shrink_advice: return "shrink_advice";
    case ContainmentVerdict::not_applicable: return "not_applicable";
  }
  return "not_applicable";
}

namespace {

void check_aligned(const ScoreVector& scores, std::span<const std::string> labels) {
  if (scores.scores.size() != labels.size() || scores.case_ids.size() != labels.size())
    throw Error("scores and labels are not aligned (" + std::to_string(scores.size()) + " vs " +
                std::to_string(labels.size()) + ")");
}

bool is_top(const std::string& label, const Cut& cut) {
  if (label == cut.top_class) return true;
  if (label == cut.bottom_class) return false;
  throw Error("label '" + label + "' is neither '" + cut.top_class + "' nor '" + cut.bottom_class + "'");
}

}  // namespace

std::vector<CaseId> find_misclassified(const ScoreVector& scores,
                                       std::span<const std::string> labels, const Cut& cut) {
  check_aligned(scores, labels);
  std::vector<CaseId> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (cut.decide(scores.scores[i]) != labels[i]) {
      is_top(labels[i], cut);
      out.push_back(scores.case_ids[i]);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CaseId> purity_violations(const OverlapInterval& iv, const ScoreVector& scores,
                                      std::span<const std::string> labels, const Cut& cut) {
  check_aligned(scores, labels);
  std::vector<CaseId> bad;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double s = scores.scores[i];
    const bool top = is_top(labels[i], cut);
    if (iv.empty) {
      if (cut.decide(s) != labels[i]) bad.push_back(scores.case_ids[i]);
      continue;
    }
    if ((s < iv.a && top) || (s > iv.b && !top)) bad.push_back(scores.case_ids[i]);
  }
  return bad;
}

OverlapInterval compute_overlap_interval(const ScoreVector& scores,
                                         std::span<const std::string> labels, const Cut& cut) {
  check_aligned(scores, labels);
  OverlapInterval iv;
  bool have_c = false, have_d = false;
  double a = 0.0, b = 0.0;
  CaseId c = 0, d = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double s = scores.scores[i];
    const CaseId id = scores.case_ids[i];
    const bool top = is_top(labels[i], cut);
    if (top && !(s > cut.threshold)) {
      if (!have_c || s < a || (s == a && id < c)) {
        a = s;
        c = id;
        have_c = true;
      }
    } else if (!top && s > cut.threshold) {
      if (!have_d || s > b || (s == b && id < d)) {
        b = s;
        d = id;
        have_d = true;
      }
    }
  }
  if (!have_c && !have_d) {
    iv.a = iv.b = cut.threshold;
    iv.empty = true;
    return iv;
  }
  iv.empty = false;
  iv.one_sided = !(have_c && have_d);
  iv.a = have_c ? a : cut.threshold;
  iv.b = have_d ? b : cut.threshold;
  if (have_c) iv.case_c = c;
  if (have_d) iv.case_d = d;
  if (!purity_violations(iv, scores, labels, cut).empty())
    throw std::logic_error("overlap interval construction violated the purity conditions");
  return iv;
}

Hyperblock compute_overlap_hyperblock(const Dataset& d, std::span<const CaseId> cases) {
  if (cases.empty())
    throw Error("compute_overlap_hyperblock: no misclassified cases (the overlap interval is empty)");
  std::vector<std::size_t> rows;
  rows.reserve(cases.size());
  for (CaseId id : cases) {
    auto idx = d.index_of(id);
    if (!idx) throw Error("compute_overlap_hyperblock: unknown case id " + std::to_string(id));
    rows.push_back(*idx);
  }
  Hyperblock hb;
  hb.lo.resize(d.dim());
  hb.hi.resize(d.dim());
  kernels::column_bounds(d.values(), d.dim(), rows, hb.lo, hb.hi);
  hb.role = BlockRole::overlap_area;
  hb.provenance = "misclassified(" + std::to_string(cases.size()) + ")";
  return hb;
}

std::vector<CaseId> cases_in_block(const Dataset& d, const Hyperblock& hb) {
  if (hb.dim() != d.dim()) throw Error("cases_in_block: block dimension does not match dataset");
  std::vector<std::uint8_t> inside(d.size());
  kernels::box_membership(d.values(), d.dim(), hb.lo, hb.hi, inside);
  std::vector<CaseId> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (inside[i]) out.push_back(d.case_id(i));
  return out;
}

// ---------------------------------------------------------------------------
// Multi-class run scan

MulticlassOverlap multiclass_overlap_intervals(const ScoreVector& scores,
                                               std::span<const std::string> labels) {
  check_aligned(scores, labels);
  const std::size_t n = labels.size();
  MulticlassOverlap out;

  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = sums[labels[i]];
    e.first += scores.scores[i];
    e.second += 1;
  }
  if (sums.size() < 2) throw Error("multiclass_overlap_intervals: needs at least 2 classes");
  std::vector<std::pair<double, std::string>> means;
  for (auto& [label, e] : sums) means.push_back({e.first / static_cast<double>(e.second), label});
  std::stable_sort(means.begin(), means.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::map<std::string, std::size_t> rank;
  for (std::size_t r = 0; r < means.size(); ++r) {
    out.class_order.push_back(means[r].second);
    rank[means[r].second] = r;
  }
  const std::size_t k = means.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (scores.scores[x] != scores.scores[y]) return scores.scores[x] < scores.scores[y];
    if (rank[labels[x]] != rank[labels[y]]) return rank[labels[x]] < rank[labels[y]];
    return scores.case_ids[x] < scores.case_ids[y];
  });
  std::vector<double> s(n);
  std::vector<std::size_t> r(n);
  for (std::size_t p = 0; p < n; ++p) {
    s[p] = scores.scores[order[p]];
    r[p] = rank[labels[order[p]]];
  }

  // A mixed span joins every out-of-order pair (higher-ranked class scoring
  // below a lower-ranked one) and every cross-class score tie.
  std::vector<std::pair<double, double>> spans;
  std::vector<bool> misordered(n, false);
  std::vector<std::size_t> first_rank_pos(k, n);  // first position holding each rank
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t first_greater = n;
    for (std::size_t q = r[p] + 1; q < k; ++q) first_greater = std::min(first_greater, first_rank_pos[q]);
    if (first_greater < n && s[first_greater] < s[p]) {
      spans.push_back({s[first_greater], s[p]});
      misordered[p] = true;
    }
    if (first_rank_pos[r[p]] == n) first_rank_pos[r[p]] = p;
  }
  // The earlier partner of each out-of-order pair: a later, strictly higher
  // score with a lower rank.
  {
    std::size_t suffix_min = k;  // over strictly higher scores
    for (std::size_t end = n; end > 0;) {
      std::size_t begin = end;
      while (begin > 0 && s[begin - 1] == s[end - 1]) --begin;
      std::size_t group_min = k;
      for (std::size_t p = begin; p < end; ++p) {
        if (suffix_min < r[p]) misordered[p] = true;
        group_min = std::min(group_min, r[p]);
      }
      suffix_min = std::min(suffix_min, group_min);
      end = begin;
    }
  }
  for (std::size_t p = 0; p < n;) {
    std::size_t q = p;
    while (q < n && s[q] == s[p]) ++q;
    if (r[q - 1] != r[p]) {
      spans.push_back({s[p], s[p]});
      for (std::size_t t = p; t < q; ++t) misordered[t] = true;
    }
    p = q;
  }

  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<double, double>> merged;
  for (auto& sp : spans) {
    if (!merged.empty() && sp.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, sp.second);
    else
      merged.push_back(sp);
  }

  std::size_t m = 0;
  std::optional<ScoreRun> run;
  auto flush = [&] {
    if (run) out.pure_runs.push_back(*run);
    run.reset();
  };
  for (std::size_t p = 0; p < n; ++p) {
    while (m < merged.size() && merged[m].second < s[p]) ++m;
    const bool inside = m < merged.size() && merged[m].first <= s[p];
    if (inside) {
      flush();
      continue;
    }
    const std::string& label = labels[order[p]];
    if (run && *run->label == label) {
      run->hi = s[p];
      ++run->count;
    } else {
      flush();
      run = ScoreRun{s[p], s[p], 1, label};
    }
  }
  flush();

  for (auto& [lo, hi] : merged) {
    ScoreRun iv{lo, hi, 0, std::nullopt};
    for (std::size_t p = 0; p < n; ++p)
      if (lo <= s[p] && s[p] <= hi) ++iv.count;
    out.overlap_intervals.push_back(iv);
  }
  out.fully_interleaved = n > 0 && merged.size() == 1 && merged[0].first <= s.front() &&
                          merged[0].second >= s.back();
  for (std::size_t p = 0; p < n; ++p)
    if (misordered[p]) out.misordered.push_back(scores.case_ids[order[p]]);
  std::sort(out.misordered.begin(), out.misordered.end());
  return out;
}

// ---------------------------------------------------------------------------
// Representativeness and containment

RepresentativenessResult representativeness_test(const OverlapInterval& train,
                                                 const OverlapInterval& full, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw Error("representativeness_test: rho must lie in (0,1]");
  if (full.empty && !train.empty)
    throw Error("representativeness_test: inconsistent inputs (full-data interval empty, training interval not)");
  RepresentativenessResult res;
  if (train.empty && !full.empty)
    res.ratio = 0.0;
  else if (full.length() == 0.0)
    res.ratio = 1.0;
  else
    res.ratio = train.length() / full.length();
  res.verdict = res.ratio < rho ? Representativeness::not_representative
                                : Representativeness::representative;
  return res;
}

ContainmentResult check_linear_containment(const LinearScorer& f, const Hyperblock& hb,
                                           const OverlapInterval& interval) {
  if (f.coefficients.size() != hb.dim())
    throw Error("check_linear_containment: scorer and block dimensions differ");
  ContainmentResult res;
  res.score_bottom = f.score(hb.lo);
  res.score_top = f.score(hb.hi);
  if (std::any_of(f.coefficients.begin(), f.coefficients.end(), [](double c) { return !(c > 0.0); })) {
    res.verdict = ContainmentVerdict::not_applicable;
    return res;
  }
  if (interval.contains(res.score_bottom) && interval.contains(res.score_top)) {
    res.verdict = ContainmentVerdict::proven_contained;
    return res;
  }
  res.verdict = ContainmentVerdict::shrink_advice;
  if (interval.empty) return res;

  // F is affine along the diagonal e_bot + t (e_top - e_bot), rising from
  // score_bottom to score_top; keep the t-range scoring inside [a,b].
  const double fb = res.score_bottom, ft = res.score_top;
  double t0 = 0.0, t1 = 1.0;
  if (ft > fb) {
    t0 = std::max(0.0, (interval.a - fb) / (ft - fb));
    t1 = std::min(1.0, (interval.b - fb) / (ft - fb));
  } else if (!interval.contains(fb)) {
    return res;
  }
  if (t0 > t1) return res;
  Hyperblock shrunk = hb;
  for (std::size_t k = 0; k < hb.dim(); ++k) {
    const double span = hb.hi[k] - hb.lo[k];
    shrunk.lo[k] = hb.lo[k] + t0 * span;
    shrunk.hi[k] = hb.lo[k] + t1 * span;
  }
  shrunk.provenance = hb.provenance + "+shrunk";
  res.shrunk = std::move(shrunk);
  return res;
}

}  // namespace civl
