#include "civl/scorers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "civl/csv.hpp"
#include "civl/error.hpp"
#include "civl/kernels.hpp"

namespace civl {

double LinearScorer::score(std::span<const double> x) const {
  if (x.size() != coefficients.size())
    throw Error("scorer expects " + std::to_string(coefficients.size()) + " attributes, got " +
                std::to_string(x.size()));
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc = acc + x[k] * coefficients[k];
  return acc;
}

ScoreVector score_dataset(const LinearScorer& f, const Dataset& d) {
  if (f.coefficients.size() != d.dim())
    throw Error("scorer has " + std::to_string(f.coefficients.size()) +
                " coefficients but dataset has " + std::to_string(d.dim()) + " attributes");
  ScoreVector out;
  out.case_ids = d.case_ids();
  out.scores.resize(d.size());
  out.provenance = f.provenance == Provenance::imported ? Provenance::imported : Provenance::trained;
  kernels::dot_rows(d.values(), d.dim(), f.coefficients, out.scores);
  return out;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::trained: return "trained";
    case Provenance::imported: return "imported";
    case Provenance::reduced: return "reduced";
  }
  return "trained";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "trained") return Provenance::trained;
  if (s == "imported") return Provenance::imported;
  if (s == "reduced") return Provenance::reduced;
  throw Error("unknown provenance '" + s + "'");
}

// ---------------------------------------------------------------------------
// Thresholds

namespace {

// Midpoint that still separates lo from hi when the two are adjacent doubles.
double split_point(double lo, double hi) {
  const double t = std::midpoint(lo, hi);
  return t < hi ? t : lo;
}

// Distinct score value with the number of top/bottom cases at it.
struct Group {
  double value;
  std::size_t top = 0;
  std::size_t bottom = 0;
};

std::vector<Group> group_scores(std::span<const double> scores,
                                std::span<const std::string> labels, const std::string& top,
                                const std::string& bottom) {
  if (scores.size() != labels.size()) throw Error("select_threshold: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<Group> groups;
  for (std::size_t i : order) {
    const bool is_top = labels[i] == top;
    if (!is_top && labels[i] != bottom)
      throw Error("label '" + labels[i] + "' is neither '" + top + "' nor '" + bottom + "'");
    if (groups.empty() || groups.back().value != scores[i]) groups.push_back({scores[i]});
    (is_top ? groups.back().top : groups.back().bottom) += 1;
  }
  return groups;
}

}  // namespace

ThresholdChoice select_threshold(std::span<const double> scores,
                                 std::span<const std::string> labels, const std::string& top,
                                 const std::string& bottom, ThresholdStrategy strategy) {
  auto groups = group_scores(scores, labels, top, bottom);
  std::size_t total_top = 0, total_bottom = 0;
  for (auto& g : groups) {
    total_top += g.top;
    total_bottom += g.bottom;
  }
  if (total_top == 0 || total_bottom == 0)
    throw Error("select_threshold: needs at least one case of '" + top + "' and of '" + bottom + "'");
  if (groups.size() == 1) return {groups[0].value, total_top, true};

  // Threshold between groups[g] and groups[g+1]; groups above are predicted top.
  struct Slot {
    double threshold;
    double gap;
    std::size_t errors;
    bool class_boundary;
  };
  std::vector<Slot> slots;
  std::size_t top_below = 0, bottom_below = 0;
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
    top_below += groups[g].top;
    bottom_below += groups[g].bottom;
    const auto& lo = groups[g];
    const auto& hi = groups[g + 1];
    const bool both_bottom = lo.top == 0 && hi.top == 0;
    const bool both_top = lo.bottom == 0 && hi.bottom == 0;
    slots.push_back({split_point(lo.value, hi.value), hi.value - lo.value,
                     top_below + (total_bottom - bottom_below), !(both_bottom || both_top)});
  }

  const Slot* best = &slots.front();
  if (strategy == ThresholdStrategy::min_error) {
    for (const auto& s : slots)
      if (s.errors < best->errors || (s.errors == best->errors && s.gap > best->gap)) best = &s;
  } else {
    const bool any_boundary =
        std::any_of(slots.begin(), slots.end(), [](const Slot& s) { return s.class_boundary; });
    best = nullptr;
    for (const auto& s : slots) {
      if (any_boundary && !s.class_boundary) continue;
      if (!best || s.gap > best->gap) best = &s;
    }
  }
  return {best->threshold, best->errors, false};
}

// ---------------------------------------------------------------------------
// Fisher discriminant

namespace {

std::string attribute_list(const Dataset& d) {
  std::string s;
  for (std::size_t a = 0; a < d.dim(); ++a) s += (a ? "," : "") + d.attributes()[a];
  return s;
}

}  // namespace

std::vector<double> fisher_direction(const Dataset& d, const std::string& top,
                                     const std::string& bottom,
                                     std::span<const double> case_weights) {
  const std::size_t m = d.dim();
  if (!case_weights.empty() && case_weights.size() != d.size())
    throw Error("fisher_direction: one weight per case required");
  Eigen::VectorXd mu_t = Eigen::VectorXd::Zero(m), mu_b = Eigen::VectorXd::Zero(m);
  double wt = 0.0, wb = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double w = case_weights.empty() ? 1.0 : case_weights[i];
    Eigen::Map<const Eigen::VectorXd> x(d.row(i).data(), static_cast<Eigen::Index>(m));
    if (d.label(i) == top) {
      mu_t += w * x;
      wt += w;
      ++n;
    } else if (d.label(i) == bottom) {
      mu_b += w * x;
      wb += w;
      ++n;
    }
  }
  if (wt <= 0.0 || wb <= 0.0)
    throw Error("Fisher discriminant needs cases of both '" + top + "' and '" + bottom + "'");
  mu_t /= wt;
  mu_b /= wb;
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const bool is_top = d.label(i) == top;
    if (!is_top && d.label(i) != bottom) continue;
    const double w = case_weights.empty() ? 1.0 : case_weights[i];
    Eigen::Map<const Eigen::VectorXd> x(d.row(i).data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd dev = x - (is_top ? mu_t : mu_b);
    sw.noalias() += w * dev * dev.transpose();
  }
  const double lambda = 1e-6 * sw.trace() / static_cast<double>(n);
  sw.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(sw);
  if (lambda <= 0.0 || llt.info() != Eigen::Success)
    throw Error("Fisher discriminant: within-class scatter is singular over attributes {" +
                attribute_list(d) + "}");
  Eigen::VectorXd dir = llt.solve(mu_t - mu_b);
  if (!dir.allFinite())
    throw Error("Fisher discriminant: solve failed over attributes {" + attribute_list(d) + "}");
  return {dir.data(), dir.data() + dir.size()};
}

LinearScorer train_fisher(const Dataset& d, const std::string& top, const std::string& bottom) {
  if (top == bottom) throw Error("train_fisher: top and bottom class must differ");
  std::vector<std::string> pair{top, bottom};
  Dataset two = select_classes(d, pair);
  if (two.count_label(top) < 2 || two.count_label(bottom) < 2)
    throw Error("train_fisher: needs at least 2 cases of '" + top + "' and of '" + bottom + "'");

  LinearScorer f;
  f.coefficients = fisher_direction(two, top, bottom);
  f.top_class = top;
  f.bottom_class = bottom;
  f.provenance = Provenance::trained;

  auto s = score_dataset(f, two);
  double mt = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < two.size(); ++i) (two.label(i) == top ? mt : mb) += s.scores[i];
  if (mt / static_cast<double>(two.count_label(top)) < mb / static_cast<double>(two.count_label(bottom))) {
    for (double& c : f.coefficients) c = -c;
    for (double& v : s.scores) v = -v;
  }
  f.threshold = select_threshold(s.scores, two.labels(), top, bottom, ThresholdStrategy::min_error).threshold;
  return f;
}

LinearScorer reduce_pair(const LinearScorer& f1, const LinearScorer& f2) {
  if (f1.coefficients.size() != f2.coefficients.size())
    throw Error("reduce_pair: dimension mismatch (" + std::to_string(f1.coefficients.size()) +
                " vs " + std::to_string(f2.coefficients.size()) + ")");
  LinearScorer f;
  f.coefficients.resize(f1.coefficients.size());
  for (std::size_t k = 0; k < f.coefficients.size(); ++k)
    f.coefficients[k] = f1.coefficients[k] - f2.coefficients[k];
  f.threshold = 0.0;
  f.top_class = f1.top_class;
  f.bottom_class = f2.top_class;
  f.provenance = Provenance::reduced;
  return f;
}

// ---------------------------------------------------------------------------
// Imported scores

ScoreVector import_scores(const Dataset& d, std::istream& in) {
  auto records = csv::read(in);
  if (records.empty()) throw Error("import_scores: missing header row");
  const auto& header = records[0].fields;
  auto find = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(std::string("import_scores: header lacks '") + name + "' column");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = find("case_id"), score_col = find("score");

  std::vector<double> scores(d.size());
  std::vector<bool> seen(d.size(), false);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != header.size())
      throw Error("import_scores: row " + std::to_string(r) + " has " + std::to_string(f.size()) +
                  " fields, expected " + std::to_string(header.size()));
    CaseId id = 0;
    const std::string& id_text = f[id_col];
    auto res = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (res.ec != std::errc{} || res.ptr != id_text.data() + id_text.size())
      throw Error("import_scores: row " + std::to_string(r) + ": bad case_id '" + id_text + "'");
    auto idx = d.index_of(id);
    if (!idx) throw Error("import_scores: unknown case id " + std::to_string(id));
    if (seen[*idx]) throw Error("import_scores: duplicate case id " + std::to_string(id));
    double v = 0.0;
    if (!csv::parse_double(f[score_col], v))
      throw Error("import_scores: row " + std::to_string(r) + ": bad score '" + f[score_col] + "'");
    scores[*idx] = v;
    seen[*idx] = true;
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!seen[i]) throw Error("import_scores: missing score for case id " + std::to_string(d.case_id(i)));
  return {d.case_ids(), std::move(scores), Provenance::imported};
}

ScoreVector import_scores_file(const Dataset& d, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return import_scores(d, in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

ScoreVector import_score_column(const Dataset& d, std::span<const double> column) {
  if (column.size() != d.size())
    throw Error("import_score_column: " + std::to_string(column.size()) + " scores for " +
                std::to_string(d.size()) + " cases");
  for (double v : column)
    if (!std::isfinite(v)) throw Error("import_score_column: non-finite score");
  return {d.case_ids(), {column.begin(), column.end()}, Provenance::imported};
}

void write_scores_csv(std::ostream& out, const Dataset& d, const ScoreVector& s) {
  out << "case_id," << csv::escape(d.label_name()) << ",score\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto idx = d.index_of(s.case_ids[i]);
    out << s.case_ids[i] << ',' << csv::escape(idx ? d.label(*idx) : std::string()) << ','
        << csv::format_double(s.scores[i]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Weighted-accuracy overlap scorer

namespace {

std::vector<double> case_weights(const Dataset& d, const std::set<CaseId>& formerly_mis,
                                 const OverlapWeights& w) {
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    out[i] = formerly_mis.count(d.case_id(i)) ? w.formerly_misclassified : w.other;
  return out;
}

// Deterministic weighted pocket perceptron on centered data. Returns the
// pocketed direction (the bias is discarded; thresholds are swept afterwards).
std::vector<double> pocket_perceptron(const Dataset& d, std::span<const double> weights,
                                      const std::string& top) {
  const std::size_t n = d.size(), m = d.dim();
  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) mean[k] += d.at(i, k);
  for (double& v : mean) v /= static_cast<double>(n);

  std::vector<double> w(m, 0.0), best_w = w;
  double b = 0.0, best_score = -1.0;
  const std::size_t max_epochs = std::clamp<std::size_t>(2'000'000 / std::max<std::size_t>(n, 1), 50, 5000);
  auto objective = [&](const std::vector<double>& ww, double bb) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double f = bb;
      for (std::size_t k = 0; k < m; ++k) f += ww[k] * (d.at(i, k) - mean[k]);
      const bool pred_top = f > 0.0;
      if (pred_top == (d.label(i) == top)) s += weights[i];
    }
    return s;
  };
  for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
    bool updated = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = d.label(i) == top ? 1.0 : -1.0;
      double f = b;
      for (std::size_t k = 0; k < m; ++k) f += w[k] * (d.at(i, k) - mean[k]);
      if (y * f <= 0.0) {
        for (std::size_t k = 0; k < m; ++k) w[k] += weights[i] * y * (d.at(i, k) - mean[k]);
        b += weights[i] * y;
        updated = true;
      }
    }
    const double s = objective(w, b);
    if (s > best_score) {
      best_score = s;
      best_w = w;
    }
    if (!updated) break;
  }
  return best_w;
}

bool better_fit(const WeightedFit& a, const WeightedFit& b) {
  if (a.weighted_accuracy != b.weighted_accuracy) return a.weighted_accuracy > b.weighted_accuracy;
  if (a.correct != b.correct) return a.correct > b.correct;
  return a.margin > b.margin;
}

}  // namespace

WeightedFit best_threshold_for_direction(const Dataset& overlap,
                                         const std::set<CaseId>& formerly_mis,
                                         const OverlapWeights& w, const std::string& top,
                                         const std::string& bottom,
                                         std::span<const double> direction) {
  const std::size_t n = overlap.size();
  LinearScorer f;
  f.coefficients.assign(direction.begin(), direction.end());
  f.top_class = top;
  f.bottom_class = bottom;
  const auto scores = score_dataset(f, overlap).scores;
  const auto weights = case_weights(overlap, formerly_mis, w);
  double norm = 0.0;
  for (double c : direction) norm += c * c;
  norm = std::sqrt(norm);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Threshold candidates: below everything, between each pair of distinct
  // scores, above everything. Cases strictly above T are predicted top.
  double total_top_w = 0.0;
  std::size_t total_top = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (overlap.label(i) == top) {
      total_top_w += weights[i];
      ++total_top;
    }

  WeightedFit best;
  bool have = false;
  auto consider = [&](double t, double aw, std::size_t correct, double margin) {
    WeightedFit cand;
    cand.weighted_accuracy = aw;
    cand.correct = correct;
    cand.margin = norm > 0.0 ? margin / norm : 0.0;
    if (!have || better_fit(cand, best)) {
      cand.scorer = f;
      cand.scorer.threshold = t;
      best = std::move(cand);
      have = true;
    }
  };

  const double lo = scores[order.front()], hi = scores[order.back()];
  consider(lo - 1.0, total_top_w, total_top, 1.0);
  double bottom_below_w = 0.0, top_below_w = 0.0;
  std::size_t bottom_below = 0, top_below = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t i = order[p];
    if (overlap.label(i) == top) {
      top_below_w += weights[i];
      ++top_below;
    } else {
      bottom_below_w += weights[i];
      ++bottom_below;
    }
    if (p + 1 < n && scores[order[p + 1]] == scores[i]) continue;
    const double aw = bottom_below_w + (total_top_w - top_below_w);
    const std::size_t correct = bottom_below + (total_top - top_below);
    if (p + 1 < n) {
      const double next = scores[order[p + 1]];
      consider(split_point(scores[i], next), aw, correct, (next - scores[i]) / 2.0);
    } else {
      consider(hi + 1.0, aw, correct, 1.0);
    }
  }
  return best;
}

std::vector<CandidateDirection> overlap_candidate_directions(
    const Dataset& overlap, const std::set<CaseId>& formerly_mis, const OverlapWeights& w,
    const std::string& top, const std::string& bottom, std::span<const double> global_direction) {
  const std::size_t m = overlap.dim();
  std::vector<CandidateDirection> base;
  try {
    base.push_back({fisher_direction(overlap, top, bottom), "fisher_overlap"});
  } catch (const Error&) {
    // Degenerate scatter on the overlap set; the other candidates still apply.
  }
  if (global_direction.size() == m)
    base.push_back({{global_direction.begin(), global_direction.end()}, "fisher_global"});
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<double> e(m, 0.0);
    e[a] = 1.0;
    base.push_back({std::move(e), "axis(" + overlap.attributes()[a] + ")"});
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      std::vector<double> e(m, 0.0);
      e[a] = 1.0;
      e[b] = -1.0;
      base.push_back({std::move(e), "diff(" + overlap.attributes()[a] + "," + overlap.attributes()[b] + ")"});
    }
  base.push_back({pocket_perceptron(overlap, case_weights(overlap, formerly_mis, w), top), "pocket_perceptron"});

  std::vector<CandidateDirection> out;
  for (auto& c : base) {
    std::vector<double> neg(c.direction.size());
    std::transform(c.direction.begin(), c.direction.end(), neg.begin(), [](double v) { return -v; });
    out.push_back(c);
    out.push_back({std::move(neg), "-" + c.source});
  }
  return out;
}

WeightedFit train_weighted_overlap(const Dataset& overlap, const std::set<CaseId>& formerly_mis,
                                   const OverlapWeights& w, const std::string& top,
                                   const std::string& bottom,
                                   std::span<const double> global_direction) {
  if (!(w.other > 0.0) || w.formerly_misclassified < w.other)
    throw Error("train_weighted_overlap: weights must satisfy w1 >= w2 > 0");
  if (overlap.empty()) throw Error("train_weighted_overlap: overlap set is empty");
  for (CaseId id : formerly_mis)
    if (!overlap.index_of(id))
      throw Error("train_weighted_overlap: formerly misclassified id " + std::to_string(id) +
                  " is not in the overlap set");
  std::size_t n_top = 0, n_bottom = 0;
  for (const auto& l : overlap.labels()) {
    if (l == top) ++n_top;
    else if (l == bottom) ++n_bottom;
    else throw Error("train_weighted_overlap: label '" + l + "' is neither '" + top + "' nor '" + bottom + "'");
  }
  if (n_top == 0 || n_bottom == 0)
    throw Error("train_weighted_overlap: overlap set holds a single class; nothing to separate");

  WeightedFit best;
  bool have = false;
  for (const auto& c : overlap_candidate_directions(overlap, formerly_mis, w, top, bottom, global_direction)) {
    bool nonzero = std::any_of(c.direction.begin(), c.direction.end(), [](double v) { return v != 0.0; });
    if (!nonzero) continue;
    WeightedFit fit = best_threshold_for_direction(overlap, formerly_mis, w, top, bottom, c.direction);
    fit.source = c.source;
    if (!have || better_fit(fit, best)) {
      best = std::move(fit);
      have = true;
    }
  }
  best.scorer.provenance = Provenance::trained;
  return best;
}

}  // namespace civl
