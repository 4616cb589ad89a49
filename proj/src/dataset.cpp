#include "civl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "civl/csv.hpp"
#include "civl/error.hpp"

namespace civl {

Dataset::Dataset(std::vector<std::string> attributes, std::vector<double> values,
                 std::vector<std::string> labels, std::vector<CaseId> case_ids,
                 std::string label_name)
    : attributes_(std::move(attributes)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      case_ids_(std::move(case_ids)),
      label_name_(std::move(label_name)),
      label_position_(attributes_.size()) {
  if (labels_.size() != case_ids_.size())
    throw Error("dataset: " + std::to_string(labels_.size()) + " labels but " +
                std::to_string(case_ids_.size()) + " case ids");
  if (values_.size() != labels_.size() * attributes_.size())
    throw Error("dataset: value matrix does not match " + std::to_string(labels_.size()) +
                " cases x " + std::to_string(attributes_.size()) + " attributes");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw Error("dataset: non-finite value at row " + std::to_string(i / dim() + 1) +
                  ", column '" + attributes_[i % dim()] + "'");
  }
  std::unordered_set<CaseId> seen;
  for (CaseId id : case_ids_) {
    if (!seen.insert(id).second) throw Error("dataset: duplicate case id " + std::to_string(id));
  }
}

std::optional<std::size_t> Dataset::index_of(CaseId id) const {
  // Ids are usually sorted ascending after loading and filtering.
  auto it = std::lower_bound(case_ids_.begin(), case_ids_.end(), id);
  if (it != case_ids_.end() && *it == id) return static_cast<std::size_t>(it - case_ids_.begin());
  auto lin = std::find(case_ids_.begin(), case_ids_.end(), id);
  if (lin == case_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(lin - case_ids_.begin());
}

std::size_t Dataset::attribute_index(const std::string& name) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), name);
  if (it == attributes_.end()) throw Error("unknown attribute '" + name + "'");
  return static_cast<std::size_t>(it - attributes_.begin());
}

std::vector<std::string> Dataset::classes() const {
  std::vector<std::string> out(labels_.begin(), labels_.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t Dataset::count_label(const std::string& label) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

std::vector<double> Dataset::column(std::size_t attr) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = at(i, attr);
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.attributes_ = attributes_;
  out.label_name_ = label_name_;
  out.label_position_ = label_position_;
  out.norm_meta_ = norm_meta_;
  out.values_.reserve(indices.size() * dim());
  const bool raw = !raw_cells_.empty();
  for (std::size_t i : indices) {
    auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
    out.case_ids_.push_back(case_ids_[i]);
    if (raw)
      out.raw_cells_.insert(out.raw_cells_.end(), raw_cells_.begin() + i * dim(),
                            raw_cells_.begin() + (i + 1) * dim());
  }
  return out;
}

Dataset DatasetBuilder::with_norm_meta(Dataset d, std::vector<NormRange> meta) {
  d.norm_meta_ = std::move(meta);
  return d;
}

Dataset DatasetBuilder::with_raw_cells(Dataset d, std::vector<std::string> raw,
                                       std::size_t label_position) {
  d.raw_cells_ = std::move(raw);
  d.label_position_ = label_position;
  return d;
}

Dataset DatasetBuilder::without_raw_cells(Dataset d) {
  d.raw_cells_.clear();
  return d;
}

// ---------------------------------------------------------------------------
// CSV

Dataset load_csv(std::istream& in, const std::string& label_column) {
  auto records = csv::read(in);
  if (records.empty()) throw Error("CSV: missing header row");
  const auto& header = records.front().fields;
  auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw Error("CSV: label column '" + label_column + "' not found in header");
  const std::size_t label_pos = static_cast<std::size_t>(label_it - header.begin());

  std::vector<std::string> attributes;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_pos) attributes.push_back(header[c]);

  std::vector<double> values;
  std::vector<std::string> raw;
  std::vector<std::string> labels;
  std::vector<CaseId> ids;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != header.size())
      throw Error("CSV: row " + std::to_string(r) + " (line " + std::to_string(records[r].line) +
                  ") has " + std::to_string(f.size()) + " fields, expected " +
                  std::to_string(header.size()));
    for (std::size_t c = 0; c < f.size(); ++c) {
      if (c == label_pos) continue;
      double v = 0.0;
      if (!csv::parse_double(f[c], v))
        throw Error("CSV: row " + std::to_string(r) + ", column '" + header[c] +
                    "': cannot parse '" + f[c] + "' as a finite number");
      values.push_back(v);
      raw.push_back(f[c]);
    }
    if (f[label_pos].empty())
      throw Error("CSV: row " + std::to_string(r) + ", column '" + label_column +
                  "': missing class label");
    labels.push_back(f[label_pos]);
    ids.push_back(static_cast<CaseId>(r - 1));
  }
  Dataset d(std::move(attributes), std::move(values), std::move(labels), std::move(ids),
            label_column);
  return DatasetBuilder::with_raw_cells(std::move(d), std::move(raw), label_pos);
}

Dataset load_csv_file(const std::string& path, const std::string& label_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return load_csv(in, label_column);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_csv(std::ostream& out, const Dataset& d) {
  const std::size_t cols = d.dim() + 1;
  const std::size_t label_pos = std::min(d.label_column_position(), d.dim());
  auto header_at = [&](std::size_t c) -> const std::string& {
    if (c == label_pos) return d.label_name();
    return d.attributes()[c < label_pos ? c : c - 1];
  };
  for (std::size_t c = 0; c < cols; ++c) {
    if (c) out << ',';
    out << csv::escape(header_at(c));
  }
  out << '\n';
  const auto& raw = d.raw_cells();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      if (c == label_pos) {
        out << csv::escape(d.label(i));
        continue;
      }
      std::size_t a = c < label_pos ? c : c - 1;
      const std::string* text = raw.empty() ? nullptr : &raw[i * d.dim() + a];
      if (text && !text->empty())
        out << csv::escape(*text);
      else
        out << csv::format_double(d.at(i, a));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Normalization

std::vector<NormRange> minmax_bounds(const Dataset& d) {
  if (d.empty()) throw Error("minmax_normalize: dataset has no cases");
  std::vector<NormRange> meta(d.dim());
  for (std::size_t a = 0; a < d.dim(); ++a) {
    double lo = d.at(0, a), hi = d.at(0, a);
    for (std::size_t i = 1; i < d.size(); ++i) {
      lo = std::min(lo, d.at(i, a));
      hi = std::max(hi, d.at(i, a));
    }
    meta[a] = {lo, hi, lo == hi};
  }
  return meta;
}

Dataset minmax_normalize(const Dataset& d) { return minmax_normalize(d, minmax_bounds(d)); }

Dataset minmax_normalize(const Dataset& d, std::span<const NormRange> bounds) {
  if (d.empty()) throw Error("minmax_normalize: dataset has no cases");
  const std::size_t n = d.size(), m = d.dim();
  if (bounds.size() != m) throw Error("minmax_normalize: one bound per attribute required");
  std::vector<NormRange> meta(bounds.begin(), bounds.end());
  std::vector<double> v(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < m; ++a)
      v[i * m + a] = meta[a].constant ? 0.0 : (d.at(i, a) - meta[a].min) / (meta[a].max - meta[a].min);
  Dataset out(d.attributes(), std::move(v), d.labels(), d.case_ids(), d.label_name());
  out = DatasetBuilder::with_raw_cells(std::move(out), {}, d.label_column_position());
  return DatasetBuilder::with_norm_meta(std::move(out), std::move(meta));
}

Dataset denormalize(const Dataset& d) {
  if (!d.norm_meta()) throw Error("denormalize: dataset carries no normalization metadata");
  const auto& meta = *d.norm_meta();
  const std::size_t n = d.size(), m = d.dim();
  std::vector<double> v(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < m; ++a)
      v[i * m + a] = meta[a].constant ? meta[a].min
                                      : d.at(i, a) * (meta[a].max - meta[a].min) + meta[a].min;
  Dataset out(d.attributes(), std::move(v), d.labels(), d.case_ids(), d.label_name());
  return DatasetBuilder::with_raw_cells(std::move(out), {}, d.label_column_position());
}

// ---------------------------------------------------------------------------
// Feature engineering

FeatureExpr FeatureExpr::difference(std::size_t a, std::size_t b) {
  return {FeatureKind::difference, {a, b}, {}, TrigFunction::sin};
}
FeatureExpr FeatureExpr::slope(std::size_t a, std::size_t b) {
  return {FeatureKind::slope, {a, b}, {}, TrigFunction::sin};
}
FeatureExpr FeatureExpr::weighted_sum(std::vector<std::size_t> ops, std::vector<double> w) {
  return {FeatureKind::weighted_sum, std::move(ops), std::move(w), TrigFunction::sin};
}
FeatureExpr FeatureExpr::forward_difference(std::vector<std::size_t> ops) {
  return {FeatureKind::forward_difference, std::move(ops), {}, TrigFunction::sin};
}
FeatureExpr FeatureExpr::backward_difference(std::vector<std::size_t> ops) {
  return {FeatureKind::backward_difference, std::move(ops), {}, TrigFunction::sin};
}
FeatureExpr FeatureExpr::trigonometric(TrigFunction f, std::size_t a) {
  return {FeatureKind::trig, {a}, {}, f};
}

namespace {

void validate(const Dataset& d, const FeatureExpr& e) {
  for (std::size_t op : e.operands)
    if (op >= d.dim())
      throw Error("engineer_features: operand index " + std::to_string(op) + " out of range (" +
                  std::to_string(d.dim()) + " attributes)");
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw Error(std::string("engineer_features: ") + what);
  };
  switch (e.kind) {
    case FeatureKind::difference:
    case FeatureKind::slope:
      need(e.operands.size() == 2, "difference/slope take exactly two operands");
      break;
    case FeatureKind::weighted_sum:
      need(!e.operands.empty(), "weighted_sum needs at least one operand");
      need(e.weights.size() == e.operands.size(), "weighted_sum needs one weight per operand");
      break;
    case FeatureKind::forward_difference:
    case FeatureKind::backward_difference:
      need(e.operands.size() >= 2, "forward/backward differences need at least two operands");
      break;
    case FeatureKind::trig:
      need(e.operands.size() == 1, "trig takes exactly one operand");
      break;
  }
}

const char* trig_name(TrigFunction f) {
  switch (f) {
    case TrigFunction::sin: return "sin";
    case TrigFunction::cos: return "cos";
    case TrigFunction::tan: return "tan";
  }
  return "?";
}

// Each generated column is sum_k coef_k * x[op_k], except trig.
struct Column {
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;
};

std::vector<Column> expand(const Dataset& d, const FeatureExpr& e) {
  const auto& names = d.attributes();
  std::vector<Column> cols;
  auto pair_name = [&](const char* fn, std::size_t a, std::size_t b) {
    return std::string(fn) + "(" + names[a] + "," + names[b] + ")";
  };
  switch (e.kind) {
    case FeatureKind::difference:
      cols.push_back({pair_name("diff", e.operands[0], e.operands[1]),
                      {{e.operands[0], 1.0}, {e.operands[1], -1.0}}});
      break;
    case FeatureKind::slope:
      cols.push_back({pair_name("slope", e.operands[0], e.operands[1]),
                      {{e.operands[1], 1.0}, {e.operands[0], -1.0}}});
      break;
    case FeatureKind::weighted_sum: {
      std::string name = "wsum(";
      Column c;
      for (std::size_t k = 0; k < e.operands.size(); ++k) {
        if (k) name += ",";
        name += csv::format_double(e.weights[k]) + "*" + names[e.operands[k]];
        c.terms.push_back({e.operands[k], e.weights[k]});
      }
      c.name = name + ")";
      cols.push_back(std::move(c));
      break;
    }
    case FeatureKind::forward_difference:
      for (std::size_t k = 0; k + 1 < e.operands.size(); ++k)
        cols.push_back({pair_name("fdiff", e.operands[k], e.operands[k + 1]),
                        {{e.operands[k], 1.0}, {e.operands[k + 1], -1.0}}});
      break;
    case FeatureKind::backward_difference:
      for (std::size_t k = 0; k + 1 < e.operands.size(); ++k)
        cols.push_back({pair_name("bdiff", e.operands[k + 1], e.operands[k]),
                        {{e.operands[k + 1], 1.0}, {e.operands[k], -1.0}}});
      break;
    case FeatureKind::trig:
      cols.push_back({std::string(trig_name(e.trig)) + "(" + names[e.operands[0]] + ")",
                      {{e.operands[0], 1.0}}});
      break;
  }
  return cols;
}

}  // namespace

std::vector<std::string> feature_names(const Dataset& d, const FeatureExpr& e) {
  validate(d, e);
  std::vector<std::string> out;
  for (auto& c : expand(d, e)) out.push_back(c.name);
  return out;
}

Dataset engineer_features(const Dataset& d, std::span<const FeatureExpr> exprs) {
  std::vector<Column> cols;
  std::vector<const FeatureExpr*> col_expr;
  for (const auto& e : exprs) {
    validate(d, e);
    for (auto& c : expand(d, e)) {
      cols.push_back(std::move(c));
      col_expr.push_back(&e);
    }
  }

  const std::size_t n = d.size(), m = d.dim(), extra = cols.size();
  const std::size_t width = m + extra;
  std::vector<double> generated(n * extra);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < extra; ++c) {
      double v = 0.0;
      if (col_expr[c]->kind == FeatureKind::trig) {
        double x = d.at(i, cols[c].terms[0].first);
        switch (col_expr[c]->trig) {
          case TrigFunction::sin: v = std::sin(x); break;
          case TrigFunction::cos: v = std::cos(x); break;
          case TrigFunction::tan: v = std::tan(x); break;
        }
      } else {
        for (auto [op, w] : cols[c].terms) v += w * d.at(i, op);
      }
      generated[i * extra + c] = v;
    }
  }

  std::optional<std::vector<NormRange>> meta = d.norm_meta();
  if (meta) {
    // Engineered columns on normalized data carry their own bounds.
    for (std::size_t c = 0; c < extra; ++c) {
      double lo = 0.0, hi = 0.0;
      if (n) {
        lo = hi = generated[c];
        for (std::size_t i = 1; i < n; ++i) {
          lo = std::min(lo, generated[i * extra + c]);
          hi = std::max(hi, generated[i * extra + c]);
        }
      }
      NormRange r{lo, hi, lo == hi};
      for (std::size_t i = 0; i < n; ++i) {
        double& v = generated[i * extra + c];
        v = r.constant ? 0.0 : (v - lo) / (hi - lo);
      }
      meta->push_back(r);
    }
  }

  std::vector<double> values(n * width);
  std::vector<std::string> raw;
  if (!d.raw_cells().empty()) raw.resize(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = d.row(i);
    std::copy(r.begin(), r.end(), values.begin() + i * width);
    std::copy(generated.begin() + i * extra, generated.begin() + (i + 1) * extra,
              values.begin() + i * width + m);
    if (!raw.empty())
      std::copy(d.raw_cells().begin() + i * m, d.raw_cells().begin() + (i + 1) * m,
                raw.begin() + i * width);
  }
  std::vector<std::string> names = d.attributes();
  for (auto& c : cols) names.push_back(c.name);

  Dataset out(std::move(names), std::move(values), d.labels(), d.case_ids(), d.label_name());
  out = DatasetBuilder::with_raw_cells(std::move(out), std::move(raw), d.label_column_position());
  if (meta) out = DatasetBuilder::with_norm_meta(std::move(out), std::move(*meta));
  return out;
}

// ---------------------------------------------------------------------------
// Correlation ordering

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) return 0.0;
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::size_t> sort_attributes_by_correlation(const Dataset& d) {
  const std::size_t m = d.dim();
  if (m == 0) return {};
  if (m == 1) return {0};
  if (d.size() < 2) throw Error("sort_attributes_by_correlation: needs at least 2 cases");

  std::vector<std::vector<double>> cols(m);
  for (std::size_t a = 0; a < m; ++a) cols[a] = d.column(a);
  std::vector<double> r(m * m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) r[a * m + b] = r[b * m + a] = std::abs(pearson(cols[a], cols[b]));

  std::size_t start = 0;
  double best_mean = -1.0;
  for (std::size_t a = 0; a < m; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < m; ++b)
      if (b != a) s += r[a * m + b];
    double mean = s / static_cast<double>(m - 1);
    if (mean > best_mean) {
      best_mean = mean;
      start = a;
    }
  }
  std::vector<std::size_t> order{start};
  std::vector<bool> placed(m, false);
  placed[start] = true;
  while (order.size() < m) {
    std::size_t prev = order.back(), next = m;
    double best = -1.0;
    for (std::size_t b = 0; b < m; ++b) {
      if (placed[b]) continue;
      if (r[prev * m + b] > best) {
        best = r[prev * m + b];
        next = b;
      }
    }
    placed[next] = true;
    order.push_back(next);
  }
  return order;
}

// ---------------------------------------------------------------------------
// Case-set manipulation

Dataset remove_covered(const Dataset& d, const std::set<CaseId>& covered) {
  for (CaseId id : covered)
    if (!d.index_of(id)) throw Error("remove_covered: unknown case id " + std::to_string(id));
  std::vector<std::size_t> keep;
  keep.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!covered.count(d.case_id(i))) keep.push_back(i);
  return d.select_rows(keep);
}

Dataset select_classes(const Dataset& d, std::span<const std::string> classes) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (std::find(classes.begin(), classes.end(), d.label(i)) != classes.end()) keep.push_back(i);
  return d.select_rows(keep);
}

Dataset select_ids(const Dataset& d, const std::set<CaseId>& ids) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (ids.count(d.case_id(i))) keep.push_back(i);
  return d.select_rows(keep);
}

}  // namespace civl
