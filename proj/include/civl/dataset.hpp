#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace civl {

using CaseId = std::int64_t;

/// Per-attribute bounds recorded by min-max normalization.
struct NormRange {
  double min = 0.0;
  double max = 0.0;
  bool constant = false;

  bool operator==(const NormRange&) const = default;
};

/// Immutable tabular dataset: named numeric attributes, one class label per
/// case, and stable case ids that survive filtering. Values are row-major.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> attributes, std::vector<double> values,
          std::vector<std::string> labels, std::vector<CaseId> case_ids,
          std::string label_name = "class");

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return attributes_.size(); }
  bool empty() const { return labels_.empty(); }

  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::string& label_name() const { return label_name_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim(), dim()};
  }
  double at(std::size_t i, std::size_t attr) const { return values_[i * dim() + attr]; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<CaseId>& case_ids() const { return case_ids_; }
  CaseId case_id(std::size_t i) const { return case_ids_[i]; }

  /// Row index of a case id, if present.
  std::optional<std::size_t> index_of(CaseId id) const;
  /// Attribute index by name; throws Error when absent.
  std::size_t attribute_index(const std::string& name) const;
  /// Sorted distinct class labels.
  std::vector<std::string> classes() const;
  std::size_t count_label(const std::string& label) const;
  std::vector<double> column(std::size_t attr) const;

  const std::optional<std::vector<NormRange>>& norm_meta() const { return norm_meta_; }
  bool normalized() const { return norm_meta_.has_value(); }

  /// Original CSV cell text (row-major, parallel to values); empty string means
  /// the cell has no source text and is written numerically.
  const std::vector<std::string>& raw_cells() const { return raw_cells_; }
  std::size_t label_column_position() const { return label_position_; }

  /// Keeps rows at the given indices, in the given order.
  Dataset select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  friend class DatasetBuilder;

  std::vector<std::string> attributes_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  std::vector<CaseId> case_ids_;
  std::string label_name_ = "class";
  std::size_t label_position_ = 0;
  std::optional<std::vector<NormRange>> norm_meta_;
  std::vector<std::string> raw_cells_;
};

/// Low-level mutable construction used by the loaders and transforms.
class DatasetBuilder {
 public:
  static Dataset with_norm_meta(Dataset d, std::vector<NormRange> meta);
  static Dataset with_raw_cells(Dataset d, std::vector<std::string> raw,
                                std::size_t label_position);
  static Dataset without_raw_cells(Dataset d);
};

enum class FeatureKind {
  difference,
  slope,
  weighted_sum,
  forward_difference,
  backward_difference,
  trig,
};

enum class TrigFunction { sin, cos, tan };

/// Engineered-feature recipe over existing attribute indices.
struct FeatureExpr {
  FeatureKind kind = FeatureKind::difference;
  std::vector<std::size_t> operands;
  std::vector<double> weights;
  TrigFunction trig = TrigFunction::sin;

  static FeatureExpr difference(std::size_t a, std::size_t b);
  static FeatureExpr slope(std::size_t a, std::size_t b);
  static FeatureExpr weighted_sum(std::vector<std::size_t> ops, std::vector<double> w);
  static FeatureExpr forward_difference(std::vector<std::size_t> ops);
  static FeatureExpr backward_difference(std::vector<std::size_t> ops);
  static FeatureExpr trigonometric(TrigFunction f, std::size_t a);
};

/// Parses RFC-4180 CSV with a mandatory header. Case ids are 0..n-1 in file order.
Dataset load_csv(std::istream& in, const std::string& label_column);
Dataset load_csv_file(const std::string& path, const std::string& label_column);

/// Writes the dataset back as CSV; untouched cells reproduce their source text.
void write_csv(std::ostream& out, const Dataset& d);

/// Maps every attribute to [0,1] using bounds over all cases. Constant
/// attributes become 0 and are flagged.
Dataset minmax_normalize(const Dataset& d);
/// Same mapping with given bounds, e.g. from a larger dataset the cases were selected from.
Dataset minmax_normalize(const Dataset& d, std::span<const NormRange> bounds);
/// Per-attribute min/max over all cases.
std::vector<NormRange> minmax_bounds(const Dataset& d);
/// Inverse of minmax_normalize using the stored norm_meta.
Dataset denormalize(const Dataset& d);

/// Appends engineered columns; existing columns are left bit-identical.
Dataset engineer_features(const Dataset& d, std::span<const FeatureExpr> exprs);
/// Canonical column names the expression produces (one per generated column).
std::vector<std::string> feature_names(const Dataset& d, const FeatureExpr& e);

/// Pearson correlation; 0 when either column is constant.
double pearson(std::span<const double> x, std::span<const double> y);

/// Greedy chain ordering of attributes by absolute correlation.
std::vector<std::size_t> sort_attributes_by_correlation(const Dataset& d);

/// Removes the covered cases; ids of the remaining cases are preserved.
Dataset remove_covered(const Dataset& d, const std::set<CaseId>& covered);

/// Keeps only cases whose label is one of `classes`.
Dataset select_classes(const Dataset& d, std::span<const std::string> classes);

/// Keeps only the listed case ids (in dataset order).
Dataset select_ids(const Dataset& d, const std::set<CaseId>& ids);

}  // namespace civl
