#include <algorithm>

#include "civl/error.hpp"
#include "civl/kernels.hpp"
#include "civl/rules.hpp"

namespace civl {

BoostedModel compose_boosted(const LinearScorer& f1, const LinearScorer& f2,
                             const OverlapInterval& interval) {
  if (f1.coefficients.empty()) throw Error("compose_boosted: f1 has no coefficients");
  BoostedModel m;
  m.f1 = f1;
  m.f2 = f2;
  m.interval = interval;
  m.f2_ignored = interval.empty;
  if (!m.f2_ignored && f2.coefficients.size() != f1.coefficients.size())
    throw Error("compose_boosted: f1 and f2 dimensions differ (" +
                std::to_string(f1.coefficients.size()) + " vs " +
                std::to_string(f2.coefficients.size()) + ")");
  if (!m.f2_ignored) {
    auto pair = [](const LinearScorer& f) {
      return std::minmax(f.top_class, f.bottom_class);
    };
    if (pair(f1) != pair(f2))
      throw Error("compose_boosted: f1 and f2 decide different class pairs");
  }
  return m;
}

bool BoostedModel::routes_to_f2(std::span<const double> x) const {
  if (x.size() != f1.coefficients.size())
    throw Error("predict_boosted: case has " + std::to_string(x.size()) + " attributes, model expects " +
                std::to_string(f1.coefficients.size()));
  return !f2_ignored && interval.contains(f1.score(x));
}

const std::string& BoostedModel::predict(std::span<const double> x) const {
  return routes_to_f2(x) ? f2.classify(x) : f1.classify(x);
}

const std::string& predict_boosted(const BoostedModel& m, std::span<const double> x) {
  return m.predict(x);
}

std::vector<std::string> predict_boosted(const BoostedModel& m, const Dataset& d) {
  if (d.dim() != m.f1.coefficients.size())
    throw Error("predict_boosted: dataset dimension does not match the model");
  const auto s1 = score_dataset(m.f1, d);
  const Cut c1 = m.f1.cut();
  const Cut c2 = m.f2.cut();
  std::vector<std::string> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!m.f2_ignored && m.interval.contains(s1.scores[i]))
      out.push_back(c2.decide(m.f2.score(d.row(i))));
    else
      out.push_back(c1.decide(s1.scores[i]));
  }
  return out;
}

}  // namespace civl
