#include <algorithm>

#include "civl/error.hpp"
#include "civl/overlap.hpp"

namespace civl {

namespace {

struct Line {
  Rational start;  // value at t = 0
  Rational slope;  // value at t = 1 minus value at t = 0

  Rational at(const Rational& t) const { return start + slope * t; }
};

// Breakpoints of the upper envelope of `lines` over t in (0,1). Exact.
std::vector<Rational> upper_breakpoints(const std::vector<Line>& lines) {
  std::vector<Rational> out;
  const Rational zero(0), one(1);
  auto pick_at = [&](const Rational& t, std::size_t hint) {
    std::size_t best = hint;
    Rational best_v = lines[hint].at(t);
    for (std::size_t j = 0; j < lines.size(); ++j) {
      Rational v = lines[j].at(t);
      if (v > best_v || (v == best_v && lines[j].slope > lines[best].slope)) {
        best = j;
        best_v = v;
      }
    }
    return best;
  };
  Rational t = zero;
  std::size_t cur = pick_at(t, 0);
  while (true) {
    bool found = false;
    Rational next_t;
    std::size_t next = cur;
    for (std::size_t j = 0; j < lines.size(); ++j) {
      if (!(lines[j].slope > lines[cur].slope)) continue;
      Rational tj = (lines[cur].start - lines[j].start) / (lines[j].slope - lines[cur].slope);
      if (!(tj > t)) continue;
      if (!found || tj < next_t || (tj == next_t && lines[j].slope > lines[next].slope)) {
        next_t = tj;
        next = j;
        found = true;
      }
    }
    if (!found || !(next_t < one)) break;
    out.push_back(next_t);
    t = next_t;
    cur = next;
  }
  return out;
}

}  // namespace

Envelope build_modified_envelope(std::span<const std::vector<double>> polylines,
                                 std::span<const std::size_t> axis_order) {
  if (polylines.empty()) throw Error("build_modified_envelope: needs at least one polyline");
  if (axis_order.empty()) throw Error("build_modified_envelope: empty axis order");
  for (std::size_t a : axis_order)
    for (const auto& p : polylines)
      if (a >= p.size()) throw Error("build_modified_envelope: axis index out of range");

  Envelope env;
  env.axis_order.assign(axis_order.begin(), axis_order.end());
  for (std::size_t a : axis_order) {
    double hi = polylines[0][a], lo = hi;
    for (const auto& p : polylines) {
      hi = std::max(hi, p[a]);
      lo = std::min(lo, p[a]);
    }
    env.axis_upper.push_back(hi);
    env.axis_lower.push_back(lo);
  }

  for (std::size_t k = 0; k + 1 < axis_order.size(); ++k) {
    const std::size_t from = axis_order[k], to = axis_order[k + 1];
    std::vector<Line> lines, negated;
    for (const auto& p : polylines) {
      Rational y0(p[from]), y1(p[to]);
      lines.push_back({y0, y1 - y0});
      negated.push_back({-y0, y0 - y1});
    }
    std::vector<Rational> ts{Rational(0), Rational(1)};
    for (auto& t : upper_breakpoints(lines)) ts.push_back(t);
    for (auto& t : upper_breakpoints(negated)) ts.push_back(t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    EnvelopeStrip strip{from, to, {}};
    for (auto& t : ts) {
      Rational up = lines[0].at(t), low = up;
      for (const auto& l : lines) {
        Rational v = l.at(t);
        if (v > up) up = v;
        if (v < low) low = v;
      }
      strip.points.push_back({t, up, low});
    }
    env.strips.push_back(std::move(strip));
  }
  return env;
}

Envelope build_modified_envelope(const Dataset& d, std::span<const CaseId> members,
                                 std::span<const std::size_t> axis_order) {
  std::vector<std::vector<double>> lines;
  for (CaseId id : members) {
    auto idx = d.index_of(id);
    if (!idx) throw Error("build_modified_envelope: unknown case id " + std::to_string(id));
    auto r = d.row(*idx);
    lines.emplace_back(r.begin(), r.end());
  }
  return build_modified_envelope(lines, axis_order);
}

bool envelope_contains(const Envelope& e, std::span<const double> x) {
  for (std::size_t k = 0; k < e.axis_order.size(); ++k) {
    const std::size_t a = e.axis_order[k];
    if (a >= x.size()) throw Error("envelope_contains: case dimension does not match axis order");
    if (x[a] < e.axis_lower[k] || x[a] > e.axis_upper[k]) return false;
  }
  for (const auto& strip : e.strips) {
    const Rational y0(x[strip.from_axis]), y1(x[strip.to_axis]);
    const Rational slope = y1 - y0;
    for (const auto& p : strip.points) {
      Rational v = y0 + slope * p.t;
      if (v < p.lower || v > p.upper) return false;
    }
  }
  return true;
}

std::pair<double, double> envelope_bounds_at(const EnvelopeStrip& s, double t) {
  const auto& pts = s.points;
  if (pts.empty()) return {0.0, 0.0};
  auto dbl = [](const Rational& r) { return r.convert_to<double>(); };
  if (t <= dbl(pts.front().t)) return {dbl(pts.front().upper), dbl(pts.front().lower)};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double t0 = dbl(pts[i].t), t1 = dbl(pts[i + 1].t);
    if (t <= t1) {
      const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
      return {dbl(pts[i].upper) + w * (dbl(pts[i + 1].upper) - dbl(pts[i].upper)),
              dbl(pts[i].lower) + w * (dbl(pts[i + 1].lower) - dbl(pts[i].lower))};
    }
  }
  return {dbl(pts.back().upper), dbl(pts.back().lower)};
}

}  // namespace civl
