#include "civl/serialize.hpp"

#include "civl/error.hpp"

namespace civl {

namespace {

template <class T>
std::optional<T> opt(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <class T>
Json opt_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json rational_json(const Rational& r) { return r.str(); }

}  // namespace

void to_json(Json& j, const LinearScorer& f) {
  j = Json{{"coefficients", f.coefficients},
           {"threshold", f.threshold},
           {"top_class", f.top_class},
           {"bottom_class", f.bottom_class},
           {"provenance", to_string(f.provenance)}};
}

void from_json(const Json& j, LinearScorer& f) {
  try {
    f.coefficients = j.at("coefficients").get<std::vector<double>>();
    f.threshold = j.at("threshold").get<double>();
    f.top_class = j.at("top_class").get<std::string>();
    f.bottom_class = j.at("bottom_class").get<std::string>();
    f.provenance = provenance_from_string(j.value("provenance", std::string("imported")));
  } catch (const Json::exception& e) {
    throw Error(std::string("invalid scorer JSON: ") + e.what());
  }
}

void to_json(Json& j, const ScoreVector& s) {
  j = Json{{"case_ids", s.case_ids}, {"scores", s.scores}, {"provenance", to_string(s.provenance)}};
}

void to_json(Json& j, const OverlapInterval& iv) {
  j = Json{{"a", iv.a},
           {"b", iv.b},
           {"case_c", opt_json(iv.case_c)},
           {"case_d", opt_json(iv.case_d)},
           {"empty", iv.empty},
           {"one_sided", iv.one_sided},
           {"length", iv.length()}};
}

void from_json(const Json& j, OverlapInterval& iv) {
  iv.a = j.at("a").get<double>();
  iv.b = j.at("b").get<double>();
  iv.case_c = opt<CaseId>(j, "case_c");
  iv.case_d = opt<CaseId>(j, "case_d");
  iv.empty = j.at("empty").get<bool>();
  iv.one_sided = j.value("one_sided", false);
}

void to_json(Json& j, const Hyperblock& hb) {
  j = Json{{"lo", hb.lo}, {"hi", hb.hi}, {"role", to_string(hb.role)}, {"provenance", hb.provenance}};
}

void from_json(const Json& j, Hyperblock& hb) {
  hb.lo = j.at("lo").get<std::vector<double>>();
  hb.hi = j.at("hi").get<std::vector<double>>();
  if (hb.lo.size() != hb.hi.size()) throw Error("hyperblock JSON: lo/hi length mismatch");
  const auto role = j.value("role", std::string("overlap_area"));
  hb.role = role == "pure_rectangle" ? BlockRole::pure_rectangle : BlockRole::overlap_area;
  hb.provenance = j.value("provenance", std::string());
}

void to_json(Json& j, const Envelope& e) {
  Json strips = Json::array();
  for (const auto& s : e.strips) {
    Json pts = Json::array();
    for (const auto& p : s.points)
      pts.push_back(Json{{"t", rational_json(p.t)},
                         {"upper", rational_json(p.upper)},
                         {"lower", rational_json(p.lower)},
                         {"t_value", p.t.convert_to<double>()},
                         {"upper_value", p.upper.convert_to<double>()},
                         {"lower_value", p.lower.convert_to<double>()}});
    strips.push_back(Json{{"from_axis", s.from_axis}, {"to_axis", s.to_axis}, {"points", pts}});
  }
  j = Json{{"axis_order", e.axis_order},
           {"axis_upper", e.axis_upper},
           {"axis_lower", e.axis_lower},
           {"strips", strips}};
}

void to_json(Json& j, const MulticlassOverlap& m) {
  auto runs = [](const std::vector<ScoreRun>& rs) {
    Json a = Json::array();
    for (const auto& r : rs)
      a.push_back(Json{{"lo", r.lo}, {"hi", r.hi}, {"count", r.count}, {"label", opt_json(r.label)}});
    return a;
  };
  j = Json{{"class_order", m.class_order},
           {"overlap_intervals", runs(m.overlap_intervals)},
           {"pure_runs", runs(m.pure_runs)},
           {"fully_interleaved", m.fully_interleaved},
           {"misordered", m.misordered}};
}

void to_json(Json& j, const AttributeRange& r) {
  j = Json{{"attribute", r.attribute}, {"lo", r.lo}, {"hi", r.hi}};
}

void from_json(const Json& j, AttributeRange& r) {
  r.attribute = j.at("attribute").get<std::size_t>();
  r.lo = j.at("lo").get<double>();
  r.hi = j.at("hi").get<double>();
  if (r.lo > r.hi) throw Error("attribute range has lo > hi");
}

void to_json(Json& j, const IntervalRule& r) {
  j = Json{{"conditions", r.conditions},   {"label", r.label},
           {"iteration", r.iteration},     {"coverage", r.coverage},
           {"class_share", r.class_share}, {"dataset_share", r.dataset_share}};
}

void from_json(const Json& j, IntervalRule& r) {
  r.conditions = j.at("conditions").get<std::vector<AttributeRange>>();
  r.label = j.at("label").get<std::string>();
  r.iteration = j.at("iteration").get<std::size_t>();
  r.coverage = j.at("coverage").get<std::size_t>();
  r.class_share = j.value("class_share", 0.0);
  r.dataset_share = j.value("dataset_share", 0.0);
}

void to_json(Json& j, const Fallback& f) {
  j = Json{{"kind", to_string(f.kind)}, {"label", f.label}};
}

void from_json(const Json& j, Fallback& f) {
  f.kind = fallback_kind_from_string(j.at("kind").get<std::string>());
  f.label = j.value("label", std::string());
}

void to_json(Json& j, const DecisionList& dl) {
  j = Json{{"semantics", kDecisionListSemantics},
           {"attributes", dl.attributes},
           {"rules", dl.rules},
           {"fallback", dl.fallback}};
}

void from_json(const Json& j, DecisionList& dl) {
  try {
    const auto sem = j.at("semantics").get<std::string>();
    if (sem != kDecisionListSemantics)
      throw Error("decision list semantics '" + sem + "' is not supported (expected " +
                  kDecisionListSemantics + ")");
    dl.attributes = j.at("attributes").get<std::vector<std::string>>();
    dl.rules = j.at("rules").get<std::vector<IntervalRule>>();
    dl.fallback = j.at("fallback").get<Fallback>();
  } catch (const Json::exception& e) {
    throw Error(std::string("invalid decision list JSON: ") + e.what());
  }
  for (std::size_t k = 1; k < dl.rules.size(); ++k)
    if (dl.rules[k].iteration < dl.rules[k - 1].iteration)
      throw Error("decision list JSON: rules are not in iteration order");
}

void to_json(Json& j, const BoostedModel& m) {
  j = Json{{"f1", m.f1},
           {"f2", m.f2},
           {"interval", m.interval},
           {"f2_ignored", m.f2_ignored},
           {"parameter_count", m.parameter_count()},
           {"f1_identity", scorer_identity(m.f1)}};
}

void from_json(const Json& j, BoostedModel& m) {
  m = compose_boosted(j.at("f1").get<LinearScorer>(), j.at("f2").get<LinearScorer>(),
                      j.at("interval").get<OverlapInterval>());
}

void to_json(Json& j, const ConfusionMatrix& c) {
  j = Json{{"classes", c.classes}, {"counts", c.counts}};
}

void to_json(Json& j, const EvalReport& r) {
  j = Json{{"n_overlap", r.n_overlap},
           {"n_mis", r.n_mis},
           {"error_rate", r.error_rate},
           {"accuracy", r.accuracy},
           {"confusion", r.confusion},
           {"weighted_accuracy", opt_json(r.weighted_accuracy)},
           {"overlap_hit_fraction", r.overlap_hit_fraction}};
}

void to_json(Json& j, const EvidenceReport& r) {
  j = Json{{"verdict", to_string(r.verdict)},
           {"fraction", r.fraction},
           {"inside", r.inside},
           {"total", r.total}};
}

void to_json(Json& j, const SlopeReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.rule.terms)
    terms.push_back(Json{{"i", t.i},
                         {"j", t.j},
                         {"direction", t.direction == SlopeDirection::ge ? "ge" : "le"},
                         {"threshold", t.threshold}});
  j = Json{{"reference_class", r.rule.reference_class},
           {"inferred_class", r.rule.inferred_class},
           {"terms", terms},
           {"degenerate", r.rule.degenerate},
           {"inferred_total", r.inferred_total},
           {"inferred_fired", r.inferred_fired},
           {"reference_total", r.reference_total},
           {"false_fires", r.false_fires},
           {"coverage", r.coverage},
           {"precision", r.precision},
           {"accuracy", r.accuracy}};
}

void to_json(Json& j, const ContainmentResult& r) {
  j = Json{{"verdict", to_string(r.verdict)},
           {"score_bottom", r.score_bottom},
           {"score_top", r.score_top},
           {"shrunk", r.shrunk ? Json(*r.shrunk) : Json(nullptr)}};
}

Json batch_meta_json(const SyntheticBatch& b) {
  return Json{{"mode", to_string(b.mode)},
              {"seed", b.seed},
              {"region", b.region_hash},
              {"count", b.size()},
              {"attributes", b.attributes},
              {"degenerate", b.degenerate}};
}

Json dataset_json(const Dataset& d) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto r = d.row(i);
    rows.push_back(Json{{"case_id", d.case_id(i)},
                        {"label", d.label(i)},
                        {"values", std::vector<double>(r.begin(), r.end())}});
  }
  Json meta = nullptr;
  if (d.norm_meta()) {
    meta = Json::array();
    for (const auto& m : *d.norm_meta())
      meta.push_back(Json{{"min", m.min}, {"max", m.max}, {"constant", m.constant}});
  }
  return Json{{"attributes", d.attributes()},
              {"label_name", d.label_name()},
              {"rows", rows},
              {"normalized", d.normalized()},
              {"norm_meta", meta}};
}

std::string scorer_identity(const LinearScorer& f) { return fnv1a_hex(Json(f).dump()); }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace civl
