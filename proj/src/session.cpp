#include "civl/session.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace civl {

namespace {

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

Json ids_json(const std::set<CaseId>& ids) { return Json(std::vector<CaseId>(ids.begin(), ids.end())); }

const std::string& require_string(const Json& a, const char* key) {
  if (!a.contains(key) || !a.at(key).is_string())
    throw ActionError(400, std::string("action needs a string field '") + key + "'");
  return a.at(key).get_ref<const std::string&>();
}

}  // namespace

Session::Session(std::string id, Dataset base, SessionConfig config)
    : id_(std::move(id)),
      base_(std::make_shared<const Dataset>(std::move(base))),
      config_(config) {
  if (base_->empty()) throw Error("session needs a nonempty dataset");
  if (!config_.normalize)
    working_ = base_;
  else if (config_.norm_bounds.empty())
    working_ = std::make_shared<const Dataset>(minmax_normalize(*base_));
  else
    working_ = std::make_shared<const Dataset>(minmax_normalize(*base_, config_.norm_bounds));
  state_.axis_order = identity_order(working_->dim());
  state_.rules.attributes = working_->attributes();
  state_.remaining = working_->case_ids();
  std::sort(state_.remaining.begin(), state_.remaining.end());
}

std::size_t Session::resolve_attribute(const Json& v) const {
  if (v.is_string()) {
    try {
      return working_->attribute_index(v.get<std::string>());
    } catch (const Error& e) {
      throw ActionError(400, e.what());
    }
  }
  if (v.is_number_integer()) {
    const auto k = v.get<long long>();
    if (k < 0 || static_cast<std::size_t>(k) >= working_->dim())
      throw ActionError(400, "attribute index " + std::to_string(k) + " out of range");
    return static_cast<std::size_t>(k);
  }
  throw ActionError(400, "attribute must be a name or an index");
}

Dataset Session::remaining_dataset() const {
  return select_ids(*working_, std::set<CaseId>(state_.remaining.begin(), state_.remaining.end()));
}

ActionResult Session::apply(const Json& action) {
  if (!action.is_object()) throw ActionError(400, "action must be a JSON object");
  const std::string type = require_string(action, "type");
  if (action.contains("revision")) {
    const Json& rev = action.at("revision");
    const bool ok = rev.is_number_integer() && rev.get<long long>() >= 0 &&
                    static_cast<std::uint64_t>(rev.get<long long>()) == revision_;
    if (!ok)
      throw ActionError(409, "stale revision", Json{{"current_revision", revision_}});
  }
  static const std::set<std::string> known = {
      "mark_rectangle", "accept_candidates", "reject_candidates", "merge_leftovers", "reorder_axes",
      "hide_class",     "auto_suggest",      "undo",              "set_scorer",      "finalize"};
  if (!known.count(type)) throw ActionError(400, "unknown action type '" + type + "'");
  const bool read_like = type == "auto_suggest" || type == "reject_candidates";
  if (state_.finalized && type != "undo" && !read_like)
    throw ActionError(409, "session is finalized");

  Json logged = action;
  logged.erase("revision");

  Json diff;
  try {
    if (type == "undo") {
      if (undo_.empty()) throw ActionError(409, "nothing to undo");
      const std::size_t before = state_.remaining.size();
      state_ = std::move(undo_.back());
      undo_.pop_back();
      ++revision_;
      diff = Json{{"undone", true},
                  {"remaining", state_.remaining.size()},
                  {"remaining_delta", static_cast<long long>(state_.remaining.size()) -
                                          static_cast<long long>(before)}};
    } else if (read_like) {
      diff = type == "auto_suggest" ? do_suggest(action) : do_reject(action);
    } else {
      SessionState snapshot = state_;
      if (type == "mark_rectangle") diff = do_mark_rectangle(action);
      else if (type == "accept_candidates") diff = do_accept(action);
      else if (type == "merge_leftovers") diff = do_merge(action);
      else if (type == "reorder_axes") diff = do_reorder(action);
      else if (type == "hide_class") diff = do_hide(action);
      else if (type == "set_scorer") diff = do_set_scorer(action);
      else diff = do_finalize(action);
      undo_.push_back(std::move(snapshot));
      ++revision_;
    }
  } catch (const ActionError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ActionError(400, std::string("malformed action: ") + e.what());
  } catch (const Error& e) {
    throw ActionError(400, e.what());
  }
  log_.push_back(logged.dump());
  diff["type"] = type;
  diff["revision"] = revision_;
  return {diff, revision_};
}

Json Session::add_iteration(std::vector<IntervalRule> rules) {
  const Dataset rem = remaining_dataset();
  const std::size_t it = state_.iteration + 1;
  std::set<CaseId> removed;
  for (auto& r : rules) {
    const auto cov = covered_cases(r, rem);
    std::set<CaseId> bad;
    for (CaseId id : cov)
      if (rem.label(*rem.index_of(id)) != r.label) bad.insert(id);
    if (!bad.empty())
      throw ActionError(422, "rectangle is not pure for " + r.label,
                        Json{{"violating_case_ids", ids_json(bad)}});
    if (cov.empty()) throw ActionError(422, "rectangle covers no remaining case");
    r.iteration = it;
    r.coverage = cov.size();
    const std::size_t in_class = rem.count_label(r.label);
    r.class_share = static_cast<double>(r.coverage) / static_cast<double>(in_class);
    r.dataset_share = static_cast<double>(r.coverage) / static_cast<double>(rem.size());
    removed.insert(cov.begin(), cov.end());
  }
  state_.iteration = it;
  state_.rules.rules.insert(state_.rules.rules.end(), rules.begin(), rules.end());
  std::vector<CaseId> keep;
  std::set_difference(state_.remaining.begin(), state_.remaining.end(), removed.begin(), removed.end(),
                      std::back_inserter(keep));
  state_.remaining = std::move(keep);
  return Json{{"rules_added", rules},
              {"cases_removed", ids_json(removed)},
              {"removed_count", removed.size()},
              {"remaining", state_.remaining.size()},
              {"iteration", it}};
}

Json Session::do_mark_rectangle(const Json& a) {
  IntervalRule r;
  r.label = require_string(a, "label");
  if (working_->count_label(r.label) == 0) throw ActionError(400, "unknown class '" + r.label + "'");
  if (!a.contains("ranges") || !a.at("ranges").is_array() || a.at("ranges").empty())
    throw ActionError(400, "mark_rectangle needs a nonempty 'ranges' array");
  std::set<std::size_t> seen;
  for (const auto& rg : a.at("ranges")) {
    AttributeRange ar;
    ar.attribute = resolve_attribute(rg.at("attribute"));
    ar.lo = rg.at("lo").get<double>();
    ar.hi = rg.at("hi").get<double>();
    if (!(ar.lo <= ar.hi)) throw ActionError(400, "range has lo > hi");
    if (!seen.insert(ar.attribute).second) throw ActionError(400, "attribute given twice in ranges");
    r.conditions.push_back(ar);
  }
  std::sort(r.conditions.begin(), r.conditions.end(),
            [](const auto& x, const auto& y) { return x.attribute < y.attribute; });
  return add_iteration({std::move(r)});
}

Json Session::do_suggest(const Json& a) {
  const Dataset rem = remaining_dataset();
  if (rem.empty()) {
    pending_.clear();
  } else {
    std::size_t minc = default_min_coverage(rem);
    if (a.contains("min_coverage")) minc = a.at("min_coverage").get<std::size_t>();
    if (minc < 1) throw ActionError(400, "min_coverage must be at least 1");
    std::vector<IntervalRule> cands;
    for (std::size_t k = 0; k < rem.dim(); ++k) {
      auto f = discover_pure_intervals(rem, k, minc);
      cands.insert(cands.end(), f.begin(), f.end());
    }
    pending_ = prune_redundant(std::move(cands), rem);
    for (auto& c : pending_) c.iteration = state_.iteration + 1;
  }
  pending_revision_ = revision_;
  Json list = Json::array();
  for (std::size_t k = 0; k < pending_.size(); ++k) {
    Json c = pending_[k];
    c["id"] = k;
    list.push_back(c);
  }
  return Json{{"candidates", list}};
}

Json Session::do_reject(const Json& a) {
  if (pending_revision_ != revision_ || pending_.empty())
    throw ActionError(409, "no current candidates; run auto_suggest first");
  std::set<std::size_t> ids = a.at("ids").get<std::set<std::size_t>>();
  for (std::size_t id : ids)
    if (id >= pending_.size()) throw ActionError(400, "unknown candidate id " + std::to_string(id));
  for (std::size_t id : ids) pending_[id].label.clear();  // marks rejection
  return Json{{"rejected", ids}};
}

Json Session::do_accept(const Json& a) {
  if (pending_revision_ != revision_ || pending_.empty())
    throw ActionError(409, "candidates are stale; run auto_suggest again");
  std::set<std::size_t> ids = a.at("ids").get<std::set<std::size_t>>();
  if (ids.empty()) throw ActionError(400, "accept_candidates needs at least one id");
  std::vector<IntervalRule> chosen;
  for (std::size_t id : ids) {
    if (id >= pending_.size()) throw ActionError(400, "unknown candidate id " + std::to_string(id));
    if (pending_[id].label.empty()) throw ActionError(409, "candidate " + std::to_string(id) + " was rejected");
    chosen.push_back(pending_[id]);
  }
  return add_iteration(std::move(chosen));
}

Json Session::do_merge(const Json& a) {
  const std::string& label = require_string(a, "label");
  if (working_->count_label(label) == 0) throw ActionError(400, "unknown class '" + label + "'");
  state_.rules.fallback = {FallbackKind::user_merge, label};
  Json removed = state_.remaining;
  const std::size_t n = state_.remaining.size();
  state_.remaining.clear();
  return Json{{"merged_into", label}, {"cases_removed", removed}, {"removed_count", n}, {"remaining", 0}};
}

Json Session::do_reorder(const Json& a) {
  std::vector<std::size_t> order;
  for (const auto& v : a.at("order")) order.push_back(resolve_attribute(v));
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != identity_order(working_->dim()))
    throw ActionError(400, "order must be a permutation of all attributes");
  state_.axis_order = order;
  if (state_.misclassified.size() > 0)
    state_.envelope = build_modified_envelope(*working_, state_.misclassified, state_.axis_order);
  return Json{{"axis_order", order}};
}

Json Session::do_hide(const Json& a) {
  const std::string& label = require_string(a, "label");
  if (working_->count_label(label) == 0) throw ActionError(400, "unknown class '" + label + "'");
  const bool hidden = a.value("hidden", true);
  if (hidden)
    state_.hidden_classes.insert(label);
  else
    state_.hidden_classes.erase(label);
  return Json{{"hidden_classes", state_.hidden_classes}};
}

Json Session::do_set_scorer(const Json& a) {
  LinearScorer f;
  if (a.contains("scorer")) {
    f = a.at("scorer").get<LinearScorer>();
    if (f.coefficients.size() != working_->dim())
      throw ActionError(400, "scorer has " + std::to_string(f.coefficients.size()) +
                                 " coefficients, data has " + std::to_string(working_->dim()));
  } else if (a.contains("train")) {
    const auto& t = a.at("train");
    f = train_fisher(select_classes(*working_, std::vector<std::string>{t.at("top").get<std::string>(),
                                                                         t.at("bottom").get<std::string>()}),
                     t.at("top").get<std::string>(), t.at("bottom").get<std::string>());
  } else {
    throw ActionError(400, "set_scorer needs 'scorer' or 'train'");
  }
  for (const auto* c : {&f.top_class, &f.bottom_class})
    if (working_->count_label(*c) == 0) throw ActionError(400, "scorer class '" + *c + "' not in data");

  const Dataset pair = select_classes(*working_, std::vector<std::string>{f.top_class, f.bottom_class});
  const auto scores = score_dataset(f, pair);
  state_.scorer = f;
  state_.misclassified = find_misclassified(scores, pair.labels(), f.cut());
  state_.interval = compute_overlap_interval(scores, pair.labels(), f.cut());
  state_.overlap_block.reset();
  state_.envelope.reset();
  state_.boosted.reset();
  if (!state_.misclassified.empty()) {
    state_.overlap_block = compute_overlap_hyperblock(*working_, state_.misclassified);
    state_.envelope = build_modified_envelope(*working_, state_.misclassified, state_.axis_order);
  }
  Json diff{{"scorer", f}, {"interval", *state_.interval}, {"misclassified", state_.misclassified}};
  if (a.value("boost", false) && !state_.interval->empty) {
    OverlapWeights w;
    if (a.contains("weights")) {
      const auto ws = a.at("weights").get<std::vector<double>>();
      if (ws.size() != 2) throw ActionError(400, "weights must be [w1, w2]");
      w = {ws[0], ws[1]};
    }
    std::set<CaseId> in_overlap;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (state_.interval->contains(scores.scores[i])) in_overlap.insert(scores.case_ids[i]);
    const Dataset ov = select_ids(pair, in_overlap);
    const std::set<CaseId> mis(state_.misclassified.begin(), state_.misclassified.end());
    const auto fit = train_weighted_overlap(ov, mis, w, f.top_class, f.bottom_class, f.coefficients);
    state_.boosted = compose_boosted(f, fit.scorer, *state_.interval);
    const auto pred = predict_boosted(*state_.boosted, pair);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < pair.size(); ++i) ok += pred[i] == pair.label(i);
    diff["boosted"] = *state_.boosted;
    diff["boosted_accuracy"] = static_cast<double>(ok) / static_cast<double>(pair.size());
  }
  return diff;
}

Json Session::do_finalize(const Json&) {
  state_.finalized = true;
  return Json{{"decision_list", state_.rules}, {"remaining", state_.remaining.size()}};
}

std::string Session::action_log() const {
  std::string out;
  for (const auto& l : log_) out += l + "\n";
  return out;
}

Session Session::replay(std::string id, Dataset base, SessionConfig config, const std::string& ndjson) {
  Session s(std::move(id), std::move(base), config);
  std::istringstream in(ndjson);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      s.apply(Json::parse(line));
    } catch (const std::exception& e) {
      throw Error("replay failed at log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return s;
}

Json Session::state_json() const {
  std::vector<std::string> order_names;
  for (std::size_t k : state_.axis_order) order_names.push_back(working_->attributes()[k]);
  Json pending = Json::array();
  if (pending_revision_ == revision_)
    for (std::size_t k = 0; k < pending_.size(); ++k)
      if (!pending_[k].label.empty()) {
        Json c = pending_[k];
        c["id"] = k;
        pending.push_back(c);
      }
  return Json{{"id", id_},
              {"revision", revision_},
              {"normalized", config_.normalize},
              {"seed", config_.seed},
              {"attributes", working_->attributes()},
              {"classes", working_->classes()},
              {"axis_order", order_names},
              {"hidden_classes", state_.hidden_classes},
              {"remaining", state_.remaining},
              {"remaining_count", state_.remaining.size()},
              {"case_count", working_->size()},
              {"iteration", state_.iteration},
              {"decision_list", state_.rules},
              {"scorer", state_.scorer ? Json(*state_.scorer) : Json(nullptr)},
              {"finalized", state_.finalized},
              {"undo_depth", undo_.size()},
              {"candidates", pending}};
}

Json Session::data_json(bool normalized) const {
  Json j;
  if (normalized)
    j = dataset_json(config_.normalize              ? *working_
                     : config_.norm_bounds.empty() ? minmax_normalize(*base_)
                                                   : minmax_normalize(*base_, config_.norm_bounds));
  else
    j = dataset_json(*base_);
  j["revision"] = revision_;
  return j;
}

Json Session::scores_json() const {
  if (!state_.scorer) throw ActionError(404, "no scorer set for this session");
  const auto& f = *state_.scorer;
  const Dataset pair = select_classes(*working_, std::vector<std::string>{f.top_class, f.bottom_class});
  const auto s = score_dataset(f, pair);
  const std::set<CaseId> mis(state_.misclassified.begin(), state_.misclassified.end());
  Json rows = Json::array();
  for (std::size_t i = 0; i < pair.size(); ++i)
    rows.push_back(Json{{"case_id", pair.case_id(i)},
                        {"label", pair.label(i)},
                        {"score", s.scores[i]},
                        {"misclassified", mis.count(pair.case_id(i)) > 0}});
  std::vector<std::size_t> idx = identity_order(pair.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return s.scores[x] > s.scores[y]; });
  std::vector<CaseId> order;
  for (std::size_t i : idx) order.push_back(pair.case_id(i));
  return Json{{"revision", revision_},
              {"scorer", f},
              {"scorer_identity", scorer_identity(f)},
              {"rows", rows},
              {"order_desc", order},
              {"interval", *state_.interval}};
}

Json Session::overlap_json() const {
  if (!state_.scorer) throw ActionError(404, "no scorer set for this session");
  return Json{{"revision", revision_},
              {"scorer_identity", scorer_identity(*state_.scorer)},
              {"interval", *state_.interval},
              {"misclassified", state_.misclassified},
              {"hyperblock", state_.overlap_block ? Json(*state_.overlap_block) : Json(nullptr)},
              {"envelope", state_.envelope ? Json(*state_.envelope) : Json(nullptr)}};
}

Json Session::export_json() const {
  return Json{{"revision", revision_},
              {"finalized", state_.finalized},
              {"decision_list", state_.rules},
              {"rules_text", render_rules(state_.rules)},
              {"generalized_dt", to_generalized_dt(state_.rules).render()},
              {"boosted", state_.boosted ? Json(*state_.boosted) : Json(nullptr)}};
}

std::string SessionStore::create(Dataset base, SessionConfig config) {
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(next_++);
  sessions_.emplace(id, std::make_shared<Entry>(Session(id, std::move(base), config)));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace civl
