#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "civl/dataset.hpp"
#include "civl/error.hpp"
#include "civl/overlap.hpp"
#include "civl/rules.hpp"
#include "civl/scorers.hpp"
#include "civl/serialize.hpp"

namespace civl {

/// Action failure carrying an HTTP status and a JSON detail body.
class ActionError : public Error {
 public:
  ActionError(int status, const std::string& message, Json detail = Json::object())
      : Error(message), status_(status), detail_(std::move(detail)) {}
  int status() const { return status_; }
  const Json& detail() const { return detail_; }

 private:
  int status_;
  Json detail_;
};

struct SessionConfig {
  bool normalize = false;
  std::uint64_t seed = 0;
  /// Normalization bounds when the base was selected from a larger file; empty = from base.
  std::vector<NormRange> norm_bounds;
};

/// Everything undo restores. The base dataset is shared and immutable.
struct SessionState {
  std::vector<std::size_t> axis_order;
  std::set<std::string> hidden_classes;
  std::optional<LinearScorer> scorer;
  std::optional<OverlapInterval> interval;
  std::optional<Hyperblock> overlap_block;
  std::optional<Envelope> envelope;
  std::vector<CaseId> misclassified;
  std::optional<BoostedModel> boosted;
  DecisionList rules;
  std::vector<CaseId> remaining;  // sorted
  std::size_t iteration = 0;
  bool finalized = false;

  bool operator==(const SessionState&) const = default;
};

struct ActionResult {
  Json diff;  // machine-readable summary of the transition
  std::uint64_t revision = 0;
};

/// One analyst's interactive Divide-and-Classify session. Not thread-safe;
/// SessionStore serializes access.
class Session {
 public:
  Session(std::string id, Dataset base, SessionConfig config);

  const std::string& id() const { return id_; }
  std::uint64_t revision() const { return revision_; }
  const SessionConfig& config() const { return config_; }
  const SessionState& state() const { return state_; }
  const Dataset& base() const { return *base_; }
  /// Data the rules live in: normalized when the session is normalized.
  const Dataset& working() const { return *working_; }
  std::size_t undo_depth() const { return undo_.size(); }

  /// Applies one action object {"type": ..., ...}. An optional "revision"
  /// field must equal the current revision (409 otherwise).
  ActionResult apply(const Json& action);

  /// Newline-delimited JSON of every successfully applied action.
  std::string action_log() const;
  /// Fresh session with the log applied in order.
  static Session replay(std::string id, Dataset base, SessionConfig config, const std::string& ndjson);

  Json state_json() const;
  Json data_json(bool normalized) const;
  Json scores_json() const;
  Json overlap_json() const;
  Json export_json() const;

 private:
  Json do_mark_rectangle(const Json& a);
  Json do_accept(const Json& a);
  Json do_reject(const Json& a);
  Json do_merge(const Json& a);
  Json do_reorder(const Json& a);
  Json do_hide(const Json& a);
  Json do_suggest(const Json& a);
  Json do_set_scorer(const Json& a);
  Json do_finalize(const Json& a);
  Json add_iteration(std::vector<IntervalRule> rules);
  Dataset remaining_dataset() const;
  std::size_t resolve_attribute(const Json& v) const;

  std::string id_;
  std::shared_ptr<const Dataset> base_;
  std::shared_ptr<const Dataset> working_;
  SessionConfig config_;
  SessionState state_;
  std::vector<SessionState> undo_;
  std::uint64_t revision_ = 0;
  std::vector<std::string> log_;
  std::vector<IntervalRule> pending_;  // last auto_suggest result
  std::uint64_t pending_revision_ = 0;
};

/// Concurrent sessions; one writer per session, concurrent readers.
class SessionStore {
 public:
  struct Entry {
    std::shared_mutex mutex;
    Session session;
    explicit Entry(Session s) : session(std::move(s)) {}
  };

  std::string create(Dataset base, SessionConfig config);
  std::shared_ptr<Entry> find(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_ = 1;
};

}  // namespace civl
