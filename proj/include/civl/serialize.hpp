#pragma once

// JSON forms of the workbench types. Keys are emitted in sorted order and
// doubles in shortest round-trip form, so documents are byte-stable.

#include <json.hpp>
#include <string>

#include "civl/dataset.hpp"
#include "civl/overlap.hpp"
#include "civl/rules.hpp"
#include "civl/scorers.hpp"
#include "civl/synth.hpp"

namespace civl {

using Json = nlohmann::json;

inline constexpr const char* kDecisionListSemantics = "first-match/1";

void to_json(Json& j, const LinearScorer& f);
void from_json(const Json& j, LinearScorer& f);

void to_json(Json& j, const ScoreVector& s);

void to_json(Json& j, const OverlapInterval& iv);
void from_json(const Json& j, OverlapInterval& iv);

void to_json(Json& j, const Hyperblock& hb);
void from_json(const Json& j, Hyperblock& hb);

/// Exact rationals as "p/q" strings next to double values for rendering.
void to_json(Json& j, const Envelope& e);

void to_json(Json& j, const MulticlassOverlap& m);

void to_json(Json& j, const AttributeRange& r);
void from_json(const Json& j, AttributeRange& r);
void to_json(Json& j, const IntervalRule& r);
void from_json(const Json& j, IntervalRule& r);
void to_json(Json& j, const Fallback& f);
void from_json(const Json& j, Fallback& f);

/// Carries "semantics": kDecisionListSemantics; loading rejects other versions.
void to_json(Json& j, const DecisionList& dl);
void from_json(const Json& j, DecisionList& dl);

void to_json(Json& j, const BoostedModel& m);
void from_json(const Json& j, BoostedModel& m);

void to_json(Json& j, const ConfusionMatrix& c);
void to_json(Json& j, const EvalReport& r);
void to_json(Json& j, const EvidenceReport& r);
void to_json(Json& j, const SlopeReport& r);
void to_json(Json& j, const ContainmentResult& r);

/// Batch metadata only (mode, seed, region hash, count, degenerate).
Json batch_meta_json(const SyntheticBatch& b);

/// Dataset as {attributes, label_name, rows:[{case_id,label,values}], normalized, norm_meta}.
Json dataset_json(const Dataset& d);

/// FNV-1a over the scorer's canonical JSON; ties artifacts to the scorer that produced them.
std::string scorer_identity(const LinearScorer& f);

/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

}  // namespace civl
