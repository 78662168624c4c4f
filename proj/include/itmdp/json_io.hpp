#pragma once

// JSON encoding of models, parameters and analysis results.
//
// Non-finite reals are written as the strings "inf", "-inf" and "nan" and
// accepted in that form on input. Structural problems (missing fields,
// wrong types, ragged matrices) raise ParseError; constraint violations are
// left to the modules' validators.

#include <string>

#include <json.hpp>

#include "itmdp/belief.hpp"
#include "itmdp/it_model.hpp"
#include "itmdp/mdp_core.hpp"
#include "itmdp/semi_markov.hpp"
#include "itmdp/simulator.hpp"

namespace itmdp::json_io {

using Json = nlohmann::ordered_json;

Json parse_text(const std::string& text);
Json parse_file(const std::string& path);

Json number(double v);
double to_double(const Json& j, const std::string& where);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where);

it::ItParams params_from_json(const Json& j);
Json to_json(const it::ItParams& p);

DetectorParams detector_from_json(const Json& j);
Json to_json(const DetectorParams& d);

/// Fields: n_states, n_actions, state_labels, action_labels, transition,
/// cost, optional observation, optional cost_channel. A cost_channel entry
/// is "M" (all maintenance), "F" (all failure) or the maintenance amount.
GenericMdp mdp_from_json(const Json& j);
Json to_json(const GenericMdp& m);

/// A GenericMdp document with an extra `durations` field.
SemiMarkovModel smdp_from_json(const Json& j);
Json to_json(const SemiMarkovModel& m);

/// Array of action indices, or a string of action labels such as "WDR"
/// when every label of `model` is a single character.
StationaryPolicy policy_from_json(const Json& j, const GenericMdp& model);
Json to_json(const StationaryPolicy& p);

Json to_json(const it::PolicyTriple& t);
Json to_json(const it::Comparison& c);
Json to_json(const it::SufficiencyClass& s);
Json to_json(const it::PartitionGeometry& g);
Json to_json(const PolicyEvaluation& e);
Json to_json(const SimResult& r);
Json to_json(const FirstPassageStats& f);
Json to_json(const UniformizedModel& u);

}  // namespace itmdp::json_io
