#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "isopara/classify.hpp"
#include "isopara/fields.hpp"
#include "isopara/profile.hpp"
#include "isopara/verify.hpp"

namespace isopara {

using Json = nlohmann::ordered_json;

// All parsers throw ParseError on malformed input; field parsing forwards
// InvalidSpec from make_field.

Json to_json(const Profile& p);
Profile profile_from_json(const Json& j);

/// Canonical form: every parameter explicit.
Json to_json(const CanonicalField& field);
/// Missing q / R0 are drawn from `seed`; missing x0 / x_star default to 0.
FieldSpec field_spec_from_json(const Json& j, std::uint64_t seed = 0);
CanonicalField field_from_json(const Json& j, std::uint64_t seed = 0);

Json to_json(const ClassificationReport& rep);
Json to_json(const SuiteResult& res);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace isopara
