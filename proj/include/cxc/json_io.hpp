#pragma once

#include "json.hpp"

#include <string>

namespace cxc {

using Json = nlohmann::ordered_json;

/// Deterministic serialization: insertion-ordered keys, floats at 12
/// significant digits, non-finite floats as the strings "inf"/"-inf"/"nan".
std::string dump_stable(const Json& j, int indent = 2);

/// Float formatted the same way dump_stable prints it.
std::string format_real(double v);

Json parse_json_text(const std::string& text, const std::string& origin);
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

}  // namespace cxc
