#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace reception {

// Insertion-ordered so emitted records keep a stable, readable field order.
using Json = nlohmann::ordered_json;

namespace jsonl {

// Calls fn(object, line_number) for every non-blank line. Parse failures
// throw DataError with the 1-based line number.
void for_each(std::istream& in, const std::function<void(const Json&, std::size_t)>& fn);

std::vector<Json> read_all(std::istream& in);
std::vector<Json> read_file(const std::string& path);

void write_line(std::ostream& out, const Json& value);
void write_file(const std::string& path, const std::vector<Json>& rows);

std::string get_string(const Json& j, const char* key, const std::string& fallback = {});

}  // namespace jsonl
}  // namespace reception
