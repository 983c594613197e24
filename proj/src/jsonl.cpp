#include "reception/jsonl.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "reception/error.hpp"

namespace reception::jsonl {

namespace {

bool is_blank(const std::string& line) {
    for (char c : line) {
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
    }
    return true;
}

}  // namespace

void for_each(std::istream& in, const std::function<void(const Json&, std::size_t)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        Json value;
        try {
            value = Json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
        }
        if (!value.is_object()) {
            throw DataError("line " + std::to_string(line_no) + ": expected a JSON object");
        }
        fn(value, line_no);
    }
}

std::vector<Json> read_all(std::istream& in) {
    std::vector<Json> rows;
    for_each(in, [&](const Json& j, std::size_t) { rows.push_back(j); });
    return rows;
}

std::vector<Json> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return read_all(in);
}

void write_line(std::ostream& out, const Json& value) {
    out << value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

void write_file(const std::string& path, const std::vector<Json>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& r : rows) write_line(out, r);
}

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    if (it->is_string()) return it->get<std::string>();
    return it->dump();
}

}  // namespace reception::jsonl
