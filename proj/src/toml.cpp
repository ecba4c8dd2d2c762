#include "csmooth/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "csmooth/errors.hpp"

namespace csmooth {

using nlohmann::json;

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        else if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

std::vector<std::string> split_dotted(const std::string& key, std::size_t line) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : key) {
        if (c == '.') {
            if (cur.empty()) fail(line, "empty path segment in '" + key + "'");
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (cur.empty()) fail(line, "empty path segment in '" + key + "'");
    parts.push_back(cur);
    return parts;
}

std::string parse_string_literal(const std::string& raw, std::size_t line) {
    if (raw.size() < 2 || raw.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
        char c = raw[i];
        if (c == '\\') {
            if (i + 2 >= raw.size()) fail(line, "dangling escape in string");
            ++i;
            switch (raw[i]) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(line, std::string("unsupported escape \\") + raw[i]);
            }
        } else if (c == '"') {
            fail(line, "unexpected '\"' inside string (escape it)");
        } else {
            out += c;
        }
    }
    return out;
}

json parse_scalar(const std::string& raw, std::size_t line);

json parse_array(const std::string& raw, std::size_t line) {
    if (raw.size() < 2 || raw.back() != ']') fail(line, "unterminated array");
    json arr = json::array();
    std::string body = raw.substr(1, raw.size() - 2);
    std::string item;
    bool in_string = false;
    int depth = 0;
    auto flush = [&]() {
        const std::string v = strip(item);
        if (!v.empty()) arr.push_back(parse_scalar(v, line));
        item.clear();
    };
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
        if (!in_string) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                flush();
                continue;
            }
        }
        item += c;
    }
    flush();
    return arr;
}

json parse_scalar(const std::string& raw, std::size_t line) {
    if (raw.empty()) fail(line, "missing value");
    if (raw.front() == '"') return parse_string_literal(raw, line);
    if (raw.front() == '[') return parse_array(raw, line);
    if (raw == "true") return true;
    if (raw == "false") return false;

    // TOML permits underscores in numbers.
    std::string num;
    for (char c : raw) {
        if (c != '_') num += c;
    }
    bool integer = !num.empty();
    for (std::size_t i = 0; i < num.size(); ++i) {
        const bool sign = i == 0 && (num[i] == '+' || num[i] == '-');
        if (!sign && !std::isdigit(static_cast<unsigned char>(num[i]))) integer = false;
    }
    try {
        std::size_t used = 0;
        if (integer) {
            const long long v = std::stoll(num, &used, 10);
            if (used == num.size()) return v;
        } else {
            const double v = std::stod(num, &used);
            if (used == num.size()) return v;
        }
    } catch (const std::exception&) {
        // fall through
    }
    fail(line, "cannot parse value '" + raw + "'");
}

}  // namespace

json parse_toml(const std::string& text) {
    json root = json::object();
    json* table = &root;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = strip(strip_comment(line));
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.size() < 3 || s.back() != ']') fail(line_no, "malformed table header");
            if (s[1] == '[') fail(line_no, "arrays of tables are not supported");
            const std::string path = strip(s.substr(1, s.size() - 2));
            if (path.empty()) fail(line_no, "empty table name");
            table = &root;
            for (const std::string& part : split_dotted(path, line_no)) {
                table = &(*table)[part];
                if (!table->is_object() && !table->is_null()) {
                    fail(line_no, "table '" + path + "' collides with an existing value");
                }
                if (table->is_null()) *table = json::object();
            }
            continue;
        }

        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
        const std::string key = strip(s.substr(0, eq));
        const std::string value = strip(s.substr(eq + 1));
        if (key.empty()) fail(line_no, "empty key");

        json* slot = table;
        const auto parts = split_dotted(key, line_no);
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
            slot = &(*slot)[parts[i]];
            if (slot->is_null()) *slot = json::object();
            if (!slot->is_object()) fail(line_no, "key path collides with an existing value");
        }
        if (slot->contains(parts.back())) fail(line_no, "duplicate key '" + key + "'");
        (*slot)[parts.back()] = parse_scalar(value, line_no);
    }
    return root;
}

json parse_config_text(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("invalid JSON config: ") + e.what());
        }
    }
    return parse_toml(text);
}

json load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key.path=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* slot = &config;
    for (const std::string& part : split_dotted(path, 0)) {
        slot = &(*slot)[part];
    }
    try {
        *slot = json::parse(value);
    } catch (const json::parse_error&) {
        *slot = value;  // plain string
    }
}

}  // namespace csmooth
