#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "aeon/common.hpp"

namespace aeon {

// Self-contained TOML subset: tables, dotted keys, basic strings, integers,
// floats, booleans, arrays, comments. No datetimes, multi-line strings,
// inline tables or arrays-of-tables.
class Toml {
public:
    using Array = std::vector<Toml>;
    using Table = std::map<std::string, Toml>;

    Toml() : v_(std::monostate{}) {}
    explicit Toml(bool b) : v_(b) {}
    explicit Toml(std::int64_t i) : v_(i) {}
    explicit Toml(double d) : v_(d) {}
    explicit Toml(std::string s) : v_(std::move(s)) {}
    explicit Toml(Array a) : v_(std::move(a)) {}
    explicit Toml(Table t) : v_(std::move(t)) {}

    bool is_table() const { return std::holds_alternative<Table>(v_); }
    bool is_array() const { return std::holds_alternative<Array>(v_); }
    bool is_string() const { return std::holds_alternative<std::string>(v_); }
    bool is_number() const {
        return std::holds_alternative<double>(v_) || std::holds_alternative<std::int64_t>(v_);
    }

    bool has(const std::string& key) const {
        if (!is_table()) return false;
        return std::get<Table>(v_).count(key) > 0;
    }

    const Toml& at(const std::string& key) const {
        if (!is_table()) throw validation_error("config: `" + key + "` looked up in a non-table");
        auto& t = std::get<Table>(v_);
        auto it = t.find(key);
        if (it == t.end()) throw validation_error("config: missing key `" + key + "`");
        return it->second;
    }

    double as_double(const std::string& ctx = "") const {
        if (auto* d = std::get_if<double>(&v_)) return *d;
        if (auto* i = std::get_if<std::int64_t>(&v_)) return double(*i);
        throw validation_error("config: " + ctx + " is not a number");
    }
    std::int64_t as_int(const std::string& ctx = "") const {
        if (auto* i = std::get_if<std::int64_t>(&v_)) return *i;
        throw validation_error("config: " + ctx + " is not an integer");
    }
    bool as_bool(const std::string& ctx = "") const {
        if (auto* b = std::get_if<bool>(&v_)) return *b;
        throw validation_error("config: " + ctx + " is not a boolean");
    }
    const std::string& as_string(const std::string& ctx = "") const {
        if (auto* s = std::get_if<std::string>(&v_)) return *s;
        throw validation_error("config: " + ctx + " is not a string");
    }
    const Array& as_array(const std::string& ctx = "") const {
        if (auto* a = std::get_if<Array>(&v_)) return *a;
        throw validation_error("config: " + ctx + " is not an array");
    }
    std::vector<double> as_double_array(const std::string& ctx = "") const {
        std::vector<double> out;
        for (auto& e : as_array(ctx)) out.push_back(e.as_double(ctx));
        return out;
    }

    double get_or(const std::string& key, double dflt) const {
        return has(key) ? at(key).as_double(key) : dflt;
    }
    std::int64_t get_or(const std::string& key, std::int64_t dflt) const {
        return has(key) ? at(key).as_int(key) : dflt;
    }
    std::string get_or(const std::string& key, const std::string& dflt) const {
        return has(key) ? at(key).as_string(key) : dflt;
    }
    bool get_or(const std::string& key, bool dflt) const {
        return has(key) ? at(key).as_bool(key) : dflt;
    }

    Table& table() {
        if (!is_table()) v_ = Table{};
        return std::get<Table>(v_);
    }
    const Table& table() const { return std::get<Table>(v_); }

private:
    std::variant<std::monostate, bool, std::int64_t, double, std::string, Array, Table> v_;
};

namespace detail {

struct TomlParser {
    std::string_view text;
    size_t pos = 0;
    int line = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw validation_error("config parse error at line " + std::to_string(line) + ": " +
                               msg);
    }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    void skip_ws_inline() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos;
    }

    void skip_ws_and_comments() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos;
            } else if (c == '\n') {
                take();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    std::string bare_key() {
        std::string k;
        while (!eof() && (std::isalnum((unsigned char)peek()) || peek() == '_' || peek() == '-'))
            k += take();
        if (k.empty()) fail("expected a key");
        return k;
    }

    std::vector<std::string> dotted_key() {
        std::vector<std::string> parts{bare_key()};
        skip_ws_inline();
        while (!eof() && peek() == '.') {
            take();
            skip_ws_inline();
            parts.push_back(bare_key());
            skip_ws_inline();
        }
        return parts;
    }

    std::string basic_string() {
        if (take() != '"') fail("expected '\"'");
        std::string s;
        while (true) {
            if (eof()) fail("unterminated string");
            char c = take();
            if (c == '"') break;
            if (c == '\n') fail("newline inside a basic string");
            if (c == '\\') {
                if (eof()) fail("dangling escape");
                char e = take();
                switch (e) {
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case 'r': s += '\r'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                s += c;
            }
        }
        return s;
    }

    Toml value() {
        skip_ws_inline();
        if (eof()) fail("expected a value");
        char c = peek();
        if (c == '"') return Toml(basic_string());
        if (c == '[') {  // array, possibly multiline
            take();
            Toml::Array arr;
            while (true) {
                skip_ws_and_comments();
                if (eof()) fail("unterminated array");
                if (peek() == ']') {
                    take();
                    break;
                }
                arr.push_back(value());
                skip_ws_and_comments();
                if (!eof() && peek() == ',') {
                    take();
                    continue;
                }
                skip_ws_and_comments();
                if (!eof() && peek() == ']') {
                    take();
                    break;
                }
                fail("expected ',' or ']' in array");
            }
            return Toml(std::move(arr));
        }
        if (text.compare(pos, 4, "true") == 0) {
            pos += 4;
            return Toml(true);
        }
        if (text.compare(pos, 5, "false") == 0) {
            pos += 5;
            return Toml(false);
        }
        // number
        std::string num;
        while (!eof() && (std::isalnum((unsigned char)peek()) || peek() == '+' ||
                          peek() == '-' || peek() == '.' || peek() == '_'))
            num += take();
        if (num.empty()) fail("expected a value");
        std::string clean;
        for (char ch : num)
            if (ch != '_') clean += ch;
        bool flt = clean.find_first_of(".eEnif") != std::string::npos;
        // "inf"/"nan" or anything with . or exponent is a float
        try {
            if (!flt) {
                size_t used = 0;
                std::int64_t i = std::stoll(clean, &used);
                if (used == clean.size()) return Toml(i);
            }
            size_t used = 0;
            double d = std::stod(clean, &used);
            if (used != clean.size()) fail("malformed number `" + num + "`");
            return Toml(d);
        } catch (const std::exception&) {
            fail("malformed number `" + num + "`");
        }
    }

    Toml parse() {
        Toml root{Toml::Table{}};
        Toml* current = &root;
        while (true) {
            skip_ws_and_comments();
            if (eof()) break;
            if (peek() == '[') {
                take();
                skip_ws_inline();
                auto parts = dotted_key();
                skip_ws_inline();
                if (eof() || take() != ']') fail("expected ']' after table header");
                current = &root;
                for (auto& p : parts) {
                    auto& tbl = current->table();
                    current = &tbl[p];
                    if (!current->is_table()) *current = Toml(Toml::Table{});
                }
            } else {
                auto parts = dotted_key();
                skip_ws_inline();
                if (eof() || take() != '=') fail("expected '=' after key");
                Toml v = value();
                Toml* slot = current;
                for (size_t i = 0; i + 1 < parts.size(); ++i) {
                    auto& tbl = slot->table();
                    slot = &tbl[parts[i]];
                    if (!slot->is_table()) *slot = Toml(Toml::Table{});
                }
                auto& tbl = slot->table();
                if (tbl.count(parts.back())) fail("duplicate key `" + parts.back() + "`");
                tbl[parts.back()] = std::move(v);
                skip_ws_inline();
                if (!eof() && peek() == '#')
                    while (!eof() && peek() != '\n') ++pos;
                if (!eof() && peek() != '\n' && peek() != '\r') fail("trailing junk after value");
            }
        }
        return root;
    }
};

}  // namespace detail

inline Toml toml_parse(std::string_view text) {
    detail::TomlParser p{text};
    return p.parse();
}

inline Toml toml_parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return toml_parse(ss.str());
}

}  // namespace aeon
