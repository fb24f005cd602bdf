#include "qg/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qg {

namespace {

void escape_json(std::string& out, const std::string& s) {
    out += '"';
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace

JsonValue JsonValue::boolean(bool b) {
    JsonValue v;
    v.kind_ = Kind::boolean;
    v.b_ = b;
    return v;
}

JsonValue JsonValue::integer(long long i) {
    JsonValue v;
    v.kind_ = Kind::integer;
    v.i_ = i;
    return v;
}

JsonValue JsonValue::number(double d) {
    JsonValue v;
    v.kind_ = Kind::number;
    v.d_ = d;
    return v;
}

JsonValue JsonValue::string(std::string s) {
    JsonValue v;
    v.kind_ = Kind::string;
    v.s_ = std::move(s);
    return v;
}

JsonValue JsonValue::array() {
    JsonValue v;
    v.kind_ = Kind::array;
    return v;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.kind_ = Kind::object;
    return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
    if (kind_ != Kind::object) throw std::logic_error("JsonValue::set on a non-object");
    for (auto& [k, old] : obj_)
        if (k == key) {
            old = std::move(v);
            return *this;
        }
    obj_.emplace_back(key, std::move(v));
    return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
    if (kind_ != Kind::array) throw std::logic_error("JsonValue::push on a non-array");
    arr_.push_back(std::move(v));
    return *this;
}

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (kind_) {
        case Kind::null: out += "null"; break;
        case Kind::boolean: out += b_ ? "true" : "false"; break;
        case Kind::integer: out += std::to_string(i_); break;
        case Kind::number:
            if (std::isfinite(d_)) {
                out += fmt_g15(d_);
            } else {
                escape_json(out, d_ > 0 ? "inf" : (d_ < 0 ? "-inf" : "nan"));
            }
            break;
        case Kind::string: escape_json(out, s_); break;
        case Kind::array:
            if (arr_.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < arr_.size(); ++i) {
                out += pad;
                arr_[i].dump_to(out, indent, depth + 1);
                out += (i + 1 < arr_.size()) ? ",\n" : "\n";
            }
            out += close_pad + "]";
            break;
        case Kind::object:
            if (obj_.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            for (std::size_t i = 0; i < obj_.size(); ++i) {
                out += pad;
                escape_json(out, obj_[i].first);
                out += ": ";
                obj_[i].second.dump_to(out, indent, depth + 1);
                out += (i + 1 < obj_.size()) ? ",\n" : "\n";
            }
            out += close_pad + "}";
            break;
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    out += '\n';
    return out;
}

CsvBuilder::CsvBuilder(std::vector<std::string> header) : width_(header.size()) {
    emit(header);
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_)
        throw std::logic_error("CsvBuilder: row width does not match the header");
    emit(cells);
}

void CsvBuilder::emit(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\r\n") != std::string::npos) {
            text_ += '"';
            for (const char ch : c) {
                if (ch == '"') text_ += '"';
                text_ += ch;
            }
            text_ += '"';
        } else {
            text_ += c;
        }
    }
    text_ += "\r\n";
}

void write_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool file_exists(const std::string& path) {
    std::error_code ec;
    return std::filesystem::exists(path, ec);
}

}  // namespace qg
