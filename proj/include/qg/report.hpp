#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qg/common.hpp"

namespace qg {

// Insertion-ordered JSON tree with deterministic serialization: every
// floating value is printed by fmt_g15 (15 significant digits), so identical
// inputs give byte-identical reports. Non-finite numbers serialize as the
// strings "inf", "-inf", "nan" to keep the output valid JSON.
class JsonValue {
  public:
    JsonValue() = default;  // null
    static JsonValue boolean(bool b);
    static JsonValue integer(long long i);
    static JsonValue number(double d);
    static JsonValue string(std::string s);
    static JsonValue array();
    static JsonValue object();

    // Object field (insertion order preserved); replaces an existing key.
    JsonValue& set(const std::string& key, JsonValue v);
    // Array append.
    JsonValue& push(JsonValue v);

    bool is_object() const { return kind_ == Kind::object; }
    bool is_array() const { return kind_ == Kind::array; }

    std::string dump(int indent = 2) const;

  private:
    enum class Kind { null, boolean, integer, number, string, array, object };
    Kind kind_ = Kind::null;
    bool b_ = false;
    long long i_ = 0;
    double d_ = 0.0;
    std::string s_;
    std::vector<JsonValue> arr_;
    std::vector<std::pair<std::string, JsonValue>> obj_;

    void dump_to(std::string& out, int indent, int depth) const;
};

// RFC-4180 CSV accumulator: CRLF rows, '.' decimal separator expected in the
// cells (callers format numbers with fmt_g15), quoting only when needed.
class CsvBuilder {
  public:
    explicit CsvBuilder(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);  // size must match header
    const std::string& text() const { return text_; }

  private:
    std::size_t width_;
    std::string text_;
    void emit(const std::vector<std::string>& cells);
};

// Writes content to path, creating parent directories.
void write_file(const std::string& path, const std::string& content);

// Reads a whole file; throws std::runtime_error when unreadable.
std::string read_file(const std::string& path);

bool file_exists(const std::string& path);

}  // namespace qg
