#pragma once

#include <map>
#include <optional>
#include <string>

namespace pmsm {

/// Minimal key-value config format: one `key = value` per line, `#` comments.
/// Keys are case-sensitive; values are doubles, integers or strings.
class KeyValueFile {
  public:
    KeyValueFile() = default;

    static KeyValueFile load(const std::string& path);
    static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::optional<std::string> maybe(const std::string& key) const;

    void set(const std::string& key, double value);
    void set(const std::string& key, const std::string& value);

    /// Serialize in insertion-independent sorted order.
    std::string serialize() const;
    void save(const std::string& path) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
    std::string origin_ = "<none>";
};

}  // namespace pmsm
