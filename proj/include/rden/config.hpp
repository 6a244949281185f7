#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rden {

/// Flat `key = value` run configuration.
///
/// Every key must appear in the built-in schema; unknown keys and values
/// that fail their type or range check throw ConfigError naming the key.
/// Real values accept fractions such as `25/255`. Lines starting with '#'
/// (and anything after a '#') are comments.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(const std::string& text, const std::string& source = "<config>");
    static RunConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    /// Applies a `key=value` override as given on the command line.
    void apply_override(const std::string& assignment);

    bool is_set(const std::string& key) const;

    std::string text(const std::string& key) const;
    double real(const std::string& key) const;
    std::uint64_t u64(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::string> list(const std::string& key) const;
    std::vector<double> real_list(const std::string& key) const;

    /// Every known key with its default, one `key = value` line each.
    static std::string schema_listing();

private:
    std::string raw(const std::string& key) const;
    std::map<std::string, std::string> values_;
};

/// Parses a real number or a fraction `a/b`.
double parse_real(const std::string& text);

} // namespace rden
