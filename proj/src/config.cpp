#include "rden/config.hpp"

#include "rden/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>

namespace rden {

namespace {

enum class Kind { Real, Count, U64, Flag, Text, List, RealList };

struct KeySpec {
    const char* name;
    Kind kind;
    const char* fallback;
    std::optional<double> min = std::nullopt;
    std::optional<double> max = std::nullopt;
    std::vector<std::string> choices = {};
};

const std::vector<KeySpec>& schema()
{
    static const std::vector<KeySpec> keys = {
        {"seed", Kind::U64, "1"},
        {"out", Kind::Text, "out"},
        // data generation
        {"size", Kind::Count, "64", 16},
        {"count", Kind::Count, "1", 1},
        {"ellipses_min", Kind::Count, "4", 1},
        {"ellipses_max", Kind::Count, "10", 1},
        {"intensity_min", Kind::Real, "0.2", 0.0, 1.0},
        {"intensity_max", Kind::Real, "0.9", 0.0, 1.0},
        {"test_fraction", Kind::Real, "0", 0.0, 0.99},
        {"bit_depth", Kind::Count, "16", 8, 16, {"8", "16"}},
        // inputs
        {"manifest", Kind::Text, ""},
        {"split", Kind::Text, "all", {}, {}, {"all", "train", "test"}},
        // noise
        {"noise", Kind::Text, "gaussian", {}, {},
         {"gaussian", "gaussian_pair", "gaussian_independent_pair", "poisson", "poisson_pair"}},
        {"sigma", Kind::Real, "25/255", 0.0},
        {"sigma1", Kind::Real, "25/255", 0.0},
        {"sigma_z", Kind::Real, "25/255", 0.0},
        {"peak", Kind::Real, "255", std::numeric_limits<double>::min()},
        // network
        {"depth", Kind::Count, "5", 2},
        {"channels", Kind::Count, "16", 1},
        {"kernel", Kind::Count, "3", 1},
        {"residual", Kind::Flag, "true"},
        // training
        {"loss", Kind::Text, "mse", {}, {}, {"mse", "n2n", "sure", "mc-sure", "esure", "epure"}},
        {"epochs", Kind::Count, "40"},
        {"batch_size", Kind::Count, "16", 1},
        {"learning_rate", Kind::Real, "1e-3", std::numeric_limits<double>::min()},
        {"lr_drop_factor", Kind::Real, "0.1", std::numeric_limits<double>::min()},
        {"lr_drop_epoch", Kind::Text, "auto"},
        {"epsilon", Kind::Real, "1e-3", std::numeric_limits<double>::min()},
        {"probe", Kind::Text, "rademacher", {}, {}, {"rademacher", "gaussian"}},
        {"optimizer", Kind::Text, "adam", {}, {}, {"adam", "sgd"}},
        {"init_seed", Kind::U64, "1"},
        {"patch", Kind::Count, "0"},
        {"stride", Kind::Count, "0"},
        {"patch_limit", Kind::Count, "0"},
        {"val_manifest", Kind::Text, ""},
        // denoise / eval
        {"weights", Kind::Text, ""},
        {"reference", Kind::Text, ""},
        {"test", Kind::Text, ""},
        {"metric_peak", Kind::Real, "1", std::numeric_limits<double>::min()},
        // validation studies
        {"estimators", Kind::List, "sure,mc-sure,esure,esure-mc,pure,epure"},
        {"gaussian_denoisers", Kind::List, "identity,constant,box3,soft"},
        {"poisson_denoisers", Kind::List, "identity,constant,box3"},
        {"sigmas", Kind::RealList, "25/255,50/255"},
        {"peaks", Kind::RealList, "127.5,255"},
        {"draws", Kind::Count, "2000", 100},
        {"poisson_draws", Kind::Count, "5000", 100},
        {"constant_value", Kind::Real, "0.5"},
        {"soft_tau", Kind::Real, "0.1", 0.0},
        {"phantom_index", Kind::Count, "0"},
    };
    return keys;
}

const KeySpec& find_key(const std::string& key)
{
    for (const KeySpec& k : schema())
        if (key == k.name)
            return k;
    throw ConfigError("unknown configuration key '" + key + "'");
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

std::uint64_t parse_unsigned(const std::string& text)
{
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("not an unsigned integer");
    return std::stoull(text);
}

bool parse_flag(const std::string& text)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw std::invalid_argument("not a boolean");
}

void check_range(const KeySpec& spec, double v)
{
    if (spec.min && v < *spec.min)
        throw ConfigError(std::string(spec.name) + ": value " + std::to_string(v)
                          + " is below the minimum " + std::to_string(*spec.min));
    if (spec.max && v > *spec.max)
        throw ConfigError(std::string(spec.name) + ": value " + std::to_string(v)
                          + " is above the maximum " + std::to_string(*spec.max));
}

void check_value(const KeySpec& spec, const std::string& value)
{
    try {
        switch (spec.kind) {
        case Kind::Real: check_range(spec, parse_real(value)); break;
        case Kind::Count:
        case Kind::U64: {
            const std::uint64_t v = parse_unsigned(value);
            check_range(spec, static_cast<double>(v));
            break;
        }
        case Kind::Flag: parse_flag(value); break;
        case Kind::Text: break;
        case Kind::List: break;
        case Kind::RealList:
            for (const std::string& item : split_list(value))
                check_range(spec, parse_real(item));
            break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(std::string(spec.name) + ": cannot parse value '" + value + "'");
    }
    if (!spec.choices.empty()
        && std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
        std::string allowed;
        for (const std::string& c : spec.choices)
            allowed += (allowed.empty() ? "" : ", ") + c;
        throw ConfigError(std::string(spec.name) + ": '" + value + "' is not one of " + allowed);
    }
}

} // namespace

double parse_real(const std::string& raw_text)
{
    const std::string text = trim(raw_text);
    auto parse_one = [](const std::string& s) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v))
            throw std::invalid_argument("bad real");
        return v;
    };
    const auto slash = text.find('/');
    if (slash == std::string::npos)
        return parse_one(text);
    const double num = parse_one(trim(text.substr(0, slash)));
    const double den = parse_one(trim(text.substr(slash + 1)));
    if (den == 0.0)
        throw std::invalid_argument("division by zero");
    return num / den;
}

RunConfig RunConfig::parse(const std::string& text, const std::string& source)
{
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(ss, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    const KeySpec& spec = find_key(key);
    check_value(spec, value);
    values_[key] = value;
}

void RunConfig::apply_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool RunConfig::is_set(const std::string& key) const
{
    find_key(key);
    return values_.count(key) != 0;
}

std::string RunConfig::raw(const std::string& key) const
{
    const KeySpec& spec = find_key(key);
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : std::string(spec.fallback);
}

std::string RunConfig::text(const std::string& key) const
{
    return raw(key);
}

double RunConfig::real(const std::string& key) const
{
    return parse_real(raw(key));
}

std::uint64_t RunConfig::u64(const std::string& key) const
{
    return parse_unsigned(raw(key));
}

std::size_t RunConfig::count(const std::string& key) const
{
    return static_cast<std::size_t>(parse_unsigned(raw(key)));
}

bool RunConfig::flag(const std::string& key) const
{
    return parse_flag(raw(key));
}

std::vector<std::string> RunConfig::list(const std::string& key) const
{
    return split_list(raw(key));
}

std::vector<double> RunConfig::real_list(const std::string& key) const
{
    std::vector<double> out;
    for (const std::string& item : split_list(raw(key)))
        out.push_back(parse_real(item));
    return out;
}

std::string RunConfig::schema_listing()
{
    std::string out;
    for (const KeySpec& k : schema())
        out += std::string(k.name) + " = " + k.fallback + "\n";
    return out;
}

} // namespace rden
