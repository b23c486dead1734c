#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "curvflow/flow.hpp"
#include "curvflow/generators.hpp"
#include "curvflow/mesh_io.hpp"

namespace curvflow {

/// Flat "key = value" configuration with [section] headers and '#' comments.
/// Every key must be consumed by a typed getter; leftovers are rejected so a
/// typo cannot silently change a run.
class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& name = "<config>") {
        ConfigFile cfg;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw ConfigError(name + ":" + std::to_string(lineno) + ": malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError(name + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw ConfigError(name + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        return parse(in, path);
    }

    /// Flag override "section.key=value"; the key must exist in the schema of
    /// whatever subcommand later consumes it (leftover checking applies).
    void override_value(const std::string& assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
        values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
        }
    }

    long get_long(const std::string& key, long fallback) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("config key '" + key + "' is not an integer: '" + it->second + "'");
        }
    }

    bool get_bool(const std::string& key, bool fallback) {
        consumed_.insert(key);
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key '" + key + "' is not a boolean: '" + it->second + "'");
    }

    std::vector<std::string> get_list(const std::string& key, const std::string& fallback) {
        const std::string raw = get_string(key, fallback);
        std::vector<std::string> out;
        std::istringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    std::vector<double> get_double_list(const std::string& key, const std::string& fallback) {
        std::vector<double> out;
        for (const std::string& s : get_list(key, fallback)) {
            try {
                out.push_back(std::stod(s));
            } catch (...) {
                throw ConfigError("config key '" + key + "' holds a non-numeric entry '" + s + "'");
            }
        }
        return out;
    }

    std::vector<long> get_long_list(const std::string& key, const std::string& fallback) {
        std::vector<long> out;
        for (double v : get_double_list(key, fallback)) out.push_back(static_cast<long>(v));
        return out;
    }

    /// Call after a subcommand has read its schema; unknown keys are errors.
    void reject_unconsumed() const {
        for (const auto& [key, value] : values_)
            if (!consumed_.count(key))
                throw ConfigError("unknown config key '" + key + "'");
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;
};

/// [mesh] section: generator spec or file path. Referenced paths are checked
/// at parse time.
inline Mesh mesh_from_config(ConfigFile& cfg) {
    const std::string source = cfg.require_string("mesh.source");
    if (source == "icosphere") {
        const double radius = cfg.get_double("mesh.radius", 1.0);
        const long subdivisions = cfg.get_long("mesh.subdivisions", 3);
        return make_icosphere(radius, static_cast<int>(subdivisions));
    }
    if (source == "torus") {
        const double major = cfg.get_double("mesh.major_radius", 2.0);
        const double minor = cfg.get_double("mesh.minor_radius", 1.0);
        const long res_major = cfg.get_long("mesh.res_major", 64);
        const long res_minor = cfg.get_long("mesh.res_minor", 32);
        return make_torus(major, minor, static_cast<int>(res_major), static_cast<int>(res_minor));
    }
    if (source == "file") {
        const std::string path = cfg.require_string("mesh.path");
        if (!std::filesystem::exists(path))
            throw ConfigError("mesh.path '" + path + "' does not exist");
        const std::string fmt = cfg.get_string("mesh.format", "off");
        return load_mesh(path, mesh_format_from_string(fmt));
    }
    throw ConfigError("mesh.source must be icosphere, torus or file (got '" + source + "')");
}

/// [flow] section onto FlowConfig; range checks live in FlowConfig::validate.
inline FlowConfig flow_from_config(ConfigFile& cfg) {
    FlowConfig fc;
    const std::string kind = cfg.get_string("flow.kind", "biharmonic");
    if (kind == "biharmonic")
        fc.kind = FlowKind::Biharmonic;
    else if (kind == "willmore")
        fc.kind = FlowKind::Willmore;
    else
        throw ConfigError("flow.kind must be biharmonic or willmore (got '" + kind + "')");
    const std::string stepper = cfg.get_string("flow.stepper", "explicit-euler");
    if (stepper == "explicit-euler")
        fc.stepper = Stepper::ExplicitEuler;
    else if (stepper == "semi-implicit")
        fc.stepper = Stepper::SemiImplicit;
    else
        throw ConfigError("flow.stepper must be explicit-euler or semi-implicit");
    fc.include_tangential = cfg.get_bool("flow.include_tangential", false);
    fc.dt_safety = cfg.get_double("flow.c_dt", fc.dt_safety);
    fc.t_end = cfg.get_double("flow.t_end", fc.t_end);
    fc.max_steps = cfg.get_long("flow.max_steps", fc.max_steps);
    fc.concentration_radius = cfg.get_double("flow.concentration_radius", fc.concentration_radius);
    fc.concentration_threshold =
        cfg.get_double("flow.concentration_eps", fc.concentration_threshold);
    fc.concentration_centers =
        static_cast<int>(cfg.get_long("flow.concentration_centers", fc.concentration_centers));
    fc.snapshot_cadence = static_cast<int>(cfg.get_long("flow.snapshot_cadence", fc.snapshot_cadence));
    fc.validate();
    return fc;
}

} // namespace curvflow
