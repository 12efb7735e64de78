#include <hedgebo/experiment.hpp>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hedgebo {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("invalid number for " + key + ": '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError("invalid integer for " + key + ": '" + text + "'");
    }
    return v;
}

int parse_int(const std::string& key, const std::string& text) {
    const long long v = parse_integer(key, text);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError("integer out of range for " + key);
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = lower(trim(text));
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + text + "'");
}

}  // namespace

AcquisitionSpec parse_acquisition_spec(const std::string& text) {
    const std::string label = trim(text);
    const auto colon = label.find(':');
    const std::string kind = lower(trim(label.substr(0, colon)));

    AcquisitionSpec spec;
    if (kind == "pi") {
        spec = AcquisitionSpec::pi();
    } else if (kind == "ei") {
        spec = AcquisitionSpec::ei();
    } else if (kind == "ucb") {
        spec = AcquisitionSpec::ucb(1.0);
    } else if (kind == "eipi") {
        spec = AcquisitionSpec::eipi(0.01, 1.0);
    } else if (kind == "gpucb" || kind == "gp-ucb") {
        spec = AcquisitionSpec::gp_ucb();
    } else if (kind == "thompson") {
        spec = AcquisitionSpec::thompson();
    } else {
        throw ConfigError("unknown acquisition kind in spec '" + text + "'");
    }

    if (colon != std::string::npos) {
        std::stringstream params(label.substr(colon + 1));
        std::string item;
        while (std::getline(params, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("expected key=value in spec '" + text + "'");
            }
            const std::string key = lower(trim(item.substr(0, eq)));
            const std::string value = item.substr(eq + 1);
            const bool uses_xi = spec.kind == AcquisitionKind::PI || spec.kind == AcquisitionKind::EI ||
                                 spec.kind == AcquisitionKind::EIPI;
            const bool uses_lambda = spec.kind == AcquisitionKind::UCB || spec.kind == AcquisitionKind::EIPI;
            if ((key == "xi" || key == "epsilon") && uses_xi) {
                spec.xi = parse_double(key, value);
            } else if (key == "lambda" && uses_lambda) {
                spec.lambda = parse_double(key, value);
            } else if (key == "delta" && spec.kind == AcquisitionKind::GPUCB) {
                spec.delta = parse_double(key, value);
            } else if (key == "nu" && spec.kind == AcquisitionKind::GPUCB) {
                spec.nu = parse_double(key, value);
            } else if (key == "candidates" && spec.kind == AcquisitionKind::Thompson) {
                spec.thompson_candidates = parse_int(key, value);
            } else {
                throw ConfigError("parameter '" + key + "' does not apply to " + kind);
            }
        }
    }
    spec.label = label;
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError("spec '" + text + "': " + e.what());
    }
    return spec;
}

void apply_strategy(ExperimentConfig& config, const std::string& text) {
    const std::string t = trim(text);
    const std::string key = lower(t);
    if (key == "hedge" || key == "gp-hedge") {
        config.strategy = Strategy::Hedge;
    } else if (key == "exp3") {
        config.strategy = Strategy::Exp3;
    } else if (key.rfind("single:", 0) == 0) {
        config.strategy = Strategy::Single;
        config.single_spec = trim(t.substr(7));
        if (config.single_spec.empty()) {
            throw ConfigError("single strategy needs a spec name");
        }
    } else {
        throw ConfigError("unknown strategy '" + text + "' (expected hedge, exp3 or single:<spec>)");
    }
}

void apply_setting(ExperimentConfig& config, const std::string& raw_key, const std::string& value) {
    const std::string key = lower(trim(raw_key));
    if (key == "function") {
        config.function_name = trim(value);
    } else if (key == "strategy") {
        apply_strategy(config, value);
    } else if (key == "iterations") {
        config.iterations = parse_int(key, value);
    } else if (key == "trials") {
        config.trials = parse_int(key, value);
    } else if (key == "seed") {
        const long long s = parse_integer(key, value);
        if (s < 0) throw ConfigError("seed must be non-negative");
        config.base_seed = static_cast<std::uint64_t>(s);
    } else if (key == "eta") {
        config.eta = parse_double(key, value);
    } else if (key == "exp3_mix") {
        config.exp3_mix = parse_double(key, value);
    } else if (key == "noise_variance") {
        config.noise_variance = parse_double(key, value);
    } else if (key == "refit_interval") {
        config.refit_interval = parse_int(key, value);
    } else if (key == "standardize") {
        config.standardize = parse_bool(key, value);
    } else if (key == "initial_points") {
        config.initial_points = parse_int(key, value);
    } else if (key == "n_candidates") {
        config.n_candidates = parse_int(key, value);
    } else if (key == "local_steps") {
        config.n_local_steps = parse_int(key, value);
    } else if (key == "local_shrink") {
        config.local_shrink = parse_double(key, value);
    } else if (key == "fit_starts") {
        config.fit.starts = parse_int(key, value);
    } else if (key == "fit_passes") {
        config.fit.passes = parse_int(key, value);
    } else if (key == "fit_golden_iterations") {
        config.fit.golden_iterations = parse_int(key, value);
    } else if (key == "jobs") {
        config.jobs = parse_int(key, value);
    } else if (key == "series") {
        config.series = trim(value);
    } else {
        throw ConfigError("unknown config key '" + raw_key + "'");
    }
}

ConfigFile read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file: " + path);
    }
    ConfigFile file;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        file.entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return file;
}

}  // namespace hedgebo
