#include "screenbem/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace screenbem {

namespace {

bool parse_double(const std::string& s, double* out) {
    char* end = nullptr;
    *out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && !s.empty();
}

bool parse_int(const std::string& s, int* out) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (!end || *end != '\0' || s.empty())
        return false;
    *out = static_cast<int>(v);
    return true;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

} // namespace

ValidationResult validate_config(const std::map<std::string, std::string>& raw) {
    ValidationResult res;
    RunConfig cfg;
    auto issue = [&](const std::string& field, const std::string& msg) {
        res.issues.push_back({field, msg});
    };
    auto get = [&](const char* key) -> const std::string* {
        auto it = raw.find(key);
        return it == raw.end() ? nullptr : &it->second;
    };

    if (const auto* v = get("method")) {
        if (*v == "conforming")
            cfg.method = Method::Conforming;
        else if (*v == "nitsche")
            cfg.method = Method::Nitsche;
        else
            issue("method", "must be 'conforming' or 'nitsche'");
    }
    if (const auto* v = get("screen")) {
        if (*v == "model3")
            cfg.screen = ScreenKind::Model3;
        else if (*v == "square")
            cfg.screen = ScreenKind::Square;
        else
            issue("screen", "must be 'model3' or 'square'");
    } else if (cfg.method == Method::Conforming) {
        cfg.screen = ScreenKind::Square;
    }
    if (cfg.method == Method::Conforming && cfg.screen != ScreenKind::Square)
        issue("screen", "the conforming method needs a single logical mesh (screen=square)");

    if (const auto* v = get("k")) {
        if (!parse_double(*v, &cfg.k))
            issue("k", "not a number");
        else if (!(cfg.k >= 0))
            issue("k", "k must be >= 0");
    }

    const bool has_nu = raw.count("nu") > 0;
    const bool has_nu0 = raw.count("nu0") > 0;
    if (has_nu && has_nu0)
        issue("nu", "give either nu or the (nu0, epsilon) policy, not both");
    if (const auto* v = get("epsilon")) {
        if (!parse_double(*v, &cfg.epsilon) || cfg.epsilon < 0)
            issue("epsilon", "must be a number >= 0");
        if (!has_nu0)
            issue("epsilon", "epsilon needs nu0");
    }
    if (has_nu || has_nu0) {
        for (const std::string& part : split(*get(has_nu ? "nu" : "nu0"), ',')) {
            double nu;
            if (!parse_double(part, &nu) || !(nu > 0)) {
                issue(has_nu ? "nu" : "nu0", "penalty values must be positive numbers");
                break;
            }
            cfg.nus.push_back(nu);
        }
        if (cfg.nus.empty())
            issue(has_nu ? "nu" : "nu0", "no penalty value given");
    } else if (cfg.method == Method::Nitsche) {
        issue("nu", "the nitsche method needs nu (or nu0 with epsilon)");
    }

    if (const auto* v = get("levels")) {
        const auto pos = v->find("..");
        bool ok = true;
        if (pos == std::string::npos) {
            ok = parse_int(*v, &cfg.level_begin);
            cfg.level_end = cfg.level_begin;
        } else {
            ok = parse_int(v->substr(0, pos), &cfg.level_begin) &&
                 parse_int(v->substr(pos + 2), &cfg.level_end);
        }
        if (!ok)
            issue("levels", "expected A..B or a single level");
        else if (cfg.level_begin < 0 || cfg.level_end < cfg.level_begin)
            issue("levels", "need 0 <= A <= B");
    }

    if (const auto* v = get("quad-orders")) {
        const auto parts = split(*v, ',');
        int q[4];
        bool ok = parts.size() == 4;
        for (size_t i = 0; ok && i < 4; ++i)
            ok = parse_int(parts[i], &q[i]) && q[i] >= 2 && q[i] <= 30;
        if (!ok) {
            issue("quad-orders", "expected d,v,e,c with orders in [2,30]");
        } else {
            cfg.orders.disjoint = q[0];
            cfg.orders.vertex = q[1];
            cfg.orders.edge = q[2];
            cfg.orders.coincident = q[3];
        }
    }

    if (const auto* v = get("out")) {
        cfg.out_dir = *v;
    } else if (const char* env = std::getenv("SCREENBEM_OUT")) {
        cfg.out_dir = env;
    }
    if (cfg.out_dir.empty())
        issue("out", "output directory must not be empty");

    if (const auto* v = get("threads")) {
        if (!parse_int(*v, &cfg.threads) || cfg.threads < 0)
            issue("threads", "must be an integer >= 0 (0 = hardware)");
    }
    if (const auto* v = get("dump-mesh"))
        cfg.dump_mesh = *v != "0" && *v != "false";
    if (const auto* v = get("dump-matrix"))
        cfg.dump_matrix = *v != "0" && *v != "false";

    for (const auto& [key, value] : raw) {
        (void)value;
        static const char* known[] = {"method", "screen", "k",   "nu",      "nu0",
                                      "epsilon", "levels", "quad-orders", "out",
                                      "threads", "dump-mesh", "dump-matrix"};
        bool found = false;
        for (const char* kk : known)
            found = found || key == kk;
        if (!found)
            issue(key, "unknown setting");
    }

    if (res.issues.empty())
        res.config = cfg;
    return res;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (!key.empty())
            kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

} // namespace screenbem
