#include "fdmimo/sysconfig.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fdmimo {

using nlohmann::json;

std::string to_string(SicMethod m) {
    switch (m) {
        case SicMethod::NoSic: return "nosic";
        case SicMethod::Subtraction: return "stt";
        case SicMethod::SpatialSuppression: return "sps";
    }
    return "?";
}

SicMethod parse_sic_method(const std::string& name) {
    if (name == "nosic" || name == "none") return SicMethod::NoSic;
    if (name == "stt" || name == "subtraction") return SicMethod::Subtraction;
    if (name == "sps" || name == "spatial-suppression") return SicMethod::SpatialSuppression;
    throw ConfigError("unknown SIC method \"" + name + "\" (expected nosic|stt|sps)");
}

double db_to_linear(double x_db) {
    if (!std::isfinite(x_db)) throw std::invalid_argument("db_to_linear: non-finite input");
    return std::pow(10.0, x_db / 10.0);
}

double linear_to_db(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("linear_to_db: input must be positive and finite");
    return 10.0 * std::log10(x);
}

void SystemConfig::validate_structural() const {
    if (m_tx < 1) throw ConfigError("m_tx: must be a positive count");
    if (n_rx < 1) throw ConfigError("n_rx: must be a positive count");
    if (k_dl < 1) throw ConfigError("k_dl: must be a positive count");
    if (k_ul < 1) throw ConfigError("k_ul: must be a positive count");
    if (tau_si < 1) throw ConfigError("tau_si: must be a positive count");
    if (adc_bits && *adc_bits < 1) throw ConfigError("adc_bits: must be >= 1");
    if (!std::isfinite(rho_d_db)) throw ConfigError("rho_d_db: must be finite");
    if (beta_dl_db.size() != 1 && beta_dl_db.size() != static_cast<size_t>(k_dl))
        throw ConfigError("beta_dl_db: expected a scalar or one value per downlink user");
    if (beta_ul_db.size() != 1 && beta_ul_db.size() != static_cast<size_t>(k_ul))
        throw ConfigError("beta_ul_db: expected a scalar or one value per uplink user");
    for (double b : beta_dl_db)
        if (!std::isfinite(b)) throw ConfigError("beta_dl_db: must be finite");
    for (double b : beta_ul_db)
        if (!std::isfinite(b)) throw ConfigError("beta_ul_db: must be finite");
    if (!std::isfinite(beta_si_db)) throw ConfigError("beta_si_db: must be finite");
    if (!std::isfinite(beta_uu_db)) throw ConfigError("beta_uu_db: must be finite");
    if (!std::isfinite(alpha_anc_db)) throw ConfigError("alpha_anc_db: must be finite");
    if (!std::isfinite(alpha_tx_db)) throw ConfigError("alpha_tx_db: must be finite");
    if (!rho_u_db && !rho_ul_db) throw ConfigError("rho_u_db: either rho_u_db or rho_ul_db is required");
}

void SystemConfig::validate() const {
    validate_structural();
    if (m_tx < n_rx + k_dl)
        throw ConfigError("m_tx: antenna budget violated, m_tx (" + std::to_string(m_tx) +
                          ") must be >= n_rx + k_dl (" + std::to_string(n_rx + k_dl) + ")");
    if (n_rx < k_ul)
        throw ConfigError("n_rx: must be >= k_ul (" + std::to_string(k_ul) + ")");
    if (tau_si < n_rx)
        throw ConfigError("tau_si: must be >= n_rx (" + std::to_string(n_rx) + ")");
}

LinkBudget derive_link_budget(const SystemConfig& cfg) {
    cfg.validate();
    return derive_link_budget_unchecked(cfg);
}

LinkBudget derive_link_budget_unchecked(const SystemConfig& cfg) {
    cfg.validate_structural();
    LinkBudget b;
    b.rho_d = db_to_linear(cfg.rho_d_db);
    b.beta_si = db_to_linear(cfg.beta_si_db);
    b.alpha_anc = db_to_linear(cfg.alpha_anc_db);
    b.alpha_tx = db_to_linear(cfg.alpha_tx_db);
    b.rho_si = b.rho_d * b.beta_si;

    b.rho_ul.set_size(cfg.k_ul);
    if (cfg.rho_ul_db) {
        b.rho_ul.fill(db_to_linear(*cfg.rho_ul_db));
    } else {
        const double rho_u = db_to_linear(*cfg.rho_u_db);
        for (int k = 0; k < cfg.k_ul; ++k) b.rho_ul(k) = rho_u * db_to_linear(cfg.beta_ul(k));
    }

    // rho_u back-derived from the received uplink SNR when not given; keeps
    // rho^UU = rho_u * beta^UU consistent with Table I.
    b.rho_u = cfg.rho_u_db ? db_to_linear(*cfg.rho_u_db)
                           : b.rho_ul(0) / db_to_linear(cfg.beta_ul(0));
    b.rho_u_dl = cfg.rho_u_dl_db ? db_to_linear(*cfg.rho_u_dl_db) : b.rho_u;

    b.rho_dl.set_size(cfg.k_dl);
    for (int k = 0; k < cfg.k_dl; ++k) b.rho_dl(k) = b.rho_d * db_to_linear(cfg.beta_dl(k));

    const double beta_uu = db_to_linear(cfg.beta_uu_db);
    b.rho_uu.set_size(cfg.k_dl, cfg.k_ul);
    b.rho_uu.fill(b.rho_u * beta_uu);
    return b;
}

namespace {

double want_number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key + ": expected a number");
    return v.get<double>();
}

int want_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return v.get<int>();
}

std::vector<double> want_number_or_array(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError(key + ": array entries must be numbers");
            out.push_back(e.get<double>());
        }
        if (out.empty()) throw ConfigError(key + ": array must be non-empty");
        return out;
    }
    throw ConfigError(key + ": expected a number or an array of numbers");
}

void apply_json_key(SystemConfig& cfg, const std::string& key, const json& v) {
    if (key == "m_tx") cfg.m_tx = want_int(v, key);
    else if (key == "n_rx") cfg.n_rx = want_int(v, key);
    else if (key == "k_dl") cfg.k_dl = want_int(v, key);
    else if (key == "k_ul") cfg.k_ul = want_int(v, key);
    else if (key == "rho_d_db") cfg.rho_d_db = want_number(v, key);
    else if (key == "rho_u_db") cfg.rho_u_db = want_number(v, key);
    else if (key == "rho_ul_db") cfg.rho_ul_db = want_number(v, key);
    else if (key == "rho_u_dl_db") cfg.rho_u_dl_db = want_number(v, key);
    else if (key == "beta_si_db") cfg.beta_si_db = want_number(v, key);
    else if (key == "beta_dl_db") cfg.beta_dl_db = want_number_or_array(v, key);
    else if (key == "beta_ul_db") cfg.beta_ul_db = want_number_or_array(v, key);
    else if (key == "beta_uu_db") cfg.beta_uu_db = want_number(v, key);
    else if (key == "alpha_anc_db") cfg.alpha_anc_db = want_number(v, key);
    else if (key == "alpha_tx_db") cfg.alpha_tx_db = want_number(v, key);
    else if (key == "tau_si") cfg.tau_si = want_int(v, key);
    else if (key == "adc_bits") cfg.adc_bits = want_int(v, key);
    else throw ConfigError("unknown key \"" + key + "\" in config");
}

}  // namespace

SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object: " + path);
    SystemConfig cfg;
    for (auto it = doc.begin(); it != doc.end(); ++it) apply_json_key(cfg, it.key(), it.value());
    cfg.validate();
    return cfg;
}

void apply_override(SystemConfig& cfg, const std::string& key, const std::string& value) {
    json v;
    try {
        v = json::parse(value);
    } catch (const json::parse_error&) {
        throw ConfigError(key + ": cannot parse override value \"" + value + "\"");
    }
    apply_json_key(cfg, key, v);
}

}  // namespace fdmimo
