#ifndef FDMIMO_SYSCONFIG_HPP
#define FDMIMO_SYSCONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "fdmimo/types.hpp"

namespace fdmimo {

/// All scalar system parameters. dB values live only here and in reports;
/// everything downstream computes in linear units.
struct SystemConfig {
    int m_tx = 64;   ///< transmit RF chains M
    int n_rx = 24;   ///< receive RF chains N
    int k_dl = 12;   ///< downlink users K_DL
    int k_ul = 12;   ///< uplink users K_UL

    double rho_d_db = 100.0;  ///< total transmit SNR at the BS

    /// Transmit SNR at the user. Optional: when absent it is back-derived
    /// from rho_ul_db / beta_ul_db (see derive_link_budget).
    std::optional<double> rho_u_db;

    /// Received uplink SNR at the BS. Takes precedence over
    /// rho_u_db * beta_ul_db when present.
    std::optional<double> rho_ul_db = 10.0;

    /// Pilot SNR used for downlink channel estimation; defaults to rho_u.
    std::optional<double> rho_u_dl_db;

    double beta_si_db = -40.0;
    std::vector<double> beta_dl_db{-80.0};  ///< scalar default or one per DL user
    std::vector<double> beta_ul_db{-80.0};  ///< scalar default or one per UL user
    double beta_uu_db = -100.0;

    double alpha_anc_db = 30.0;  ///< passive analog SIC level
    double alpha_tx_db = -10.0;  ///< transmitter noise variance

    int tau_si = 24;                     ///< SI pilot symbols (>= n_rx)
    std::optional<int> adc_bits = 4;     ///< ADC resolution; absent = unquantized path

    double beta_dl(int k) const { return beta_dl_db.size() == 1 ? beta_dl_db[0] : beta_dl_db.at(k); }
    double beta_ul(int k) const { return beta_ul_db.size() == 1 ? beta_ul_db[0] : beta_ul_db.at(k); }

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Counts/positivity only; sweep points use this plus per-method
    /// geometry checks so infeasible combinations can be reported as
    /// skipped instead of fatal.
    void validate_structural() const;
};

/// Received SNRs of Table I, all linear.
struct LinkBudget {
    double rho_d = 0.0;
    double rho_u = 0.0;
    double rho_u_dl = 0.0;        ///< pilot SNR for DL estimation
    arma::vec rho_dl;             ///< per DL user
    arma::vec rho_ul;             ///< per UL user
    double rho_si = 0.0;
    arma::mat rho_uu;             ///< K_DL x K_UL
    double alpha_anc = 1.0;
    double alpha_tx = 0.0;
    double beta_si = 1.0;

    double rho_si_over_anc() const { return rho_si / alpha_anc; }
};

double db_to_linear(double x_db);
double linear_to_db(double x);

LinkBudget derive_link_budget(const SystemConfig& cfg);

/// Same derivation with only structural validation; sweep points may break
/// the antenna-usage assumption for methods that do not need it.
LinkBudget derive_link_budget_unchecked(const SystemConfig& cfg);

/// Loads and validates a JSON config. Unknown keys are an error.
SystemConfig load_config(const std::string& path);

/// Applies one "key=value" override (CLI flags win over file values).
void apply_override(SystemConfig& cfg, const std::string& key, const std::string& value);

}  // namespace fdmimo

#endif
