#ifndef FDMIMO_LINK_HPP
#define FDMIMO_LINK_HPP

#include "fdmimo/beamforming.hpp"
#include "fdmimo/sysconfig.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

struct TrialMetrics {
    arma::vec gamma_dl;  ///< per DL user, linear
    arma::vec gamma_ul;  ///< per UL user, linear
    arma::vec omega;     ///< per UL user SI power
    double rate_dl = 0.0;
    double rate_ul = 0.0;
    SicMethod method = SicMethod::Subtraction;
};

/// Omega = ||w^T H_eff G||^2. H_eff is H_SI - H_SI_hat for subtraction and
/// H_SI itself for spatial suppression / no SIC.
double si_power(const cx_rowvec& w_k, const cx_mat& h_eff, const cx_mat& precoder);

/// Instantaneous downlink SINR of user k_d from the realization rows.
double downlink_sinr(const LinkBudget& budget, int k_d, const cx_rowvec& h_dl_hat_k,
                     const cx_rowvec& e_dl_k, const cx_mat& precoder, const cx_rowvec& h_uu_k);

/// Instantaneous uplink SINR of user k_u; omega must come from si_power for
/// the same trial.
double uplink_sinr(const LinkBudget& budget, int k_u, const cx_rowvec& w_k, const cx_mat& h_ul_hat,
                   const cx_mat& e_ul, double omega);

/// Sum over users of log2(1 + gamma).
double sum_rate(const arma::vec& gammas);

/// Channel/estimate bundle for one coherence block.
struct TrialChannels {
    cx_mat h_dl, h_ul, h_si, h_uu;
    cx_mat h_dl_hat, h_ul_hat, h_si_hat;
    cx_mat e_dl, e_ul;
    double nmse_si = 0.0;  ///< realized eps^2_SI carried for reporting
};

TrialMetrics evaluate_trial(SicMethod method, const LinkBudget& budget, const TrialChannels& ch,
                            const BeamformerSet& bf);

}  // namespace fdmimo

#endif
