#ifndef FDMIMO_ESTIMATION_HPP
#define FDMIMO_ESTIMATION_HPP

#include <utility>

#include "fdmimo/rng.hpp"
#include "fdmimo/sysconfig.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

enum class LinkDir { Downlink, Uplink };

struct EstimationError {
    double epsilon_sq = 0.0;
    cx_mat error;
};

/// Pilot-based SI estimation error variance:
/// eps^2 = (a_tx*N*rho_p + 1) / (tau*rho_p + a_tx*N*rho_p + 1), rho_p = rho_SI/alpha_anc.
double si_error_variance_pilot(const LinkBudget& budget, const SystemConfig& cfg);

struct DlUlErrorVariance {
    double epsilon_sq = 0.0;       ///< 1 / (K rho beta + 1)
    double est_channel_var = 0.0;  ///< K rho beta / (K rho beta + 1); sums with eps^2 to 1
};

DlUlErrorVariance dl_ul_error_variance(const LinkBudget& budget, const SystemConfig& cfg, int user,
                                       LinkDir link);

/// AQNM gain alpha = 1 - (pi*sqrt(3)/2) * 2^(-2*bits), clamped to (0, 1].
double aqnm_alpha(int bits);

struct AqnmState {
    double alpha = 1.0;
    double quant_noise_var = 0.0;
    cx_mat u_si;
    cx_mat u_siq;
    cx_mat pilot;
    double mmse_scale = 1.0;  ///< scalar D-tilde
};

/// U_SIQ = alpha*U_SI + N_q with N_q i.i.d. CN(0, alpha(1-alpha)((rho_SI/anc)(1+a_tx)+1)),
/// drawn independently of U_SI.
AqnmState quantize_aqnm(const cx_mat& u_si, double alpha, const LinkBudget& budget,
                        const SystemConfig& cfg, RngStream& rng);

struct SiEstimate {
    cx_mat h_hat;
    double nmse = 0.0;  ///< used downstream as eps^2_SI
};

/// Full quantized pilot estimation path for the SI channel:
/// builds U_SI, quantizes it, de-spreads with the pilot, applies the MMSE
/// scale, and reports the empirical NMSE.
SiEstimate estimate_si_channel_aqnm(const cx_mat& h_si, const LinkBudget& budget,
                                    const SystemConfig& cfg, RngStream& rng);

/// H_hat = H + E with E i.i.d. CN(0, eps^2) independent of H.
std::pair<cx_mat, EstimationError> draw_estimated_channel(const cx_mat& h, double epsilon_sq,
                                                          RngStream& rng);

/// Rows of an n_cols-point unitary DFT: n_rows x n_cols with P P^H = I.
cx_mat dft_pilot(int n_rows, int n_cols);

}  // namespace fdmimo

#endif
