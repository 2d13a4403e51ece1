#ifndef FDMIMO_ANALYSIS_HPP
#define FDMIMO_ANALYSIS_HPP

#include <utility>

#include "fdmimo/sysconfig.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

struct RateApprox {
    double r_dl_per_user = 0.0;
    double r_ul_per_user = 0.0;
    double r_dl_sum = 0.0;
    double r_ul_sum = 0.0;
    SicMethod method = SicMethod::Subtraction;
};

/// Ergodic-rate approximations under perfect CSI. The downlink diversity
/// factor is M-K+1 (ZF) or M-N-K+1 (extended ZF); the uplink is common.
RateApprox perfect_csi_rates(const SystemConfig& cfg, const LinkBudget& budget, SicMethod method);

/// Half-duplex baseline: half the subtraction sum rate with rho_UU = 0.
double half_duplex_sum_rate(const SystemConfig& cfg, const LinkBudget& budget);

/// E||w||^2 under the combiner diversity approximation, including the
/// estimated-channel variance shrink of the uplink pilot stage.
double expected_w_norm_sq(const SystemConfig& cfg, const LinkBudget& budget);

/// Expected SI power: E||w||^2 (no SIC), eps^2 E||w||^2 (subtraction), or
/// the harmonic-mean interpolation E||w||^2 / (1/eps^2 + 1) (suppression).
double expected_si_power(SicMethod method, double epsilon_sq, double e_w_norm_sq);

/// Closed-form approximate uplink SINR per method (user-symmetric budgets).
double approx_uplink_sinr(SicMethod method, const SystemConfig& cfg, const LinkBudget& budget,
                          double epsilon_sq_si);

/// R = log2(1 + E{S}/E{I+N}).
double rate_approx(double expected_signal, double expected_interference_plus_noise);

/// Scaled high-SINR terms: SINRs become (M-K)phi, (M-N-K)phi on the downlink
/// and S/(I + omega*phi) on the uplink, with phi = kappa*rho_d.
struct HighSnrTerms {
    double s = 0.0;
    double i = 0.0;
    double omega_stt = 0.0;
    double omega_delta = 0.0;
    double kappa = 0.0;
    double phi = 0.0;
};

/// Extracts S, I, omega from the closed-form uplink SINR by identifying the
/// coefficient of phi in the SI denominator term. omega_sps_over_stt is the
/// expected-SI-power ratio (from the harmonic form or Monte Carlo stats).
HighSnrTerms extract_high_snr_terms(const SystemConfig& cfg, const LinkBudget& budget,
                                    double epsilon_sq_si, double omega_sps_over_stt);

struct ConstraintReport {
    double delta_dl = 0.0;
    double delta_ul = 0.0;
    double gap_dl = 0.0;   ///< Delta^DL, bits/s/Hz
    double gap_ul = 0.0;   ///< Delta^UL, bits/s/Hz
    double r_delta = 0.0;  ///< R_Delta = R^DL_stt - R^UL_sps
    double r_cross = 0.0;  ///< >= 1 means suppression wins under power scaling
    double phi_stt = 0.0;
    double phi_sps = 0.0;
    double eta_stt = 0.0;  ///< supported DL/UL rate ratio, subtraction
    double eta_sps = 0.0;
    double s_term = 0.0, i_term = 0.0, omega_stt = 0.0, omega_delta = 0.0;
    double kappa = 0.0;
    double r_max_dl = 0.0;
    double r_dl_stt = 0.0, r_dl_sps = 0.0, r_ul_stt = 0.0, r_ul_sps = 0.0;
};

/// Rate-gap comparison of the two methods at the same transmit power.
ConstraintReport rate_gap_analysis(const SystemConfig& cfg, double phi, double s, double i,
                                   double omega_stt, double omega_delta);

/// Uplink cross point under downlink power scaling, from the correlation
/// statistics of the suppression precoder. r_im_sps is the (magnitude of
/// the) error/precoder product correlation; q the |g|^2 distribution
/// constant (2 for an exponential approximation).
ConstraintReport power_scaling_cross_point(const SystemConfig& cfg, const LinkBudget& budget,
                                           double q, const arma::mat& r_kl_si, double r_im_sps,
                                           double r_max_dl = 8.0);

/// Optimal M/N ratios for a DL/UL traffic ratio eta: {eta, eta + 1}.
std::pair<double, double> optimal_antenna_ratio(double eta);

}  // namespace fdmimo

#endif
