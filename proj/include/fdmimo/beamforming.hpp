#ifndef FDMIMO_BEAMFORMING_HPP
#define FDMIMO_BEAMFORMING_HPP

#include "fdmimo/types.hpp"

namespace fdmimo {

/// ZF precoder F = H^*(H H^*)^{-1} for a K x M channel; returns M x K with
/// unnormalized columns. Throws NumericalError on rank deficiency.
cx_mat zf_precoder(const cx_mat& h_dl_hat);

/// Extended ZF: pseudo-inverse of [H_DL; H_SI] stacked, truncated to the
/// first K_DL columns so that H_DL*G = I and H_SI*G = 0.
cx_mat extended_zf_precoder(const cx_mat& h_dl_hat, const cx_mat& h_si_hat);

/// g_k = f_k / (sqrt(K) ||f_k||): every column gets squared norm 1/K.
cx_mat normalize_columns(const cx_mat& f);

/// ZF combiner W = (H^*H)^{-1}H^* for an N x K channel; returns K x N whose
/// rows are w_k^T.
cx_mat zf_combiner(const cx_mat& h_ul_hat);

struct BeamformerSet {
    cx_mat precoder_raw;  ///< M x K_DL, unnormalized
    cx_mat precoder;      ///< M x K_DL, column-normalized
    cx_mat combiner;      ///< K_UL x N
    SicMethod method = SicMethod::Subtraction;
};

BeamformerSet make_beamformers(SicMethod method, const cx_mat& h_dl_hat, const cx_mat& h_si_hat,
                               const cx_mat& h_ul_hat);

}  // namespace fdmimo

#endif
