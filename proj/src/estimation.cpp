#include "fdmimo/estimation.hpp"

#include <cmath>

namespace fdmimo {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double si_error_variance_pilot(const LinkBudget& budget, const SystemConfig& cfg) {
    if (cfg.tau_si < cfg.n_rx)
        throw ConfigError("tau_si: must be >= n_rx for pilot-based SI estimation");
    const double rho_p = budget.rho_si_over_anc();
    const double tx_noise = budget.alpha_tx * cfg.n_rx * rho_p;
    return (tx_noise + 1.0) / (cfg.tau_si * rho_p + tx_noise + 1.0);
}

DlUlErrorVariance dl_ul_error_variance(const LinkBudget& budget, const SystemConfig& cfg, int user,
                                       LinkDir link) {
    double pilot_snr = 0.0;
    if (link == LinkDir::Downlink) {
        if (user < 0 || user >= cfg.k_dl) throw std::out_of_range("downlink user index out of range");
        pilot_snr = cfg.k_dl * budget.rho_u_dl * db_to_linear(cfg.beta_dl(user));
    } else {
        if (user < 0 || user >= cfg.k_ul) throw std::out_of_range("uplink user index out of range");
        pilot_snr = cfg.k_ul * budget.rho_ul(user);
    }
    DlUlErrorVariance v;
    v.epsilon_sq = 1.0 / (pilot_snr + 1.0);
    v.est_channel_var = pilot_snr / (pilot_snr + 1.0);
    return v;
}

double aqnm_alpha(int bits) {
    if (bits < 1) throw std::invalid_argument("aqnm_alpha: bits must be >= 1");
    const double alpha = 1.0 - 0.5 * kPi * std::sqrt(3.0) * std::pow(2.0, -2.0 * bits);
    return std::min(1.0, std::max(alpha, std::numeric_limits<double>::min()));
}

cx_mat dft_pilot(int n_rows, int n_cols) {
    if (n_rows < 1 || n_cols < n_rows)
        throw std::invalid_argument("dft_pilot: need n_cols >= n_rows >= 1");
    cx_mat p(n_rows, n_cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_cols));
    const cx_double j(0.0, 1.0);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c)
            p(r, c) = scale * std::exp(-j * (2.0 * kPi * r * c / n_cols));
    return p;
}

AqnmState quantize_aqnm(const cx_mat& u_si, double alpha, const LinkBudget& budget,
                        const SystemConfig& cfg, RngStream& rng) {
    (void)cfg;
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("quantize_aqnm: alpha must be in (0,1]");
    AqnmState st;
    st.alpha = alpha;
    st.quant_noise_var =
        alpha * (1.0 - alpha) * (budget.rho_si_over_anc() * (1.0 + budget.alpha_tx) + 1.0);
    st.u_si = u_si;
    if (st.quant_noise_var > 0.0) {
        const double s = std::sqrt(st.quant_noise_var);
        cx_mat nq = rng.cgauss_mat(u_si.n_rows, u_si.n_cols);
        st.u_siq = alpha * u_si + s * nq;
    } else {
        st.u_siq = alpha * u_si;
    }
    return st;
}

SiEstimate estimate_si_channel_aqnm(const cx_mat& h_si, const LinkBudget& budget,
                                    const SystemConfig& cfg, RngStream& rng) {
    const int n = static_cast<int>(h_si.n_rows);
    const int m = static_cast<int>(h_si.n_cols);
    if (n != cfg.n_rx || m != cfg.m_tx)
        throw std::invalid_argument("estimate_si_channel_aqnm: H_SI must be n_rx x m_tx");

    // Pilot block spans tau >= M symbols so that P P^H = I_N holds with the
    // DFT construction; the M transmit chains are sounded per receive chain.
    const int tau = std::max(cfg.tau_si, m);
    const cx_mat p = dft_pilot(n, tau);

    const double rho_p = budget.rho_si_over_anc();
    const double amp = std::sqrt(rho_p);

    cx_mat excitation = p;
    if (budget.alpha_tx > 0.0) {
        const double s = std::sqrt(budget.alpha_tx);
        excitation += s * rng.cgauss_mat(n, tau);
    }
    cx_mat u_si = amp * (h_si.st() * excitation);
    u_si += rng.cgauss_mat(m, tau);  // receiver AWGN, unit variance

    const double alpha = cfg.adc_bits ? aqnm_alpha(*cfg.adc_bits) : 1.0;
    AqnmState st = quantize_aqnm(u_si, alpha, budget, cfg, rng);

    // De-spread with P^H; the MMSE scale is scalar because beta_SI is common
    // to all antenna pairs.
    const double d_tilde = 1.0 / (budget.alpha_anc * budget.beta_si / budget.rho_d + 1.0);
    st.mmse_scale = d_tilde;
    const double unscale = 1.0 / std::sqrt(budget.rho_d * budget.beta_si / budget.alpha_anc);
    cx_mat h_hat = (unscale * d_tilde) * (st.u_siq * p.t()).st();

    SiEstimate est;
    est.nmse = std::pow(arma::norm(h_hat - h_si, "fro") / arma::norm(h_si, "fro"), 2);
    est.h_hat = std::move(h_hat);
    return est;
}

std::pair<cx_mat, EstimationError> draw_estimated_channel(const cx_mat& h, double epsilon_sq,
                                                          RngStream& rng) {
    if (epsilon_sq < 0.0) throw std::invalid_argument("draw_estimated_channel: negative variance");
    EstimationError err;
    err.epsilon_sq = epsilon_sq;
    if (epsilon_sq == 0.0) {
        err.error = cx_mat(h.n_rows, h.n_cols, arma::fill::zeros);
        return {h, std::move(err)};
    }
    err.error = std::sqrt(epsilon_sq) * rng.cgauss_mat(h.n_rows, h.n_cols);
    return {h + err.error, std::move(err)};
}

}  // namespace fdmimo
