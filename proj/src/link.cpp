#include "fdmimo/link.hpp"

#include <cmath>

namespace fdmimo {

double si_power(const cx_rowvec& w_k, const cx_mat& h_eff, const cx_mat& precoder) {
    const cx_rowvec v = w_k * h_eff * precoder;
    return std::pow(arma::norm(v, 2), 2);
}

double downlink_sinr(const LinkBudget& budget, int k_d, const cx_rowvec& h_dl_hat_k,
                     const cx_rowvec& e_dl_k, const cx_mat& precoder, const cx_rowvec& h_uu_k) {
    const double rho = budget.rho_dl(k_d);
    const cx_rowvec sig = h_dl_hat_k * precoder;  // 1 x K_DL
    const cx_rowvec err = e_dl_k * precoder;

    const double desired = rho * std::norm(sig(k_d));
    double i_error = 0.0, i_user = 0.0;
    for (arma::uword l = 0; l < sig.n_elem; ++l) {
        i_error += rho * std::norm(err(l));
        if (static_cast<int>(l) != k_d) i_user += rho * std::norm(sig(l));
    }
    double uu = 0.0;
    for (arma::uword ku = 0; ku < h_uu_k.n_elem; ++ku)
        uu += budget.rho_uu(k_d, ku) * std::norm(h_uu_k(ku));
    return desired / (i_error + i_user + uu + 1.0);
}

double uplink_sinr(const LinkBudget& budget, int k_u, const cx_rowvec& w_k, const cx_mat& h_ul_hat,
                   const cx_mat& e_ul, double omega) {
    const cx_rowvec sig = w_k * h_ul_hat;  // 1 x K_UL
    const cx_rowvec err = w_k * e_ul;

    const double desired = budget.rho_ul(k_u) * std::norm(sig(k_u));
    double i_error = 0.0, i_user = 0.0;
    for (arma::uword l = 0; l < sig.n_elem; ++l) {
        i_error += budget.rho_ul(l) * std::norm(err(l));
        if (static_cast<int>(l) != k_u) i_user += budget.rho_ul(l) * std::norm(sig(l));
    }
    const double si = budget.rho_si_over_anc() * omega * (1.0 + budget.alpha_tx);
    const double noise = std::pow(arma::norm(w_k, 2), 2);
    return desired / (i_error + i_user + si + noise);
}

double sum_rate(const arma::vec& gammas) {
    double r = 0.0;
    for (double g : gammas) {
        if (g < 0.0) throw std::invalid_argument("sum_rate: negative SINR");
        r += std::log2(1.0 + g);
    }
    return r;
}

TrialMetrics evaluate_trial(SicMethod method, const LinkBudget& budget, const TrialChannels& ch,
                            const BeamformerSet& bf) {
    TrialMetrics m;
    m.method = method;
    const int k_dl = static_cast<int>(ch.h_dl.n_rows);
    const int k_ul = static_cast<int>(ch.h_ul.n_cols);

    m.gamma_dl.set_size(k_dl);
    for (int k = 0; k < k_dl; ++k)
        m.gamma_dl(k) = downlink_sinr(budget, k, ch.h_dl_hat.row(k), ch.e_dl.row(k), bf.precoder,
                                      ch.h_uu.row(k));

    // Residual SI channel seen after the method's digital stage.
    const cx_mat h_eff = method == SicMethod::Subtraction ? cx_mat(ch.h_si - ch.h_si_hat) : ch.h_si;

    m.gamma_ul.set_size(k_ul);
    m.omega.set_size(k_ul);
    for (int k = 0; k < k_ul; ++k) {
        const cx_rowvec w = bf.combiner.row(k);
        m.omega(k) = si_power(w, h_eff, bf.precoder);
        m.gamma_ul(k) = uplink_sinr(budget, k, w, ch.h_ul_hat, ch.e_ul, m.omega(k));
    }
    m.rate_dl = sum_rate(m.gamma_dl);
    m.rate_ul = sum_rate(m.gamma_ul);
    return m;
}

}  // namespace fdmimo
