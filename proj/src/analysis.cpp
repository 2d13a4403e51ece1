#include "fdmimo/analysis.hpp"

#include <cmath>

namespace fdmimo {

namespace {

double dl_interference_floor(const LinkBudget& budget, int k_d) {
    return arma::accu(budget.rho_uu.row(k_d)) + 1.0;
}

}  // namespace

RateApprox perfect_csi_rates(const SystemConfig& cfg, const LinkBudget& budget, SicMethod method) {
    const int m = cfg.m_tx, n = cfg.n_rx, k_dl = cfg.k_dl, k_ul = cfg.k_ul;
    int dl_diversity = 0;
    switch (method) {
        case SicMethod::SpatialSuppression:
            if (m < n + k_dl)
                throw NumericalError("perfect_csi_rates: suppression needs m_tx >= n_rx + k_dl");
            dl_diversity = m - n - k_dl + 1;
            break;
        default:
            dl_diversity = m - k_dl + 1;
            break;
    }

    RateApprox r;
    r.method = method;
    for (int k = 0; k < k_dl; ++k) {
        const double gamma = budget.rho_dl(k) * dl_diversity / (k_dl * dl_interference_floor(budget, k));
        r.r_dl_sum += std::log2(1.0 + gamma);
    }
    r.r_dl_per_user = r.r_dl_sum / k_dl;

    for (int k = 0; k < k_ul; ++k) {
        double gamma = budget.rho_ul(k) * (n - k_ul + 1);
        if (method == SicMethod::NoSic) {
            // SI stays in the denominator when nothing cancels it.
            gamma /= 1.0 + budget.rho_si_over_anc() * (1.0 + budget.alpha_tx);
        }
        r.r_ul_sum += std::log2(1.0 + gamma);
    }
    r.r_ul_per_user = r.r_ul_sum / k_ul;
    return r;
}

double half_duplex_sum_rate(const SystemConfig& cfg, const LinkBudget& budget) {
    LinkBudget b = budget;
    b.rho_uu.zeros();
    const RateApprox r = perfect_csi_rates(cfg, b, SicMethod::Subtraction);
    return 0.5 * (r.r_dl_sum + r.r_ul_sum);
}

double expected_w_norm_sq(const SystemConfig& cfg, const LinkBudget& budget) {
    const double k_rho = cfg.k_ul * budget.rho_ul(0);
    const double var_hat = k_rho / (k_rho + 1.0);
    return 1.0 / (var_hat * (cfg.n_rx - cfg.k_ul + 1));
}

double expected_si_power(SicMethod method, double epsilon_sq, double e_w_norm_sq) {
    if (epsilon_sq < 0.0) throw std::invalid_argument("expected_si_power: negative variance");
    switch (method) {
        case SicMethod::NoSic: return e_w_norm_sq;
        case SicMethod::Subtraction: return epsilon_sq * e_w_norm_sq;
        case SicMethod::SpatialSuppression: return e_w_norm_sq * epsilon_sq / (1.0 + epsilon_sq);
    }
    return 0.0;
}

namespace {

double si_scale(SicMethod method, double eps_sq) {
    switch (method) {
        case SicMethod::NoSic: return 1.0;
        case SicMethod::Subtraction: return eps_sq;
        case SicMethod::SpatialSuppression: return eps_sq / (1.0 + eps_sq);
    }
    return 0.0;
}

}  // namespace

double approx_uplink_sinr(SicMethod method, const SystemConfig& cfg, const LinkBudget& budget,
                          double epsilon_sq_si) {
    const int k = cfg.k_ul, n = cfg.n_rx;
    const double rho = budget.rho_ul(0);
    const double num = (k * rho + 1.0) * (n - k + 1);
    double err_sum = 0.0;
    for (int l = 0; l < k; ++l) {
        const double rl = budget.rho_ul(l);
        err_sum += rl / (k * rl + 1.0);
    }
    const double den = k * (err_sum + 1.0) +
                       budget.rho_si_over_anc() * si_scale(method, epsilon_sq_si) * k *
                           (1.0 + budget.alpha_tx);
    return num / den;
}

double rate_approx(double expected_signal, double expected_interference_plus_noise) {
    if (!(expected_interference_plus_noise > 0.0))
        throw std::invalid_argument("rate_approx: denominator must be positive");
    if (expected_signal < 0.0) throw std::invalid_argument("rate_approx: negative signal power");
    return std::log2(1.0 + expected_signal / expected_interference_plus_noise);
}

HighSnrTerms extract_high_snr_terms(const SystemConfig& cfg, const LinkBudget& budget,
                                    double epsilon_sq_si, double omega_sps_over_stt) {
    HighSnrTerms t;
    const double beta_dl = db_to_linear(cfg.beta_dl(0));
    t.kappa = beta_dl / (cfg.k_dl * dl_interference_floor(budget, 0));
    t.phi = t.kappa * budget.rho_d;
    const int k = cfg.k_ul;
    t.s = (k * budget.rho_ul(0) + 1.0) * (cfg.n_rx - k + 1);
    double err_sum = 0.0;
    for (int l = 0; l < k; ++l) {
        const double rl = budget.rho_ul(l);
        err_sum += rl / (k * rl + 1.0);
    }
    t.i = k * (err_sum + 1.0);
    // Coefficient of phi in the SI denominator term of the closed form:
    // (rho_SI/alpha_anc)*scale*K*(1+a_tx) with rho_SI = (phi/kappa)*beta_SI.
    t.omega_stt = epsilon_sq_si * budget.beta_si * k * (1.0 + budget.alpha_tx) /
                  (budget.alpha_anc * t.kappa);
    t.omega_delta = t.omega_stt * (1.0 - omega_sps_over_stt);
    return t;
}

ConstraintReport rate_gap_analysis(const SystemConfig& cfg, double phi, double s, double i,
                                   double omega_stt, double omega_delta) {
    const int m = cfg.m_tx, n = cfg.n_rx, k = cfg.k_dl;
    if (m <= k + n) throw NumericalError("rate_gap_analysis: requires m_tx > k_dl + n_rx");
    ConstraintReport rep;
    rep.s_term = s;
    rep.i_term = i;
    rep.omega_stt = omega_stt;
    rep.omega_delta = omega_delta;

    rep.delta_dl = static_cast<double>(n) / (m - k);
    if (rep.delta_dl >= 1.0) throw NumericalError("rate_gap_analysis: delta_dl >= 1");
    const double g_dl_stt = (m - k) * phi;
    const double g_ul_stt = s / (i + omega_stt * phi);
    const double g_ul_sps = s / (i + (omega_stt - omega_delta) * phi);
    rep.delta_ul = omega_delta * phi / (i + omega_stt * phi);

    rep.gap_dl = -std::log2(1.0 - rep.delta_dl * g_dl_stt / (1.0 + g_dl_stt));
    rep.gap_ul = -std::log2(1.0 - rep.delta_ul * g_ul_sps / (1.0 + g_ul_sps));

    rep.r_dl_stt = std::log2(1.0 + g_dl_stt);
    rep.r_dl_sps = rep.r_dl_stt - rep.gap_dl;
    rep.r_ul_sps = std::log2(1.0 + g_ul_sps);
    rep.r_ul_stt = rep.r_ul_sps - rep.gap_ul;
    rep.r_delta = rep.r_dl_stt - rep.r_ul_sps;

    rep.eta_stt = rep.r_dl_stt / rep.r_ul_stt;
    rep.eta_sps = rep.r_dl_sps / rep.r_ul_sps;
    (void)g_ul_stt;
    return rep;
}

ConstraintReport power_scaling_cross_point(const SystemConfig& cfg, const LinkBudget& budget,
                                           double q, const arma::mat& r_kl_si, double r_im_sps,
                                           double r_max_dl) {
    const int m = cfg.m_tx, n = cfg.n_rx, k = cfg.k_dl;
    if (m <= k + n) throw NumericalError("power_scaling_cross_point: requires m_tx > k_dl + n_rx");
    if (r_kl_si.n_rows != static_cast<arma::uword>(m) || r_kl_si.n_cols != static_cast<arma::uword>(m))
        throw std::invalid_argument("power_scaling_cross_point: r_kl_si must be m_tx x m_tx");

    // Triple sum over m (K terms), k, l of sqrt(q r_kl^2 + 1)/(M K) * r_im.
    double inner = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) inner += std::sqrt(q * r_kl_si(a, b) * r_kl_si(a, b) + 1.0);
    inner *= static_cast<double>(k) / (static_cast<double>(m) * k);
    ConstraintReport rep;
    rep.r_cross = (static_cast<double>(m - k) / n) * inner * r_im_sps;
    rep.r_max_dl = r_max_dl;
    const double gamma_target = std::pow(2.0, r_max_dl) - 1.0;
    rep.phi_sps = gamma_target / (m - n - k);
    rep.phi_stt = gamma_target / (m - k);
    const double beta_dl = db_to_linear(cfg.beta_dl(0));
    rep.kappa = beta_dl / (cfg.k_dl * dl_interference_floor(budget, 0));
    return rep;
}

std::pair<double, double> optimal_antenna_ratio(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("optimal_antenna_ratio: eta must be positive");
    return {eta, eta + 1.0};
}

}  // namespace fdmimo
