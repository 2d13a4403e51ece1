#include "fdmimo/beamforming.hpp"

namespace fdmimo {

namespace {

// Solve gram * X = rhs with a singularity guard. Inverses are never formed
// explicitly; rcond on the Gram matrix is the rank-deficiency gate.
cx_mat guarded_solve(const cx_mat& gram, const cx_mat& rhs, const char* what) {
    const double rc = arma::rcond(gram);
    if (!(rc > 1e-12))
        throw NumericalError(std::string(what) + ": rank-deficient channel (rcond=" +
                             std::to_string(rc) + ")");
    cx_mat x;
    if (!arma::solve(x, gram, rhs, arma::solve_opts::no_approx))
        throw NumericalError(std::string(what) + ": linear solve failed");
    return x;
}

}  // namespace

cx_mat zf_precoder(const cx_mat& h_dl_hat) {
    if (h_dl_hat.n_rows > h_dl_hat.n_cols)
        throw NumericalError("zf_precoder: more users than transmit antennas");
    const cx_mat hh = h_dl_hat.t();  // M x K
    const cx_mat gram = h_dl_hat * hh;
    return hh * guarded_solve(gram, arma::cx_mat(arma::eye(gram.n_rows, gram.n_cols), arma::zeros(gram.n_rows, gram.n_cols)), "zf_precoder");
}

cx_mat extended_zf_precoder(const cx_mat& h_dl_hat, const cx_mat& h_si_hat) {
    const arma::uword k_dl = h_dl_hat.n_rows;
    if (h_si_hat.n_rows > 0 && h_si_hat.n_cols != h_dl_hat.n_cols)
        throw std::invalid_argument("extended_zf_precoder: column count mismatch");
    if (h_dl_hat.n_cols < k_dl + h_si_hat.n_rows)
        throw NumericalError("extended_zf_precoder: need m_tx >= n_rx + k_dl");
    const cx_mat ext = h_si_hat.n_rows > 0 ? arma::join_cols(h_dl_hat, h_si_hat) : h_dl_hat;
    const cx_mat full = zf_precoder(ext);
    return full.cols(0, k_dl - 1);
}

cx_mat normalize_columns(const cx_mat& f) {
    if (f.n_cols == 0) throw std::invalid_argument("normalize_columns: empty matrix");
    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(f.n_cols));
    cx_mat g(f.n_rows, f.n_cols);
    for (arma::uword k = 0; k < f.n_cols; ++k) {
        const double nrm = arma::norm(f.col(k));
        if (!(nrm > 0.0)) throw NumericalError("normalize_columns: zero column " + std::to_string(k));
        g.col(k) = f.col(k) * (inv_sqrt_k / nrm);
    }
    return g;
}

cx_mat zf_combiner(const cx_mat& h_ul_hat) {
    if (h_ul_hat.n_cols > h_ul_hat.n_rows)
        throw NumericalError("zf_combiner: more users than receive antennas");
    const cx_mat hh = h_ul_hat.t();  // K x N
    const cx_mat gram = hh * h_ul_hat;
    return guarded_solve(gram, hh, "zf_combiner");
}

BeamformerSet make_beamformers(SicMethod method, const cx_mat& h_dl_hat, const cx_mat& h_si_hat,
                               const cx_mat& h_ul_hat) {
    BeamformerSet set;
    set.method = method;
    set.precoder_raw = method == SicMethod::SpatialSuppression
                           ? extended_zf_precoder(h_dl_hat, h_si_hat)
                           : zf_precoder(h_dl_hat);
    set.precoder = normalize_columns(set.precoder_raw);
    set.combiner = zf_combiner(h_ul_hat);
    return set;
}

}  // namespace fdmimo
