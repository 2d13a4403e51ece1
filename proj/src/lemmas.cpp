#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "fdmimo/beamforming.hpp"
#include "fdmimo/estimation.hpp"
#include "fdmimo/montecarlo.hpp"

// Numerical verification of the expected-SI-power lemmas. Everything here
// is estimation-side machinery: batched sample means with student-t
// intervals, never the closed forms under test.

namespace fdmimo {

namespace {

double t95(int dof) {
    if (dof <= 1) return 12.71;
    if (dof <= 2) return 4.303;
    if (dof <= 4) return 2.776;
    if (dof <= 6) return 2.447;
    if (dof <= 9) return 2.262;
    if (dof <= 14) return 2.145;
    if (dof <= 19) return 2.093;
    if (dof <= 29) return 2.045;
    if (dof <= 59) return 2.001;
    return 1.96;
}

struct BatchStat {
    double mean = 0.0, se = 0.0, half95 = 0.0;
};

BatchStat batch_stat(const std::vector<double>& batch_means) {
    BatchStat s;
    const int b = static_cast<int>(batch_means.size());
    for (double x : batch_means) s.mean += x;
    s.mean /= b;
    if (b > 1) {
        double q = 0.0;
        for (double x : batch_means) q += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(q / (b - 1) / b);
        s.half95 = t95(b - 1) * s.se;
    }
    return s;
}

void run_batches(int batches, long trials_per_batch, std::uint64_t seed,
                 const std::function<void(int, RngStream&)>& trial_fn) {
    // Trials own their streams; batch b covers trial indices
    // [b*tpb, (b+1)*tpb) so the partition does not change the draws.
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    const int nthreads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                         static_cast<unsigned>(batches)));
    auto worker = [&] {
        while (true) {
            const int b = next.fetch_add(1);
            if (b >= batches) return;
            try {
                for (long t = 0; t < trials_per_batch; ++t) {
                    RngStream rng(mix_seed(seed, static_cast<std::uint64_t>(b) * trials_per_batch + t));
                    trial_fn(b, rng);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct SpsPipeline {
    int m, n, k_dl, k_ul;
    double eps;
    CorrelationModel si_rx, si_tx;
    bool si_corr = false;
    CorrelationModel ul_rx;
    bool ul_corr = false;

    SpsPipeline(const SystemConfig& cfg, double r_si, double eps_sq,
                std::optional<double> ul_spacing)
        : m(cfg.m_tx), n(cfg.n_rx), k_dl(cfg.k_dl), k_ul(cfg.k_ul), eps(eps_sq) {
        if (m < n + k_dl) throw ConfigError("m_tx: suppression pipeline needs m_tx >= n_rx + k_dl");
        if (n < k_ul) throw ConfigError("n_rx: must be >= k_ul");
        if (r_si > 0.0) {
            si_rx = CorrelationModel::exponential(r_si, n);
            si_tx = CorrelationModel::exponential(r_si, m);
            si_corr = true;
        }
        if (ul_spacing) {
            arma::mat pos = arma::zeros(3, n);
            for (int i = 0; i < n; ++i) pos(0, i) = *ul_spacing * i;
            ul_rx = CorrelationModel::bessel(pos, 1.0);
            ul_corr = true;
        }
    }

    struct Trial {
        cx_mat e, g_sps, g_zf, w, h_si;
    };

    Trial draw(RngStream& rng) const {
        Trial t;
        const cx_mat h_dl = draw_iid(k_dl, m, rng);
        cx_mat h_ul = draw_iid(n, k_ul, rng);
        if (ul_corr) h_ul = ul_rx.sqrt * h_ul;
        t.h_si = draw_iid(n, m, rng);
        if (si_corr) t.h_si = si_rx.sqrt * t.h_si * si_tx.sqrt;
        t.e = std::sqrt(eps) * rng.cgauss_mat(n, m);
        const cx_mat h_si_hat = t.h_si + t.e;
        t.g_sps = normalize_columns(extended_zf_precoder(h_dl, h_si_hat));
        t.g_zf = normalize_columns(zf_precoder(h_dl));
        t.w = zf_combiner(h_ul);
        return t;
    }
};

double mean_row_si_power(const cx_mat& w, const cx_mat& h_eff, const cx_mat& g) {
    double acc = 0.0;
    const cx_mat prod = w * h_eff * g;  // K_UL x K_DL
    for (arma::uword k = 0; k < prod.n_rows; ++k)
        acc += std::pow(arma::norm(prod.row(k), 2), 2);
    return acc / prod.n_rows;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

LemmaReport lemma1(const SystemConfig& cfg, long trials, std::uint64_t seed,
                   const LemmaOptions& opts) {
    const SpsPipeline pipe(cfg, opts.r_si, opts.eps_sq_si,
                           opts.ul_bessel_spacing ? opts.ul_bessel_spacing
                                                  : std::optional<double>(0.5));
    const int nb = opts.batches;
    const long tpb = std::max<long>(trials / nb, 1);
    const int n = pipe.n, m = pipe.m, l = pipe.k_dl;

    struct Acc {
        double direct = 0.0;
        cx_mat cw, q;
        arma::mat a2, g2;
        long count = 0;
    };
    std::vector<Acc> acc(nb);
    for (auto& a : acc) {
        a.cw.zeros(n, n);
        a.q.zeros(n, n);
        a.a2.zeros(n, m);
        a.g2.zeros(m, l);
    }

    run_batches(nb, tpb, seed, [&](int b, RngStream& rng) {
        const auto t = pipe.draw(rng);
        const cx_vec w = t.w.row(0).st();  // column, unconjugated
        const cx_mat ag = t.e * t.g_sps;   // N x L
        Acc& a = acc[b];
        a.direct += std::pow(arma::norm(w.st() * ag, 2), 2);
        a.cw += w * w.t();
        a.q += ag * ag.t();
        a.a2 += arma::square(arma::abs(t.e));
        a.g2 += arma::square(arma::abs(t.g_sps));
        a.count += 1;
    });

    std::vector<double> diffs(nb), inds(nb), zetas(nb), offs(nb), directs(nb);
    for (int b = 0; b < nb; ++b) {
        Acc& a = acc[b];
        const double inv = 1.0 / a.count;
        const cx_mat cw = a.cw * inv;
        const cx_mat q = a.q * inv;
        const arma::mat a2 = a.a2 * inv;
        const arma::mat g2 = a.g2 * inv;
        const arma::vec g_rowsum = arma::sum(g2, 1);

        double t_ind = 0.0, t_diag = 0.0;
        for (int i = 0; i < n; ++i) {
            t_ind += std::real(cw(i, i)) * arma::dot(a2.row(i).t(), g_rowsum);
            t_diag += std::real(cw(i, i)) * std::real(q(i, i));
        }
        const double full = std::real(arma::accu(cw % q));
        inds[b] = t_ind;
        zetas[b] = t_diag - t_ind;
        offs[b] = full - t_diag;
        directs[b] = a.direct * inv;
        diffs[b] = directs[b] - full;
    }

    const BatchStat d = batch_stat(diffs);
    const BatchStat direct = batch_stat(directs);
    LemmaReport rep;
    rep.lemma_id = 1;
    rep.lhs = direct.mean;
    rep.lhs_se = direct.se;
    rep.rhs = direct.mean - d.mean;
    rep.rhs_se = d.se;
    rep.terms = {{"independent_term", batch_stat(inds).mean},
                 {"zeta_term", batch_stat(zetas).mean},
                 {"offdiag_term", batch_stat(offs).mean},
                 {"decomposition_gap", d.mean},
                 {"gap_half95", d.half95}};
    rep.pass = std::abs(d.mean) <= d.half95 + 1e-9 * std::max(1.0, std::abs(direct.mean));
    rep.detail = "direct=" + fmt(rep.lhs) + " decomposed=" + fmt(rep.rhs) + " gap=" + fmt(d.mean) +
                 "+-" + fmt(d.half95);
    return rep;
}

LemmaReport lemma2(const SystemConfig& cfg, long trials, std::uint64_t seed,
                   const LemmaOptions& opts) {
    const int n = cfg.n_rx, m = cfg.m_tx, l = cfg.k_dl;
    const int nb = opts.batches;
    const long tpb = std::max<long>(trials / nb, 1);
    const double sigma = std::sqrt(opts.sigma_a_sq);

    std::vector<double> lhs_acc(nb, 0.0), w2_acc(nb, 0.0);
    std::vector<long> cnt(nb, 0);
    run_batches(nb, tpb, seed, [&](int b, RngStream& rng) {
        cx_vec w(n);
        for (int i = 0; i < n; ++i) w(i) = rng.cgauss();
        const cx_mat a = sigma * rng.cgauss_mat(n, m);
        const cx_mat g = normalize_columns(rng.cgauss_mat(m, l));
        lhs_acc[b] += std::pow(arma::norm(w.st() * a * g, 2), 2);
        w2_acc[b] += std::pow(arma::norm(w), 2);
        cnt[b] += 1;
    });

    std::vector<double> ratios(nb);
    double lhs = 0.0, rhs = 0.0;
    long total = 0;
    for (int b = 0; b < nb; ++b) {
        ratios[b] = lhs_acc[b] / (opts.sigma_a_sq * w2_acc[b]);
        lhs += lhs_acc[b];
        rhs += opts.sigma_a_sq * w2_acc[b];
        total += cnt[b];
    }
    const BatchStat r = batch_stat(ratios);
    LemmaReport rep;
    rep.lemma_id = 2;
    rep.lhs = lhs / total;
    rep.rhs = rhs / total;
    rep.terms = {{"ratio", r.mean}, {"ratio_half95", r.half95}};
    rep.pass = r.mean >= 0.97 && r.mean <= 1.03;
    rep.detail = "ratio=" + fmt(r.mean) + "+-" + fmt(r.half95);
    return rep;
}

// Per-batch accumulators shared by the zeta-style lemmas.
struct ZetaAcc {
    double r1 = 0.0;      // sum_t ||E G||_F^2
    double r2 = 0.0;      // sum_t sum_ik |E_ik|^2 s_k
    arma::vec acol;       // sum_t sum_i |E_ik|^2 per k
    arma::vec svec;       // sum_t s_k
    double osps = 0.0, ostt = 0.0;
    cx_mat gg;            // sum_t G G^H
    double g4 = 0.0;      // sum_t sum |g|^4
    double y_abs2 = 0.0;  // sum_t sum_m[(sum_k|g|^2)^2 - sum_k|g|^4]
    double y_sum = 0.0;   // sum_t sum_m[|sum_k g|^2 - sum_k|g|^2]
    double e2 = 0.0;      // sum_t mean|E|^2
    long count = 0;
};

void zeta_accumulate(ZetaAcc& a, const SpsPipeline::Trial& t, bool with_corr_stats) {
    const arma::mat e2 = arma::square(arma::abs(t.e));
    const arma::mat g2 = arma::square(arma::abs(t.g_sps));
    const arma::vec s = arma::sum(g2, 1);          // per-row k of G
    const arma::vec ecol = arma::sum(e2, 0).t();   // per-column k of E

    a.r1 += std::pow(arma::norm(t.e * t.g_sps, "fro"), 2);
    a.r2 += arma::dot(ecol, s);
    a.acol += ecol;
    a.svec += s;
    a.osps += mean_row_si_power(t.w, t.h_si, t.g_sps);
    a.ostt += mean_row_si_power(t.w, t.e, t.g_zf);
    a.e2 += arma::accu(e2) / e2.n_elem;
    if (with_corr_stats) {
        a.gg += t.g_sps * t.g_sps.t();
        a.g4 += arma::accu(arma::square(g2));
        for (arma::uword mcol = 0; mcol < t.g_sps.n_cols; ++mcol) {
            const double p2 = arma::accu(g2.col(mcol));
            const double p4 = arma::accu(arma::square(g2.col(mcol)));
            a.y_abs2 += p2 * p2 - p4;
            const double tot = std::norm(arma::accu(t.g_sps.col(mcol)));
            a.y_sum += tot - p2;
        }
    }
    a.count += 1;
}

LemmaReport lemma3(const SystemConfig& cfg, long trials, std::uint64_t seed,
                   const LemmaOptions& opts) {
    const SpsPipeline pipe(cfg, opts.r_si, opts.eps_sq_si, std::nullopt);
    const int nb = opts.batches;
    const long tpb = std::max<long>(trials / nb, 1);

    std::vector<ZetaAcc> acc(nb);
    for (auto& a : acc) {
        a.acol.zeros(pipe.m);
        a.svec.zeros(pipe.m);
    }
    run_batches(nb, tpb, seed,
                [&](int b, RngStream& rng) { zeta_accumulate(acc[b], pipe.draw(rng), false); });

    std::vector<double> zetas(nb), covs(nb), crosses(nb), odiff(nb), oratio(nb);
    for (int b = 0; b < nb; ++b) {
        const ZetaAcc& a = acc[b];
        const double inv = 1.0 / a.count;
        const double r1 = a.r1 * inv, r2 = a.r2 * inv;
        const double r3 = arma::dot(a.acol * inv, a.svec * inv);
        zetas[b] = (r1 - r3) / pipe.n;
        covs[b] = (r2 - r3) / pipe.n;
        crosses[b] = (r1 - r2) / pipe.n;
        odiff[b] = (a.osps - a.ostt) * inv;
        oratio[b] = a.osps / a.ostt;
    }
    const BatchStat z = batch_stat(zetas);
    const BatchStat od = batch_stat(odiff);
    LemmaReport rep;
    rep.lemma_id = 3;
    rep.lhs = z.mean;
    rep.lhs_se = z.se;
    rep.rhs = 0.0;
    rep.terms = {{"zeta_sps", z.mean},
                 {"zeta_half95", z.half95},
                 {"cov_term", batch_stat(covs).mean},
                 {"cross_term", batch_stat(crosses).mean},
                 {"omega_diff", od.mean},
                 {"omega_diff_half95", od.half95},
                 {"omega_ratio", batch_stat(oratio).mean}};
    rep.pass = z.mean + z.half95 < 0.0;
    rep.detail = "zeta_sps=" + fmt(z.mean) + "+-" + fmt(z.half95) +
                 " omega_diff=" + fmt(od.mean) + "+-" + fmt(od.half95);
    return rep;
}

LemmaReport lemma4(const SystemConfig& cfg, long trials, std::uint64_t seed,
                   const LemmaOptions& opts) {
    if (!(opts.r_si > 0.0))
        throw ConfigError("r_si: lemma 4 requires a correlated SI channel model");
    const SpsPipeline pipe(cfg, opts.r_si, opts.eps_sq_si, std::nullopt);
    const int nb = opts.batches;
    const long tpb = std::max<long>(trials / nb, 1);
    const int m = pipe.m, l = pipe.k_dl, n = pipe.n;

    std::vector<ZetaAcc> acc(nb);
    for (auto& a : acc) {
        a.acol.zeros(m);
        a.svec.zeros(m);
        a.gg.zeros(m, m);
    }
    run_batches(nb, tpb, seed,
                [&](int b, RngStream& rng) { zeta_accumulate(acc[b], pipe.draw(rng), true); });

    // Pool everything for the reconstruction; batch only the direct term.
    ZetaAcc pool;
    pool.acol.zeros(m);
    pool.svec.zeros(m);
    pool.gg.zeros(m, m);
    std::vector<double> crosses(nb);
    for (int b = 0; b < nb; ++b) {
        const ZetaAcc& a = acc[b];
        crosses[b] = (a.r1 - a.r2) / a.count;
        pool.r1 += a.r1;
        pool.r2 += a.r2;
        pool.gg += a.gg;
        pool.g4 += a.g4;
        pool.y_abs2 += a.y_abs2;
        pool.y_sum += a.y_sum;
        pool.e2 += a.e2;
        pool.count += a.count;
    }
    const double inv = 1.0 / pool.count;
    const double pair_count = static_cast<double>(n) * l * m * (m - 1);
    const double xy = (pool.r1 - pool.r2) * inv / pair_count;
    const double eps2_hat = pool.e2 * inv;
    const double vx = eps2_hat * eps2_hat;
    const double y_mean = pool.y_sum * inv / (static_cast<double>(l) * m * (m - 1));
    const double vy = pool.y_abs2 * inv / (static_cast<double>(l) * m * (m - 1)) - y_mean * y_mean;
    const double r_im = xy / std::sqrt(vx * vy);

    const cx_mat ggn = pool.gg * (inv / l);
    const double m2 = 1.0 / (static_cast<double>(m) * l);  // exact under the power constraint
    const double m4 = pool.g4 * inv / (static_cast<double>(m) * l);
    const double q_hat = m4 / (m2 * m2);

    double rec_sum = 0.0;
    double max_g2_dev = 0.0;
    for (int k = 0; k < m; ++k) {
        max_g2_dev = std::max(max_g2_dev,
                              std::abs(std::real(ggn(k, k)) * (static_cast<double>(m) * l) - 1.0));
        for (int j = 0; j < m; ++j) {
            if (j == k) continue;
            const double denom = std::sqrt(std::real(ggn(k, k)) * std::real(ggn(j, j)));
            const double rkl = std::abs(ggn(k, j)) / denom;
            rec_sum += std::sqrt(q_hat * rkl * rkl + 1.0);
        }
    }
    const double cross_rec = n * eps2_hat * r_im * rec_sum / m;
    const BatchStat cd = batch_stat(crosses);
    const double cross_direct = cd.mean;

    LemmaReport rep;
    rep.lemma_id = 4;
    rep.lhs = cross_direct / n;  // per-row scale as in lemma 3
    rep.lhs_se = cd.se / n;
    rep.rhs = cross_rec / n;
    const double ratio = cross_rec / cross_direct;
    rep.terms = {{"cross_direct", cross_direct / n}, {"cross_reconstructed", cross_rec / n},
                 {"r_im_sps", r_im},                 {"q_hat", q_hat},
                 {"max_offdiag_r_kl", [&] {
                      double mx = 0.0;
                      for (int k = 0; k < m; ++k)
                          for (int j = 0; j < m; ++j)
                              if (j != k)
                                  mx = std::max(mx, std::abs(ggn(k, j)) /
                                                        std::sqrt(std::real(ggn(k, k)) *
                                                                  std::real(ggn(j, j))));
                      return mx;
                  }()},
                 {"max_g2_deviation", max_g2_dev},
                 {"ratio", ratio}};
    // The q/exponential step is an approximation; demand sign agreement and
    // the right magnitude rather than a tight tolerance.
    rep.pass = (cross_rec < 0.0) == (cross_direct < 0.0) && ratio > 0.25 && ratio < 4.0;
    rep.detail = "cross_direct=" + fmt(cross_direct / n) + " reconstructed=" + fmt(cross_rec / n) +
                 " r_im=" + fmt(r_im) + " q=" + fmt(q_hat);
    return rep;
}

LemmaReport lemma5(const SystemConfig& cfg, long trials, std::uint64_t seed,
                   const LemmaOptions& opts) {
    const double spacing = opts.ul_bessel_spacing.value_or(1.0);
    const SpsPipeline pipe(cfg, opts.r_si, opts.eps_sq_si, spacing);
    const int nb = opts.batches;
    const long tpb = std::max<long>(trials / nb, 1);

    std::vector<double> osps(nb, 0.0), ostt(nb, 0.0), wcov(nb, 0.0);
    std::vector<long> cnt(nb, 0);
    run_batches(nb, tpb, seed, [&](int b, RngStream& rng) {
        const auto t = pipe.draw(rng);
        osps[b] += mean_row_si_power(t.w, t.h_si, t.g_sps);
        ostt[b] += mean_row_si_power(t.w, t.e, t.g_zf);
        double s = 0.0;
        for (arma::uword k = 0; k < t.w.n_rows; ++k) {
            const cx_rowvec row = t.w.row(k);
            s += std::norm(arma::accu(row)) - std::pow(arma::norm(row, 2), 2);
        }
        wcov[b] += s / t.w.n_rows;
        cnt[b] += 1;
    });

    std::vector<double> diffs(nb), covs(nb);
    for (int b = 0; b < nb; ++b) {
        diffs[b] = (osps[b] - ostt[b]) / cnt[b];
        covs[b] = wcov[b] / cnt[b];
    }
    const BatchStat d = batch_stat(diffs);
    const BatchStat c = batch_stat(covs);
    LemmaReport rep;
    rep.lemma_id = 5;
    rep.lhs = d.mean;
    rep.lhs_se = d.se;
    rep.rhs = 0.0;
    rep.terms = {{"omega_gap", d.mean},
                 {"omega_gap_half95", d.half95},
                 {"w_cov_sum", c.mean},
                 {"w_cov_sum_half95", c.half95}};
    const bool gap_neg = d.mean + d.half95 < 0.0;
    const bool cov_pos = c.mean - c.half95 > 0.0;
    rep.pass = gap_neg && cov_pos;
    rep.detail = "omega_gap=" + fmt(d.mean) + "+-" + fmt(d.half95) + " w_cov_sum=" + fmt(c.mean) +
                 "+-" + fmt(c.half95);
    return rep;
}

}  // namespace

LemmaReport verify_lemma(int lemma_id, const SystemConfig& cfg, long trials, std::uint64_t seed,
                         const LemmaOptions& opts) {
    cfg.validate_structural();
    if (trials < opts.batches) throw ConfigError("trials: need at least one trial per batch");
    switch (lemma_id) {
        case 1: return lemma1(cfg, trials, seed, opts);
        case 2: return lemma2(cfg, trials, seed, opts);
        case 3: return lemma3(cfg, trials, seed, opts);
        case 4: return lemma4(cfg, trials, seed, opts);
        case 5: return lemma5(cfg, trials, seed, opts);
        default: throw ConfigError("lemma id must be 1..5");
    }
}

SpsCorrelationStats estimate_sps_correlation_stats(const SystemConfig& cfg, double r_si,
                                                   double eps_sq_si, long trials,
                                                   std::uint64_t seed) {
    cfg.validate_structural();
    SpsCorrelationStats stats;
    stats.r_kl_si = arma::eye(cfg.m_tx, cfg.m_tx);
    if (eps_sq_si <= 0.0) {
        stats.degenerate = true;
        return stats;
    }
    const SpsPipeline pipe(cfg, r_si, eps_sq_si, std::nullopt);
    const int m = pipe.m, l = pipe.k_dl, n = pipe.n;

    const int nb = 8;
    const long tpb = std::max<long>(trials / nb, 1);
    std::vector<ZetaAcc> acc(nb);
    for (auto& a : acc) {
        a.acol.zeros(m);
        a.svec.zeros(m);
        a.gg.zeros(m, m);
    }
    run_batches(nb, tpb, seed,
                [&](int b, RngStream& rng) { zeta_accumulate(acc[b], pipe.draw(rng), true); });

    ZetaAcc pool;
    pool.gg.zeros(m, m);
    for (const auto& a : acc) {
        pool.r1 += a.r1;
        pool.r2 += a.r2;
        pool.gg += a.gg;
        pool.g4 += a.g4;
        pool.y_abs2 += a.y_abs2;
        pool.y_sum += a.y_sum;
        pool.e2 += a.e2;
        pool.osps += a.osps;
        pool.ostt += a.ostt;
        pool.count += a.count;
    }
    const double inv = 1.0 / pool.count;
    const double pairs = static_cast<double>(l) * m * (m - 1);
    const double xy = (pool.r1 - pool.r2) * inv / (n * pairs);
    const double eps2_hat = pool.e2 * inv;
    const double y_mean = pool.y_sum * inv / pairs;
    const double vy = pool.y_abs2 * inv / pairs - y_mean * y_mean;
    stats.r_im_sps = xy / std::sqrt(eps2_hat * eps2_hat * vy);

    const cx_mat ggn = pool.gg * (inv / l);
    stats.r_kl_si.set_size(m, m);
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
            stats.r_kl_si(k, j) =
                k == j ? 1.0
                       : std::abs(ggn(k, j)) /
                             std::sqrt(std::real(ggn(k, k)) * std::real(ggn(j, j)));
    const double m2 = 1.0 / (static_cast<double>(m) * l);
    const double m4 = pool.g4 * inv / (static_cast<double>(m) * l);
    stats.q_hat = m4 / (m2 * m2);
    stats.omega_ratio = pool.osps / pool.ostt;
    return stats;
}

std::vector<SicReportRow> generate_sic_report(const SystemConfig& cfg, long trials,
                                              std::uint64_t seed, double r_high,
                                              double r_max_dl) {
    cfg.validate();
    const LinkBudget budget = derive_link_budget(cfg);
    std::vector<SicReportRow> rows;

    // Perfect estimation: the downlink diversity gap decides.
    const RateApprox stt = perfect_csi_rates(cfg, budget, SicMethod::Subtraction);
    const RateApprox sps = perfect_csi_rates(cfg, budget, SicMethod::SpatialSuppression);
    const double total_gap = (stt.r_dl_sum + stt.r_ul_sum) - (sps.r_dl_sum + sps.r_ul_sum);
    rows.push_back({"perfect channel estimation",
                    total_gap >= 0.0 ? "subtraction" : "spatial-suppression", total_gap,
                    "sum-rate gap stt-sps = " + fmt(total_gap) + " b/s/Hz"});

    // Correlated-channel rows need the suppression statistics. The Eq.-33
    // cross point at a given setup:
    auto cross_at = [&](const SystemConfig& c, double r_si, std::uint64_t s,
                        long n) -> ConstraintReport {
        const LinkBudget b = derive_link_budget_unchecked(c);
        const double eps = si_error_variance_pilot(b, c);
        const SpsCorrelationStats st = estimate_sps_correlation_stats(c, r_si, eps, n, s);
        return power_scaling_cross_point(c, b, st.q_hat, st.r_kl_si, std::abs(st.r_im_sps),
                                         r_max_dl);
    };

    const double eps_si = si_error_variance_pilot(budget, cfg);
    const SpsCorrelationStats stats =
        estimate_sps_correlation_stats(cfg, 0.8, eps_si, trials, seed);
    const ConstraintReport cross_base = power_scaling_cross_point(
        cfg, budget, stats.q_hat, stats.r_kl_si, std::abs(stats.r_im_sps), r_max_dl);

    // "Highly correlated" is judged at the measured-channel correlation
    // level (the practical SI channel is close to rank one); the moderate
    // r = 0.8 point is printed alongside for the trend.
    const ConstraintReport cross_high = cross_at(cfg, r_high, seed, trials);
    rows.push_back({"highly correlated SI channel + DL power scaling",
                    cross_high.r_cross >= 1.0 ? "spatial-suppression" : "subtraction",
                    cross_high.r_cross,
                    "R_cross = " + fmt(cross_high.r_cross) + " at r = " + fmt(r_high) +
                        " (r = 0.8 gives " + fmt(cross_base.r_cross) + "), eps^2_SI = " +
                        fmt(eps_si)});

    // "High M/N" doubles the transmit split at r = 0.8; the low-M/N
    // reference doubles the receive side instead.
    SystemConfig high_mn = cfg;
    high_mn.m_tx = 2 * cfg.m_tx;
    const ConstraintReport cross_mn = cross_at(high_mn, 0.8, seed + 1, trials);
    std::string trend = "R_cross = " + fmt(cross_mn.r_cross) + " at M/N = " +
                        fmt(static_cast<double>(high_mn.m_tx) / high_mn.n_rx) + "; " +
                        fmt(cross_base.r_cross) + " at M/N = " +
                        fmt(static_cast<double>(cfg.m_tx) / cfg.n_rx);
    {
        SystemConfig low = cfg;
        low.n_rx = std::min(cfg.m_tx - cfg.k_dl - 1, cfg.n_rx * 2);
        low.tau_si = std::max(low.tau_si, low.n_rx);
        if (low.n_rx > cfg.n_rx) {
            const ConstraintReport c_low =
                cross_at(low, 0.8, seed + 2, std::max<long>(trials / 2, 100));
            trend += "; " + fmt(c_low.r_cross) + " at M/N = " +
                     fmt(static_cast<double>(low.m_tx) / low.n_rx);
        }
    }
    rows.push_back({"high M/N ratio + DL power scaling",
                    cross_mn.r_cross >= 1.0 ? "spatial-suppression" : "subtraction",
                    cross_mn.r_cross, trend});

    // Matched transmit power: the method with the larger supported DL/UL
    // rate ratio carries asymmetric traffic better.
    const HighSnrTerms terms = extract_high_snr_terms(cfg, budget, eps_si, stats.omega_ratio);
    const ConstraintReport gap =
        rate_gap_analysis(cfg, terms.phi, terms.s, terms.i, terms.omega_stt, terms.omega_delta);
    rows.push_back({"total transmit power, high DL/UL traffic ratio",
                    gap.eta_stt >= gap.eta_sps ? "subtraction" : "spatial-suppression",
                    gap.eta_stt - gap.eta_sps,
                    "eta_stt = " + fmt(gap.eta_stt) + ", eta_sps = " + fmt(gap.eta_sps)});
    return rows;
}

}  // namespace fdmimo
