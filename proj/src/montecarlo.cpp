#include "fdmimo/montecarlo.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "fdmimo/beamforming.hpp"
#include "fdmimo/estimation.hpp"

namespace fdmimo {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kCarrierHz = 2.52e9;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Two-sided 95% student-t factor, coarse table keyed by degrees of freedom.
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

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe r;
    const size_t n = v.size();
    if (n == 0) return r;
    double s = 0.0;
    for (double x : v) s += x;
    r.mean = s / n;
    if (n > 1) {
        double q = 0.0;
        for (double x : v) q += (x - r.mean) * (x - r.mean);
        r.se = std::sqrt(q / (n - 1) / n);
    }
    return r;
}

void parallel_for(long n, int threads, const std::function<void(long)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = static_cast<int>(std::min<long>(std::max(threads, 1), n));
    if (threads == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    constexpr long kChunk = 8;
    auto worker = [&] {
        while (true) {
            const long begin = next.fetch_add(kChunk);
            if (begin >= n) return;
            const long end = std::min(begin + kChunk, n);
            for (long i = begin; i < end; ++i) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
            {
                std::lock_guard<std::mutex> lk(err_mu);
                if (err) return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::IidBaseline: return "iid";
        case Scenario::ScenarioI_LowCorr: return "i-low";
        case Scenario::ScenarioI_HighCorr: return "i-high";
        case Scenario::ScenarioII_RayFile: return "ii";
    }
    return "?";
}

Scenario parse_scenario(const std::string& name) {
    if (name == "iid") return Scenario::IidBaseline;
    if (name == "i-low") return Scenario::ScenarioI_LowCorr;
    if (name == "i-high") return Scenario::ScenarioI_HighCorr;
    if (name == "ii") return Scenario::ScenarioII_RayFile;
    throw ConfigError("unknown scenario \"" + name + "\" (expected iid|i-low|i-high|ii)");
}

void MetricsTable::write_csv(std::ostream& out) const {
    out << "# fdmimo-csv v1\n";
    out << "scenario,method,param,metric,mean,stderr,trials\n";
    for (const auto& r : rows)
        out << r.scenario << ',' << r.method << ',' << r.param << ',' << r.metric << ','
            << fmt_g(r.mean) << ',' << fmt_g(r.stderr_) << ',' << r.trials << '\n';
}

void MetricsTable::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file: " + path);
    write_csv(out);
    if (!out) throw IoError("failed writing output file: " + path);
}

std::string MetricsTable::to_csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
}

const MetricsRow* MetricsTable::find(const std::string& method, const std::string& metric,
                                     const std::string& param_substr) const {
    for (const auto& r : rows) {
        if (r.method != method || r.metric != metric) continue;
        if (!param_substr.empty() && r.param.find(param_substr) == std::string::npos) continue;
        return &r;
    }
    return nullptr;
}

namespace {

struct PointSetup {
    SystemConfig cfg;
    LinkBudget budget;
    CorrelationModel si_rx, si_tx, ul_rx;
    bool si_corr = false;
    bool ul_corr = false;
    SiErrorModel model = SiErrorModel::Remark1;
    double eps_si = 0.0;  ///< precomputed for Remark1/Fixed
    arma::vec eps_dl, eps_ul;
    std::vector<SicMethod> methods;  ///< feasible, in plan order
};

struct MethodOut {
    double rate_dl = 0.0, rate_ul = 0.0, g_dl = 0.0, g_ul = 0.0, omega = 0.0;
};

struct TrialOut {
    std::array<MethodOut, 3> m;
    double nmse = 0.0;
    double w2 = 0.0;
};

TrialOut run_trial(const PointSetup& setup, std::uint64_t seed) {
    RngStream rng(seed);
    const auto& c = setup.cfg;

    TrialChannels ch;
    ch.h_dl = draw_iid(c.k_dl, c.m_tx, rng);
    ch.h_ul = draw_iid(c.n_rx, c.k_ul, rng);
    if (setup.ul_corr) ch.h_ul = setup.ul_rx.sqrt * ch.h_ul;
    ch.h_si = draw_iid(c.n_rx, c.m_tx, rng);
    if (setup.si_corr) ch.h_si = setup.si_rx.sqrt * ch.h_si * setup.si_tx.sqrt;
    ch.h_uu = draw_iid(c.k_dl, c.k_ul, rng);

    // Estimation errors are always drawn so streams stay aligned across
    // sweep points that only differ in the error variances.
    ch.e_dl = rng.cgauss_mat(c.k_dl, c.m_tx);
    for (int k = 0; k < c.k_dl; ++k) ch.e_dl.row(k) *= std::sqrt(setup.eps_dl(k));
    ch.h_dl_hat = ch.h_dl + ch.e_dl;

    ch.e_ul = rng.cgauss_mat(c.n_rx, c.k_ul);
    for (int k = 0; k < c.k_ul; ++k) ch.e_ul.col(k) *= std::sqrt(setup.eps_ul(k));
    ch.h_ul_hat = ch.h_ul + ch.e_ul;

    switch (setup.model) {
        case SiErrorModel::Perfect:
            ch.h_si_hat = ch.h_si;
            ch.nmse_si = 0.0;
            break;
        case SiErrorModel::Remark1:
        case SiErrorModel::Fixed: {
            cx_mat z = rng.cgauss_mat(c.n_rx, c.m_tx);
            ch.h_si_hat = ch.h_si + std::sqrt(setup.eps_si) * z;
            ch.nmse_si = setup.eps_si;
            break;
        }
        case SiErrorModel::Aqnm: {
            const SiEstimate est = estimate_si_channel_aqnm(ch.h_si, setup.budget, c, rng);
            ch.h_si_hat = est.h_hat;
            ch.nmse_si = est.nmse;
            break;
        }
    }

    const cx_mat w = zf_combiner(ch.h_ul_hat);

    bool need_zf = false, need_sps = false;
    for (SicMethod m : setup.methods)
        (m == SicMethod::SpatialSuppression ? need_sps : need_zf) = true;

    cx_mat g_zf_raw, g_zf, g_sps_raw, g_sps;
    if (need_zf) {
        g_zf_raw = zf_precoder(ch.h_dl_hat);
        g_zf = normalize_columns(g_zf_raw);
    }
    if (need_sps) {
        g_sps_raw = extended_zf_precoder(ch.h_dl_hat, ch.h_si_hat);
        g_sps = normalize_columns(g_sps_raw);
    }

    TrialOut out;
    out.nmse = ch.nmse_si;
    out.w2 = arma::accu(arma::square(arma::abs(w))) / c.k_ul;
    for (size_t i = 0; i < setup.methods.size(); ++i) {
        const SicMethod method = setup.methods[i];
        BeamformerSet bf;
        bf.method = method;
        bf.combiner = w;
        if (method == SicMethod::SpatialSuppression) {
            bf.precoder_raw = g_sps_raw;
            bf.precoder = g_sps;
        } else {
            bf.precoder_raw = g_zf_raw;
            bf.precoder = g_zf;
        }
        const TrialMetrics tm = evaluate_trial(method, setup.budget, ch, bf);
        out.m[i] = {tm.rate_dl, tm.rate_ul, arma::mean(tm.gamma_dl), arma::mean(tm.gamma_ul),
                    arma::mean(tm.omega)};
    }
    return out;
}

}  // namespace

MetricsTable run_experiment(const ExperimentPlan& plan, const SystemConfig& base_cfg) {
    if (plan.trials < 1) throw ConfigError("trials: must be >= 1");
    if (plan.methods.empty()) throw ConfigError("methods: at least one SIC method required");
    for (const auto& ax : plan.sweep)
        if (ax.values.empty()) throw ConfigError("sweep axis \"" + ax.name + "\" has no values");
    base_cfg.validate_structural();

    // Scenario II inputs are loaded once; the per-point geometry depends on
    // the swept antenna counts.
    std::vector<RayTap> taps;
    AntennaPattern pat_tx = AntennaPattern::isotropic();
    AntennaPattern pat_rx = AntennaPattern::isotropic();
    if (plan.scenario == Scenario::ScenarioII_RayFile) {
        if (plan.ray_file.empty()) throw ConfigError("ray_file: scenario ii requires a ray file");
        taps = load_ray_csv(plan.ray_file);
        RngStream phase_rng(mix_seed(plan.master_seed, 0x52617953ULL));
        fill_missing_phases(taps, phase_rng);
        if (!plan.tx_pattern_file.empty()) pat_tx = AntennaPattern::load_csv(plan.tx_pattern_file);
        if (!plan.rx_pattern_file.empty()) pat_rx = AntennaPattern::load_csv(plan.rx_pattern_file);
    }

    // Cartesian sweep grid; a run without sweep axes is a single point.
    std::vector<std::vector<double>> grid_values;
    long n_points = 1;
    for (const auto& ax : plan.sweep) n_points *= static_cast<long>(ax.values.size());

    MetricsTable table;
    const std::string scen = to_string(plan.scenario);

    for (long p = 0; p < n_points; ++p) {
        SystemConfig cfg = base_cfg;
        double corr_r = plan.scenario == Scenario::ScenarioI_LowCorr    ? 0.2
                        : plan.scenario == Scenario::ScenarioI_HighCorr ? 0.8
                                                                        : 0.0;
        SiErrorModel model = plan.si_error_model.value_or(
            plan.scenario == Scenario::ScenarioII_RayFile ? SiErrorModel::Aqnm
                                                          : SiErrorModel::Remark1);
        double fixed_eps = plan.fixed_eps_sq_si;

        std::string label;
        long idx = p;
        for (const auto& ax : plan.sweep) {
            const double v = ax.values[idx % ax.values.size()];
            idx /= static_cast<long>(ax.values.size());
            if (!label.empty()) label += ';';
            label += ax.name + "=" + fmt_g(v);
            if (ax.name == "rho_d_db") cfg.rho_d_db = v;
            else if (ax.name == "m_tx") cfg.m_tx = static_cast<int>(v);
            else if (ax.name == "n_rx") cfg.n_rx = static_cast<int>(v);
            else if (ax.name == "eps_sq_si") { model = SiErrorModel::Fixed; fixed_eps = v; }
            else if (ax.name == "r") corr_r = v;
            else throw ConfigError("unknown sweep axis \"" + ax.name + "\"");
        }
        if (label.empty()) label = "rho_d_db=" + fmt_g(cfg.rho_d_db);
        if (cfg.tau_si < cfg.n_rx) cfg.tau_si = cfg.n_rx;  // keep the pilot invariant under n_rx sweeps
        if (plan.perfect_csi) model = SiErrorModel::Perfect;

        PointSetup setup;
        setup.cfg = cfg;
        try {
            setup.budget = derive_link_budget_unchecked(setup.cfg);
        } catch (const ConfigError&) {
            for (SicMethod m : plan.methods)
                table.rows.push_back({scen, to_string(m), label, "skipped", 1.0, 0.0, 0});
            continue;
        }

        if (plan.scenario == Scenario::ScenarioII_RayFile) {
            AntennaGeometry geom = AntennaGeometry::ula(cfg.m_tx, cfg.n_rx, 1.0,
                                                        kSpeedOfLight / kCarrierHz);
            geom.pattern_tx = pat_tx;
            geom.pattern_rx = pat_rx;
            const cx_mat h_meas = normalize_mean_entry_power(synth_ray_si_channel(taps, geom));
            const EmpiricalCorrelation emp = empirical_correlation({h_meas});
            setup.si_rx = CorrelationModel::from_matrix(emp.r_rx);
            setup.si_tx = CorrelationModel::from_matrix(emp.r_tx);
            setup.si_corr = true;
        } else if (corr_r > 0.0) {
            setup.si_rx = CorrelationModel::exponential(corr_r, cfg.n_rx);
            setup.si_tx = CorrelationModel::exponential(corr_r, cfg.m_tx);
            setup.si_corr = true;
        }
        if (plan.ul_bessel_spacing) {
            arma::mat pos = arma::zeros(3, cfg.n_rx);
            for (int i = 0; i < cfg.n_rx; ++i) pos(0, i) = *plan.ul_bessel_spacing * i;
            setup.ul_rx = CorrelationModel::bessel(pos, 1.0);
            setup.ul_corr = true;
        }

        setup.model = model;
        if (model == SiErrorModel::Remark1) setup.eps_si = si_error_variance_pilot(setup.budget, setup.cfg);
        if (model == SiErrorModel::Fixed) {
            if (fixed_eps < 0.0) throw ConfigError("eps_sq_si: must be >= 0");
            setup.eps_si = fixed_eps;
        }
        setup.eps_dl.set_size(cfg.k_dl);
        setup.eps_ul.set_size(cfg.k_ul);
        for (int k = 0; k < cfg.k_dl; ++k)
            setup.eps_dl(k) = plan.perfect_csi
                                  ? 0.0
                                  : dl_ul_error_variance(setup.budget, cfg, k, LinkDir::Downlink).epsilon_sq;
        for (int k = 0; k < cfg.k_ul; ++k)
            setup.eps_ul(k) = plan.perfect_csi
                                  ? 0.0
                                  : dl_ul_error_variance(setup.budget, cfg, k, LinkDir::Uplink).epsilon_sq;

        std::vector<bool> feasible;
        for (SicMethod m : plan.methods) {
            bool ok = cfg.m_tx >= cfg.k_dl && cfg.n_rx >= cfg.k_ul;
            if (m == SicMethod::SpatialSuppression) ok = ok && cfg.m_tx >= cfg.n_rx + cfg.k_dl;
            feasible.push_back(ok);
            if (ok) setup.methods.push_back(m);
        }
        if (setup.methods.size() > 3) throw ConfigError("methods: at most 3 methods per run");

        if (!setup.methods.empty()) {
            std::vector<TrialOut> outs(plan.trials);
            parallel_for(plan.trials, plan.threads, [&](long t) {
                outs[t] = run_trial(setup, mix_seed(plan.master_seed, static_cast<std::uint64_t>(t)));
            });

            auto add_row = [&](const std::string& method, const std::string& metric,
                               const std::function<double(const TrialOut&)>& get) {
                std::vector<double> v(outs.size());
                for (size_t i = 0; i < outs.size(); ++i) v[i] = get(outs[i]);
                const MeanSe ms = mean_se(v);
                table.rows.push_back({scen, method, label, metric, ms.mean, ms.se,
                                      static_cast<long>(outs.size())});
            };

            size_t mi = 0;
            for (size_t pi = 0; pi < plan.methods.size(); ++pi) {
                const std::string mname = to_string(plan.methods[pi]);
                if (!feasible[pi]) {
                    table.rows.push_back({scen, mname, label, "skipped", 1.0, 0.0, 0});
                    continue;
                }
                const size_t i = mi++;
                add_row(mname, "rate_dl_sum", [i](const TrialOut& o) { return o.m[i].rate_dl; });
                add_row(mname, "rate_ul_sum", [i](const TrialOut& o) { return o.m[i].rate_ul; });
                add_row(mname, "sinr_dl_mean", [i](const TrialOut& o) { return o.m[i].g_dl; });
                add_row(mname, "sinr_ul_mean", [i](const TrialOut& o) { return o.m[i].g_ul; });
                add_row(mname, "omega_mean", [i](const TrialOut& o) { return o.m[i].omega; });
            }
            add_row("-", "eps_sq_si", [](const TrialOut& o) { return o.nmse; });
            add_row("-", "w_norm_sq_mean", [](const TrialOut& o) { return o.w2; });
        } else {
            for (SicMethod m : plan.methods)
                table.rows.push_back({scen, to_string(m), label, "skipped", 1.0, 0.0, 0});
        }
    }
    return table;
}

MetricsTable diversity_check(const SystemConfig& cfg, long trials, std::uint64_t seed) {
    cfg.validate();
    if (trials < 1) throw ConfigError("trials: must be >= 1");

    struct Out {
        double inv_f_zf = 0.0, inv_f_sps = 0.0, inv_w = 0.0;
    };
    std::vector<Out> outs(trials);
    parallel_for(trials, 0, [&](long t) {
        RngStream rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        const cx_mat h_dl = draw_iid(cfg.k_dl, cfg.m_tx, rng);
        const cx_mat h_ul = draw_iid(cfg.n_rx, cfg.k_ul, rng);
        const cx_mat h_si = draw_iid(cfg.n_rx, cfg.m_tx, rng);
        const cx_mat f_zf = zf_precoder(h_dl);
        const cx_mat f_sps = extended_zf_precoder(h_dl, h_si);
        const cx_mat w = zf_combiner(h_ul);
        Out o;
        for (int k = 0; k < cfg.k_dl; ++k) {
            o.inv_f_zf += 1.0 / std::pow(arma::norm(f_zf.col(k)), 2);
            o.inv_f_sps += 1.0 / std::pow(arma::norm(f_sps.col(k)), 2);
        }
        o.inv_f_zf /= cfg.k_dl;
        o.inv_f_sps /= cfg.k_dl;
        for (int k = 0; k < cfg.k_ul; ++k) o.inv_w += 1.0 / std::pow(arma::norm(w.row(k), 2), 2);
        o.inv_w /= cfg.k_ul;
        outs[t] = o;
    });

    MetricsTable table;
    auto add = [&](const std::string& metric, const std::function<double(const Out&)>& get) {
        std::vector<double> v(outs.size());
        for (size_t i = 0; i < outs.size(); ++i) v[i] = get(outs[i]);
        const MeanSe ms = mean_se(v);
        table.rows.push_back({"iid", "-", "", metric, ms.mean, ms.se, trials});
    };
    add("inv_f_zf", [](const Out& o) { return o.inv_f_zf; });
    add("inv_f_sps", [](const Out& o) { return o.inv_f_sps; });
    add("inv_w", [](const Out& o) { return o.inv_w; });
    return table;
}

}  // namespace fdmimo
