#include "fdmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fdmimo/sysconfig.hpp"

namespace fdmimo {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg2Rad = kPi / 180.0;
}  // namespace

cx_mat matrix_principal_sqrt(const cx_mat& r) {
    if (!r.is_square()) throw NumericalError("matrix_principal_sqrt: matrix must be square");
    const double scale = std::max(1.0, arma::norm(r, "fro"));
    if (arma::norm(r - r.t(), "fro") > 1e-12 * scale)
        throw NumericalError("matrix_principal_sqrt: matrix is not Hermitian");

    arma::vec eigval;
    arma::cx_mat eigvec;
    if (!arma::eig_sym(eigval, eigvec, arma::symmatu(r)))
        throw NumericalError("matrix_principal_sqrt: eigendecomposition failed");
    for (auto& ev : eigval) {
        if (ev < -1e-10)
            throw NumericalError("matrix_principal_sqrt: matrix is indefinite (eigenvalue " +
                                 std::to_string(ev) + ")");
        if (ev < 0.0) ev = 0.0;  // clamp round-off negatives
    }
    return eigvec * arma::diagmat(arma::sqrt(eigval)) * eigvec.t();
}

CorrelationModel CorrelationModel::from_matrix(cx_mat r) {
    for (arma::uword i = 0; i < r.n_rows; ++i)
        if (std::abs(r(i, i) - 1.0) > 1e-10)
            throw NumericalError("correlation matrix must have a unit diagonal");
    CorrelationModel m;
    m.sqrt = matrix_principal_sqrt(r);
    m.r = std::move(r);
    const double rel = arma::norm(m.sqrt * m.sqrt.t() - m.r, "fro") / arma::norm(m.r, "fro");
    if (rel > 1e-8)
        throw NumericalError("correlation square root reconstruction error " + std::to_string(rel));
    return m;
}

CorrelationModel CorrelationModel::identity(int n) {
    if (n < 1) throw std::invalid_argument("correlation size must be positive");
    CorrelationModel m;
    m.r = arma::cx_mat(arma::eye(n, n), arma::zeros(n, n));
    m.sqrt = m.r;
    m.ident_ = true;
    return m;
}

CorrelationModel CorrelationModel::exponential(double r, int n) {
    if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("exponential correlation requires 0 <= r < 1");
    if (n < 1) throw std::invalid_argument("correlation size must be positive");
    arma::mat re(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) re(i, j) = std::pow(r, std::abs(i - j));
    auto m = from_matrix(cx_mat(re, arma::zeros(n, n)));
    if (r == 0.0) m.ident_ = true;
    return m;
}

CorrelationModel CorrelationModel::bessel(const arma::mat& positions, double wavelength) {
    if (wavelength <= 0.0) throw std::invalid_argument("wavelength must be positive");
    if (positions.n_rows != 3 || positions.n_cols < 1)
        throw std::invalid_argument("positions must be 3 x n");
    const int n = static_cast<int>(positions.n_cols);
    arma::mat re(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double d = arma::norm(positions.col(i) - positions.col(j));
            const double v = std::cyl_bessel_j(0.0, 2.0 * kPi * d / wavelength);
            re(i, j) = v;
            re(j, i) = v;
        }
    }
    return from_matrix(cx_mat(re, arma::zeros(n, n)));
}

cx_mat draw_iid(int rows, int cols, RngStream& rng) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("draw_iid: dimensions must be positive");
    return rng.cgauss_mat(rows, cols);
}

cx_mat draw_kronecker(const CorrelationModel& rx, const CorrelationModel& tx, int rows, int cols,
                      RngStream& rng) {
    if (static_cast<int>(rx.size()) != rows || static_cast<int>(tx.size()) != cols)
        throw std::invalid_argument("draw_kronecker: correlation dimensions do not match rows/cols");
    cx_mat h = draw_iid(rows, cols, rng);
    if (!rx.is_identity()) h = rx.sqrt * h;
    if (!tx.is_identity()) h = h * tx.sqrt;
    return h;
}

AntennaPattern::Gains AntennaPattern::lookup(double zenith_rad, double azimuth_rad) const {
    const double zen = zenith_rad / kDeg2Rad;
    double az = azimuth_rad / kDeg2Rad;
    // wrap azimuth into (-180, 180]
    while (az > 180.0) az -= 360.0;
    while (az <= -180.0) az += 360.0;

    double zen_step = 180.0, az_step = 360.0;
    if (zenith_deg.n_elem > 1) zen_step = arma::diff(zenith_deg).max();
    if (azimuth_deg.n_elem > 1) az_step = arma::diff(azimuth_deg).max();
    if (zen < zenith_deg.min() - 0.5 * zen_step - 1e-9 || zen > zenith_deg.max() + 0.5 * zen_step + 1e-9)
        throw ConfigError("antenna pattern grid does not cover zenith angle " + std::to_string(zen) + " deg");

    const arma::uword iz = arma::index_min(arma::abs(zenith_deg - zen));
    arma::vec az_dist = arma::abs(azimuth_deg - az);
    az_dist = arma::min(az_dist, 360.0 - az_dist);  // periodic distance
    if (az_dist.min() > 0.5 * az_step + 1e-9)
        throw ConfigError("antenna pattern grid does not cover azimuth angle " + std::to_string(az) + " deg");
    const arma::uword ia = az_dist.index_min();
    return {g_copol(iz, ia), g_crosspol(iz, ia)};
}

AntennaPattern AntennaPattern::isotropic() {
    AntennaPattern p;
    p.zenith_deg = arma::vec{90.0};
    p.azimuth_deg = arma::vec{0.0};
    p.g_copol = arma::mat(1, 1, arma::fill::ones);
    p.g_crosspol = arma::mat(1, 1, arma::fill::zeros);
    return p;
}

AntennaGeometry AntennaGeometry::ula(int m_tx, int n_rx, double spacing_wavelengths, double wavelength) {
    if (m_tx < 1 || n_rx < 1) throw std::invalid_argument("ula: antenna counts must be positive");
    if (wavelength <= 0.0) throw std::invalid_argument("ula: wavelength must be positive");
    AntennaGeometry g;
    g.wavelength = wavelength;
    const double d = spacing_wavelengths * wavelength;
    g.tx_positions = arma::zeros(3, m_tx);
    for (int m = 0; m < m_tx; ++m) g.tx_positions(0, m) = m * d;
    g.rx_positions = arma::zeros(3, n_rx);
    for (int n = 0; n < n_rx; ++n) g.rx_positions(0, n) = n * d;
    g.pattern_tx = AntennaPattern::isotropic();
    g.pattern_rx = AntennaPattern::isotropic();
    return g;
}

namespace {

arma::vec3 spherical_unit(double zenith, double azimuth) {
    return {std::sin(zenith) * std::cos(azimuth), std::sin(zenith) * std::sin(azimuth),
            std::cos(zenith)};
}

// (H, V) gains under the port's co-polarization convention.
std::pair<double, double> gains_hv(const AntennaPattern& p, bool copol_is_h, double zen, double az) {
    const auto g = p.lookup(zen, az);
    if (copol_is_h) return {g.copol, g.crosspol};
    return {g.crosspol, g.copol};
}

}  // namespace

cx_mat synth_ray_si_channel(const std::vector<RayTap>& rays, const AntennaGeometry& geom) {
    if (rays.empty()) throw std::invalid_argument("synth_ray_si_channel: empty ray list");
    const arma::uword m = geom.tx_positions.n_cols;
    const arma::uword n = geom.rx_positions.n_cols;
    const double k = 2.0 * kPi / geom.wavelength;
    const cx_double j(0.0, 1.0);

    cx_mat h(n, m, arma::fill::zeros);
    for (const auto& ray : rays) {
        if (!ray.has_phases)
            throw std::invalid_argument("synth_ray_si_channel: ray tap has undefined polarization phases");
        const auto [grx_h, grx_v] = gains_hv(geom.pattern_rx, geom.rx_copol_is_h, ray.zoa, ray.aoa_az);
        const auto [gtx_h, gtx_v] = gains_hv(geom.pattern_tx, geom.tx_copol_is_h, ray.zod, ray.aod_az);
        // (1x2) row * (2x2) phase matrix * (2x1) column
        const cx_double pol = grx_h * (std::exp(j * ray.phi_hh) * gtx_h + std::exp(j * ray.phi_vh) * gtx_v) +
                              grx_v * (std::exp(j * ray.phi_hv) * gtx_h + std::exp(j * ray.phi_vv) * gtx_v);
        const arma::vec3 r_rx = spherical_unit(ray.zoa, ray.aoa_az);
        const arma::vec3 r_tx = spherical_unit(ray.zod, ray.aod_az);
        cx_vec a_rx(n);
        for (arma::uword i = 0; i < n; ++i)
            a_rx(i) = std::exp(j * (k * arma::dot(r_rx, geom.rx_positions.col(i))));
        cx_rowvec a_tx(m);
        for (arma::uword i = 0; i < m; ++i)
            a_tx(i) = std::exp(j * (k * arma::dot(r_tx, geom.tx_positions.col(i))));
        h += (ray.power * pol) * (a_rx * a_tx);
    }
    return h;
}

cx_mat normalize_mean_entry_power(const cx_mat& h, double* scale) {
    const double mean_pow = arma::accu(arma::square(arma::abs(h))) / static_cast<double>(h.n_elem);
    if (!(mean_pow > 0.0)) throw NumericalError("cannot normalize an all-zero channel matrix");
    const double s = 1.0 / std::sqrt(mean_pow);
    if (scale) *scale = s;
    return s * h;
}

EmpiricalCorrelation empirical_correlation(const std::vector<cx_mat>& samples) {
    if (samples.empty()) throw std::invalid_argument("empirical_correlation: no samples");
    const arma::uword rows = samples.front().n_rows;
    const arma::uword cols = samples.front().n_cols;
    cx_mat tx_raw(cols, cols, arma::fill::zeros);
    cx_mat rx_raw(rows, rows, arma::fill::zeros);
    for (const auto& h : samples) {
        if (h.n_rows != rows || h.n_cols != cols)
            throw std::invalid_argument("empirical_correlation: inconsistent sample dimensions");
        tx_raw += h.t() * h;
        rx_raw += h * h.t();
    }
    tx_raw /= static_cast<double>(samples.size());
    rx_raw /= static_cast<double>(samples.size());

    auto normalize = [](const cx_mat& raw) {
        arma::vec d = arma::real(raw.diag());
        if (d.min() <= 0.0) throw NumericalError("empirical correlation has a non-positive diagonal");
        const arma::vec inv_sqrt = 1.0 / arma::sqrt(d);
        cx_mat out = raw;
        out.each_col() %= arma::conv_to<cx_vec>::from(inv_sqrt);
        out.each_row() %= arma::conv_to<cx_rowvec>::from(inv_sqrt);
        return out;
    };

    EmpiricalCorrelation e;
    e.r_tx = normalize(tx_raw);
    e.r_rx = normalize(rx_raw);
    e.r_tx_raw = std::move(tx_raw);
    e.r_rx_raw = std::move(rx_raw);
    return e;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) {
        // trim
        const auto b = cur.find_first_not_of(" \t\r");
        const auto e = cur.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return out;
}

double parse_field(const std::string& s, const std::string& file, int line, const std::string& name) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        return v;
    } catch (const std::exception&) {
        throw IoError(file + ":" + std::to_string(line) + ": bad value \"" + s + "\" for " + name);
    }
}

}  // namespace

std::vector<RayTap> load_ray_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ray file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ":1: empty ray file");
    auto header = split_csv_line(line);
    const std::vector<std::string> base = {"power_db", "aoa_deg", "aod_deg", "zoa_deg", "zod_deg"};
    const std::vector<std::string> phases = {"phi_hh_deg", "phi_vh_deg", "phi_hv_deg", "phi_vv_deg"};
    bool has_phases = false;
    if (header.size() == base.size() + phases.size()) {
        has_phases = true;
    } else if (header.size() != base.size()) {
        throw IoError(path + ":1: expected 5 or 9 columns, got " + std::to_string(header.size()));
    }
    for (size_t i = 0; i < base.size(); ++i)
        if (header[i] != base[i]) throw IoError(path + ":1: expected column \"" + base[i] + "\"");
    if (has_phases)
        for (size_t i = 0; i < phases.size(); ++i)
            if (header[base.size() + i] != phases[i])
                throw IoError(path + ":1: expected column \"" + phases[i] + "\"");

    std::vector<RayTap> taps;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        RayTap t;
        t.power = db_to_linear(parse_field(f[0], path, lineno, "power_db"));
        t.aoa_az = parse_field(f[1], path, lineno, "aoa_deg") * kDeg2Rad;
        t.aod_az = parse_field(f[2], path, lineno, "aod_deg") * kDeg2Rad;
        t.zoa = parse_field(f[3], path, lineno, "zoa_deg") * kDeg2Rad;
        t.zod = parse_field(f[4], path, lineno, "zod_deg") * kDeg2Rad;
        if (has_phases) {
            t.phi_hh = parse_field(f[5], path, lineno, "phi_hh_deg") * kDeg2Rad;
            t.phi_vh = parse_field(f[6], path, lineno, "phi_vh_deg") * kDeg2Rad;
            t.phi_hv = parse_field(f[7], path, lineno, "phi_hv_deg") * kDeg2Rad;
            t.phi_vv = parse_field(f[8], path, lineno, "phi_vv_deg") * kDeg2Rad;
        }
        t.has_phases = has_phases;
        taps.push_back(t);
    }
    if (taps.empty()) throw IoError(path + ": no ray taps");
    return taps;
}

void fill_missing_phases(std::vector<RayTap>& rays, RngStream& rng) {
    for (auto& t : rays) {
        if (t.has_phases) continue;
        t.phi_hh = 2.0 * kPi * rng.uniform();
        t.phi_vh = 2.0 * kPi * rng.uniform();
        t.phi_hv = 2.0 * kPi * rng.uniform();
        t.phi_vv = 2.0 * kPi * rng.uniform();
        t.has_phases = true;
    }
}

AntennaPattern AntennaPattern::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pattern file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ":1: empty pattern file");
    const auto header = split_csv_line(line);
    const std::vector<std::string> want = {"zenith_deg", "azimuth_deg", "g_copol_db", "g_crosspol_db"};
    if (header.size() != want.size()) throw IoError(path + ":1: expected 4 columns");
    for (size_t i = 0; i < want.size(); ++i)
        if (header[i] != want[i]) throw IoError(path + ":1: expected column \"" + want[i] + "\"");

    std::map<std::pair<double, double>, std::pair<double, double>> grid;
    std::vector<double> zeniths, azimuths;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto f = split_csv_line(line);
        if (f.size() != 4)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        const double zen = parse_field(f[0], path, lineno, "zenith_deg");
        const double az = parse_field(f[1], path, lineno, "azimuth_deg");
        const double co = db_to_linear(parse_field(f[2], path, lineno, "g_copol_db"));
        const double cr = db_to_linear(parse_field(f[3], path, lineno, "g_crosspol_db"));
        grid[{zen, az}] = {co, cr};
        zeniths.push_back(zen);
        azimuths.push_back(az);
    }
    if (grid.empty()) throw IoError(path + ": no pattern samples");

    auto uniq = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    const auto zu = uniq(zeniths);
    const auto au = uniq(azimuths);
    if (grid.size() != zu.size() * au.size())
        throw IoError(path + ": pattern grid is not a complete zenith x azimuth product");

    AntennaPattern p;
    p.zenith_deg = arma::vec(zu);
    p.azimuth_deg = arma::vec(au);
    p.g_copol.set_size(zu.size(), au.size());
    p.g_crosspol.set_size(zu.size(), au.size());
    for (size_t i = 0; i < zu.size(); ++i)
        for (size_t k = 0; k < au.size(); ++k) {
            const auto it = grid.find({zu[i], au[k]});
            if (it == grid.end())
                throw IoError(path + ": missing grid point zenith=" + std::to_string(zu[i]) +
                              " azimuth=" + std::to_string(au[k]));
            p.g_copol(i, k) = it->second.first;
            p.g_crosspol(i, k) = it->second.second;
        }
    return p;
}

}  // namespace fdmimo
