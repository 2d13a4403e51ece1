#ifndef FDMIMO_CHANNEL_HPP
#define FDMIMO_CHANNEL_HPP

#include <string>
#include <vector>

#include "fdmimo/rng.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

/// Hermitian PSD correlation matrix together with its principal square root.
struct CorrelationModel {
    cx_mat r;
    cx_mat sqrt;

    arma::uword size() const { return r.n_rows; }
    bool is_identity() const { return ident_; }
    bool ident_ = false;

    static CorrelationModel identity(int n);
    /// Toeplitz powers r^|i-j| (Scenario I).
    static CorrelationModel exponential(double r, int n);
    /// J0(2*pi*d_ij/lambda) over element positions (3 x n, meters).
    static CorrelationModel bessel(const arma::mat& positions, double wavelength);
    /// Validates (Hermitian, unit diagonal, PSD) and computes the sqrt.
    static CorrelationModel from_matrix(cx_mat r);
};

/// Principal square root of a Hermitian PSD matrix via eigendecomposition;
/// eigenvalues in [-1e-10, 0) are clamped to 0, below that is an error.
cx_mat matrix_principal_sqrt(const cx_mat& r);

cx_mat draw_iid(int rows, int cols, RngStream& rng);

/// H = R_rx^{1/2} H_iid R_tx^{1/2}. Consumes rows*cols CN draws regardless
/// of the correlation models, so streams stay aligned across sweep points.
cx_mat draw_kronecker(const CorrelationModel& rx, const CorrelationModel& tx, int rows, int cols,
                      RngStream& rng);

struct RayTap {
    double power = 0.0;  ///< linear tap gain P_l
    double aoa_az = 0.0, aod_az = 0.0;  ///< azimuth angles, radians
    double zoa = 0.0, zod = 0.0;        ///< zenith angles, radians
    double phi_hh = 0.0, phi_vh = 0.0, phi_hv = 0.0, phi_vv = 0.0;
    bool has_phases = true;
};

/// Dual-polarization gain table over a regular (zenith, azimuth) grid;
/// lookup snaps to the nearest grid point.
struct AntennaPattern {
    arma::vec zenith_deg;   ///< sorted grid axis
    arma::vec azimuth_deg;  ///< sorted grid axis
    arma::mat g_copol;      ///< linear, zenith x azimuth
    arma::mat g_crosspol;

    struct Gains { double copol, crosspol; };
    Gains lookup(double zenith_rad, double azimuth_rad) const;

    static AntennaPattern isotropic();
    static AntennaPattern load_csv(const std::string& path);
};

struct AntennaGeometry {
    arma::mat tx_positions;  ///< 3 x M, meters
    arma::mat rx_positions;  ///< 3 x N, meters
    double wavelength = 1.0;
    AntennaPattern pattern_tx;
    AntennaPattern pattern_rx;
    // Port convention: the tx port is co-polarized on H, the rx port on V.
    bool tx_copol_is_h = true;
    bool rx_copol_is_h = false;

    static AntennaGeometry ula(int m_tx, int n_rx, double spacing_wavelengths, double wavelength);
};

/// Flat clustered-ray SI channel synthesis (N x M), deterministic in inputs.
cx_mat synth_ray_si_channel(const std::vector<RayTap>& rays, const AntennaGeometry& geom);

/// Rescales so the mean entry power is 1 (the absolute level is carried by
/// beta_si); returns the applied scale factor through `scale` when non-null.
cx_mat normalize_mean_entry_power(const cx_mat& h, double* scale = nullptr);

struct EmpiricalCorrelation {
    cx_mat r_tx, r_rx;          ///< unit-diagonal normalized
    cx_mat r_tx_raw, r_rx_raw;  ///< plain averages of H^*H and HH^*
};

EmpiricalCorrelation empirical_correlation(const std::vector<cx_mat>& samples);

/// CSV loader: header power_db,aoa_deg,aod_deg,zoa_deg,zod_deg[,phi_hh_deg,
/// phi_vh_deg,phi_hv_deg,phi_vv_deg]. Malformed rows are rejected with their
/// line number. Missing phase columns leave has_phases=false.
std::vector<RayTap> load_ray_csv(const std::string& path);

/// Draws any missing polarization phases uniformly on [0, 2pi).
void fill_missing_phases(std::vector<RayTap>& rays, RngStream& rng);

}  // namespace fdmimo

#endif
