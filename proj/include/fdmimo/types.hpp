#ifndef FDMIMO_TYPES_HPP
#define FDMIMO_TYPES_HPP

#include <armadillo>
#include <complex>
#include <stdexcept>
#include <string>

namespace fdmimo {

using cx_mat = arma::cx_mat;
using cx_vec = arma::cx_vec;
using cx_rowvec = arma::cx_rowvec;
using cx_double = std::complex<double>;

/// Config-file or parameter validation failure (CLI exit code 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File read/write failure (CLI exit code 4).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rank deficiency, indefiniteness, non-convergence (CLI exit code 5).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SicMethod { NoSic, Subtraction, SpatialSuppression };

std::string to_string(SicMethod m);
SicMethod parse_sic_method(const std::string& name);

}  // namespace fdmimo

#endif
