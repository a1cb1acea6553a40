#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace sdfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Base class for every failure this library raises.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No quartic root qualified as the physical branch at z; carries all four
// candidates for diagnosis.
struct branch_error : error {
    Complex z;
    std::array<Complex, 4> roots;
    branch_error(Complex z_, const std::array<Complex, 4>& roots_);
};

}  // namespace sdfm
