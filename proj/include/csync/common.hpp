#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace csync {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Input or precondition violations. Mapped to CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative solver did not reach its tolerance. Mapped to CLI exit code 3.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

/// ODE integration produced an invalid state. Mapped to CLI exit code 4.
class IntegrationError : public std::runtime_error {
public:
    explicit IntegrationError(const std::string& msg) : std::runtime_error(msg) {}
};

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wrap an angle to [0, 2*pi).
inline double wrap_angle(double theta) {
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

/// Distance between two angles on the circle, in [0, pi].
inline double circular_distance(double a, double b) {
    double d = std::fabs(wrap_angle(a) - wrap_angle(b));
    return d > kTwoPi / 2.0 ? kTwoPi - d : d;
}

/// Shortest-precision decimal form that parses back to the same double.
std::string format_double(double x);

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace csync
