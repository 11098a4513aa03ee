#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nsshape {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Conserved state u = (rho, rho v1, rho v2, rho E).
using State = Eigen::Vector4d;
/// Spatial gradient of the conserved state, (i,k) = d u_i / d x_k.
using StateGrad = Eigen::Matrix<double, 4, 2>;
/// Flux pair (f1, f2) stored column-wise.
using FluxPair = Eigen::Matrix<double, 4, 2>;
/// Second spatial derivatives, hess[i](a,b) = d^2 u_i / (d x_a d x_b).
using StateHess = std::array<Mat2, 4>;

/// Flux Jacobians per spatial direction: A[k](i,j) = d (f_k)_i / d u_j.
struct FluxJacobian {
    std::array<Mat4, 2> A;
    Vec4 apply(int k, const Vec4& w) const { return A[k] * w; }
};

/// Rank-4 homogeneity tensor G[k][l](i,j) = d (f^v_k)_i / d (du_j/dx_l).
struct HomogeneityTensor {
    std::array<std::array<Mat4, 2>, 2> G;

    /// Contract with a gradient-shaped argument: result(i,k) = G[k][l](i,j) g(j,l).
    FluxPair contract(const StateGrad& g) const {
        FluxPair F;
        for (int k = 0; k < 2; ++k)
            F.col(k) = G[k][0] * g.col(0) + G[k][1] * g.col(1);
        return F;
    }
};

class NsError : public std::runtime_error {
  public:
    explicit NsError(const std::string& msg) : std::runtime_error(msg) {}
};

class InadmissibleStateError : public NsError {
  public:
    InadmissibleStateError(double rho, double internal_energy)
        : NsError("inadmissible state: rho=" + std::to_string(rho) +
                  ", internal energy=" + std::to_string(internal_energy)),
          rho(rho), internal_energy(internal_energy) {}
    double rho;
    double internal_energy;
};

class GeometryError : public NsError {
  public:
    explicit GeometryError(const std::string& msg) : NsError(msg) {}
};

class ConfigError : public NsError {
  public:
    explicit ConfigError(const std::string& msg) : NsError(msg) {}
};

class SolveError : public NsError {
  public:
    explicit SolveError(const std::string& msg) : NsError(msg) {}
};

constexpr double kPi = 3.14159265358979323846;

} // namespace nsshape
