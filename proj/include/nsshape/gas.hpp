#pragma once

/// Perfect-gas thermodynamics, convective/viscous fluxes and their exact
/// linearizations for the 2D compressible Navier-Stokes equations in
/// conserved variables u = (rho, rho v1, rho v2, rho E).

#include "nsshape/common.hpp"

#include <cmath>

namespace nsshape {

struct GasModel {
    double gamma = 1.4; ///< adiabatic exponent
    double Pr = 0.72;   ///< Prandtl number
    double mu = 1e-3;   ///< dynamic viscosity (constant)
    double R = 1.0;     ///< gas constant

    double cv() const { return R / (gamma - 1.0); }
    double kappa() const { return mu * gamma * cv() / Pr; }

    /// Nondimensional convention: rho_inf = 1, p_inf = 1, chord = 1, so
    /// a_inf = sqrt(gamma) and |v_inf| = M sqrt(gamma); mu is set from Re.
    static GasModel nondimensional(double gamma, double Pr, double mach, double reynolds) {
        GasModel gas;
        gas.gamma = gamma;
        gas.Pr = Pr;
        gas.R = 1.0;
        gas.mu = mach * std::sqrt(gamma) / reynolds;
        return gas;
    }
};

struct PrimitiveState {
    double rho;
    Vec2 v;
    double p;
    double T;
    double e; ///< specific internal energy
    double H; ///< specific total enthalpy, E + p/rho
    double E; ///< specific total energy
    double a; ///< speed of sound
};

inline bool is_admissible(const State& u, const GasModel& gas) {
    if (!(u[0] > 0.0)) return false;
    const double E = u[3] / u[0];
    const double v2 = (u[1] * u[1] + u[2] * u[2]) / (u[0] * u[0]);
    (void)gas;
    return E - 0.5 * v2 > 0.0;
}

inline PrimitiveState primitive_from_conserved(const State& u, const GasModel& gas) {
    PrimitiveState q;
    q.rho = u[0];
    if (!(q.rho > 0.0)) throw InadmissibleStateError(q.rho, 0.0);
    q.v = Vec2(u[1] / q.rho, u[2] / q.rho);
    q.E = u[3] / q.rho;
    q.e = q.E - 0.5 * q.v.squaredNorm();
    if (!(q.e > 0.0)) throw InadmissibleStateError(q.rho, q.e);
    q.T = q.e / gas.cv();
    q.p = (gas.gamma - 1.0) * q.rho * q.e;
    q.H = q.E + q.p / q.rho;
    q.a = std::sqrt(gas.gamma * q.p / q.rho);
    return q;
}

inline State conserved_from_primitive(double rho, const Vec2& v, double p, const GasModel& gas) {
    const double e = p / ((gas.gamma - 1.0) * rho);
    State u;
    u[0] = rho;
    u[1] = rho * v[0];
    u[2] = rho * v[1];
    u[3] = rho * (e + 0.5 * v.squaredNorm());
    return u;
}

inline double pressure(const State& u, const GasModel& gas) {
    const double g1 = gas.gamma - 1.0;
    return g1 * (u[3] - 0.5 * (u[1] * u[1] + u[2] * u[2]) / u[0]);
}

/// dp/du
inline Vec4 pressure_derivative(const State& u, const GasModel& gas) {
    const double g1 = gas.gamma - 1.0;
    const Vec2 v(u[1] / u[0], u[2] / u[0]);
    return Vec4(0.5 * g1 * v.squaredNorm(), -g1 * v[0], -g1 * v[1], g1);
}

/// dv_i/du_j, rows i in {0,1}, columns j in 0..3
inline Eigen::Matrix<double, 2, 4> velocity_derivative(const State& u) {
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    Eigen::Matrix<double, 2, 4> d = Eigen::Matrix<double, 2, 4>::Zero();
    d(0, 0) = -v[0] / rho;
    d(0, 1) = 1.0 / rho;
    d(1, 0) = -v[1] / rho;
    d(1, 2) = 1.0 / rho;
    return d;
}

inline FluxPair convective_flux(const State& u, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    FluxPair F;
    F(0, 0) = u[1];
    F(1, 0) = u[1] * q.v[0] + q.p;
    F(2, 0) = u[2] * q.v[0];
    F(3, 0) = q.rho * q.H * q.v[0];
    F(0, 1) = u[2];
    F(1, 1) = u[1] * q.v[1];
    F(2, 1) = u[2] * q.v[1] + q.p;
    F(3, 1) = q.rho * q.H * q.v[1];
    return F;
}

/// Velocity gradient from conserved state and gradient: (i,k) = dv_i/dx_k.
inline Mat2 velocity_gradient(const State& u, const StateGrad& g) {
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    Mat2 gv;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            gv(i, k) = (g(i + 1, k) - v[i] * g(0, k)) / rho;
    return gv;
}

/// Temperature gradient from conserved state and gradient.
inline Vec2 temperature_gradient(const State& u, const StateGrad& g, const GasModel& gas) {
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    const double E = u[3] / rho;
    const Mat2 gv = velocity_gradient(u, g);
    Vec2 gT;
    for (int k = 0; k < 2; ++k) {
        const double dE = (g(3, k) - E * g(0, k)) / rho;
        gT[k] = (dE - v[0] * gv(0, k) - v[1] * gv(1, k)) / gas.cv();
    }
    return gT;
}

/// tau = mu (grad v + grad v^T - 2/3 (div v) I)
inline Mat2 viscous_stress(const Mat2& grad_v, const GasModel& gas) {
    const double div_v = grad_v(0, 0) + grad_v(1, 1);
    Mat2 tau = gas.mu * (grad_v + grad_v.transpose());
    tau(0, 0) -= gas.mu * (2.0 / 3.0) * div_v;
    tau(1, 1) -= gas.mu * (2.0 / 3.0) * div_v;
    return tau;
}

inline FluxPair viscous_flux(const State& u, const StateGrad& g, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const Mat2 gv = velocity_gradient(u, g);
    const Vec2 gT = temperature_gradient(u, g, gas);
    const Mat2 tau = viscous_stress(gv, gas);
    FluxPair F;
    for (int k = 0; k < 2; ++k) {
        F(0, k) = 0.0;
        F(1, k) = tau(0, k);
        F(2, k) = tau(1, k);
        F(3, k) = tau(k, 0) * q.v[0] + tau(k, 1) * q.v[1] + gas.kappa() * gT[k];
    }
    return F;
}

inline FluxJacobian convective_jacobian(const State& u, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const double g1 = gas.gamma - 1.0;
    const double v1 = q.v[0], v2 = q.v[1];
    const double phi = 0.5 * g1 * q.v.squaredNorm();
    FluxJacobian J;
    Mat4& A1 = J.A[0];
    A1.setZero();
    A1(0, 1) = 1.0;
    A1(1, 0) = phi - v1 * v1;
    A1(1, 1) = (3.0 - gas.gamma) * v1;
    A1(1, 2) = -g1 * v2;
    A1(1, 3) = g1;
    A1(2, 0) = -v1 * v2;
    A1(2, 1) = v2;
    A1(2, 2) = v1;
    A1(3, 0) = v1 * (phi - q.H);
    A1(3, 1) = q.H - g1 * v1 * v1;
    A1(3, 2) = -g1 * v1 * v2;
    A1(3, 3) = gas.gamma * v1;
    Mat4& A2 = J.A[1];
    A2.setZero();
    A2(0, 2) = 1.0;
    A2(1, 0) = -v1 * v2;
    A2(1, 1) = v2;
    A2(1, 2) = v1;
    A2(2, 0) = phi - v2 * v2;
    A2(2, 1) = -g1 * v1;
    A2(2, 2) = (3.0 - gas.gamma) * v2;
    A2(2, 3) = g1;
    A2(3, 0) = v2 * (phi - q.H);
    A2(3, 1) = -g1 * v1 * v2;
    A2(3, 2) = q.H - g1 * v2 * v2;
    A2(3, 3) = gas.gamma * v2;
    return J;
}

namespace detail {

/// d(grad v)(i,k) / du_j at fixed conserved gradient g.
inline void velocity_gradient_derivative_u(const State& u, const StateGrad& g,
                                           std::array<Eigen::Matrix<double, 2, 2>, 4>& dgv) {
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    const Mat2 gv = velocity_gradient(u, g);
    const Eigen::Matrix<double, 2, 4> dv = velocity_derivative(u);
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) {
                double val = -dv(i, j) * g(0, k) / rho;
                if (j == 0) val -= gv(i, k) / rho;
                dgv[j](i, k) = val;
            }
    }
}

} // namespace detail

/// Homogeneity tensor G(u): the viscous flux is F^v(u, g) = G(u) : g.
inline HomogeneityTensor homogeneity_tensor(const State& u, const GasModel& gas) {
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    const double E = u[3] / rho;
    const double mu = gas.mu, cv = gas.cv(), kap = gas.kappa();

    // d(grad v)(i,k)/dg(j,l) = delta_kl (delta_{j,i+1} - v_i delta_{j0}) / rho
    auto dgv_dg = [&](int i, int k, int j, int l) -> double {
        if (k != l) return 0.0;
        double s = 0.0;
        if (j == i + 1) s += 1.0;
        if (j == 0) s -= v[i];
        return s / rho;
    };
    // d(grad T)(k)/dg(j,l)
    auto dgT_dg = [&](int k, int j, int l) -> double {
        double s = 0.0;
        if (k == l) s += ((j == 3 ? 1.0 : 0.0) - E * (j == 0 ? 1.0 : 0.0)) / rho;
        for (int i = 0; i < 2; ++i) s -= v[i] * dgv_dg(i, k, j, l);
        return s / cv;
    };
    // d tau(a,b)/dg(j,l)
    auto dtau_dg = [&](int a, int b, int j, int l) -> double {
        double s = dgv_dg(a, b, j, l) + dgv_dg(b, a, j, l);
        if (a == b) s -= (2.0 / 3.0) * (dgv_dg(0, 0, j, l) + dgv_dg(1, 1, j, l));
        return mu * s;
    };

    HomogeneityTensor G;
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            Mat4& Gkl = G.G[k][l];
            Gkl.setZero();
            for (int j = 0; j < 4; ++j) {
                Gkl(1, j) = dtau_dg(0, k, j, l);
                Gkl(2, j) = dtau_dg(1, k, j, l);
                double e = kap * dgT_dg(k, j, l);
                for (int m = 0; m < 2; ++m) e += dtau_dg(k, m, j, l) * v[m];
                Gkl(3, j) = e;
            }
        }
    return G;
}

/// d tau / du and d tau / d(grad u) at a point; used by the objective linearization.
struct StressLinearization {
    std::array<std::array<Vec4, 2>, 2> du;                          // [a][b] = d tau_ab / du
    std::array<std::array<Eigen::Matrix<double, 4, 2>, 2>, 2> dgrad; // [a][b](j,l) = d tau_ab / dg(j,l)
};

inline StressLinearization stress_linearization(const State& u, const StateGrad& g,
                                                const GasModel& gas) {
    StressLinearization lin;
    std::array<Eigen::Matrix<double, 2, 2>, 4> dgv_du;
    detail::velocity_gradient_derivative_u(u, g, dgv_du);
    const double rho = u[0];
    const Vec2 v(u[1] / rho, u[2] / rho);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            for (int j = 0; j < 4; ++j) {
                double s = dgv_du[j](a, b) + dgv_du[j](b, a);
                if (a == b) s -= (2.0 / 3.0) * (dgv_du[j](0, 0) + dgv_du[j](1, 1));
                lin.du[a][b][j] = gas.mu * s;
            }
            auto dgv_dg = [&](int i, int k, int j, int l) -> double {
                if (k != l) return 0.0;
                double s = 0.0;
                if (j == i + 1) s += 1.0;
                if (j == 0) s -= v[i];
                return s / rho;
            };
            for (int j = 0; j < 4; ++j)
                for (int l = 0; l < 2; ++l) {
                    double s = dgv_dg(a, b, j, l) + dgv_dg(b, a, j, l);
                    if (a == b) s -= (2.0 / 3.0) * (dgv_dg(0, 0, j, l) + dgv_dg(1, 1, j, l));
                    lin.dgrad[a][b](j, l) = gas.mu * s;
                }
        }
    return lin;
}

/// (F^v_u, G): derivative of the viscous flux w.r.t. u at fixed grad u, and
/// the homogeneity tensor (derivative w.r.t. grad u at fixed u).
inline std::pair<FluxJacobian, HomogeneityTensor>
viscous_jacobians(const State& u, const StateGrad& g, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const double rho = u[0];
    const Vec2 v = q.v;
    const double E = q.E;
    const Mat2 gv = velocity_gradient(u, g);
    const Vec2 gT = temperature_gradient(u, g, gas);
    const Mat2 tau = viscous_stress(gv, gas);
    const Eigen::Matrix<double, 2, 4> dv = velocity_derivative(u);

    std::array<Eigen::Matrix<double, 2, 2>, 4> dgv_du;
    detail::velocity_gradient_derivative_u(u, g, dgv_du);

    // dE/du_j
    Vec4 dE(-E / rho, 0.0, 0.0, 1.0 / rho);
    // d(grad T)(k)/du_j
    std::array<Vec2, 4> dgT;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 2; ++k) {
            double dEk = -dE[j] * g(0, k) / rho;
            if (j == 0) dEk -= (g(3, k) - E * g(0, k)) / (rho * rho);
            double s = dEk;
            for (int i = 0; i < 2; ++i)
                s -= dv(i, j) * gv(i, k) + v[i] * dgv_du[j](i, k);
            dgT[j][k] = s / gas.cv();
        }
    // d tau(a,b)/du_j
    std::array<Mat2, 4> dtau;
    for (int j = 0; j < 4; ++j)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                double s = dgv_du[j](a, b) + dgv_du[j](b, a);
                if (a == b) s -= (2.0 / 3.0) * (dgv_du[j](0, 0) + dgv_du[j](1, 1));
                dtau[j](a, b) = gas.mu * s;
            }

    FluxJacobian Fv_u;
    for (int k = 0; k < 2; ++k) {
        Fv_u.A[k].setZero();
        for (int j = 0; j < 4; ++j) {
            Fv_u.A[k](1, j) = dtau[j](0, k);
            Fv_u.A[k](2, j) = dtau[j](1, k);
            double e = gas.kappa() * dgT[j][k];
            for (int m = 0; m < 2; ++m)
                e += dtau[j](k, m) * v[m] + tau(k, m) * dv(m, j);
            Fv_u.A[k](3, j) = e;
        }
    }
    return {Fv_u, homogeneity_tensor(u, gas)};
}

/// Homogeneity tensor specialized to a no-slip state (|v| = 0); equals the
/// closed-form wall matrices and is used as a verification target.
inline HomogeneityTensor wall_homogeneity_tensor(const State& u, const GasModel& gas) {
    const Vec2 v(u[1] / u[0], u[2] / u[0]);
    if (v.norm() > 1e-12)
        throw NsError("wall_homogeneity_tensor requires a no-slip state, |v|=" +
                      std::to_string(v.norm()));
    return homogeneity_tensor(u, gas);
}

/// Max convective wave speed |v.n| + a and its derivative w.r.t. u.
inline double wave_speed(const State& u, const Vec2& n, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    return std::abs(q.v.dot(n)) + q.a;
}

inline Vec4 wave_speed_derivative(const State& u, const Vec2& n, const GasModel& gas) {
    const PrimitiveState q = primitive_from_conserved(u, gas);
    const Eigen::Matrix<double, 2, 4> dv = velocity_derivative(u);
    const double vn = q.v.dot(n);
    const double sgn = vn >= 0.0 ? 1.0 : -1.0;
    const Vec4 dp = pressure_derivative(u, gas);
    // a = sqrt(gamma p / rho): da = (gamma/(2 a)) d(p/rho)
    Vec4 d_p_over_rho = dp / q.rho;
    d_p_over_rho[0] -= q.p / (q.rho * q.rho);
    Vec4 da = (gas.gamma / (2.0 * q.a)) * d_p_over_rho;
    Vec4 dvn = (n[0] * dv.row(0) + n[1] * dv.row(1)).transpose();
    return sgn * dvn + da;
}

} // namespace nsshape
