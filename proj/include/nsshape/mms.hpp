#pragma once

/// Manufactured solutions: a trigonometric field with source term computed
/// exactly from the flux linearizations, and the compressible Couette flow,
/// an exact steady solution with a no-slip adiabatic wall at y = 0 and zero
/// source. Values, gradients and Hessians are assembled with a small
/// value/gradient/Hessian algebra to keep the chain rules mechanical.

#include "nsshape/gas.hpp"

#include <functional>

namespace nsshape {

struct Scalar3 {
    double v = 0.0;
    Vec2 g = Vec2::Zero();
    Mat2 h = Mat2::Zero();

    static Scalar3 constant(double c) { return {c, Vec2::Zero(), Mat2::Zero()}; }

    Scalar3 operator+(const Scalar3& o) const { return {v + o.v, g + o.g, h + o.h}; }
    Scalar3 operator-(const Scalar3& o) const { return {v - o.v, g - o.g, h - o.h}; }
    Scalar3 operator*(const Scalar3& o) const {
        return {v * o.v, v * o.g + o.v * g,
                v * o.h + o.v * h + g * o.g.transpose() + o.g * g.transpose()};
    }
    Scalar3 operator*(double c) const { return {c * v, c * g, c * h}; }
};

/// amp * sin(kx x + ky y + phase)
inline Scalar3 sin_wave(const Vec2& x, double amp, double kx, double ky, double phase) {
    const double arg = kx * x[0] + ky * x[1] + phase;
    const Vec2 k(kx, ky);
    Scalar3 s;
    s.v = amp * std::sin(arg);
    s.g = amp * std::cos(arg) * k;
    s.h = -amp * std::sin(arg) * (k * k.transpose());
    return s;
}

inline Scalar3 cos_wave(const Vec2& x, double amp, double kx, double ky, double phase) {
    return sin_wave(x, amp, kx, ky, phase + 0.5 * kPi);
}

class ManufacturedSolution {
  public:
    GasModel gas;
    std::function<Scalar3(const Vec2&)> rho, v1, v2, p;

    State state(const Vec2& x) const {
        auto [u0, u1, u2, u3] = conserved3(x);
        return State(u0.v, u1.v, u2.v, u3.v);
    }

    StateGrad gradient(const Vec2& x) const {
        auto [u0, u1, u2, u3] = conserved3(x);
        StateGrad g;
        g.row(0) = u0.g.transpose();
        g.row(1) = u1.g.transpose();
        g.row(2) = u2.g.transpose();
        g.row(3) = u3.g.transpose();
        return g;
    }

    StateHess hessian(const Vec2& x) const {
        auto [u0, u1, u2, u3] = conserved3(x);
        return {u0.h, u1.h, u2.h, u3.h};
    }

    /// div(F^c - F^v) of the exact field; the steady residual source.
    State source(const Vec2& x) const {
        const State u = state(x);
        const StateGrad g = gradient(x);
        const StateHess h = hessian(x);
        const FluxJacobian Ac = convective_jacobian(u, gas);
        auto [Av, G] = viscous_jacobians(u, g, gas);
        State s = State::Zero();
        for (int k = 0; k < 2; ++k) {
            s += (Ac.A[k] - Av.A[k]) * g.col(k);
            for (int l = 0; l < 2; ++l) {
                Vec4 d2;
                for (int j = 0; j < 4; ++j) d2[j] = h[j](l, k);
                s -= G.G[k][l] * d2;
            }
        }
        return s;
    }

    std::function<State(const Vec2&)> state_fn() const {
        return [this](const Vec2& x) { return state(x); };
    }

  private:
    std::array<Scalar3, 4> conserved3(const Vec2& x) const {
        const Scalar3 r = rho(x), a = v1(x), b = v2(x), pr = p(x);
        const Scalar3 u1 = r * a, u2 = r * b;
        const Scalar3 ke = (u1 * a + u2 * b) * 0.5;
        const Scalar3 u3 = pr * (1.0 / (gas.gamma - 1.0)) + ke;
        return {r, u1, u2, u3};
    }
};

/// Smooth trigonometric field, admissible on [0,1]^2 and well beyond.
inline ManufacturedSolution trig_mms(const GasModel& gas) {
    ManufacturedSolution m;
    m.gas = gas;
    m.rho = [](const Vec2& x) {
        return Scalar3::constant(1.0) + sin_wave(x, 0.10, 0.4 * kPi, 0.6 * kPi, 0.8) +
               cos_wave(x, 0.05, 0.8 * kPi, 0.2 * kPi, 2.0);
    };
    m.v1 = [](const Vec2& x) {
        return Scalar3::constant(0.40) + sin_wave(x, 0.10, 0.5 * kPi, 0.7 * kPi, 0.2);
    };
    m.v2 = [](const Vec2& x) {
        return Scalar3::constant(0.30) + cos_wave(x, 0.10, 0.6 * kPi, -0.4 * kPi, 1.1);
    };
    m.p = [](const Vec2& x) {
        return Scalar3::constant(1.0) + cos_wave(x, 0.10, 0.5 * kPi, 0.5 * kPi, 0.5) +
               sin_wave(x, 0.05, kPi, -0.3 * kPi, 0.0);
    };
    return m;
}

/// Compressible Couette flow: v = (shear y, 0), p constant,
/// T = T0 - mu shear^2 / (2 kappa) y^2, rho = p0 / (R T). Satisfies the
/// steady equations pointwise with a no-slip adiabatic wall at y = 0.
inline ManufacturedSolution couette_solution(const GasModel& gas, double shear = 0.8,
                                             double p0 = 1.0, double T0 = 1.0) {
    ManufacturedSolution m;
    m.gas = gas;
    const double beta = gas.mu * shear * shear / (2.0 * gas.kappa());
    auto temp = [=](const Vec2& x) {
        Scalar3 T;
        T.v = T0 - beta * x[1] * x[1];
        T.g = Vec2(0.0, -2.0 * beta * x[1]);
        T.h << 0.0, 0.0, 0.0, -2.0 * beta;
        return T;
    };
    m.rho = [=, R = gas.R](const Vec2& x) {
        const Scalar3 T = temp(x);
        Scalar3 r; // p0 / (R T)
        r.v = p0 / (R * T.v);
        r.g = -p0 / (R * T.v * T.v) * T.g;
        r.h = -p0 / (R * T.v * T.v) * T.h +
              2.0 * p0 / (R * T.v * T.v * T.v) * (T.g * T.g.transpose());
        return r;
    };
    m.v1 = [=](const Vec2& x) {
        Scalar3 a;
        a.v = shear * x[1];
        a.g = Vec2(0.0, shear);
        return a;
    };
    m.v2 = [](const Vec2&) { return Scalar3::constant(0.0); };
    m.p = [=](const Vec2&) { return Scalar3::constant(p0); };
    return m;
}

} // namespace nsshape
