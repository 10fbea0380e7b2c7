#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "attractorkit/common.hpp"

namespace attractorkit::dde {

/// A discretized element of C([-r, 0], R^n): sample times in [-r, 0] with one
/// state vector per sample, evaluated anywhere by local Lagrange interpolation.
struct HistorySegment {
    double delay_span = 1.0;            // r > 0
    int dim = 1;                        // n
    int interpolation_order = 3;
    std::vector<double> grid;           // strictly increasing, grid[0] = -r, grid.back() = 0
    std::vector<double> values;         // grid.size() * dim, row-major

    void validate() const;

    std::span<const double> point(size_t i) const {
        return {values.data() + i * dim, static_cast<size_t>(dim)};
    }
    std::span<double> point(size_t i) {
        return {values.data() + i * dim, static_cast<size_t>(dim)};
    }

    /// Interpolated value at theta in [-r, 0].
    void value_at(double theta, std::span<double> out) const;

    /// Sup over grid points of the per-point vector norm.
    double norm(VecNorm vn = VecNorm::MaxAbs) const;
};

HistorySegment make_uniform_segment(double delay_span, int dim, int steps);
HistorySegment make_constant_segment(double delay_span, int dim, int steps, double value);
HistorySegment random_segment(double delay_span, int dim, int steps, Rng& rng, double amplitude);

/// phi - psi on a shared grid.
HistorySegment segment_sub(const HistorySegment& a, const HistorySegment& b);

enum class NonlinKind { Zero, ScaledTanh, ScaledSin, ClippedCubic };

/// Builtin nonlinearity catalog. Each entry maps the delayed state phi(-tau)
/// componentwise through a scalar function with a known global Lipschitz
/// constant. With galerkin_modes > 0 the map is instead applied pointwise in
/// physical space through the sine transform (used by the reaction-diffusion
/// reduction; Lipschitz constant then certified in the Euclidean norm).
struct Nonlinearity {
    NonlinKind kind = NonlinKind::Zero;
    double gain = 0.0;
    double cap = 0.0;        // clipped_cubic only
    int galerkin_modes = 0;  // 0 = componentwise
    int quad_points = 0;     // spatial points for the transform (default 4*modes)

    double catalog_lipschitz() const;
    double scalar_eval(double u) const;
    void eval(std::span<const double> delayed_state, std::span<double> out) const;

    std::string name() const;
};

Nonlinearity nonlinearity_from_name(const std::string& name, double gain, double cap);

/// Scalar-times-identity or full-matrix delayed coefficient.
struct DelayCoefficient {
    bool is_scalar = true;
    double scalar = 0.0;
    std::vector<double> matrix;  // n*n row-major when !is_scalar

    void apply(std::span<const double> x, std::span<double> out, int n) const;
    double entry(int i, int j) const;
    double inf_norm(int n) const;
};

/// x'(t) = A x(t) + b x(t - tau) + f(x_t), phase space C([-tau, 0], R^n).
struct DelayModel {
    int dim = 1;
    std::vector<double> A;  // n*n row-major
    DelayCoefficient b;
    double tau = 1.0;
    Nonlinearity f;
    double lipschitz = 0.0;  // certified global Lipschitz bound for f
    double f0_norm = 0.0;    // c1 = ||f(0)||

    void validate() const;
    bool is_linear() const { return f.kind == NonlinKind::Zero; }
};

/// Dense solution record on [-tau, T] over a uniform grid of step h (h divides tau).
struct Trajectory {
    DelayModel model;
    double h = 0.0;
    int history_steps = 0;           // tau / h
    double T = 0.0;                  // final time (multiple of h, >= requested T)
    std::vector<double> times;       // -tau + i*h
    std::vector<double> values;      // times.size() * dim
    int interpolation_order = 3;

    void state_at(double t, std::span<double> out) const;
    HistorySegment segment_at(double t) const;
    double state_norm_at(double t, VecNorm vn) const;
};

/// Method-of-steps integration with the classical 4-stage explicit scheme and
/// piecewise-cubic history interpolation. h must divide tau.
Trajectory integrate(const DelayModel& model, const HistorySegment& phi, double T, double h);

HistorySegment segment_at(const Trajectory& traj, double t);

/// Phi(t)phi = u_t, realized as segment extraction from a fresh integration.
HistorySegment semigroup_apply(const DelayModel& model, const HistorySegment& phi, double t,
                               double h);

void export_trajectory_csv(const Trajectory& traj, std::ostream& os);

namespace sine {
/// Sine-basis helpers on (0, pi) with Dirichlet conditions, basis sin(k x).
/// Coefficient vectors are with respect to plain sin(k x); the L2 field norm is
/// sqrt(pi/2) times the Euclidean coefficient norm.
double synth(std::span<const double> coeffs, double x);
std::vector<double> forward(std::span<const double> values_on_uniform_interior_grid, int modes);
double field_l2_norm(std::span<const double> coeffs);
}  // namespace sine

}  // namespace attractorkit::dde
