#include "attractorkit/dde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace attractorkit::dde {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Lagrange interpolation on the `order+1` grid points surrounding x.
/// Grid may be non-uniform; the stencil is clamped at both ends.
void lagrange_eval(std::span<const double> xs, const double* ys, int dim, int order, double x,
                   std::span<double> out) {
    const int m = static_cast<int>(xs.size());
    const int p = std::min(order, m - 1);
    // first index with xs[i] >= x
    int hi = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
    int lo = std::clamp(hi - 1 - (p - 1) / 2, 0, m - 1 - p);
    std::fill(out.begin(), out.end(), 0.0);
    for (int k = 0; k <= p; ++k) {
        double w = 1.0;
        for (int l = 0; l <= p; ++l) {
            if (l == k) continue;
            w *= (x - xs[lo + l]) / (xs[lo + k] - xs[lo + l]);
        }
        const double* row = ys + static_cast<size_t>(lo + k) * dim;
        for (int c = 0; c < dim; ++c) out[c] += w * row[c];
    }
}

}  // namespace

void HistorySegment::validate() const {
    if (delay_span <= 0.0) throw UsageError("USAGE_SEGMENT", "delay_span must be positive");
    if (dim < 1) throw UsageError("USAGE_SEGMENT", "dim must be positive");
    if (interpolation_order < 1) throw UsageError("USAGE_SEGMENT", "interpolation_order must be positive");
    if (grid.size() < 2) throw UsageError("USAGE_SEGMENT", "grid needs at least two points");
    if (values.size() != grid.size() * static_cast<size_t>(dim))
        throw UsageError("USAGE_SEGMENT", "values count does not match grid count");
    const double tol = 1e-9 * delay_span;
    if (std::abs(grid.front() + delay_span) > tol || std::abs(grid.back()) > tol)
        throw UsageError("USAGE_SEGMENT", "grid must span [-r, 0]");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw UsageError("USAGE_SEGMENT", "grid must be strictly increasing");
    if (!all_finite(values)) throw NumericError("NUMERIC_NONFINITE", "segment holds non-finite values");
}

void HistorySegment::value_at(double theta, std::span<double> out) const {
    const double t = std::clamp(theta, grid.front(), grid.back());
    lagrange_eval(grid, values.data(), dim, interpolation_order, t, out);
}

double HistorySegment::norm(VecNorm vn) const {
    double m = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) m = std::max(m, vec_norm(point(i), vn));
    return m;
}

HistorySegment make_uniform_segment(double delay_span, int dim, int steps) {
    HistorySegment s;
    s.delay_span = delay_span;
    s.dim = dim;
    s.grid.resize(steps + 1);
    for (int i = 0; i <= steps; ++i)
        s.grid[i] = delay_span * (static_cast<double>(i) / steps - 1.0);
    s.grid.front() = -delay_span;
    s.grid.back() = 0.0;
    s.values.assign(static_cast<size_t>(steps + 1) * dim, 0.0);
    return s;
}

HistorySegment make_constant_segment(double delay_span, int dim, int steps, double value) {
    HistorySegment s = make_uniform_segment(delay_span, dim, steps);
    std::fill(s.values.begin(), s.values.end(), value);
    return s;
}

HistorySegment random_segment(double delay_span, int dim, int steps, Rng& rng, double amplitude) {
    // band-limited: random low-order Fourier data, so the sampled function has
    // derivatives on the scale of amplitude / delay_span
    HistorySegment s = make_uniform_segment(delay_span, dim, steps);
    constexpr int kModes = 6;
    std::vector<double> a(dim * (kModes + 1)), b(dim * (kModes + 1));
    for (double& x : a) x = rng.uniform(-1.0, 1.0);
    for (double& x : b) x = rng.uniform(-1.0, 1.0);
    for (size_t g = 0; g < s.grid.size(); ++g) {
        const double u = M_PI * s.grid[g] / delay_span;
        for (int d = 0; d < dim; ++d) {
            double v = 0.0;
            for (int j = 0; j <= kModes; ++j)
                v += (a[d * (kModes + 1) + j] * std::cos(j * u) +
                      b[d * (kModes + 1) + j] * std::sin(j * u)) /
                     (1.0 + j);
            s.values[g * dim + d] = amplitude * v * 0.5;
        }
    }
    return s;
}

HistorySegment segment_sub(const HistorySegment& a, const HistorySegment& b) {
    if (a.dim != b.dim || a.grid.size() != b.grid.size())
        throw UsageError("USAGE_SEGMENT", "segment shapes differ");
    HistorySegment out = a;
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

double Nonlinearity::catalog_lipschitz() const {
    switch (kind) {
        case NonlinKind::Zero: return 0.0;
        case NonlinKind::ScaledTanh: return std::abs(gain);
        case NonlinKind::ScaledSin: return std::abs(gain);
        case NonlinKind::ClippedCubic: return 3.0 * std::abs(gain) * std::pow(cap, 2.0 / 3.0);
    }
    return 0.0;
}

double Nonlinearity::scalar_eval(double u) const {
    switch (kind) {
        case NonlinKind::Zero: return 0.0;
        case NonlinKind::ScaledTanh: return gain * std::tanh(u);
        case NonlinKind::ScaledSin: return gain * std::sin(u);
        case NonlinKind::ClippedCubic: return gain * std::clamp(u * u * u, -cap, cap);
    }
    return 0.0;
}

void Nonlinearity::eval(std::span<const double> delayed_state, std::span<double> out) const {
    if (kind == NonlinKind::Zero) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    if (galerkin_modes <= 0) {
        for (size_t i = 0; i < delayed_state.size(); ++i) out[i] = scalar_eval(delayed_state[i]);
        return;
    }
    // synthesis on the interior grid, pointwise map, forward transform back
    const int m = quad_points > 0 ? quad_points : 4 * galerkin_modes;
    std::vector<double> phys(m - 1);
    for (int j = 1; j < m; ++j) {
        const double x = M_PI * j / m;
        phys[j - 1] = scalar_eval(sine::synth(delayed_state, x));
    }
    const std::vector<double> coeffs = sine::forward(phys, galerkin_modes);
    std::copy(coeffs.begin(), coeffs.end(), out.begin());
}

std::string Nonlinearity::name() const {
    switch (kind) {
        case NonlinKind::Zero: return "zero";
        case NonlinKind::ScaledTanh: return "scaled_tanh";
        case NonlinKind::ScaledSin: return "scaled_sin";
        case NonlinKind::ClippedCubic: return "clipped_cubic";
    }
    return "zero";
}

Nonlinearity nonlinearity_from_name(const std::string& name, double gain, double cap) {
    Nonlinearity f;
    f.gain = gain;
    f.cap = cap;
    if (name == "zero") f.kind = NonlinKind::Zero;
    else if (name == "scaled_tanh") f.kind = NonlinKind::ScaledTanh;
    else if (name == "scaled_sin") f.kind = NonlinKind::ScaledSin;
    else if (name == "clipped_cubic") f.kind = NonlinKind::ClippedCubic;
    else throw UsageError("USAGE_SCHEMA", "nonlinearity.name: unknown builtin '" + name + "'");
    if (f.kind == NonlinKind::ClippedCubic && cap <= 0.0)
        throw UsageError("USAGE_SCHEMA", "nonlinearity.params.cap must be positive");
    return f;
}

void DelayCoefficient::apply(std::span<const double> x, std::span<double> out, int n) const {
    if (is_scalar) {
        for (int i = 0; i < n; ++i) out[i] = scalar * x[i];
        return;
    }
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += matrix[static_cast<size_t>(i) * n + j] * x[j];
        out[i] = s;
    }
}

double DelayCoefficient::entry(int i, int j) const {
    if (is_scalar) return i == j ? scalar : 0.0;
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(matrix.size()))));
    return matrix[static_cast<size_t>(i) * n + j];
}

double DelayCoefficient::inf_norm(int n) const {
    if (is_scalar) return std::abs(scalar);
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::abs(matrix[static_cast<size_t>(i) * n + j]);
        m = std::max(m, row);
    }
    return m;
}

void DelayModel::validate() const {
    if (dim < 1) throw UsageError("USAGE_MODEL", "dim must be positive");
    if (A.size() != static_cast<size_t>(dim) * dim)
        throw UsageError("USAGE_MODEL", "A must be dim x dim");
    if (!b.is_scalar && b.matrix.size() != static_cast<size_t>(dim) * dim)
        throw UsageError("USAGE_MODEL", "b matrix must be dim x dim");
    if (tau <= 0.0) throw UsageError("USAGE_MODEL", "tau must be positive");
    const double cat = f.catalog_lipschitz();
    if (lipschitz < cat - 1e-12)
        throw UsageError("USAGE_MODEL", "lipschitz below the certified catalog value for " + f.name());
    std::vector<double> zero(dim, 0.0), f0(dim, 0.0);
    f.eval(zero, f0);
    if (std::abs(f0_norm - vec_norm(f0, VecNorm::MaxAbs)) > 1e-12)
        throw UsageError("USAGE_MODEL", "c1 does not match ||f(0)|| for the builtin nonlinearity");
}

namespace {

/// Interpolation on the trajectory's uniform grid. Solution derivatives jump
/// at multiples of the delay, so the stencil is confined to the block of N
/// intervals between consecutive breakpoints; this keeps the local order and
/// means the delayed lookup never reads past the computed prefix.
void eval_uniform(const std::vector<double>& times, const std::vector<double>& values, int dim,
                  int order, int block_len, double t, std::span<double> out) {
    const int total = static_cast<int>(times.size());
    const double h = times[1] - times[0];
    const double s = (t - times[0]) / h;
    const int interval = std::clamp(static_cast<int>(std::floor(s)), 0, total - 2);
    const int block = interval / block_len;
    const int blo = block * block_len;
    const int bhi = std::min((block + 1) * block_len, total - 1);
    const int p = std::min(order, bhi - blo);
    int lo = std::clamp(interval - (p - 1) / 2, blo, bhi - p);
    std::fill(out.begin(), out.end(), 0.0);
    for (int k = 0; k <= p; ++k) {
        double w = 1.0;
        for (int l = 0; l <= p; ++l) {
            if (l == k) continue;
            w *= (s - (lo + l)) / static_cast<double>(k - l);
        }
        const double* row = values.data() + static_cast<size_t>(lo + k) * dim;
        for (int c = 0; c < dim; ++c) out[c] += w * row[c];
    }
}

}  // namespace

Trajectory integrate(const DelayModel& model, const HistorySegment& phi, double T, double h) {
    model.validate();
    phi.validate();
    if (h <= 0.0) throw UsageError("USAGE_STEP", "h must be positive");
    if (T < 0.0) throw UsageError("USAGE_STEP", "T must be nonnegative");
    const double ratio = model.tau / h;
    const int N = static_cast<int>(std::lround(ratio));
    if (N < 1 || std::abs(ratio - N) > 1e-9)
        throw UsageError("USAGE_ALIGNMENT", "step h must divide the delay tau");
    if (std::abs(phi.delay_span - model.tau) > 1e-9 * model.tau)
        throw UsageError("USAGE_MODEL", "initial segment span differs from the model delay");

    const int n = model.dim;
    const int steps = static_cast<int>(std::ceil(T / h - 1e-9));
    const int total = N + steps + 1;

    Trajectory traj;
    traj.model = model;
    traj.h = h;
    traj.history_steps = N;
    traj.T = steps * h;
    traj.interpolation_order = phi.interpolation_order;
    traj.times.resize(total);
    for (int i = 0; i < total; ++i) traj.times[i] = (i - N) * h;
    traj.values.assign(static_cast<size_t>(total) * n, 0.0);

    // resample the initial history onto the step grid
    for (int i = 0; i <= N; ++i)
        phi.value_at(traj.times[i], {traj.values.data() + static_cast<size_t>(i) * n,
                                     static_cast<size_t>(n)});

    std::vector<double> xd(n), fx(n), k1(n), k2(n), k3(n), k4(n), y(n), acc(n);
    auto deriv = [&](double t, std::span<const double> state, std::span<double> out) {
        eval_uniform(traj.times, traj.values, n, traj.interpolation_order, N, t - model.tau, xd);
        model.f.eval(xd, fx);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += model.A[static_cast<size_t>(i) * n + j] * state[j];
            out[i] = s;
        }
        model.b.apply(xd, acc, n);
        for (int i = 0; i < n; ++i) out[i] += acc[i] + fx[i];
    };

    for (int k = 0; k < steps; ++k) {
        const size_t row = static_cast<size_t>(N + k) * n;
        const double t = traj.times[N + k];
        std::span<const double> x(traj.values.data() + row, static_cast<size_t>(n));

        deriv(t, x, k1);
        for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
        deriv(t + 0.5 * h, y, k2);
        for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
        deriv(t + 0.5 * h, y, k3);
        for (int i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
        deriv(t + h, y, k4);

        double* next = traj.values.data() + row + n;
        for (int i = 0; i < n; ++i)
            next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!all_finite({next, static_cast<size_t>(n)}))
            throw NumericError("NUMERIC_BLOWUP",
                               "non-finite state at t = " + std::to_string(traj.times[N + k + 1]));
    }
    return traj;
}

void Trajectory::state_at(double t, std::span<double> out) const {
    eval_uniform(times, values, model.dim, interpolation_order, history_steps, t, out);
}

double Trajectory::state_norm_at(double t, VecNorm vn) const {
    std::vector<double> x(model.dim);
    state_at(t, x);
    return vec_norm(x, vn);
}

HistorySegment Trajectory::segment_at(double t) const {
    if (t < -1e-12 || t > T + 1e-12)
        throw UsageError("USAGE_RANGE", "segment time outside [0, T]");
    HistorySegment seg = make_uniform_segment(model.tau, model.dim, history_steps);
    seg.interpolation_order = interpolation_order;
    for (int j = 0; j <= history_steps; ++j)
        state_at(t + seg.grid[j], seg.point(j));
    return seg;
}

HistorySegment segment_at(const Trajectory& traj, double t) { return traj.segment_at(t); }

HistorySegment semigroup_apply(const DelayModel& model, const HistorySegment& phi, double t,
                               double h) {
    return integrate(model, phi, t, h).segment_at(t);
}

void export_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << "t";
    for (int i = 1; i <= traj.model.dim; ++i) os << ",x" << i;
    os << "\n";
    char buf[32];
    for (size_t i = traj.history_steps; i < traj.times.size(); ++i) {
        snprintf(buf, sizeof(buf), "%.17g", traj.times[i]);
        os << buf;
        for (int c = 0; c < traj.model.dim; ++c) {
            snprintf(buf, sizeof(buf), "%.17g", traj.values[i * traj.model.dim + c]);
            os << ',' << buf;
        }
        os << "\n";
    }
}

namespace sine {

double synth(std::span<const double> coeffs, double x) {
    double s = 0.0;
    for (size_t k = 0; k < coeffs.size(); ++k) s += coeffs[k] * std::sin((k + 1) * x);
    return s;
}

std::vector<double> forward(std::span<const double> values, int modes) {
    // trapezoid sine transform on x_j = j*pi/m, j = 1..m-1 (endpoints vanish);
    // exact inverse of synth for fields band-limited below m
    const int m = static_cast<int>(values.size()) + 1;
    std::vector<double> coeffs(modes, 0.0);
    for (int k = 1; k <= modes; ++k) {
        double s = 0.0;
        for (int j = 1; j < m; ++j) s += values[j - 1] * std::sin(M_PI * j * k / m);
        coeffs[k - 1] = 2.0 * s / m;
    }
    return coeffs;
}

double field_l2_norm(std::span<const double> coeffs) {
    return std::sqrt(M_PI / 2.0) * vec_norm(coeffs, VecNorm::Euclid);
}

}  // namespace sine

}  // namespace attractorkit::dde
