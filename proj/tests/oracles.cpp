#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracles {

double Polynomial::eval(double t) const {
    double v = 0.0;
    for (size_t k = c.size(); k-- > 0;) v = v * t + c[k];
    return v;
}

Polynomial Polynomial::antiderivative() const {
    Polynomial out;
    out.c.assign(c.size() + 1, 0.0);
    for (size_t k = 0; k < c.size(); ++k) out.c[k + 1] = c[k] / static_cast<double>(k + 1);
    return out;
}

Polynomial Polynomial::shifted(double s) const {
    // p(t + s) via binomial expansion
    Polynomial out;
    out.c.assign(c.size(), 0.0);
    for (size_t k = 0; k < c.size(); ++k) {
        double binom = 1.0;
        double spow = 1.0;
        for (size_t j = 0; j <= k; ++j) {
            out.c[k - j] += c[k] * binom * spow;
            binom *= static_cast<double>(k - j) / static_cast<double>(j + 1);
            spow *= s;
        }
    }
    return out;
}

Polynomial Polynomial::scaled(double a) const {
    Polynomial out = *this;
    for (double& x : out.c) x *= a;
    return out;
}

SymbolicSteps::SymbolicSteps(double b_coeff, double tau, Polynomial history, int segments)
    : b_(b_coeff), tau_(tau) {
    segs_.push_back(std::move(history));
    for (int j = 1; j <= segments; ++j) {
        const Polynomial& prev = segs_[j - 1];
        const Polynomial P = prev.antiderivative();
        // x(t) = x((j-1)tau) + b [P(t - tau) - P((j-2)tau)]
        Polynomial seg = P.shifted(-tau_).scaled(b_);
        const double left = (j - 1) * tau_;
        const double offset = prev.eval(left) - b_ * P.eval(left - tau_);
        if (seg.c.empty()) seg.c.push_back(0.0);
        seg.c[0] += offset;
        segs_.push_back(std::move(seg));
    }
}

double SymbolicSteps::eval(double t) const {
    int j;
    if (t <= 0.0)
        j = 0;
    else
        j = std::min(static_cast<int>(segs_.size()) - 1,
                     static_cast<int>(std::ceil(t / tau_ - 1e-12)));
    return segs_[j].eval(t);
}

std::vector<double> chebyshev_points(double r, int nodes) {
    std::vector<double> theta(nodes + 1);
    for (int j = 0; j <= nodes; ++j)
        theta[j] = (std::cos(M_PI * j / nodes) - 1.0) * r / 2.0;
    return theta;
}

namespace {

Eigen::MatrixXd generator_matrix(double a, double b, double r, int n) {
    // Chebyshev differentiation matrix on [-r, 0], theta_0 = 0, theta_n = -r
    Eigen::VectorXd xi(n + 1);
    for (int j = 0; j <= n; ++j) xi(j) = std::cos(M_PI * j / n);
    Eigen::MatrixXd D(n + 1, n + 1);
    auto cw = [&](int i) { return (i == 0 || i == n) ? 2.0 : 1.0; };
    for (int i = 0; i <= n; ++i) {
        double diag = 0.0;
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            D(i, j) = (cw(i) / cw(j)) * (((i + j) % 2 == 0) ? 1.0 : -1.0) / (xi(i) - xi(j));
            diag -= D(i, j);
        }
        D(i, i) = diag;
    }
    D *= 2.0 / r;  // theta = (xi - 1) r / 2
    // boundary row phi'(0) = a phi(0) + b phi(-r) replaces the theta = 0 row
    D.row(0).setZero();
    D(0, 0) = a;
    D(0, n) = b;
    return D;
}

}  // namespace

std::vector<std::complex<double>> generator_eigenvalues(double a, double b, double r, int nodes) {
    const Eigen::MatrixXd M = generator_matrix(a, b, r, nodes);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    std::vector<std::complex<double>> out(es.eigenvalues().data(),
                                          es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(out.begin(), out.end(),
              [](auto x, auto y) { return x.real() > y.real(); });
    return out;
}

std::pair<std::complex<double>, Eigen::VectorXcd> generator_leading_mode(
    double a, double b, double r, int nodes, std::complex<double> target) {
    const Eigen::MatrixXd M = generator_matrix(a, b, r, nodes);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()(i) - target) < std::abs(es.eigenvalues()(best) - target))
            best = i;
    return {es.eigenvalues()(best), es.eigenvectors().col(best)};
}

double bisect(const std::function<double(double)>& g, double lo, double hi, double tol) {
    double flo = g(lo);
    for (int i = 0; i < 200 && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = g(mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

int interval_cover_count(double R, double rho) {
    int count = 0;
    double covered = -R;
    while (covered < R - 1e-15) {
        covered += 2.0 * rho;  // next interval covers [covered, covered + 2 rho]
        ++count;
    }
    return std::max(count, 1);
}

int grid_cover_count_2d(double R, double rho) {
    const int per_axis = static_cast<int>(std::ceil(R / rho - 1e-12));
    return per_axis * per_axis;
}

std::vector<double> cantor_points(int level) {
    std::vector<std::pair<double, double>> intervals = {{0.0, 1.0}};
    for (int l = 0; l < level; ++l) {
        std::vector<std::pair<double, double>> next;
        for (auto [a, b] : intervals) {
            const double third = (b - a) / 3.0;
            next.push_back({a, a + third});
            next.push_back({b - third, b});
        }
        intervals = std::move(next);
    }
    std::vector<double> pts;
    for (auto [a, b] : intervals) {
        pts.push_back(a);
        pts.push_back(b);
    }
    return pts;
}

std::vector<double> rd_finite_difference(double a, double b, double r,
                                         const attractorkit::dde::Nonlinearity& f,
                                         const std::vector<double>& u0_interior, int grid_points,
                                         double T, double dt) {
    const int n = grid_points - 1;  // interior points
    const double dx = M_PI / grid_points;
    const int delay_steps = static_cast<int>(std::lround(r / dt));
    const int steps = static_cast<int>(std::lround(T / dt));

    std::vector<std::vector<double>> hist;
    hist.reserve(steps + 1);
    hist.push_back(u0_interior);

    auto delayed = [&](int step, double frac, std::vector<double>& out) {
        // state at time (step + frac) dt - r; constant history before t = 0
        const double s = step + frac - delay_steps;
        if (s <= 0.0) {
            out = u0_interior;
            return;
        }
        const int i1 = std::min(static_cast<int>(hist.size()) - 1, static_cast<int>(s));
        const int i0 = std::max(0, std::min(i1 - 1, static_cast<int>(hist.size()) - 4));
        const int hi = std::min(i0 + 3, static_cast<int>(hist.size()) - 1);
        // Lagrange interpolation over the available window
        out.assign(n, 0.0);
        for (int k = i0; k <= hi; ++k) {
            double w = 1.0;
            for (int l = i0; l <= hi; ++l) {
                if (l == k) continue;
                w *= (s - l) / static_cast<double>(k - l);
            }
            for (int i = 0; i < n; ++i) out[i] += w * hist[k][i];
        }
    };

    std::vector<double> ud(n), k1(n), k2(n), k3(n), k4(n), y(n), fx(n);
    auto rhs = [&](const std::vector<double>& u, const std::vector<double>& udel,
                   std::vector<double>& out) {
        for (int i = 0; i < n; ++i) {
            const double left = i > 0 ? u[i - 1] : 0.0;
            const double right = i < n - 1 ? u[i + 1] : 0.0;
            out[i] = (left - 2.0 * u[i] + right) / (dx * dx) - a * u[i] - b * udel[i] +
                     f.scalar_eval(udel[i]);
        }
    };

    for (int k = 0; k < steps; ++k) {
        const std::vector<double>& u = hist.back();
        delayed(k, 0.0, ud);
        rhs(u, ud, k1);
        for (int i = 0; i < n; ++i) y[i] = u[i] + 0.5 * dt * k1[i];
        delayed(k, 0.5, ud);
        rhs(y, ud, k2);
        for (int i = 0; i < n; ++i) y[i] = u[i] + 0.5 * dt * k2[i];
        rhs(y, ud, k3);
        for (int i = 0; i < n; ++i) y[i] = u[i] + dt * k3[i];
        delayed(k, 1.0, ud);
        rhs(y, ud, k4);
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i)
            next[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        hist.push_back(std::move(next));
    }
    return hist.back();
}

double fd_l2_norm(const std::vector<double>& interior, int grid_points) {
    const double dx = M_PI / grid_points;
    double s = 0.0;
    for (double u : interior) s += u * u;
    return std::sqrt(dx * s);
}

}  // namespace oracles
