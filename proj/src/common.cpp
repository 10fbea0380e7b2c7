#include "attractorkit/common.hpp"

#include <algorithm>
#include <cmath>

namespace attractorkit {

double vec_norm(std::span<const double> v, VecNorm norm) {
    if (norm == VecNorm::MaxAbs) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double vec_dist(std::span<const double> a, std::span<const double> b, VecNorm norm) {
    if (a.size() != b.size()) throw UsageError("USAGE_DIM", "vector size mismatch");
    if (norm == VecNorm::MaxAbs) {
        double m = 0.0;
        for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    }
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

const char* norm_name(VecNorm norm) {
    return norm == VecNorm::MaxAbs ? "sup" : "euclid";
}

VecNorm norm_from_name(const std::string& name) {
    if (name == "sup" || name == "max") return VecNorm::MaxAbs;
    if (name == "euclid" || name == "l2") return VecNorm::Euclid;
    throw UsageError("USAGE_NORM", "unknown norm '" + name + "' (expected sup|euclid)");
}

Quadrature gauss_legendre(int n, double a, double b) {
    if (n < 1) throw UsageError("USAGE_QUAD", "quadrature order must be positive");
    Quadrature q;
    q.nodes.resize(n);
    q.weights.resize(n);
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Chebyshev-based initial guess.
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        q.nodes[i] = xm - xl * z;
        q.nodes[n - 1 - i] = xm + xl * z;
        q.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        q.weights[n - 1 - i] = q.weights[i];
    }
    return q;
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = a;
        return out;
    }
    for (int i = 0; i < count; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / (count - 1);
    return out;
}

}  // namespace attractorkit
