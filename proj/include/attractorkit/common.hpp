#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace attractorkit {

/// Vector norm on the state space R^n. Segment norms take the sup over the
/// grid of this per-point norm (MaxAbs is the default convention).
enum class VecNorm { MaxAbs, Euclid };

double vec_norm(std::span<const double> v, VecNorm norm);
double vec_dist(std::span<const double> a, std::span<const double> b, VecNorm norm);

const char* norm_name(VecNorm norm);
VecNorm norm_from_name(const std::string& name);

/// Error with a machine-parsable code (printed as the single stderr line by
/// the CLI and mapped to its exit-code family).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// A stated hypothesis of the certification machinery fails (exit 1).
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: blow-up, contour failure, enumeration failure (exit 2).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Bad configuration or argument (usage family).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;
};
Quadrature gauss_legendre(int n, double a, double b);

std::vector<double> linspace(double a, double b, int count);

/// Seeded RNG wrapper so every sampling site records its seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}
    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }
    uint64_t next_seed() { return gen_(); }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace attractorkit
