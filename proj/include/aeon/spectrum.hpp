#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aeon/common.hpp"

namespace aeon {

// The spatial manifold enters the linear theory only through its
// Laplace-Beltrami spectrum and the constant scalar curvature.
struct SpectrumSpec {
    enum class Kind { flat_torus, round_sphere, explicit_list };

    Kind kind = Kind::flat_torus;
    int dimension = 3;
    std::vector<double> periods;                    // flat_torus
    double radius = 1.0;                            // round_sphere
    std::vector<std::pair<double, int>> spectrum;   // explicit_list: (lambda, mult), ascending
    double scalar_curvature = 0.0;

    static SpectrumSpec flat_torus(int n, std::vector<double> periods_in) {
        if (n < 1 || int(periods_in.size()) != n)
            throw validation_error("flat_torus: need one period per dimension");
        for (double L : periods_in)
            if (!(L > 0)) throw validation_error("flat_torus: periods must be positive");
        SpectrumSpec s;
        s.kind = Kind::flat_torus;
        s.dimension = n;
        s.periods = std::move(periods_in);
        s.scalar_curvature = 0.0;
        return s;
    }

    static SpectrumSpec round_sphere(int n, double r) {
        if (n < 1 || !(r > 0)) throw validation_error("round_sphere: bad parameters");
        SpectrumSpec s;
        s.kind = Kind::round_sphere;
        s.dimension = n;
        s.radius = r;
        s.scalar_curvature = double(n) * double(n - 1) / (r * r);
        return s;
    }

    static SpectrumSpec explicit_list(int n, std::vector<std::pair<double, int>> eigs,
                                      double curvature = 0.0) {
        SpectrumSpec s;
        s.kind = Kind::explicit_list;
        s.dimension = n;
        s.scalar_curvature = curvature;
        for (size_t i = 0; i < eigs.size(); ++i) {
            if (eigs[i].first < 0.0)
                throw validation_error("explicit spectrum: negative eigenvalue");
            if (eigs[i].second < 1)
                throw validation_error("explicit spectrum: multiplicity < 1");
            if (i > 0 && eigs[i].first < eigs[i - 1].first)
                throw validation_error("explicit spectrum: eigenvalues not sorted");
        }
        s.spectrum = std::move(eigs);
        return s;
    }
};

struct Mode {
    double lambda = 0.0;
    int multiplicity = 1;
    std::int64_t index = 0;
};

namespace detail {

// Merge numerically equal eigenvalues (relative tolerance 1e-12), summing
// multiplicities. Input sorted ascending.
inline std::vector<Mode> dedup_modes(std::vector<std::pair<double, int>>& raw) {
    std::sort(raw.begin(), raw.end());
    std::vector<Mode> out;
    for (auto& [lam, mult] : raw) {
        if (!out.empty() &&
            std::abs(lam - out.back().lambda) <= 1e-12 * std::max(1.0, std::abs(lam))) {
            out.back().multiplicity += mult;
        } else {
            out.push_back(Mode{lam, mult, std::int64_t(out.size())});
        }
    }
    return out;
}

inline void torus_enumerate(const std::vector<double>& L, double cutoff, size_t axis,
                            double partial, std::vector<std::pair<double, int>>& out) {
    if (axis == L.size()) {
        out.emplace_back(partial, 1);
        return;
    }
    double base = 2.0 * M_PI / L[axis];
    int kmax = int(std::floor(std::sqrt(std::max(0.0, cutoff - partial)) / base + 1e-12));
    for (int k = -kmax; k <= kmax; ++k) {
        double lam = partial + (base * k) * (base * k);
        if (lam <= cutoff * (1.0 + 1e-15)) torus_enumerate(L, cutoff, axis + 1, lam, out);
    }
}

// dim of spherical harmonics of degree l on S^n: C(n+l, l) - C(n+l-2, l-2)
inline long sphere_multiplicity(int n, int l) {
    auto binom = [](long a, long b) -> long {
        if (b < 0 || b > a) return 0;
        long r = 1;
        for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
        return r;
    };
    if (l == 0) return 1;
    return binom(n + l, l) - binom(n + l - 2, l - 2);
}

}  // namespace detail

inline std::vector<Mode> enumerate_modes(const SpectrumSpec& spec, double cutoff) {
    if (!(cutoff >= 0.0)) throw validation_error("enumerate_modes: cutoff must be >= 0");
    std::vector<std::pair<double, int>> raw;
    switch (spec.kind) {
        case SpectrumSpec::Kind::flat_torus:
            detail::torus_enumerate(spec.periods, cutoff, 0, 0.0, raw);
            break;
        case SpectrumSpec::Kind::round_sphere: {
            double r2 = spec.radius * spec.radius;
            for (int l = 0;; ++l) {
                double lam = double(l) * (l + spec.dimension - 1) / r2;
                if (lam > cutoff * (1.0 + 1e-15)) break;
                raw.emplace_back(lam, int(detail::sphere_multiplicity(spec.dimension, l)));
            }
            break;
        }
        case SpectrumSpec::Kind::explicit_list:
            for (auto& [lam, mult] : spec.spectrum)
                if (lam <= cutoff * (1.0 + 1e-15)) raw.emplace_back(lam, mult);
            break;
    }
    return detail::dedup_modes(raw);
}

// ||f||_{H^s} = sqrt( sum mult * (lambda+1)^s |amplitude|^2 )
inline double sobolev_norm(const std::vector<std::pair<Mode, cplx>>& coeffs, double s) {
    double acc = 0.0;
    for (const auto& [mode, amp] : coeffs)
        acc += mode.multiplicity * std::pow(mode.lambda + 1.0, s) * std::norm(amp);
    return std::sqrt(acc);
}

// rho = (n-1)/(4n) * R_gamma, the constant curvature term of the wave operator.
inline double curvature_potential(const SpectrumSpec& spec) {
    int n = spec.dimension;
    if (n < 1) throw validation_error("curvature_potential: dimension must be >= 1");
    return (n - 1) / (4.0 * n) * spec.scalar_curvature;
}

}  // namespace aeon
