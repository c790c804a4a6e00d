#pragma once

#include <cmath>
#include <vector>

#include "aeon/common.hpp"

namespace aeon {

// Iterative radix-2 complex FFT. Forward is unnormalized; inverse carries
// the 1/n. Strided so the 3-d transform can reuse it along each axis.
namespace detail {

inline void fft_strided(cplx* a, size_t n, size_t stride, bool inverse) {
    // bit reversal
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i * stride], a[j * stride]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * M_PI / double(len) * (inverse ? 1.0 : -1.0);
        cplx wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0);
            for (size_t k = 0; k < len / 2; ++k) {
                cplx u = a[(i + k) * stride];
                cplx v = a[(i + k + len / 2) * stride] * w;
                a[(i + k) * stride] = u + v;
                a[(i + k + len / 2) * stride] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        for (size_t i = 0; i < n; ++i) a[i * stride] /= double(n);
    }
}

}  // namespace detail

inline void fft(std::vector<cplx>& a, bool inverse = false) {
    size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw validation_error("fft: size must be a power of 2");
    detail::fft_strided(a.data(), n, 1, inverse);
}

// In-place 3-d transform of an N^3 row-major cube (index z + N*(y + N*x)).
inline void fft3(std::vector<cplx>& a, int N, bool inverse = false) {
    if (a.size() != size_t(N) * N * N) throw validation_error("fft3: size mismatch");
    if (N <= 0 || (N & (N - 1)) != 0) throw validation_error("fft3: N must be a power of 2");
    const size_t n = size_t(N);
    for (size_t x = 0; x < n; ++x)
        for (size_t y = 0; y < n; ++y)
            detail::fft_strided(a.data() + x * n * n + y * n, n, 1, inverse);
    for (size_t x = 0; x < n; ++x)
        for (size_t z = 0; z < n; ++z)
            detail::fft_strided(a.data() + x * n * n + z, n, n, inverse);
    for (size_t y = 0; y < n; ++y)
        for (size_t z = 0; z < n; ++z)
            detail::fft_strided(a.data() + y * n + z, n, n * n, inverse);
}

}  // namespace aeon
