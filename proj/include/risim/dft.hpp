#pragma once

// Small in-tree FFT, enough for zero-padded range spectra. Power-of-two
// radix-2 decimation-in-time; inputs that need padding are zero-extended.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace risim {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N). N must be a
// power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_inplace: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Forward DFT of x zero-padded to next_pow2(min_length).
inline std::vector<std::complex<double>> dft_zero_padded(
    const std::vector<std::complex<double>>& x, std::size_t min_length) {
    std::vector<std::complex<double>> a(x);
    a.resize(next_pow2(min_length < x.size() ? x.size() : min_length),
             std::complex<double>(0.0, 0.0));
    fft_inplace(a);
    return a;
}

} // namespace risim
