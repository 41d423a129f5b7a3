#pragma once

#include <complex>
#include <span>
#include <vector>

namespace avc::fft {

// One-sided spectrum (n/2 + 1 bins) of x, zero-padded or truncated to n.
std::vector<std::complex<double>> rfft(std::span<const double> x, size_t n);

// Inverse of rfft: real signal of length n from n/2 + 1 one-sided bins.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum,
                          size_t n);

}  // namespace avc::fft
