#include "avc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>
#include <unordered_map>

#include "avc/errors.hpp"

namespace avc::fft {

namespace {

// FFTW's planner is not thread-safe; execution through the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plans {
  size_t n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit Plans(size_t size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(n);
    cplx = fftw_alloc_complex(n / 2 + 1);
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real, cplx, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real, FFTW_ESTIMATE);
  }
};

// Per-thread plan cache keyed by transform size. Intentionally leaked so that
// destruction order at thread/program exit never races the FFTW planner.
Plans& plans_for(size_t n) {
  thread_local auto* cache = new std::unordered_map<size_t, Plans*>();
  auto it = cache->find(n);
  if (it == cache->end()) {
    it = cache->emplace(n, new Plans(n)).first;
  }
  return *it->second;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> x, size_t n) {
  if (n == 0) throw InvalidArgument("rfft: zero transform size");
  Plans& p = plans_for(n);
  const size_t copy = std::min(x.size(), n);
  std::memcpy(p.real, x.data(), copy * sizeof(double));
  if (copy < n) std::memset(p.real + copy, 0, (n - copy) * sizeof(double));
  fftw_execute(p.forward);
  std::vector<std::complex<double>> out(n / 2 + 1);
  // std::complex<double> is layout-compatible with fftw_complex
  std::memcpy(reinterpret_cast<double*>(out.data()), p.cplx,
              out.size() * sizeof(fftw_complex));
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum,
                          size_t n) {
  if (n == 0) throw InvalidArgument("irfft: zero transform size");
  const size_t bins = n / 2 + 1;
  if (spectrum.size() != bins) {
    throw InvalidArgument("irfft: expected " + std::to_string(bins) +
                          " bins, got " + std::to_string(spectrum.size()));
  }
  Plans& p = plans_for(n);
  std::memcpy(p.cplx, spectrum.data(), bins * sizeof(std::complex<double>));
  fftw_execute(p.inverse);
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) out[i] = p.real[i] * scale;
  return out;
}

}  // namespace avc::fft
