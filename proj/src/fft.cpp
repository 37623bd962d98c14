#include "vibespeech/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "vibespeech/error.hpp"

namespace vibespeech {

namespace {

// FFTW planning is not thread-safe; execution on fresh aligned buffers is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

const PlanPair& plans_for(std::size_t m) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  FftwBuffer real(sizeof(double) * m);
  FftwBuffer cplx(sizeof(fftw_complex) * (m / 2 + 1));
  PlanPair p;
  const int n = static_cast<int>(m);
  p.forward = fftw_plan_dft_r2c_1d(n, static_cast<double*>(real.ptr),
                                   static_cast<fftw_complex*>(cplx.ptr), FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(cplx.ptr),
                                   static_cast<double*>(real.ptr), FFTW_ESTIMATE);
  if (p.forward == nullptr || p.inverse == nullptr) throw Error("fft: planning failed");
  return cache.emplace(m, p).first->second;
}

}  // namespace

std::vector<std::complex<double>> rfft(std::span<const double> signal) {
  const std::size_t m = signal.size();
  if (m == 0) throw InvariantError("fft: empty input");
  const PlanPair& p = plans_for(m);
  FftwBuffer real(sizeof(double) * m);
  FftwBuffer cplx(sizeof(fftw_complex) * (m / 2 + 1));
  std::memcpy(real.ptr, signal.data(), sizeof(double) * m);
  fftw_execute_dft_r2c(p.forward, static_cast<double*>(real.ptr),
                       static_cast<fftw_complex*>(cplx.ptr));
  std::vector<std::complex<double>> out(m / 2 + 1);
  std::memcpy(out.data(), cplx.ptr, sizeof(fftw_complex) * out.size());
  return out;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t m) {
  if (m == 0 || spectrum.size() != m / 2 + 1) throw InvariantError("irfft: spectrum size mismatch");
  const PlanPair& p = plans_for(m);
  FftwBuffer real(sizeof(double) * m);
  FftwBuffer cplx(sizeof(fftw_complex) * spectrum.size());
  std::memcpy(cplx.ptr, spectrum.data(), sizeof(fftw_complex) * spectrum.size());
  fftw_execute_dft_c2r(p.inverse, static_cast<fftw_complex*>(cplx.ptr),
                       static_cast<double*>(real.ptr));
  std::vector<double> out(m);
  std::memcpy(out.data(), real.ptr, sizeof(double) * m);
  const double scale = 1.0 / static_cast<double>(m);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> magnitude_spectrum(std::span<const double> signal) {
  auto spec = rfft(signal);
  std::vector<double> mag(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) mag[k] = std::abs(spec[k]);
  return mag;
}

}  // namespace vibespeech
