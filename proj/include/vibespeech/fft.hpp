#pragma once

#include <complex>
#include <span>
#include <vector>

namespace vibespeech {

/// Forward real DFT, unnormalized: F_k = sum_i s_i exp(-2 pi i k / m), k = 0..m/2.
std::vector<std::complex<double>> rfft(std::span<const double> signal);

/// Inverse of rfft for a length-m signal (includes the 1/m factor).
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t m);

/// |F_k| for k = 0..m/2.
std::vector<double> magnitude_spectrum(std::span<const double> signal);

}  // namespace vibespeech
