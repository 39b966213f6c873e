#pragma once

// Thin FFTW wrapper. Plans are cached per (size, direction) and executed on
// caller-owned buffers, so the transforms are safe to call concurrently.

#include <complex>
#include <span>
#include <vector>

namespace deformlab::fft {

/// Unnormalized forward DFT: X_j = sum_k x_k exp(-2 pi i j k / N).
void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
/// Inverse DFT including the 1/N factor.
void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

std::vector<std::complex<double>> forward(std::span<const std::complex<double>> in);
std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> in);

}  // namespace deformlab::fft
