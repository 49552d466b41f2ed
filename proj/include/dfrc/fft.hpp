#pragma once

#include <span>
#include <vector>

#include "dfrc/core.hpp"

namespace dfrc {

// Thin FFTW wrappers. Unnormalized: fft then ifft scales by n.
std::vector<cd> fft(std::span<const cd> in);
std::vector<cd> ifft(std::span<const cd> in);

/// Zero-pad to n (n >= in.size()) and transform.
std::vector<cd> fft_padded(std::span<const cd> in, size_t n);

size_t next_pow2(size_t n);

}  // namespace dfrc
