#pragma once

#include <complex>
#include <cstddef>

namespace longmem::detail {

// In-place unnormalized complex transform.  backward=true uses the e^{+i...}
// kernel; neither direction divides by n, callers own the 1/n factor.
// Thread safe: plan creation is serialized internally, execution is not locked.
void fft(std::complex<double>* data, std::size_t n, bool backward);

}
