#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace longmem::detail {

namespace {

// FFTW planning mutates global state; executing a cached plan on a new array
// is safe.  Plans are created FFTW_UNALIGNED so any heap buffer qualifies.
std::mutex plan_mutex;

fftw_plan plan_for(std::size_t n, bool backward) {
    static std::map<std::pair<std::size_t, bool>, fftw_plan> cache;
    std::lock_guard lock(plan_mutex);
    auto key = std::make_pair(n, backward);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* tmp = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), tmp, tmp,
                                   backward ? FFTW_BACKWARD : FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(tmp);
    cache.emplace(key, p);
    return p;
}

}

void fft(std::complex<double>* data, std::size_t n, bool backward) {
    if (n == 0) return;
    fftw_plan p = plan_for(n, backward);
    auto* raw = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, raw, raw);
}

}
