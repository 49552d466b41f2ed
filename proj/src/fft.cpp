#include "dfrc/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace dfrc {

namespace {

std::mutex planner_lock;  // FFTW planning is not thread-safe; execution is.

std::vector<cd> run(std::span<const cd> in, size_t n, int sign)
{
    std::vector<cd> buf(n, cd(0.0, 0.0));
    std::copy(in.begin(), in.begin() + static_cast<long>(std::min(n, in.size())), buf.begin());
    if (n == 0) return buf;
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> g(planner_lock);
        plan = fftw_plan_dft_1d(static_cast<int>(n), data, data, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> g(planner_lock);
        fftw_destroy_plan(plan);
    }
    return buf;
}

}  // namespace

std::vector<cd> fft(std::span<const cd> in) { return run(in, in.size(), FFTW_FORWARD); }
std::vector<cd> ifft(std::span<const cd> in) { return run(in, in.size(), FFTW_BACKWARD); }

std::vector<cd> fft_padded(std::span<const cd> in, size_t n)
{
    if (n < in.size()) throw InvalidArgument("fft_padded: n shorter than input");
    return run(in, n, FFTW_FORWARD);
}

size_t next_pow2(size_t n)
{
    size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace dfrc
