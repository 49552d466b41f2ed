#include "dfrc/radar_dsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfrc/fft.hpp"

namespace dfrc {

ComplexSignal dechirp(const ComplexSignal& rx, int chirp_sign, const SystemConfig& cfg)
{
    if (chirp_sign != 1 && chirp_sign != -1) throw InvalidArgument("dechirp: chirp_sign must be +-1");
    ComplexSignal out = rx;
    for (size_t k = 0; k < rx.size(); ++k) {
        double t = rx.t0 + static_cast<double>(k) / rx.sample_rate;
        out.samples[k] *= std::polar(1.0, -kPi * chirp_sign * cfg.mu * t * t);
    }
    return out;
}

double peak_frequency(const ComplexSignal& sig, int pad)
{
    if (sig.samples.empty()) throw InvalidArgument("peak_frequency: empty signal");
    const size_t n = next_pow2(sig.size() * static_cast<size_t>(std::max(1, pad)));
    std::vector<cd> spec = fft_padded(sig.samples, n);
    std::vector<double> mag(n);
    for (size_t k = 0; k < n; ++k) mag[k] = std::abs(spec[k]);
    size_t kmax = static_cast<size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());

    double ym = mag[(kmax + n - 1) % n], y0 = mag[kmax], yp = mag[(kmax + 1) % n];
    double den = ym - 2 * y0 + yp;
    double delta = den != 0.0 ? 0.5 * (ym - yp) / den : 0.0;
    double bin = static_cast<double>(kmax) + delta;
    if (bin >= n / 2.0) bin -= static_cast<double>(n);
    return bin * sig.sample_rate / static_cast<double>(n);
}

double beat_frequency(const ComplexSignal& dechirped, int chirp_sign, int pad)
{
    return -chirp_sign * peak_frequency(dechirped, pad);
}

RadarEstimate estimate_target(double f_up, double f_down, const SystemConfig& cfg)
{
    if (cfg.mu == 0.0) throw InvalidArgument("estimate_target: mu must be non-zero");
    if (f_up < 0 || f_down < 0) throw InvalidArgument("estimate_target: beat frequencies must be non-negative");
    RadarEstimate e;
    e.f_up = f_up;
    e.f_down = f_down;
    e.tau_hat = (f_up + f_down) / (2.0 * std::abs(cfg.mu));
    e.f_d_hat = (f_down - f_up) / 2.0;
    e.range_hat = kSpeedOfLight * e.tau_hat / 2.0;
    e.velocity_hat = cfg.wavelength() * e.f_d_hat / 2.0;
    return e;
}

std::pair<double, double> fresnel(double x)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double fpmin = std::numeric_limits<double>::min();
    constexpr int max_iter = 200;
    constexpr double xmin = 1.5;

    const double ax = std::abs(x);
    double c, s;
    if (ax < std::sqrt(fpmin)) {
        c = ax;
        s = 0.0;
    } else if (ax <= xmin) {
        // Alternating power series, C and S interleaved.
        double sum = 0.0, sums = 0.0, sumc = ax, sign = 1.0;
        const double fact = kPi / 2 * ax * ax;
        bool odd = true;
        double term = ax;
        int n = 3;
        for (int k = 1; k <= max_iter; ++k) {
            term *= fact / k;
            sum += sign * term / n;
            double test = std::abs(sum) * eps;
            if (odd) {
                sign = -sign;
                sums = sum;
                sum = sumc;
            } else {
                sumc = sum;
                sum = sums;
            }
            if (term < test) break;
            odd = !odd;
            n += 2;
        }
        c = sumc;
        s = sums;
    } else {
        // Continued fraction for the complementary error function (modified Lentz).
        const double pix2 = kPi * ax * ax;
        cd b(1.0, -pix2);
        cd cc = 1.0 / fpmin;
        cd d = 1.0 / b;
        cd h = d;
        int n = -1;
        for (int k = 2; k <= max_iter; ++k) {
            n += 2;
            double a = -static_cast<double>(n) * (n + 1);
            b += 4.0;
            d = 1.0 / (a * d + b);
            cc = b + a / cc;
            cd del = cc * d;
            h *= del;
            if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
        }
        h *= cd(ax, -ax);
        cd cs = cd(0.5, 0.5) * (1.0 - std::polar(1.0, 0.5 * pix2) * h);
        c = cs.real();
        s = cs.imag();
    }
    if (x < 0) {
        c = -c;
        s = -s;
    }
    return {c, s};
}

double lfm_spectrum_closed_form(double f, const SystemConfig& cfg)
{
    if (cfg.mu == 0.0) throw InvalidArgument("lfm_spectrum_closed_form: mu must be non-zero");
    const double m = std::abs(cfg.mu);
    const double fe = cfg.mu > 0 ? f : -f;
    const double sm = std::sqrt(m);
    const double a = sm * cfg.block_duration() - fe / sm;
    const double b = fe / sm;
    // int_0^x cos(pi t^2) dt = C(sqrt(2) x) / sqrt(2) in the standard normalisation.
    auto scaled = [](double v) {
        auto [c, s] = fresnel(std::sqrt(2.0) * v);
        return std::pair<double, double>{c / std::sqrt(2.0), s / std::sqrt(2.0)};
    };
    auto [ca, sa] = scaled(a);
    auto [cb, sb] = scaled(b);
    return std::hypot(ca + cb, sa + sb);
}

SpectrumEstimate signal_spectrum(const ComplexSignal& sig, int pad_factor)
{
    if (sig.samples.empty()) throw InvalidArgument("signal_spectrum: empty signal");
    const size_t n = next_pow2(sig.size() * static_cast<size_t>(std::max(1, pad_factor)));
    std::vector<cd> spec = fft_padded(sig.samples, n);

    SpectrumEstimate out;
    out.df = sig.sample_rate / static_cast<double>(n);
    out.freq_grid.resize(n);
    out.magnitude.resize(n);
    const size_t half = n / 2;
    for (size_t i = 0; i < n; ++i) {
        size_t k = (i + half) % n;  // fftshift
        long signed_k = static_cast<long>(i) - static_cast<long>(half);
        out.freq_grid[i] = static_cast<double>(signed_k) * out.df;
        out.magnitude[i] = std::abs(spec[k]) / sig.sample_rate;
    }
    out.occupied_bandwidth = occupied_bandwidth(out.freq_grid, out.magnitude, 20.0);
    return out;
}

double occupied_bandwidth(std::span<const double> freq, std::span<const double> magnitude,
                          double threshold_db)
{
    if (freq.size() != magnitude.size() || freq.size() < 2) throw InvalidArgument("occupied_bandwidth: bad grid");
    const double peak = *std::max_element(magnitude.begin(), magnitude.end());
    const double level = peak * std::pow(10.0, -threshold_db / 20.0);
    size_t lo = 0, hi = magnitude.size() - 1;
    while (lo < magnitude.size() && magnitude[lo] < level) ++lo;
    while (hi > 0 && magnitude[hi] < level) --hi;
    auto cross = [&](size_t inside, size_t outside) {
        double a = magnitude[outside], b = magnitude[inside];
        double frac = (b - a) != 0.0 ? (level - a) / (b - a) : 0.0;
        return freq[outside] + frac * (freq[inside] - freq[outside]);
    };
    double f_lo = lo > 0 ? cross(lo, lo - 1) : freq[lo];
    double f_hi = hi + 1 < magnitude.size() ? cross(hi, hi + 1) : freq[hi];
    return f_hi - f_lo;
}

cd mean_symbol_amplitude(std::span<const cd> weights, int order, double h, int n)
{
    if (order < 2 || (order & (order - 1)) != 0) throw InvalidArgument("mean_symbol_amplitude: bad order");
    cd wsum(0.0, 0.0);
    for (const cd& w : weights) wsum += w;
    cd level_sum(0.0, 0.0);
    for (int xi = -(order - 1); xi <= order - 1; xi += 2)
        level_sum += std::polar(1.0, xi * h * kPi / order);
    return std::abs(wsum) * (static_cast<double>(n) / order) * level_sum;
}

double mean_symbol_amplitude_monte_carlo(std::span<const cd> weights, int order, double h, int n,
                                         int draws, Rng& rng)
{
    std::uniform_int_distribution<int> pick(0, order - 1);
    double acc = 0.0;
    for (int d = 0; d < draws; ++d) {
        cd x(0.0, 0.0);
        for (const cd& w : weights) {
            long long levels = 0;
            for (int i = 0; i < n; ++i) levels += 2 * pick(rng) - (order - 1);
            x += w * std::polar(1.0, static_cast<double>(levels) * h * kPi);
        }
        acc += std::abs(x);
    }
    return acc / draws;
}

namespace {

std::vector<cd> upsample(const std::vector<cd>& x, int factor)
{
    if (factor == 1) return x;
    const size_t n = x.size();
    std::vector<cd> spec = fft(x);
    std::vector<cd> big(n * static_cast<size_t>(factor), cd(0.0, 0.0));
    const size_t half = n / 2;
    for (size_t k = 0; k < (n + 1) / 2; ++k) big[k] = spec[k];
    for (size_t k = (n + 1) / 2; k < n; ++k) big[big.size() - n + k] = spec[k];
    if (n % 2 == 0) {
        // Split the Nyquist bin evenly between the two sides.
        big[half] = 0.5 * spec[half];
        big[big.size() - half] = 0.5 * spec[half];
    }
    std::vector<cd> out = ifft(big);
    for (cd& v : out) v /= static_cast<double>(n);
    return out;
}

}  // namespace

AmbiguitySurface ambiguity(const ComplexSignal& sig, std::span<const double> tau_grid,
                           std::span<const double> fd_grid)
{
    if (sig.samples.empty() || tau_grid.empty() || fd_grid.empty())
        throw InvalidArgument("ambiguity: empty signal or grid");
    const double dur = sig.duration();
    for (double t : tau_grid)
        if (std::abs(t) > dur * (1 + 1e-12)) throw InvalidArgument("ambiguity: delay outside the signal duration");

    int factor = 0;
    for (int u = 1; u <= 64 && factor == 0; ++u) {
        bool ok = true;
        for (double t : tau_grid) {
            double q = t * sig.sample_rate * u;
            if (std::abs(q - std::round(q)) > 1e-6) {
                ok = false;
                break;
            }
        }
        if (ok) factor = u;
    }
    if (factor == 0) throw InvalidArgument("ambiguity: delay grid not commensurate with the sample rate");

    const std::vector<cd> s = upsample(sig.samples, factor);
    const double fs = sig.sample_rate * factor;
    const long len = static_cast<long>(s.size());
    double energy = 0.0;
    for (const cd& v : s) energy += std::norm(v);
    energy /= fs;

    AmbiguitySurface out;
    out.tau_grid.assign(tau_grid.begin(), tau_grid.end());
    out.fd_grid.assign(fd_grid.begin(), fd_grid.end());
    out.values.resize(static_cast<Eigen::Index>(tau_grid.size()), static_cast<Eigen::Index>(fd_grid.size()));
    out.upsample = factor;

    std::vector<cd> prod;
    for (size_t i = 0; i < tau_grid.size(); ++i) {
        const long lag = std::lround(tau_grid[i] * fs);
        const long k0 = std::max(0L, lag), k1 = std::min(len, len + lag);
        prod.assign(static_cast<size_t>(std::max(0L, k1 - k0)), cd(0.0, 0.0));
        for (long k = k0; k < k1; ++k) prod[static_cast<size_t>(k - k0)] = s[k] * std::conj(s[k - lag]);
        for (size_t j = 0; j < fd_grid.size(); ++j) {
            const double w = 2 * kPi * fd_grid[j] / fs;
            cd acc(0.0, 0.0);
            const cd step = std::polar(1.0, w);
            cd rot;
            for (size_t m = 0; m < prod.size(); ++m) {
                // Re-seed the rotator every 64 samples to bound recurrence drift.
                if (m % 64 == 0) rot = std::polar(1.0, w * static_cast<double>(k0 + static_cast<long>(m)));
                acc += prod[m] * rot;
                rot *= step;
            }
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                std::norm(acc / fs) / (energy * energy);
        }
    }
    return out;
}

double first_null(std::span<const double> grid, std::span<const double> values)
{
    if (grid.size() != values.size()) throw InvalidArgument("first_null: size mismatch");
    size_t start = 0;
    while (start < grid.size() && grid[start] < 0) ++start;
    for (size_t i = start + 1; i + 1 < grid.size(); ++i) {
        if (values[i] <= values[i - 1] && values[i] <= values[i + 1]) return grid[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

ResolutionReport resolution_report(const SystemConfig& cfg)
{
    ResolutionReport r;
    const double t_b = cfg.block_duration();
    const double b_w = sweep_bandwidth(cfg);
    r.kappa = t_b * b_w;
    r.v_min = cfg.wavelength() / (2.0 * t_b);
    r.fd_w = 1.0 / t_b;
    if (b_w == 0.0) {
        r.valid = false;
        r.d_min = std::numeric_limits<double>::quiet_NaN();
        r.tau_w = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.d_min = kSpeedOfLight / (2.0 * b_w);
    r.tau_w = 1.0 / b_w;
    return r;
}

}  // namespace dfrc
