#include "dfrc/waveform.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>

namespace dfrc {

double ComplexSignal::energy() const
{
    double e = 0.0;
    for (const cd& s : samples) e += std::norm(s);
    return e / sample_rate;
}

Eigen::MatrixXcd PrecoderState::effective() const
{
    return W * P.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

namespace {

int bits_per_symbol(int order)
{
    if (order < 2 || !std::has_single_bit(static_cast<unsigned>(order)))
        throw InvalidArgument("MASK order must be a power of two >= 2");
    return std::countr_zero(static_cast<unsigned>(order));
}

}  // namespace

SymbolStream mask_map(std::span<const int> bits, int order)
{
    const int m = bits_per_symbol(order);
    if (bits.size() % static_cast<size_t>(m) != 0)
        throw InvalidArgument("mask_map: bit count not divisible by log2(order)");

    SymbolStream out;
    out.symbols.reserve(bits.size() / m);
    for (size_t i = 0; i < bits.size(); i += m) {
        unsigned g = 0;
        for (int b = 0; b < m; ++b) {
            int v = bits[i + b];
            if (v != 0 && v != 1) throw InvalidArgument("mask_map: bits must be 0 or 1");
            g = (g << 1) | static_cast<unsigned>(v);
        }
        // Gray -> binary index, then index -> level.
        unsigned idx = g;
        for (unsigned s = g >> 1; s; s >>= 1) idx ^= s;
        out.symbols.push_back(2 * static_cast<int>(idx) - (order - 1));
    }
    return out;
}

std::vector<int> mask_demap(std::span<const int> symbols, int order)
{
    const int m = bits_per_symbol(order);
    std::vector<int> bits;
    bits.reserve(symbols.size() * m);
    for (int level : symbols) {
        int idx = (level + order - 1) / 2;
        if (idx < 0 || idx >= order || (level + order - 1) % 2 != 0)
            throw InvalidArgument("mask_demap: level outside alphabet");
        unsigned g = static_cast<unsigned>(idx) ^ (static_cast<unsigned>(idx) >> 1);
        for (int b = m - 1; b >= 0; --b) bits.push_back(static_cast<int>((g >> b) & 1u));
    }
    return bits;
}

CpmBaseband cpm_modulate(const SymbolStream& stream, double h)
{
    if (stream.symbols.empty()) throw InvalidArgument("cpm_modulate: empty stream");
    CpmBaseband out;
    out.phases.reserve(stream.symbols.size());
    out.samples.reserve(stream.symbols.size());
    // Accumulate integer level sums so the phase carries no rounding drift.
    long long acc = 0;
    for (int b : stream.symbols) {
        acc += b;
        double beta = static_cast<double>(acc) * h * kPi;
        out.phases.push_back(beta);
        out.samples.push_back(std::polar(1.0, beta));
    }
    return out;
}

Eigen::MatrixXcd precode_block(const Eigen::MatrixXcd& C, const PrecoderState& state)
{
    if (C.rows() != state.W.cols() || state.P.size() != state.W.cols())
        throw InvalidArgument("precode_block: stream count mismatch");
    return state.effective() * C;
}

namespace {

double raised_cosine_raw(double t, double t_s, double beta)
{
    double x = t / t_s;
    auto sinc = [](double v) { return v == 0.0 ? 1.0 : std::sin(kPi * v) / (kPi * v); };
    double den = 1.0 - 4.0 * beta * beta * x * x;
    if (std::abs(den) < 1e-10) return (kPi / 4) * sinc(1.0 / (2.0 * beta));
    return sinc(x) * std::cos(kPi * beta * x) / den;
}

// Energy of the truncated raised cosine with t_s = 1; scales linearly in t_s.
double raised_cosine_energy(double beta)
{
    static std::mutex lock;
    static std::map<double, double> cache;
    std::lock_guard<std::mutex> g(lock);
    auto it = cache.find(beta);
    if (it != cache.end()) return it->second;

    // Composite Simpson, fine enough for 1e-12 relative on this smooth integrand.
    const int n = 200000;
    const double a = -kRaisedCosineSpan, b = kRaisedCosineSpan, step = (b - a) / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double v = raised_cosine_raw(a + i * step, 1.0, beta);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * v * v;
    }
    double e = s * step / 3.0;
    cache.emplace(beta, e);
    return e;
}

}  // namespace

double pulse_value(PulseKind kind, double t, double t_s, double rolloff)
{
    if (kind == PulseKind::Rect) return (t >= 0.0 && t < t_s) ? 1.0 / std::sqrt(t_s) : 0.0;
    double tc = t - 0.5 * t_s;
    if (std::abs(tc) > kRaisedCosineSpan * t_s) return 0.0;
    return raised_cosine_raw(tc, t_s, rolloff) / std::sqrt(raised_cosine_energy(rolloff) * t_s);
}

double min_sample_rate(const SystemConfig& cfg)
{
    return 2.0 * (std::abs(cfg.mu) * cfg.n_symbols * cfg.t_s + 1.0 / cfg.t_s);
}

double sweep_bandwidth(const SystemConfig& cfg)
{
    return std::abs(cfg.mu) * cfg.n_symbols * cfg.t_s;
}

ComplexSignal synthesize_chirp(std::span<const cd> x_row, const SystemConfig& cfg, int chirp_sign,
                               PulseKind pulse, double sample_rate)
{
    if (chirp_sign != 1 && chirp_sign != -1) throw InvalidArgument("chirp_sign must be +1 or -1");
    if (static_cast<int>(x_row.size()) != cfg.n_symbols)
        throw InvalidArgument("synthesize_chirp: x_row length must equal n_symbols");
    if (sample_rate < min_sample_rate(cfg) * (1.0 - 1e-12))
        throw InvalidArgument("synthesize_chirp: sample rate below Nyquist for the configured chirp");

    const double t_s = cfg.t_s;
    const double t_b = cfg.block_duration();
    const size_t len = static_cast<size_t>(std::llround(t_b * sample_rate));

    ComplexSignal sig;
    sig.sample_rate = sample_rate;
    sig.t0 = 0.0;
    sig.samples.assign(len, cd(0.0, 0.0));

    const int n_sym = cfg.n_symbols;
    const int reach = static_cast<int>(std::ceil(kRaisedCosineSpan)) + 1;
    for (size_t k = 0; k < len; ++k) {
        double t = static_cast<double>(k) / sample_rate;
        int slot = std::min(n_sym - 1, static_cast<int>(std::floor(k / (sample_rate * t_s) + 1e-9)));
        cd base(0.0, 0.0);
        if (pulse == PulseKind::Rect) {
            // Slot index decides membership; avoids boundary rounding in pulse_value.
            base = x_row[static_cast<size_t>(slot)] / std::sqrt(t_s);
        } else {
            for (int n = std::max(0, slot - reach); n <= std::min(n_sym - 1, slot + reach); ++n)
                base += x_row[static_cast<size_t>(n)] * pulse_value(pulse, t - n * t_s, t_s, cfg.rolloff);
        }
        sig.samples[k] = base * std::polar(1.0, kPi * chirp_sign * cfg.mu * t * t);
    }
    return sig;
}

}  // namespace dfrc
