#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dfrc/array_channel.hpp"
#include "dfrc/radar_dsp.hpp"
#include "dfrc/waveform.hpp"

using namespace dfrc;

namespace {

// sqrt(mu) |int_0^T exp(j pi mu t^2 - j 2 pi f t) dt| by composite Simpson.
double lfm_quadrature(double f, const SystemConfig& cfg, int panels = 400000)
{
    const double T = cfg.block_duration(), h = T / panels;
    cd s(0, 0);
    for (int i = 0; i <= panels; ++i) {
        double t = i * h;
        double w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
        s += w * std::polar(1.0, kPi * cfg.mu * t * t - 2 * kPi * f * t);
    }
    return std::sqrt(std::abs(cfg.mu)) * std::abs(s) * h / 3;
}

std::vector<ComplexSignal> tx_toward(const Direction& dir, const SystemConfig& cfg, int sign)
{
    auto w = steering(dir, tx_geometry(cfg), cfg.wavelength());
    std::vector<ComplexSignal> tx;
    for (int a = 0; a < cfg.n_t(); ++a) {
        std::vector<cd> row(static_cast<size_t>(cfg.n_symbols), std::conj(w(a)));
        tx.push_back(synthesize_chirp(row, cfg, sign, PulseKind::Rect, cfg.sample_rate()));
    }
    return tx;
}

}  // namespace

TEST_CASE("Fresnel integrals against tabulated values")
{
    struct Row {
        double x, c, s;
    };
    // Reference values to 12 digits (scipy.special.fresnel).
    const Row rows[] = {{0.0, 0.0, 0.0},
                        {0.5, 0.492344225871, 0.064732432860},
                        {1.0, 0.779893400377, 0.438259147390},
                        {1.5, 0.445261176040, 0.697504960082},
                        {2.0, 0.488253406075, 0.343415678364},
                        {3.0, 0.605720789298, 0.496312998967},
                        {10.0, 0.499898694206, 0.468169978585}};
    for (const auto& r : rows) {
        auto [c, s] = fresnel(r.x);
        CHECK(c == doctest::Approx(r.c).epsilon(1e-9));
        CHECK(s == doctest::Approx(r.s).epsilon(1e-9));
        auto [cn, sn] = fresnel(-r.x);
        CHECK(cn == -c);
        CHECK(sn == -s);
    }
    auto [cinf, sinf] = fresnel(1e6);
    CHECK(cinf == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sinf == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("Fresnel is continuous across the series / continued-fraction switch")
{
    auto [c0, s0] = fresnel(1.5 - 1e-12);
    auto [c1, s1] = fresnel(1.5 + 1e-12);
    CHECK(std::abs(c0 - c1) < 1e-10);
    CHECK(std::abs(s0 - s1) < 1e-10);
}

TEST_CASE("closed-form LFM spectrum matches quadrature to 1e-6")
{
    SystemConfig cfg;
    for (double f = -1.5e6; f <= 2.5e6; f += 1.25e5) {
        CHECK(std::abs(lfm_spectrum_closed_form(f, cfg) - lfm_quadrature(f, cfg)) < 1e-6);
    }
    // Mid-band plateau is close to 1.
    CHECK(lfm_spectrum_closed_form(0.5e6, cfg) == doctest::Approx(1.0).epsilon(0.1));
    cfg.mu = -cfg.mu;
    CHECK(std::abs(lfm_spectrum_closed_form(-0.3e6, cfg) - lfm_quadrature(-0.3e6, cfg)) < 1e-6);
    cfg.mu = 0;
    CHECK_THROWS_AS(lfm_spectrum_closed_form(0, cfg), InvalidArgument);
}

TEST_CASE("resolution report for the default parameters")
{
    SystemConfig cfg;
    auto r = resolution_report(cfg);
    CHECK(r.kappa == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(r.tau_w == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(r.fd_w == doctest::Approx(1e4).epsilon(1e-12));
    CHECK(r.d_min == doctest::Approx(150.0).epsilon(1e-12));
    CHECK(r.v_min == doctest::Approx(625.0).epsilon(1e-12));
    cfg.mu = 0;
    auto z = resolution_report(cfg);
    CHECK_FALSE(z.valid);
    CHECK(std::isnan(z.d_min));
}

TEST_CASE("peak_frequency resolves signed tones")
{
    SystemConfig cfg;
    // Pure tone: peak_frequency recovers it to well under one raw bin.
    ComplexSignal tone;
    tone.sample_rate = cfg.sample_rate();
    tone.samples.resize(320);
    for (size_t k = 0; k < tone.size(); ++k) tone.samples[k] = std::polar(1.0, 2 * kPi * 123456.0 * k / tone.sample_rate);
    CHECK(peak_frequency(tone) == doctest::Approx(123456.0).epsilon(1e-3));
    for (auto& v : tone.samples) v = std::conj(v);
    CHECK(peak_frequency(tone) == doctest::Approx(-123456.0).epsilon(1e-3));
}

TEST_CASE("noiseless up/down chirp pair recovers range and velocity")
{
    SystemConfig cfg;
    Direction dir{kPi / 4, kPi / 4};
    auto a_r = steering(dir, rx_geometry(cfg), cfg.wavelength());
    for (auto [range, vel] : {std::pair{1500.0, 62.5}, std::pair{900.0, -40.0}, std::pair{3000.0, 0.0}}) {
        EchoParams echo = make_echo(range, vel, 1.0, cfg);
        double beat[2];
        const int signs[2] = {1, -1};
        Rng rng(0);
        for (int q = 0; q < 2; ++q) {
            auto rx = target_echo(tx_toward(dir, cfg, signs[q]), echo, dir, nullptr, cfg, 0.0, rng);
            ComplexSignal comb = rx[0];
            for (size_t i = 0; i < comb.size(); ++i) {
                cd v = 0;
                for (int r = 0; r < cfg.n_r(); ++r) v += std::conj(a_r(r)) * rx[static_cast<size_t>(r)].samples[i];
                comb.samples[i] = v;
            }
            beat[q] = beat_frequency(dechirp(comb, signs[q], cfg), signs[q]);
        }
        auto est = estimate_target(beat[0], beat[1], cfg);
        CHECK(std::abs(est.range_hat - range) < 0.01 * range);
        CHECK(std::abs(est.velocity_hat - vel) < 625.0);
    }
}

TEST_CASE("estimate_target algebra")
{
    SystemConfig cfg;
    // tau = 10 us, f_d = 1 kHz: f_up = mu tau - f_d, f_down = mu tau + f_d.
    auto e = estimate_target(1e5 - 1e3, 1e5 + 1e3, cfg);
    CHECK(e.tau_hat == doctest::Approx(1e-5));
    CHECK(e.f_d_hat == doctest::Approx(1e3));
    CHECK(e.range_hat == doctest::Approx(1500.0));
    CHECK(e.velocity_hat == doctest::Approx(62.5));
    CHECK_THROWS_AS(estimate_target(-1, 1, cfg), InvalidArgument);
}

TEST_CASE("occupied bandwidth of a known shape")
{
    std::vector<double> f, m;
    for (int i = -100; i <= 100; ++i) {
        f.push_back(i);
        m.push_back(std::abs(i) <= 30 ? 1.0 : 0.01);
    }
    // Crossings interpolate between the last inside and first outside bins.
    double bw = occupied_bandwidth(f, m);
    CHECK(bw > 60.0);
    CHECK(bw < 62.0);
    CHECK_THROWS_AS(occupied_bandwidth(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("spectrum of an unmodulated rect chirp follows the closed form")
{
    SystemConfig cfg;
    cfg.samples_per_symbol = 64;
    std::vector<cd> x(static_cast<size_t>(cfg.n_symbols), cd(1, 0));
    auto sig = synthesize_chirp(x, cfg, 1, PulseKind::Rect, cfg.sample_rate());
    auto est = signal_spectrum(sig, 4);
    // |S(f)| = |G(f)| / sqrt(T_s); compare in-band where discretisation error is small.
    for (size_t i = 0; i < est.freq_grid.size(); i += 97) {
        double f = est.freq_grid[i];
        if (f < 0.1e6 || f > 0.9e6) continue;
        double ref = lfm_spectrum_closed_form(f, cfg) / std::sqrt(cfg.mu * cfg.t_s);
        CHECK(est.magnitude[i] == doctest::Approx(ref).epsilon(0.05));
    }
}

TEST_CASE("mean symbol amplitude: closed form equals n |sum w| for binary h = 1/2 level average")
{
    std::vector<cd> w{cd(0.3, 0.1), cd(-0.2, 0.4)};
    cd a = mean_symbol_amplitude(w, 2, 0.5, 3);
    const double s = std::abs(w[0] + w[1]);
    // levels +-1: (n/2)(e^{j pi/4} + e^{-j pi/4}) = n cos(pi/4)
    CHECK(std::abs(a - cd(s * 3 * std::cos(kPi / 4), 0)) < 1e-12);
    CHECK_THROWS_AS(mean_symbol_amplitude(w, 3, 0.5, 1), InvalidArgument);
    Rng rng(1);
    double mc = mean_symbol_amplitude_monte_carlo(w, 2, 0.5, 1, 20000, rng);
    CHECK(mc > 0.0);
    CHECK(mc <= std::abs(w[0]) + std::abs(w[1]) + 1e-12);
}

TEST_CASE("ambiguity surface: unit peak, point symmetry, first nulls")
{
    SystemConfig cfg;
    std::vector<cd> x(static_cast<size_t>(cfg.n_symbols), cd(1, 0));
    auto sig = synthesize_chirp(x, cfg, 1, PulseKind::Rect, cfg.sample_rate());
    std::vector<double> taus, fds;
    for (int i = -30; i <= 30; ++i) taus.push_back(i * 0.1e-6);
    for (int i = -30; i <= 30; ++i) fds.push_back(i * 1e3);
    auto af = ambiguity(sig, taus, fds);
    CHECK(af.upsample == 25);  // 0.1 us * 3.2 MHz = 8 / 25
    const Eigen::Index c = 30;
    CHECK(af.values(c, c) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(af.values.maxCoeff() <= 1.0 + 1e-9);
    for (Eigen::Index i = 0; i < af.values.rows(); ++i)
        for (Eigen::Index j = 0; j < af.values.cols(); ++j)
            CHECK(std::abs(af.values(i, j) - af.values(60 - i, 60 - j)) < 1e-9);

    std::vector<double> tpos, tcut, fpos, fcut;
    for (Eigen::Index i = c; i < 61; ++i) {
        tpos.push_back(taus[static_cast<size_t>(i)]);
        tcut.push_back(af.values(i, c));
        fpos.push_back(fds[static_cast<size_t>(i)]);
        fcut.push_back(af.values(c, i));
    }
    CHECK(std::abs(first_null(tpos, tcut) - 1e-6) <= 0.1e-6 + 1e-12);
    CHECK(std::abs(first_null(fpos, fcut) - 1e4) <= 1e3 + 1e-9);

    CHECK_THROWS_AS(ambiguity(sig, std::vector<double>{1e-3}, fds), InvalidArgument);
    CHECK_THROWS_AS(ambiguity(sig, std::vector<double>{0.1234567e-6}, fds), InvalidArgument);
}

TEST_CASE("first_null returns NaN on a monotone cut")
{
    std::vector<double> g{0, 1, 2, 3}, v{4, 3, 2, 1};
    CHECK(std::isnan(first_null(g, v)));
}
