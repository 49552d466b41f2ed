#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dfrc/core.hpp"
#include "dfrc/waveform.hpp"

namespace dfrc {

struct RadarEstimate {
    double f_up = 0.0;
    double f_down = 0.0;
    double tau_hat = 0.0;
    double f_d_hat = 0.0;
    double range_hat = 0.0;
    double velocity_hat = 0.0;
};

/// rx * conj(exp(j pi sign mu t^2)) on the block-local time axis. An echo at
/// delay tau and Doppler f_d leaves a tone at -sign*(mu tau) + f_d.
ComplexSignal dechirp(const ComplexSignal& rx, int chirp_sign, const SystemConfig& cfg);

/// Signed frequency of the strongest DFT bin, refined by 3-point parabolic
/// interpolation on a zero-padded grid (pad x length).
double peak_frequency(const ComplexSignal& sig, int pad = 8);

/// Beat frequency of a dechirped block: f_up for sign +1, f_down for sign -1.
double beat_frequency(const ComplexSignal& dechirped, int chirp_sign, int pad = 8);

/// tau = (f_up + f_down) / (2 mu), f_d = (f_down - f_up) / 2.
RadarEstimate estimate_target(double f_up, double f_down, const SystemConfig& cfg);

/// Standard Fresnel integrals C(x) = int_0^x cos(pi t^2 / 2) dt and
/// S(x) = int_0^x sin(pi t^2 / 2) dt. Series below |x| = 1.5, Lentz continued
/// fraction above; accurate to a few ulp.
std::pair<double, double> fresnel(double x);

/// Closed-form LFM magnitude: sqrt([C(a)+C(b)]^2 + [S(a)+S(b)]^2) with a = sqrt(mu) T_B - f/sqrt(mu),
/// b = f/sqrt(mu), where C, S integrate cos/sin(pi alpha^2). This equals
/// sqrt(|mu|) |G_LFM(f)|, whose in-band plateau is close to 1.
/// Negative mu uses |G_{-mu}(f)| = |G_{mu}(-f)|.
double lfm_spectrum_closed_form(double f, const SystemConfig& cfg);

struct SpectrumEstimate {
    std::vector<double> freq_grid;  // ascending, Hz
    std::vector<double> magnitude;  // |dt * DFT|, continuous-FT scaling
    double occupied_bandwidth = 0.0;
    double df = 0.0;
};

SpectrumEstimate signal_spectrum(const ComplexSignal& sig, int pad_factor = 16);

/// Width between the outermost crossings of (peak - threshold_db), linearly
/// interpolated between bins.
double occupied_bandwidth(std::span<const double> freq, std::span<const double> magnitude,
                          double threshold_db = 20.0);

/// Mean symbol amplitude in its closed form:
/// |w_T + sum_k w_k| * (n / M) * sum_{xi odd} exp(j xi h pi / M).
cd mean_symbol_amplitude(std::span<const cd> weights, int order, double h, int n);

/// Monte Carlo estimate of E|w_T c_T,n + sum_k w_k c_k,n| with independent
/// uniformly drawn MASK symbols feeding each CPM stream.
double mean_symbol_amplitude_monte_carlo(std::span<const cd> weights, int order, double h, int n,
                                         int draws, Rng& rng);

struct AmbiguitySurface {
    std::vector<double> tau_grid;
    std::vector<double> fd_grid;
    Eigen::MatrixXd values;  // rows: tau, cols: f_d
    int upsample = 1;
};

/// |sum s(t) s*(t - tau) exp(j 2 pi f_d t) dt|^2 / E^2. The signal is
/// band-limited-upsampled so that every tau on the grid is a whole number of
/// samples; throws if no factor <= 64 achieves that.
AmbiguitySurface ambiguity(const ComplexSignal& sig, std::span<const double> tau_grid,
                           std::span<const double> fd_grid);

/// First local minimum of a cut moving outward from the origin along
/// positive coordinates. Returns NaN when none exists.
double first_null(std::span<const double> grid, std::span<const double> values);

struct ResolutionReport {
    double kappa = 0.0;
    double d_min = 0.0;
    double v_min = 0.0;
    double tau_w = 0.0;
    double fd_w = 0.0;
    bool valid = true;  // false when mu = 0 (range resolution undefined)
};

ResolutionReport resolution_report(const SystemConfig& cfg);

}  // namespace dfrc
