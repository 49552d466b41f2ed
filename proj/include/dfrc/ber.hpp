#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dfrc/core.hpp"
#include "dfrc/optimizer.hpp"

namespace dfrc {

struct BerPoint {
    double snr_db = 0.0;  // p_tot / sigma^2
    double ber = 0.0;
    double bits_simulated = 0.0;
    double ci95 = 0.0;  // 1.96 sqrt(ber (1 - ber) / bits)
};

/// h = p / q with q <= 64; throws InvalidArgument otherwise.
std::pair<int, int> rational_index(double h);

/// Maximum-likelihood sequence detection over the 2q-state CPM phase trellis.
/// y holds one matched sample per symbol, y_n = channel * exp(j beta_n) + noise,
/// with the block starting in phase state 0. Returns hard bits.
std::vector<int> viterbi_cpm_detect(std::span<const cd> y, int order, double h, cd channel);

/// Symbol-by-symbol phase-difference detector on the same observation model.
std::vector<int> differential_cpm_detect(std::span<const cd> y, int order, double h, cd channel);

double q_function(double x);

/// 2 Q(sqrt(log2(M) (1 - sin(2 pi h) / (2 pi h)) gamma)).
double cpm_ber_kernel(double gamma, int order, double h);

/// Power-law SINR density p(gamma) = coeff * gamma^exponent on [lo, hi].
/// lo == hi denotes a point mass of weight coeff.
struct GammaDensity {
    double coeff = 0.0;
    double exponent = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct InterferenceMoments {
    double mean = 0.0;      // |E I_k|
    double variance = 0.0;  // E |I_k - E I_k|^2
};

/// Monte Carlo moments of I_k = sqrt(P_T) h_k w_T + sum_{i != k} sqrt(P_i) h_k w_i
/// with MRT user beams and w_T = a_t^H toward the configured target.
InterferenceMoments interference_moments(const SystemConfig& cfg, double target_power, int draws,
                                         std::uint64_t seed);

/// The closed-form SINR density for one UE. sigma_i and sigma_k are the
/// interference and noise standard deviations, p_user the per-user power. Distances are in units
/// of d_0, spanning [1, cell_radius / d_0]. Throws when alpha <= 1.
GammaDensity sinr_density(const SystemConfig& cfg, double sigma_i, double sigma_k, double p_user);

/// integral of cpm_ber_kernel(gamma) p(gamma) over the support, composite
/// Simpson in log(gamma) with the given number of panels.
double ber_bound_integral(const GammaDensity& density, int order, double h, int panels = 4096);

struct BerOptions {
    double min_errors = 100;
    double max_bits = 2e6;
    int blocks_per_drop = 50;
    int min_drops = 20;  // channel realisations per point, even after min_errors
    int moment_draws = 10000;
};

/// Full chain per SNR point: spawn candidates, SMI selection toward the
/// target direction, precoder design with P_T = target_power_fraction * p_tot,
/// symbol-rate transmission and Viterbi detection at every selected UE.
std::vector<BerPoint> ber_curve(const SystemConfig& cfg, PrecoderKind kind, std::span<const double> snr_db,
                                const BerOptions& opt = {});

/// Analytic upper bound, averaged over UEs at each SNR point.
std::vector<BerPoint> ber_upper_bound(const SystemConfig& cfg, std::span<const double> snr_db,
                                      const BerOptions& opt = {});

}  // namespace dfrc
