#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfrc {

using cd = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = std::numbers::pi;
// Rounded so that lambda = c / f_c is exactly 0.125 m at 2.4 GHz.
inline constexpr double kSpeedOfLight = 3.0e8;

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when SINR floors cannot be met with the available power.
struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Combinatorial or runtime guard tripped (e.g. exhaustive search too large).
struct GuardExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfWindow : std::out_of_range {
    using std::out_of_range::out_of_range;
};

enum class PulseKind { Rect, RaisedCosine };

PulseKind parse_pulse_kind(const std::string& s);
std::string to_string(PulseKind k);

/// Scenario constants. Defaults give the baseline scenario
/// (4x4 transmit URA, 2x2 receive URA, half-wavelength spacing).
struct SystemConfig {
    int n_tx = 4;
    int n_ty = 4;
    int n_rx = 2;
    int n_ry = 2;
    double d_x = 0.0625;
    double d_y = 0.0625;
    double f_c = 2.4e9;
    double mu = 1e10;
    double t_s = 5e-6;
    int n_symbols = 20;
    int m_blocks = 324;
    int mask_order = 2;
    double mod_index = 0.5;
    double p_tot = 1.0;
    double alpha = 3.0;
    double d_0 = 100.0;
    double sigma_delta = 0.0;
    double noise_power = 0.1;      // sigma^2 at the BS receiver
    double ue_noise_power = 0.1;   // sigma_k^2 at every UE
    double rho_user = 0.0;
    double rho_target = 0.0;
    std::uint64_t seed = 1;

    // Scenario / experiment fields.
    double beamwidth_theta = 10.0 * kPi / 180.0;
    double beamwidth_phi = 10.0 * kPi / 180.0;
    double cell_radius = 1000.0;
    int n_users = 4;        // K
    int n_candidates = 30;  // U
    PulseKind pulse = PulseKind::Rect;
    double rolloff = 0.35;
    int samples_per_symbol = 16;
    double radar_link_gain_db = 0.0;  // extra gain on the two-way radar law
    double target_range = 300.0;
    double target_velocity = 0.0;
    double target_rcs = 1.0;
    double target_theta = 45.0 * kPi / 180.0;
    double target_phi = 45.0 * kPi / 180.0;
    int n_drops = 100;
    int nu_max = 50;
    double epsilon = 1e-3;
    double target_power_fraction = 0.1;
    std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30};

    // Experiment tables.
    std::string precoder = "mmlm";
    std::string ber_mode = "monte-carlo";  // or "bound"
    double ber_min_errors = 100;
    double ber_max_bits = 2e6;
    int ber_min_drops = 20;
    int ber_blocks_per_drop = 50;
    std::vector<double> tradeoff_ranges = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    std::vector<int> tradeoff_users = {4, 6};
    std::vector<double> tradeoff_rcs = {0.5, 0.8, 1.0};
    std::vector<int> selection_candidates = {4, 6, 8, 10, 12, 15, 20, 25, 30};
    double af_tau_max = 10e-6;
    double af_tau_step = 0.1e-6;
    double af_fd_max = 100e3;
    double af_fd_step = 1e3;

    int n_t() const { return n_tx * n_ty; }
    int n_r() const { return n_rx * n_ry; }
    double wavelength() const { return kSpeedOfLight / f_c; }
    double block_duration() const { return n_symbols * t_s; }
    double sample_rate() const { return samples_per_symbol / t_s; }

    /// Throws InvalidArgument when an invariant fails.
    void validate() const;
};

struct Direction {
    double theta = 0.0;
    double phi = 0.0;
    bool operator==(const Direction&) const = default;
};

struct FramePlan {
    std::vector<Direction> scan_directions;
    std::vector<int> chirp_signs;
    int m_e = 0;
    int m_a = 0;
    double delta_theta = 0.0;
    double delta_phi = 0.0;
    bool operator==(const FramePlan&) const = default;
};

struct UserRecord {
    int id = 0;
    Direction direction;
    double distance = 0.0;
    double shadow = 1.0;
    bool operator==(const UserRecord&) const = default;
};

/// Elevation-major grid over theta in (0, pi/2), phi in (0, 2pi).
FramePlan build_frame_plan(const SystemConfig& cfg, double delta_theta, double delta_phi);
FramePlan build_frame_plan(const SystemConfig& cfg);

/// Users uniform over the annulus area [d_0, cell_radius], below the array
/// (theta in (pi/2, pi)), with log-normal shadowing exp(sigma_delta * z).
std::vector<UserRecord> spawn_users(const SystemConfig& cfg, int count, double cell_radius, Rng& rng);

/// Closed-form distance CDF of spawn_users.
double annulus_distance_cdf(double d, double d_0, double cell_radius);

bool in_target_region(const Direction& d);
bool in_user_region(const Direction& d);

/// Deterministic seed for a sub-task (cell, drop, worker) of a run.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace dfrc
