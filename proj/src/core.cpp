#include "dfrc/core.hpp"

#include <cmath>

namespace dfrc {

PulseKind parse_pulse_kind(const std::string& s)
{
    if (s == "rect") return PulseKind::Rect;
    if (s == "raised-cosine") return PulseKind::RaisedCosine;
    throw InvalidArgument("unknown pulse kind '" + s + "' (expected rect | raised-cosine)");
}

std::string to_string(PulseKind k)
{
    return k == PulseKind::Rect ? "rect" : "raised-cosine";
}

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Number of cells of size delta covering span, or 0 when delta does not divide span.
int divide_span(double span, double delta)
{
    double q = span / delta;
    double r = std::round(q);
    if (r < 1 || std::abs(q - r) > 1e-6 * std::max(1.0, q)) return 0;
    return static_cast<int>(r);
}

}  // namespace

void SystemConfig::validate() const
{
    auto need = [](bool ok, const char* what) {
        if (!ok) throw InvalidArgument(what);
    };
    need(n_tx >= 1 && n_ty >= 1 && n_rx >= 1 && n_ry >= 1, "antenna counts must be positive");
    need(d_x > 0 && d_y > 0, "element spacings must be positive");
    need(f_c > 0, "f_c must be positive");
    need(t_s > 0, "t_s must be positive");
    need(n_symbols >= 1, "n_symbols must be positive");
    need(m_blocks >= 1, "m_blocks must be positive");
    need(mask_order >= 2 && is_pow2(mask_order), "mask_order must be a power of two >= 2");
    need(mod_index > 0 && mod_index <= 1, "mod_index must lie in (0, 1]");
    need(p_tot > 0, "p_tot must be positive");
    need(alpha > 0, "alpha must be positive");
    need(d_0 > 0, "d_0 must be positive");
    need(sigma_delta >= 0, "sigma_delta must be non-negative");
    need(noise_power > 0 && ue_noise_power > 0, "noise powers must be positive");
    need(rho_user >= 0 && rho_target >= 0, "SINR thresholds must be non-negative");
    need(beamwidth_theta > 0 && beamwidth_phi > 0, "beamwidths must be positive");
    need(cell_radius > d_0, "cell_radius must exceed d_0");
    need(n_users >= 0, "n_users must be non-negative");
    need(n_candidates >= 1, "n_candidates must be positive");
    need(rolloff >= 0 && rolloff <= 1, "rolloff must lie in [0, 1]");
    need(samples_per_symbol >= 2, "samples_per_symbol must be at least 2");
    need(target_range > 0 && target_rcs >= 0, "target range/rcs invalid");
    need(n_drops >= 1 && nu_max >= 1 && epsilon > 0, "solver/drop counts invalid");
    need(target_power_fraction >= 0 && target_power_fraction < 1, "target_power_fraction must lie in [0, 1)");
    need(!snr_db.empty(), "snr_db must be non-empty");
    need(precoder == "mmlm" || precoder == "mmse" || precoder == "zf" || precoder == "mrt",
         "precoder must be one of mmlm, mmse, zf, mrt");
    need(ber_mode == "monte-carlo" || ber_mode == "bound", "ber_mode must be monte-carlo or bound");
    need(ber_min_errors >= 1 && ber_max_bits >= 1 && ber_min_drops >= 1 && ber_blocks_per_drop >= 1,
         "BER run limits must be positive");
    need(!tradeoff_ranges.empty() && !tradeoff_users.empty() && !tradeoff_rcs.empty(), "trade-off lists must be non-empty");
    for (double r : tradeoff_ranges) need(r > 0, "trade-off ranges must be positive");
    for (int k : tradeoff_users) need(k >= 1, "trade-off user counts must be positive");
    for (double r : tradeoff_rcs) need(r > 0, "trade-off RCS values must be positive");
    need(!selection_candidates.empty(), "selection_candidates must be non-empty");
    for (int u : selection_candidates) need(u >= 1, "selection candidate counts must be positive");
    need(af_tau_max > 0 && af_tau_step > 0 && af_fd_max > 0 && af_fd_step > 0, "ambiguity grid must be positive");

    int me = divide_span(kPi / 2, beamwidth_theta);
    int ma = divide_span(2 * kPi, beamwidth_phi);
    need(me > 0 && ma > 0, "beamwidths must divide pi/2 and 2pi");
    need(me * ma == m_blocks, "m_blocks must equal M_e * M_a for the configured beamwidths");
}

FramePlan build_frame_plan(const SystemConfig& cfg, double delta_theta, double delta_phi)
{
    if (!(delta_theta > 0) || !(delta_phi > 0))
        throw InvalidArgument("beamwidths must be positive");
    int me = divide_span(kPi / 2, delta_theta);
    int ma = divide_span(2 * kPi, delta_phi);
    if (me == 0 || ma == 0)
        throw InvalidArgument("beamwidth does not divide the angular region");
    (void)cfg;

    FramePlan plan;
    plan.m_e = me;
    plan.m_a = ma;
    plan.delta_theta = (kPi / 2) / me;
    plan.delta_phi = (2 * kPi) / ma;
    plan.scan_directions.reserve(static_cast<size_t>(me) * ma);
    plan.chirp_signs.reserve(static_cast<size_t>(me) * ma);
    for (int i = 0; i < me; ++i) {
        for (int j = 0; j < ma; ++j) {
            plan.scan_directions.push_back({(i + 0.5) * plan.delta_theta, (j + 0.5) * plan.delta_phi});
            plan.chirp_signs.push_back(plan.chirp_signs.size() % 2 == 0 ? +1 : -1);
        }
    }
    return plan;
}

FramePlan build_frame_plan(const SystemConfig& cfg)
{
    return build_frame_plan(cfg, cfg.beamwidth_theta, cfg.beamwidth_phi);
}

std::vector<UserRecord> spawn_users(const SystemConfig& cfg, int count, double cell_radius, Rng& rng)
{
    if (count < 1) throw InvalidArgument("spawn_users: count must be >= 1");
    if (!(cell_radius > cfg.d_0)) throw InvalidArgument("spawn_users: cell_radius must exceed d_0");

    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double r0 = cfg.d_0 * cfg.d_0;
    const double r1 = cell_radius * cell_radius;

    std::vector<UserRecord> users(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        UserRecord& u = users[static_cast<size_t>(i)];
        u.id = i;
        // Open intervals: redraw the (measure-zero) endpoints.
        double a, b;
        do { a = u01(rng); } while (a == 0.0);
        do { b = u01(rng); } while (b == 0.0);
        u.direction.theta = kPi / 2 + a * (kPi / 2);
        u.direction.phi = b * 2 * kPi;
        u.distance = std::sqrt(r0 + u01(rng) * (r1 - r0));
        u.shadow = std::exp(cfg.sigma_delta * gauss(rng));
    }
    return users;
}

double annulus_distance_cdf(double d, double d_0, double cell_radius)
{
    if (d <= d_0) return 0.0;
    if (d >= cell_radius) return 1.0;
    return (d * d - d_0 * d_0) / (cell_radius * cell_radius - d_0 * d_0);
}

bool in_target_region(const Direction& d)
{
    return d.theta > 0 && d.theta < kPi / 2 && d.phi > 0 && d.phi < 2 * kPi;
}

bool in_user_region(const Direction& d)
{
    return d.theta > kPi / 2 && d.theta < kPi && d.phi > 0 && d.phi < 2 * kPi;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b)
{
    // splitmix64 over the combined key
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(base) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

}  // namespace dfrc
