#include "dfrc/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dfrc/array_channel.hpp"
#include "dfrc/ber.hpp"
#include "dfrc/config_io.hpp"
#include "dfrc/optimizer.hpp"
#include "dfrc/parallel.hpp"
#include "dfrc/radar_dsp.hpp"
#include "dfrc/waveform.hpp"

namespace dfrc {

namespace {

constexpr double kDeg = 180.0 / kPi;

std::string fmt(double v) { return format_number(v); }
std::string fmt(int v) { return std::to_string(v); }

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;  // index order, so the sum is reproducible
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::vector<UserRecord> pick(const std::vector<UserRecord>& all, const std::vector<int>& ids)
{
    std::vector<UserRecord> out;
    for (int id : ids)
        for (const auto& u : all)
            if (u.id == id) out.push_back(u);
    return out;
}

Direction random_target(Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a, b;
    do { a = u(rng); } while (a == 0.0);
    do { b = u(rng); } while (b == 0.0);
    return {a * kPi / 2, b * 2 * kPi};
}

// Scan cell of a frame plan that contains dir.
Direction scan_cell(const Direction& dir, double delta_theta, double delta_phi, const SystemConfig& cfg)
{
    FramePlan plan = build_frame_plan(cfg, delta_theta, delta_phi);
    int i = std::clamp(static_cast<int>(std::floor(dir.theta / plan.delta_theta)), 0, plan.m_e - 1);
    int j = std::clamp(static_cast<int>(std::floor(dir.phi / plan.delta_phi)), 0, plan.m_a - 1);
    return plan.scan_directions[static_cast<size_t>(i * plan.m_a + j)];
}

SystemConfig at_snr(const SystemConfig& cfg, double snr_db)
{
    SystemConfig c = cfg;
    c.noise_power = c.ue_noise_power = noise_for_snr(snr_db);
    return c;
}

MmlmOptions solver_options(const SystemConfig& cfg)
{
    MmlmOptions o;
    o.nu_max = cfg.nu_max;
    o.epsilon = cfg.epsilon;
    return o;
}

// One block of single-stream CPM-LFM with random MASK data.
ComplexSignal probe_block(const SystemConfig& cfg, int chirp_sign, std::uint64_t seed)
{
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    int bps = 0;
    while ((1 << bps) < cfg.mask_order) ++bps;
    std::vector<int> bits(static_cast<size_t>(cfg.n_symbols * bps));
    for (int& b : bits) b = coin(rng) ? 1 : 0;
    auto chips = cpm_modulate(mask_map(bits, cfg.mask_order), cfg.mod_index).samples;
    return synthesize_chirp(chips, cfg, chirp_sign, cfg.pulse, cfg.sample_rate());
}

std::vector<double> grid(double half_span, double step)
{
    const int n = static_cast<int>(std::llround(half_span / step));
    std::vector<double> g;
    for (int i = -n; i <= n; ++i) g.push_back(i * step);
    return g;
}

}  // namespace

void Table::add_row(std::vector<std::string> row)
{
    if (row.size() != columns.size()) throw InvalidArgument("Table: row width does not match header");
    rows.push_back(std::move(row));
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v == 0.0 ? 0.0 : v);  // no "-0"
    return buf;
}

std::vector<double> Sweep::values() const
{
    if (!(step > 0) || !(start <= stop)) throw InvalidArgument("sweep '" + key + "': need step > 0 and start <= stop");
    std::vector<double> v;
    const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) v.push_back(start + static_cast<double>(i) * step);
    return v;
}

Sweep parse_sweep(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("sweep must look like key=start:stop:step");
    Sweep s;
    s.key = text.substr(0, eq);
    std::stringstream rest(text.substr(eq + 1));
    std::string part;
    std::vector<double> nums;
    while (std::getline(rest, part, ':')) {
        try {
            size_t used = 0;
            nums.push_back(std::stod(part, &used));
            if (used != part.size()) throw InvalidArgument("");
        } catch (...) {
            throw InvalidArgument("sweep '" + s.key + "': bad number '" + part + "'");
        }
    }
    if (nums.size() != 3) throw InvalidArgument("sweep '" + s.key + "': need start:stop:step");
    s.start = nums[0];
    s.stop = nums[1];
    s.step = nums[2];
    s.values();  // validates ordering
    return s;
}

double noise_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

// ---------------------------------------------------------------- tables

Table run_spectrum(const SystemConfig& cfg)
{
    const ComplexSignal sig = probe_block(cfg, +1, derive_seed(cfg.seed, 0x5bec));
    const SpectrumEstimate est = signal_spectrum(sig);
    Table t;
    t.columns = {"freq[Hz]", "magnitude[V/Hz]", "magnitude[dB]"};
    double peak = 0.0;
    for (double m : est.magnitude) peak = std::max(peak, m);
    for (size_t i = 0; i < est.freq_grid.size(); ++i) {
        const double db = est.magnitude[i] > 0 ? 20 * std::log10(est.magnitude[i] / peak) : -400.0;
        t.add_row({fmt(est.freq_grid[i]), fmt(est.magnitude[i]), fmt(db)});
    }
    t.notes = {{"pulse", to_string(cfg.pulse)},
               {"occupied_bandwidth_20db[Hz]", fmt(est.occupied_bandwidth)},
               {"sweep_bandwidth[Hz]", fmt(sweep_bandwidth(cfg))},
               {"pulse_bandwidth[Hz]", fmt(1.0 / cfg.t_s)}};
    return t;
}

Table run_ber(const SystemConfig& cfg)
{
    BerOptions opt;
    opt.min_errors = cfg.ber_min_errors;
    opt.max_bits = cfg.ber_max_bits;
    opt.min_drops = cfg.ber_min_drops;
    opt.blocks_per_drop = cfg.ber_blocks_per_drop;
    std::vector<BerPoint> pts = cfg.ber_mode == "bound"
                                    ? ber_upper_bound(cfg, cfg.snr_db, opt)
                                    : ber_curve(cfg, parse_precoder_kind(cfg.precoder), cfg.snr_db, opt);
    Table t;
    t.columns = {"snr_db", "ber", "ci95", "bits"};
    for (const auto& p : pts) t.add_row({fmt(p.snr_db), fmt(p.ber), fmt(p.ci95), fmt(p.bits_simulated)});
    t.notes = {{"curve", cfg.ber_mode}, {"precoder", cfg.precoder}};
    return t;
}

Table run_ambiguity(const SystemConfig& cfg)
{
    const ComplexSignal sig = probe_block(cfg, +1, derive_seed(cfg.seed, 0xaf));
    const auto taus = grid(cfg.af_tau_max, cfg.af_tau_step);
    const auto fds = grid(cfg.af_fd_max, cfg.af_fd_step);
    const AmbiguitySurface af = ambiguity(sig, taus, fds);
    Table t;
    t.columns = {"tau[s]", "f_d[Hz]", "af"};
    t.rows.reserve(taus.size() * fds.size());
    for (size_t i = 0; i < taus.size(); ++i)
        for (size_t j = 0; j < fds.size(); ++j)
            t.rows.push_back({fmt(taus[i]), fmt(fds[j]), fmt(af.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});

    const size_t i0 = taus.size() / 2, j0 = fds.size() / 2;
    std::vector<double> tau_cut, fd_cut, tau_pos, fd_pos;
    for (size_t i = i0; i < taus.size(); ++i) {
        tau_pos.push_back(taus[i]);
        tau_cut.push_back(af.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j0)));
    }
    for (size_t j = j0; j < fds.size(); ++j) {
        fd_pos.push_back(fds[j]);
        fd_cut.push_back(af.values(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(j)));
    }
    t.notes = {{"upsample", fmt(af.upsample)},
               {"first_null_tau[s]", fmt(first_null(tau_pos, tau_cut))},
               {"first_null_fd[Hz]", fmt(first_null(fd_pos, fd_cut))}};
    return t;
}

Table run_sumrate(const SystemConfig& cfg)
{
    const size_t n_snr = cfg.snr_db.size();
    const size_t drops = static_cast<size_t>(cfg.n_drops);
    const double amp = target_amplitude(cfg, cfg.target_range, cfg.target_rcs);
    const MmlmOptions mo = solver_options(cfg);
    // [snr][drop][column]
    std::vector<std::vector<std::array<double, 6>>> cells(n_snr, std::vector<std::array<double, 6>>(drops));

    parallel_for(n_snr * drops, [&](size_t job) {
        const size_t si = job / drops, d = job % drops;
        const SystemConfig c = at_snr(cfg, cfg.snr_db[si]);
        Rng rng(derive_seed(cfg.seed, d));
        const Direction target = random_target(rng);
        auto candidates = spawn_users(c, c.n_candidates, c.cell_radius, rng);
        auto users = pick(candidates, smi_select(candidates, c.n_users, c, target).chosen);
        const ChannelSet cs = build_channel_set(users, target, c);
        DesignProblem prob = make_problem(cs, c, amp);

        auto& row = cells[si][d];
        row[0] = design(prob, PrecoderKind::MMLM, mo).report.r_sum;
        row[1] = design(prob, PrecoderKind::MMSE, mo).report.r_sum;
        row[2] = design(prob, PrecoderKind::ZF, mo).report.r_sum;
        row[3] = design(prob, PrecoderKind::MRT, mo).report.r_sum;
        DesignProblem comm = prob;
        comm.radar_stream = false;
        row[4] = design(comm, PrecoderKind::MMLM, mo).report.r_sum;
        // All power on w_T = a_t^H with the matched processor is optimal for a lone target.
        const ChannelSet radar_cs = build_channel_set(std::span<const UserRecord>(), target, c);
        DesignProblem radar = make_problem(radar_cs, c, amp);
        row[5] = sum_rate(radar, initial_state(radar)).r_sum;
    });

    Table t;
    t.columns = {"snr_db", "mmlm[bit/s/Hz]", "mmse[bit/s/Hz]", "zf[bit/s/Hz]", "mrt[bit/s/Hz]",
                 "comm_only[bit/s/Hz]", "radar_only[bit/s/Hz]"};
    for (size_t si = 0; si < n_snr; ++si) {
        std::vector<std::string> row{fmt(cfg.snr_db[si])};
        for (int col = 0; col < 6; ++col) {
            std::vector<double> v;
            for (size_t d = 0; d < drops; ++d) v.push_back(cells[si][d][static_cast<size_t>(col)]);
            row.push_back(fmt(mean(v)));
        }
        t.add_row(std::move(row));
    }
    t.notes = {{"drops", fmt(cfg.n_drops)},
               {"radar_only", "log2(1 + gamma_T) with all power on the target stream"},
               {"comm_only", "MMLM without the radar stream (P_T = 0)"}};
    return t;
}

Table run_selection(const SystemConfig& cfg)
{
    const int k = cfg.n_users;
    const size_t drops = static_cast<size_t>(cfg.n_drops);
    const size_t nu = cfg.selection_candidates.size();
    const double amp = target_amplitude(cfg, cfg.target_range, cfg.target_rcs);
    const double d324 = 10.0 / kDeg, d216_phi = 15.0 / kDeg;
    std::vector<std::vector<std::array<double, 3>>> cells(nu, std::vector<std::array<double, 3>>(drops));

    // Table rate: scoring-model R_com plus the radar rate of the scan beam at
    // equal power with the matched processor. The radar receiver is taken as
    // noise-limited so the user set enters through R_com only.
    auto table_rate = [&](const SelectionResult& sel, const std::vector<UserRecord>& cand, const Direction& target,
                          const Direction& scan) {
        auto users = pick(cand, sel.chosen);
        const ChannelSet cs = build_channel_set(users, target, cfg);
        DesignProblem prob = make_problem(cs, cfg, amp);
        prob.A_K.resize(cfg.n_r(), 0);
        PrecoderState s;
        const int kk = prob.users();
        s.W.resize(cfg.n_t(), kk + 1);
        s.W.col(0) = steering(scan, tx_geometry(cfg), cfg.wavelength()).adjoint();
        for (int i = 0; i < kk; ++i) s.W.col(i + 1) = prob.H.row(i).adjoint().normalized();
        s.P = Eigen::VectorXd::Constant(kk + 1, cfg.p_tot / (kk + 1));
        s.V = optimal_processor(prob, s.effective(), Eigen::RowVectorXcd());
        return sel.rate + sum_rate(prob, s).r_rad;
    };

    parallel_for(nu * drops, [&](size_t job) {
        const size_t ui = job / drops, d = job % drops;
        const int u = cfg.selection_candidates[ui];
        Rng rng(derive_seed(cfg.seed, d, static_cast<std::uint64_t>(u)));
        const Direction target = random_target(rng);
        auto cand = spawn_users(cfg, u, cfg.cell_radius, rng);
        const Direction s324 = scan_cell(target, d324, d324, cfg);
        const Direction s216 = scan_cell(target, d324, d216_phi, cfg);
        auto& row = cells[ui][d];
        row[0] = table_rate(traversal_select(cand, k, cfg, s324), cand, target, s324);
        row[1] = table_rate(smi_select(cand, k, cfg, s324), cand, target, s324);
        row[2] = table_rate(smi_select(cand, k, cfg, s216), cand, target, s216);
    });

    Table t;
    t.columns = {"u",          "traversal[bit/s/Hz]", "smi_m324[bit/s/Hz]", "smi_m216[bit/s/Hz]",
                 "smi_multiplies", "traversal_multiplies"};
    for (size_t ui = 0; ui < nu; ++ui) {
        const int u = cfg.selection_candidates[ui];
        std::vector<std::string> row{fmt(u)};
        for (int col = 0; col < 3; ++col) {
            std::vector<double> v;
            for (size_t d = 0; d < drops; ++d) v.push_back(cells[ui][d][static_cast<size_t>(col)]);
            row.push_back(fmt(mean(v)));
        }
        row.push_back(fmt(smi_multiplies(u, k)));
        row.push_back(fmt(traversal_multiplies(u, k)));
        t.add_row(std::move(row));
    }
    t.notes = {{"k", fmt(k)}, {"drops", fmt(cfg.n_drops)}, {"m216_beamwidth[deg]", "10 x 15"}};
    return t;
}

Table run_tradeoff(const SystemConfig& cfg)
{
    const size_t drops = static_cast<size_t>(cfg.n_drops);
    const size_t nk = cfg.tradeoff_users.size();
    const size_t nr = cfg.tradeoff_ranges.size();
    const size_t nc = cfg.tradeoff_rcs.size();
    const Direction target{cfg.target_theta, cfg.target_phi};
    const double thr = std::exp2(cfg.rho_target) - 1.0;
    const MmlmOptions mo = solver_options(cfg);
    const PrecoderKind kind = parse_precoder_kind(cfg.precoder);
    constexpr double kInfeasible = std::numeric_limits<double>::quiet_NaN();
    // [k][drop][range][rcs] -> (R_com, P_T)
    std::vector<std::vector<std::vector<std::pair<double, double>>>> cells(
        nk, std::vector<std::vector<std::pair<double, double>>>(drops, std::vector<std::pair<double, double>>(nr * nc)));

    parallel_for(nk * drops, [&](size_t job) {
        const size_t ki = job / drops, d = job % drops;
        SystemConfig c = cfg;
        c.n_users = cfg.tradeoff_users[ki];
        Rng rng(derive_seed(cfg.seed, d));
        auto cand = spawn_users(c, c.n_candidates, c.cell_radius, rng);
        auto users = pick(cand, smi_select(cand, c.n_users, c, target).chosen);
        const ChannelSet cs = build_channel_set(users, target, c);

        // Communication precoder designed once without the radar stream.
        DesignProblem comm = make_problem(cs, c, 1.0);
        comm.radar_stream = false;
        comm.rho_target = 0.0;
        const MmlmResult base = design(comm, kind, mo);

        for (size_t ri = 0; ri < nr; ++ri) {
            for (size_t ci = 0; ci < nc; ++ci) {
                const double amp = target_amplitude(c, cfg.tradeoff_ranges[ri], cfg.tradeoff_rcs[ci]);
                DesignProblem prob = make_problem(cs, c, amp);
                prob.rho_user = 0.0;
                prob.rho_target = 0.0;
                PrecoderState s = base.state;
                s.W.col(0) = prob.a_t.adjoint();
                // gamma_T per watt on w_T with the matched processor.
                PrecoderState unit_t = s;
                unit_t.P.setZero();
                unit_t.P(0) = 1.0;
                unit_t.V = optimal_processor(prob, unit_t.effective(), Eigen::RowVectorXcd());
                const double per_watt = sinr_target(unit_t.V, prob.Z, unit_t.effective(), prob.A_K, prob.sigma2, prob.e_rad);
                const double p_t = thr / per_watt;
                auto& cell = cells[ki][d][ri * nc + ci];
                if (!(p_t < c.p_tot)) {
                    cell = {kInfeasible, p_t};
                    continue;
                }
                prob.fixed_target_power = p_t;
                // Start from the communication powers scaled into the remaining
                // budget, then iterate the water-fill and keep the best point.
                s.P(0) = p_t;
                s.P.tail(prob.users()) = base.state.P.tail(prob.users()) * ((c.p_tot - p_t) / c.p_tot);
                s.V = unit_t.V;
                double best = sum_rate(prob, s).r_com;
                for (int it = 0; it < 20; ++it) {
                    s.P = allocate_power(prob, s);
                    best = std::max(best, sum_rate(prob, s).r_com);
                }
                cell = {best, p_t};
            }
        }
    });

    Table t;
    t.columns = {"range[m]", "k", "rcs[m^2]", "r_com[bit/s/Hz]", "p_target[W]"};
    for (size_t ri = 0; ri < nr; ++ri)
        for (size_t ki = 0; ki < nk; ++ki)
            for (size_t ci = 0; ci < nc; ++ci) {
                std::vector<double> r, p;
                bool infeasible = false;
                for (size_t d = 0; d < drops; ++d) {
                    const auto& cell = cells[ki][d][ri * nc + ci];
                    if (std::isnan(cell.first)) infeasible = true;
                    r.push_back(cell.first);
                    p.push_back(cell.second);
                }
                t.add_row({fmt(cfg.tradeoff_ranges[ri]), fmt(cfg.tradeoff_users[ki]), fmt(cfg.tradeoff_rcs[ci]),
                           infeasible ? "infeasible" : fmt(mean(r)), fmt(mean(p))});
            }
    t.notes = {{"drops", fmt(cfg.n_drops)}, {"rho_target[bit/s/Hz]", fmt(cfg.rho_target)}};
    return t;
}

Table run_detect(const SystemConfig& cfg)
{
    const FramePlan plan = build_frame_plan(cfg);
    const Direction target{cfg.target_theta, cfg.target_phi};
    const double amp = target_amplitude(cfg, cfg.target_range, cfg.target_rcs);
    const double thr = std::exp2(cfg.rho_target) - 1.0;
    Rng rng(derive_seed(cfg.seed, 0xde7));
    const auto users = spawn_users(cfg, std::max(1, cfg.n_users), cfg.cell_radius, rng);
    const ChannelSet cs = build_channel_set(users, target, cfg);
    const DesignProblem prob = make_problem(cs, cfg, amp);
    const int k = prob.users();
    const size_t m = plan.scan_directions.size();

    std::vector<double> gamma(m);
    parallel_for(m, [&](size_t b) {
        PrecoderState s;
        s.W.resize(cfg.n_t(), k + 1);
        s.W.col(0) = steering(plan.scan_directions[b], tx_geometry(cfg), cfg.wavelength()).adjoint();
        for (int i = 0; i < k; ++i) s.W.col(i + 1) = prob.H.row(i).adjoint().normalized();
        s.P = Eigen::VectorXd::Constant(k + 1, cfg.p_tot / (k + 1));
        s.V = optimal_processor(prob, s.effective(), Eigen::RowVectorXcd());
        gamma[b] = sinr_target(s.V, prob.Z, s.effective(), prob.A_K, prob.sigma2, prob.e_rad);
    });

    size_t hit = m;
    for (size_t b = 0; b < m; ++b)
        if (gamma[b] >= thr && gamma[b] > 0 && (hit == m || gamma[b] > gamma[hit])) hit = b;

    RadarEstimate est;
    if (hit < m) {
        // Dwell on the hit direction for one up and one down block with an
        // unmodulated pilot, then dechirp both.
        const Eigen::RowVectorXcd w = steering(plan.scan_directions[hit], tx_geometry(cfg), cfg.wavelength());
        const EchoParams echo = make_echo(cfg.target_range, cfg.target_velocity, std::max(cfg.target_rcs, 1e-30), cfg);
        const std::vector<cd> pilot(static_cast<size_t>(cfg.n_symbols), cd(1.0, 0.0));
        double beat[2];
        const int signs[2] = {+1, -1};
        for (int q = 0; q < 2; ++q) {
            std::vector<ComplexSignal> tx;
            for (int a = 0; a < cfg.n_t(); ++a) {
                std::vector<cd> row(pilot.size());
                for (size_t n = 0; n < pilot.size(); ++n) row[n] = std::conj(w(a)) * pilot[n];
                tx.push_back(synthesize_chirp(row, cfg, signs[q], PulseKind::Rect, cfg.sample_rate()));
            }
            const auto rx = target_echo(tx, echo, target, nullptr, cfg, 0.0, rng);
            const Eigen::RowVectorXcd a_r = steering(target, rx_geometry(cfg), cfg.wavelength());
            ComplexSignal comb = rx[0];
            for (size_t i = 0; i < comb.size(); ++i) {
                cd v = 0.0;
                for (int r = 0; r < cfg.n_r(); ++r) v += std::conj(a_r(r)) * rx[static_cast<size_t>(r)].samples[i];
                comb.samples[i] = v;
            }
            beat[q] = beat_frequency(dechirp(comb, signs[q], cfg), signs[q]);
        }
        est = estimate_target(beat[0], beat[1], cfg);
    }

    Table t;
    t.columns = {"block", "theta[deg]", "phi[deg]", "chirp_sign", "gamma_t", "detected", "range_hat[m]",
                 "velocity_hat[m/s]"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (size_t b = 0; b < m; ++b) {
        const auto& dir = plan.scan_directions[b];
        const bool det = gamma[b] >= thr && gamma[b] > 0;
        t.add_row({fmt(static_cast<int>(b)), fmt(dir.theta * kDeg), fmt(dir.phi * kDeg), fmt(plan.chirp_signs[b]),
                   fmt(gamma[b]), det ? "1" : "0", fmt(b == hit ? est.range_hat : nan),
                   fmt(b == hit ? est.velocity_hat : nan)});
    }
    t.notes = {{"hit_block", hit < m ? fmt(static_cast<int>(hit)) : "none"},
               {"threshold_gamma", fmt(thr)}};
    return t;
}

Table run_kind(const std::string& kind, const SystemConfig& cfg)
{
    if (kind == "spectrum") return run_spectrum(cfg);
    if (kind == "ber") return run_ber(cfg);
    if (kind == "ambiguity") return run_ambiguity(cfg);
    if (kind == "sumrate") return run_sumrate(cfg);
    if (kind == "selection") return run_selection(cfg);
    if (kind == "tradeoff") return run_tradeoff(cfg);
    if (kind == "detect") return run_detect(cfg);
    throw InvalidArgument("unknown experiment kind '" + kind + "'");
}

Table run_with_sweeps(const std::string& kind, const SystemConfig& cfg, const std::vector<Sweep>& sweeps)
{
    if (sweeps.empty()) return run_kind(kind, cfg);
    std::vector<std::vector<double>> axes;
    size_t cells = 1;
    for (const auto& s : sweeps) {
        axes.push_back(s.values());
        cells *= axes.back().size();
    }
    Table out;
    for (size_t cell = 0; cell < cells; ++cell) {
        SystemConfig c = cfg;
        std::vector<std::string> prefix;
        size_t rem = cell;
        std::vector<size_t> idx(sweeps.size());
        for (size_t a = sweeps.size(); a-- > 0;) {
            idx[a] = rem % axes[a].size();
            rem /= axes[a].size();
        }
        for (size_t a = 0; a < sweeps.size(); ++a) {
            set_config_field(c, sweeps[a].key, axes[a][idx[a]]);
            prefix.push_back(fmt(axes[a][idx[a]]));
        }
        Table t = run_kind(kind, c);
        if (out.columns.empty()) {
            for (const auto& s : sweeps) out.columns.push_back(s.key);
            out.columns.insert(out.columns.end(), t.columns.begin(), t.columns.end());
        }
        for (auto& r : t.rows) {
            std::vector<std::string> row = prefix;
            row.insert(row.end(), r.begin(), r.end());
            out.add_row(std::move(row));
        }
    }
    return out;
}

void write_table(std::ostream& out, const std::string& kind, const SystemConfig& cfg, const Table& table,
                 const std::vector<Sweep>& sweeps)
{
    out << "# dfrc " << DFRC_VERSION << '\n';
    out << "# kind: " << kind << '\n';
    out << "# config_hash: " << config_hash(cfg) << '\n';
    out << "# seed: " << cfg.seed << '\n';
    for (const auto& s : sweeps)
        out << "# sweep: " << s.key << '=' << fmt(s.start) << ':' << fmt(s.stop) << ':' << fmt(s.step) << '\n';
    for (const auto& [k, v] : table.notes) out << "# " << k << ": " << v << '\n';
    for (size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

int run_experiment(const ExperimentSpec& spec, std::ostream& err)
{
    try {
        bool known = false;
        for (const char* k : kExperimentKinds) known = known || spec.kind == k;
        if (!known) throw InvalidArgument("unknown experiment kind '" + spec.kind + "'");
        SystemConfig cfg = load_config(spec.config_path);
        if (spec.seed) cfg.seed = *spec.seed;
        Table t = run_with_sweeps(spec.kind, cfg, spec.sweeps);
        std::ostringstream buf;
        write_table(buf, spec.kind, cfg, t, spec.sweeps);
        std::ofstream out(spec.out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output " + spec.out_path);
        out << buf.str();
        if (!out) throw std::runtime_error("write failed for " + spec.out_path);
        return kExitOk;
    } catch (const InvalidArgument& e) {
        err << "dfrc: invalid configuration: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const Infeasible& e) {
        err << "dfrc: infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const GuardExceeded& e) {
        err << "dfrc: guard exceeded: " << e.what() << '\n';
        return kExitGuard;
    } catch (const std::exception& e) {
        err << "dfrc: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace dfrc
