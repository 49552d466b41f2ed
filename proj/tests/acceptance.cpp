// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dfrc/array_channel.hpp"
#include "dfrc/config_io.hpp"
#include "dfrc/harness.hpp"
#include "dfrc/optimizer.hpp"
#include "dfrc/radar_dsp.hpp"
#include "dfrc/waveform.hpp"

using namespace dfrc;

namespace {

std::string config_dir()
{
    const char* env = std::getenv("DFRC_CONFIG_DIR");
    return env && *env ? env : DFRC_CONFIG_DIR;
}

SystemConfig config(const std::string& name) { return load_config(config_dir() + "/" + name); }

std::string render(const std::string& kind, const SystemConfig& cfg, const Table& t)
{
    std::ostringstream out;
    write_table(out, kind, cfg, t);
    return out.str();
}

// First-run renderings, replayed for the determinism check.
struct Recorded {
    std::string kind;
    SystemConfig cfg;
    std::string text;
};
std::vector<Recorded> recorded;

Table run_recorded(const std::string& kind, const SystemConfig& cfg)
{
    Table t = run_kind(kind, cfg);
    recorded.push_back({kind, cfg, render(kind, cfg, t)});
    return t;
}

double num(const std::string& s) { return std::stod(s); }

int column(const Table& t, const std::string& name)
{
    for (size_t i = 0; i < t.columns.size(); ++i)
        if (t.columns[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing column " + name);
}

std::string note(const Table& t, const std::string& key)
{
    for (const auto& [k, v] : t.notes)
        if (k == key) return v;
    throw std::runtime_error("missing note " + key);
}

bool near_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
        pass = pass && ok;
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- criteria

Outcome resolution()
{
    Outcome o;
    const SystemConfig cfg = config("table1.json");
    const auto t0 = Clock::now();
    const ResolutionReport r = resolution_report(cfg);
    const double dt = seconds_since(t0);
    o.require(near_rel(r.kappa, 100, 1e-12), "kappa=" + fmt("%.12g", r.kappa));
    o.require(near_rel(r.tau_w, 1e-6, 1e-12), "tau_w=" + fmt("%.12g", r.tau_w));
    o.require(near_rel(r.fd_w, 1e4, 1e-12), "fd_w=" + fmt("%.12g", r.fd_w));
    o.require(near_rel(r.d_min, 150, 1e-12), "d_min=" + fmt("%.12g", r.d_min));
    o.require(near_rel(r.v_min, 625, 1e-12), "v_min=" + fmt("%.12g", r.v_min));
    o.require(dt < 1e-3, "runtime " + fmt("%.2e", dt) + " s");
    return o;
}

Outcome ambiguity_nulls()
{
    Outcome o;
    const SystemConfig cfg = config("ambiguity.json");
    const auto t0 = Clock::now();
    const Table t = run_recorded("ambiguity", cfg);
    const double dt = seconds_since(t0);

    const double tau_null = num(note(t, "first_null_tau[s]"));
    const double fd_null = num(note(t, "first_null_fd[Hz]"));
    const double b_w = sweep_bandwidth(cfg);
    const double t_b = cfg.block_duration();
    o.require(std::abs(tau_null - 1 / b_w) <= cfg.af_tau_step * (1 + 1e-9),
              "tau null " + fmt("%.4g", tau_null) + " vs 1/B_w " + fmt("%.4g", 1 / b_w));
    o.require(std::abs(fd_null - 1 / t_b) <= cfg.af_fd_step * (1 + 1e-9),
              "f_d null " + fmt("%.6g", fd_null) + " vs 1/(N T_s) " + fmt("%.6g", 1 / t_b));

    // Point symmetry |chi(tau, f)| = |chi(-tau, -f)|, checked on the raw surface.
    Rng rng(derive_seed(cfg.seed, 0xa5));
    std::bernoulli_distribution coin(0.5);
    std::vector<int> bits(static_cast<size_t>(cfg.n_symbols));
    for (int& b : bits) b = coin(rng);
    auto chips = cpm_modulate(mask_map(bits, cfg.mask_order), cfg.mod_index).samples;
    const ComplexSignal sig = synthesize_chirp(chips, cfg, +1, cfg.pulse, cfg.sample_rate());
    std::vector<double> taus, fds;
    const int nt = static_cast<int>(std::llround(cfg.af_tau_max / cfg.af_tau_step));
    const int nf = static_cast<int>(std::llround(cfg.af_fd_max / cfg.af_fd_step));
    for (int i = -nt; i <= nt; ++i) taus.push_back(i * cfg.af_tau_step);
    for (int j = -nf; j <= nf; ++j) fds.push_back(j * cfg.af_fd_step);
    const AmbiguitySurface af = ambiguity(sig, taus, fds);
    double asym = 0.0;
    const Eigen::Index r = af.values.rows(), c = af.values.cols();
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            asym = std::max(asym, std::abs(af.values(i, j) - af.values(r - 1 - i, c - 1 - j)));
    o.require(asym <= 1e-9, "symmetry error " + fmt("%.2e", asym));
    o.require(r == 201 && c == 201, std::to_string(r) + "x" + std::to_string(c) + " grid");
    o.require(dt < 30, "runtime " + fmt("%.2f", dt) + " s");
    return o;
}

Outcome radar_loop()
{
    Outcome o;
    const SystemConfig cfg = config("detect.json");
    const auto t0 = Clock::now();
    const Table t = run_recorded("detect", cfg);
    const double dt = seconds_since(t0);
    const std::string hit = note(t, "hit_block");
    if (hit == "none") {
        o.require(false, "no block crossed the detection threshold");
        return o;
    }
    const auto& row = t.rows[static_cast<size_t>(std::stoi(hit))];
    const double r = num(row[static_cast<size_t>(column(t, "range_hat[m]"))]);
    const double v = num(row[static_cast<size_t>(column(t, "velocity_hat[m/s]"))]);
    const double dr = r - cfg.target_range, dv = v - cfg.target_velocity;
    o.require(std::abs(dr) <= 150, "range " + fmt("%.3f", r) + " m");
    o.require(std::abs(dv) <= 625, "velocity " + fmt("%.3f", v) + " m/s");
    o.require(std::abs(dr) < 0.01 * cfg.target_range, "bias " + fmt("%.3g", 100 * std::abs(dr) / cfg.target_range) + " %");
    o.require(dt < 10, "runtime " + fmt("%.2f", dt) + " s");
    return o;
}

Outcome spectrum()
{
    Outcome o;
    const auto t0 = Clock::now();
    for (const char* name : {"spectrum.json", "spectrum_rc.json"}) {
        const SystemConfig cfg = config(name);
        const Table t = run_recorded("spectrum", cfg);
        const double bw = num(note(t, "occupied_bandwidth_20db[Hz]"));
        const double b_w = sweep_bandwidth(cfg), b_g = 1.0 / cfg.t_s;
        o.require(near_rel(bw, b_w + b_g, 0.15),
                  to_string(cfg.pulse) + " " + fmt("%.4g", bw / 1e6) + " MHz vs " + fmt("%.4g", (b_w + b_g) / 1e6));

        SystemConfig half = cfg;
        half.mu = cfg.mu / 2;
        const double bw_half = num(note(run_kind("spectrum", half), "occupied_bandwidth_20db[Hz]"));
        o.require(near_rel(bw - bw_half, b_w / 2, 0.15),
                  to_string(cfg.pulse) + " mu/2 drop " + fmt("%.4g", (bw - bw_half) / 1e6) + " MHz vs " +
                      fmt("%.4g", b_w / 2e6));
    }

    // Closed form against composite Simpson over the block.
    const SystemConfig cfg = config("spectrum.json");
    double worst = 0.0;
    const int panels = 400000;
    const double tb = cfg.block_duration(), h = tb / panels;
    for (double f = -1.0e6; f <= 2.0e6; f += 0.1e6) {
        cd s(0, 0);
        for (int i = 0; i <= panels; ++i) {
            const double t = i * h;
            const double w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
            s += w * std::polar(1.0, kPi * cfg.mu * t * t - 2 * kPi * f * t);
        }
        const double quad = std::sqrt(std::abs(cfg.mu)) * std::abs(s) * h / 3;
        worst = std::max(worst, std::abs(quad - lfm_spectrum_closed_form(f, cfg)));
    }
    o.require(worst < 1e-6, "closed form vs quadrature " + fmt("%.1e", worst));
    const double dt = seconds_since(t0);
    o.require(dt < 10, "runtime " + fmt("%.2f", dt) + " s");
    return o;
}

Direction random_target(Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double a, b;
    do { a = u(rng); } while (a == 0.0);
    do { b = u(rng); } while (b == 0.0);
    return {a * kPi / 2, b * 2 * kPi};
}

DesignProblem table_instance(const SystemConfig& cfg, std::uint64_t seed)
{
    Rng rng(derive_seed(cfg.seed, seed, 0x5a));
    const Direction target = random_target(rng);
    auto cand = spawn_users(cfg, cfg.n_candidates, cfg.cell_radius, rng);
    auto sel = smi_select(cand, cfg.n_users, cfg, target);
    std::vector<UserRecord> users;
    for (int id : sel.chosen)
        for (const auto& u : cand)
            if (u.id == id) users.push_back(u);
    const ChannelSet cs = build_channel_set(users, target, cfg);
    return make_problem(cs, cfg, target_amplitude(cfg, cfg.target_range, cfg.target_rcs));
}

double gradient_error(const DesignProblem& prob, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> n(0, 1);
    PrecoderState s = initial_state(prob);
    for (Eigen::Index i = 0; i < s.W.size(); ++i) s.W(i) += 0.3 * cd(n(rng), n(rng));
    for (Eigen::Index i = 0; i < s.V.size(); ++i) s.V(i) += 0.3 * cd(n(rng), n(rng));
    Eigen::VectorXd eta = Eigen::VectorXd::Constant(prob.users() + 1, -0.25);
    const double h = 1e-6;
    double worst = 0.0;
    auto fd = [&](auto perturb, const Eigen::VectorXd& e, Eigen::Index len) {
        Eigen::VectorXcd g(len);
        for (Eigen::Index k = 0; k < len; ++k) {
            double part[2];
            for (int ri = 0; ri < 2; ++ri) {
                PrecoderState sp = s, sm = s;
                perturb(sp, k, ri == 0 ? cd(h, 0) : cd(0, h));
                perturb(sm, k, ri == 0 ? cd(-h, 0) : cd(0, -h));
                part[ri] = (lagrangian(prob, sp, e) - lagrangian(prob, sm, e)) / (2 * h);
            }
            g(k) = 0.5 * cd(part[0], part[1]);
        }
        return g;
    };
    for (int col = 0; col <= prob.users(); ++col) {
        auto num_g = fd([&](PrecoderState& st, Eigen::Index k, cd d) { st.W(k, col) += d; }, eta, prob.n_t());
        const Eigen::VectorXcd an = kkt_grad_w(col, prob, s, eta);
        worst = std::max(worst, (an - num_g).norm() / num_g.norm());
    }
    Eigen::VectorXd radar_only = Eigen::VectorXd::Constant(prob.users() + 1, -1.0);
    radar_only(0) = eta(0);
    auto num_v = fd([&](PrecoderState& st, Eigen::Index k, cd d) { st.V(k) += std::conj(d); }, radar_only, prob.n_r());
    const Eigen::VectorXcd an_v = kkt_grad_v(prob, s, eta(0));
    worst = std::max(worst, (an_v - num_v).norm() / num_v.norm());
    return worst;
}

Outcome optimizer()
{
    Outcome o;
    const auto t0 = Clock::now();
    SystemConfig cfg = config("sumrate.json");
    cfg.noise_power = cfg.ue_noise_power = noise_for_snr(10.0);

    int bad = 0;
    double worst_drop = 0.0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const DesignProblem prob = table_instance(cfg, s);
        MmlmOptions mo;
        mo.nu_max = cfg.nu_max;
        mo.epsilon = cfg.epsilon;
        const auto& rec = mmlm(prob, mo).trace.records;
        for (size_t i = 1; i < rec.size(); ++i) {
            const double drop = rec[i - 1].r_sum - rec[i].r_sum;
            worst_drop = std::max(worst_drop, drop);
            if (drop > 1e-8) ++bad;
        }
    }
    o.require(bad == 0, "(a) monotone on 100 instances, worst step " + fmt("%.1e", -worst_drop));

    double grad = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) grad = std::max(grad, gradient_error(table_instance(cfg, 1000 + s), s));
    o.require(grad < 1e-5, "(b) KKT gradients vs finite differences " + fmt("%.1e", grad));

    const SystemConfig sr = config("sumrate.json");
    const Table t = run_recorded("sumrate", sr);
    const std::vector<std::string>* row10 = nullptr;
    for (const auto& row : t.rows)
        if (num(row[0]) == 10.0) row10 = &row;
    if (!row10) {
        o.require(false, "(c) no 10 dB row");
        return o;
    }
    const double m = num((*row10)[static_cast<size_t>(column(t, "mmlm[bit/s/Hz]"))]);
    const char* names[3] = {"mmse", "zf", "mrt"};
    std::string gaps;
    bool ok = true;
    for (const char* b : names) {
        const double v = num((*row10)[static_cast<size_t>(column(t, std::string(b) + "[bit/s/Hz]"))]);
        ok = ok && m - v > 0;
        gaps += std::string(gaps.empty() ? "" : " ") + b + " +" + fmt("%.2f", m - v);
    }
    o.require(ok, "(c) gaps " + gaps);
    o.require(near_rel(m, 15.3, 0.15), "(c) MMLM " + fmt("%.2f", m) + " bit/s/Hz vs 15.3 +-15%");
    const double dt = seconds_since(t0);
    o.require(dt < 300, "runtime " + fmt("%.1f", dt) + " s");
    return o;
}

Outcome selection()
{
    Outcome o;
    const auto t0 = Clock::now();
    const SystemConfig cfg = config("selection.json");
    int violations = 0, k1_mismatch = 0, instances = 0;
    for (int u : cfg.selection_candidates) {
        if (u > 12) continue;
        for (int d = 0; d < cfg.n_drops; ++d) {
            Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(d), 0x5e1 + static_cast<std::uint64_t>(u)));
            const Direction scan = random_target(rng);
            auto cand = spawn_users(cfg, u, cfg.cell_radius, rng);
            const auto smi = smi_select(cand, cfg.n_users, cfg, scan);
            const auto trav = traversal_select(cand, cfg.n_users, cfg, scan);
            if (smi.rate > trav.rate + 1e-12) ++violations;
            const auto s1 = smi_select(cand, 1, cfg, scan);
            const auto t1 = traversal_select(cand, 1, cfg, scan);
            if (std::abs(s1.rate - t1.rate) > 1e-12 * std::max(1.0, t1.rate)) ++k1_mismatch;
            ++instances;
        }
    }
    o.require(violations == 0, "SMI <= traversal on " + std::to_string(instances) + " instances");
    o.require(k1_mismatch == 0, "K=1 equality");

    const Table t = run_recorded("selection", cfg);
    bool found = false;
    for (const auto& row : t.rows) {
        if (num(row[0]) != 30) continue;
        found = true;
        const double smi = num(row[static_cast<size_t>(column(t, "smi_multiplies"))]);
        const double trav = num(row[static_cast<size_t>(column(t, "traversal_multiplies"))]);
        o.require(smi == 120 && trav == 810000,
                  "multiplies at U=30: " + fmt("%.0f", smi) + " vs " + fmt("%.0f", trav));
    }
    if (!found) o.require(false, "no U=30 row");
    const double dt = seconds_since(t0);
    o.require(dt < 120, "runtime " + fmt("%.1f", dt) + " s");
    return o;
}

std::vector<double> ber_column(const Table& t)
{
    std::vector<double> v;
    const size_t c = static_cast<size_t>(column(t, "ber"));
    for (const auto& row : t.rows) v.push_back(num(row[c]));
    return v;
}

Outcome ber()
{
    Outcome o;
    const auto t0 = Clock::now();
    const SystemConfig base = config("ber.json");
    const Table mc_t = run_recorded("ber", base);
    const auto mc = ber_column(mc_t);
    double at20 = std::nan("");
    for (size_t i = 0; i < base.snr_db.size(); ++i)
        if (base.snr_db[i] == 20.0) at20 = mc[i];
    o.require(at20 >= 3e-4 && at20 <= 3e-3, "MC at 20 dB " + fmt("%.3g", at20));

    SystemConfig bcfg = base;
    bcfg.ber_mode = "bound";
    const auto bound = ber_column(run_recorded("ber", bcfg));
    bool above = true;
    for (size_t i = 0; i < mc.size(); ++i) above = above && bound[i] >= mc[i];
    o.require(above, "bound >= MC at all " + std::to_string(mc.size()) + " points");

    auto worsens = [&](const std::vector<double>& alt) {
        bool ge = true, gt = false;
        for (size_t i = 0; i < mc.size(); ++i) {
            ge = ge && alt[i] >= mc[i];
            gt = gt || alt[i] > mc[i];
        }
        return ge && gt;
    };
    SystemConfig k6 = base;
    k6.n_users = 6;
    const auto ber_k6 = ber_column(run_recorded("ber", k6));
    o.require(worsens(ber_k6), "K=6 worse at every point");
    SystemConfig pt = base;
    pt.target_power_fraction = 0.3;
    const auto ber_pt = ber_column(run_recorded("ber", pt));
    o.require(worsens(ber_pt), "P_T=0.3 worse at every point");
    const double dt = seconds_since(t0);
    o.require(dt < 600, "runtime " + fmt("%.1f", dt) + " s");
    return o;
}

Outcome tradeoff()
{
    Outcome o;
    const auto t0 = Clock::now();
    const SystemConfig cfg = config("tradeoff.json");
    const Table t = run_recorded("tradeoff", cfg);
    const size_t cr = static_cast<size_t>(column(t, "range[m]"));
    const size_t ck = static_cast<size_t>(column(t, "k"));
    const size_t cs = static_cast<size_t>(column(t, "rcs[m^2]"));
    const size_t cv = static_cast<size_t>(column(t, "r_com[bit/s/Hz]"));
    // (k, rcs) -> [(range, rate)], infeasible as -inf.
    std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> curves;
    for (const auto& row : t.rows) {
        const double v = row[cv] == "infeasible" ? -INFINITY : num(row[cv]);
        curves[{num(row[ck]), num(row[cs])}].push_back({num(row[cr]), v});
    }
    bool mono = true;
    for (auto& [key, pts] : curves) {
        std::sort(pts.begin(), pts.end());
        for (size_t i = 1; i < pts.size(); ++i) mono = mono && pts[i].second <= pts[i - 1].second;
    }
    o.require(mono, "R_com non-increasing in range on " + std::to_string(curves.size()) + " curves");
    const auto& ref = curves[{4.0, 0.5}];
    for (auto [range, expect] : {std::pair{600.0, 8.15}, std::pair{800.0, 8.02}}) {
        double got = std::nan("");
        for (auto [r, v] : ref)
            if (r == range) got = v;
        o.require(near_rel(got, expect, 0.10), fmt("%.0f", range) + " m: " + fmt("%.3f", got) + " vs " + fmt("%.2f", expect));
    }
    const double dt = seconds_since(t0);
    o.require(dt < 120, "runtime " + fmt("%.1f", dt) + " s");
    return o;
}

Outcome determinism()
{
    Outcome o;
    std::map<std::string, bool> kinds;
    for (const char* k : kExperimentKinds) kinds[k] = false;
    bool same = true;
    for (const auto& r : recorded) {
        const std::string again = render(r.kind, r.cfg, run_kind(r.kind, r.cfg));
        kinds[r.kind] = true;
        if (again != r.text) {
            same = false;
            o.require(false, r.kind + " differs on rerun");
        }
    }
    bool all = true;
    for (const auto& [k, seen] : kinds) all = all && seen;
    o.require(all, "all " + std::to_string(kinds.size()) + " kinds covered");
    o.require(same, std::to_string(recorded.size()) + " tables byte-identical");
    return o;
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"resolution formulas", resolution},  {"ambiguity nulls", ambiguity_nulls},
        {"radar loop", radar_loop},           {"spectrum", spectrum},
        {"optimizer properties", optimizer},  {"user selection", selection},
        {"BER", ber},                         {"trade-off table", tradeoff},
        {"determinism", determinism},
    };
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::printf("criterion %zu (%s): %s | %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
