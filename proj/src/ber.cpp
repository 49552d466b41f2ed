#include "dfrc/ber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dfrc/array_channel.hpp"
#include "dfrc/parallel.hpp"
#include "dfrc/waveform.hpp"

namespace dfrc {

namespace {

int log2_order(int order)
{
    if (order < 2 || (order & (order - 1)) != 0) throw InvalidArgument("MASK order must be a power of two >= 2");
    int m = 0;
    while ((1 << m) < order) ++m;
    return m;
}

double wrap_phase(double x)
{
    x = std::fmod(x + kPi, 2 * kPi);
    if (x < 0) x += 2 * kPi;
    return x - kPi;
}

cd complex_normal(Rng& rng, double variance)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    double re = n(rng);
    double im = n(rng);
    return {re, im};
}

}  // namespace

std::pair<int, int> rational_index(double h)
{
    if (!(h > 0) || !std::isfinite(h)) throw InvalidArgument("modulation index must be positive");
    for (int q = 1; q <= 64; ++q) {
        double p = std::round(h * q);
        if (p >= 1 && std::abs(h - p / q) < 1e-9) return {static_cast<int>(p), q};
    }
    throw InvalidArgument("modulation index is not a ratio p/q with q <= 64");
}

std::vector<int> viterbi_cpm_detect(std::span<const cd> y, int order, double h, cd channel)
{
    log2_order(order);
    const auto [p, q] = rational_index(h);
    const int states = 2 * q;
    const size_t n = y.size();
    std::vector<cd> points(static_cast<size_t>(states));
    for (int s = 0; s < states; ++s) points[static_cast<size_t>(s)] = channel * std::polar(1.0, kPi * s / q);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> metric(static_cast<size_t>(states), inf), next(static_cast<size_t>(states));
    metric[0] = 0.0;
    std::vector<int> from(n * static_cast<size_t>(states)), level(n * static_cast<size_t>(states));

    for (size_t t = 0; t < n; ++t) {
        std::fill(next.begin(), next.end(), inf);
        for (int s = 0; s < states; ++s) {
            if (metric[static_cast<size_t>(s)] == inf) continue;
            for (int i = 0; i < order; ++i) {
                const int x = 2 * i - (order - 1);
                const int ns = ((s + p * x) % states + states) % states;
                const double m = metric[static_cast<size_t>(s)] + std::norm(y[t] - points[static_cast<size_t>(ns)]);
                if (m < next[static_cast<size_t>(ns)]) {
                    next[static_cast<size_t>(ns)] = m;
                    from[t * states + ns] = s;
                    level[t * states + ns] = x;
                }
            }
        }
        metric.swap(next);
    }

    std::vector<int> symbols(n);
    int s = static_cast<int>(std::min_element(metric.begin(), metric.end()) - metric.begin());
    for (size_t t = n; t-- > 0;) {
        symbols[t] = level[t * states + s];
        s = from[t * states + s];
    }
    return mask_demap(symbols, order);
}

std::vector<int> differential_cpm_detect(std::span<const cd> y, int order, double h, cd channel)
{
    log2_order(order);
    std::vector<int> symbols;
    symbols.reserve(y.size());
    cd prev = channel;
    for (const cd& v : y) {
        const double d = std::arg(v * std::conj(prev));
        int best = 1 - order;
        double err = std::numeric_limits<double>::infinity();
        for (int i = 0; i < order; ++i) {
            const int x = 2 * i - (order - 1);
            const double e = std::abs(wrap_phase(d - kPi * h * x));
            if (e < err) {
                err = e;
                best = x;
            }
        }
        symbols.push_back(best);
        prev = v;
    }
    return mask_demap(symbols, order);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double cpm_ber_kernel(double gamma, int order, double h)
{
    const double shape = 1.0 - std::sin(2 * kPi * h) / (2 * kPi * h);
    return 2.0 * q_function(std::sqrt(log2_order(order) * shape * std::max(0.0, gamma)));
}

InterferenceMoments interference_moments(const SystemConfig& cfg, double target_power, int draws,
                                         std::uint64_t seed)
{
    const int k = cfg.n_users;
    if (k < 1 || draws < 1) throw InvalidArgument("interference_moments: need K >= 1 and draws >= 1");
    const double p_user = (cfg.p_tot - target_power) / k;
    const Direction target{cfg.target_theta, cfg.target_phi};
    Rng rng(seed);
    cd sum = 0.0;
    double sum2 = 0.0;
    long count = 0;
    for (int d = 0; d < draws; ++d) {
        auto users = spawn_users(cfg, k, cfg.cell_radius, rng);
        ChannelSet cs = build_channel_set(users, target, cfg);
        Eigen::MatrixXcd W(cfg.n_t(), k + 1);
        W.col(0) = cs.a_t.adjoint();
        for (int i = 0; i < k; ++i) W.col(i + 1) = cs.H.row(i).adjoint().normalized();
        const Eigen::MatrixXcd S = cs.H * W;
        for (int i = 0; i < k; ++i) {
            cd v = std::sqrt(target_power) * S(i, 0);
            for (int j = 0; j < k; ++j)
                if (j != i) v += std::sqrt(p_user) * S(i, j + 1);
            sum += v;
            sum2 += std::norm(v);
            ++count;
        }
    }
    const cd mean = sum / static_cast<double>(count);
    return {std::abs(mean), std::max(0.0, sum2 / count - std::norm(mean))};
}

GammaDensity sinr_density(const SystemConfig& cfg, double sigma_i, double sigma_k, double p_user)
{
    const double a = cfg.alpha;
    if (!(a > 1.0)) throw InvalidArgument("sinr_density: alpha must exceed 1 for Gamma(1 - 1/alpha)");
    const double s = sigma_i + sigma_k;
    if (!(s > 0)) throw InvalidArgument("sinr_density: zero interference-plus-noise diverges");
    if (!(p_user > 0)) throw InvalidArgument("sinr_density: user power must be positive");
    const double d1 = 1.0;
    const double d2 = cfg.cell_radius / cfg.d_0;
    if (!(d2 > d1)) throw InvalidArgument("sinr_density: cell radius must exceed d_0");
    const double sd = cfg.sigma_delta;

    GammaDensity g;
    g.coeff = std::pow(2 * s * s, -1.0 / a) * std::exp(std::pow(sd, 4) / (a * a)) * q_function(-sd / 2) *
              std::tgamma(1.0 - 1.0 / a) / (a * (d2 - d1));
    g.exponent = -1.0 / a - 1.0;
    const double c = p_user / (2 * s * s);
    g.lo = c * std::pow(d2, -a);
    g.hi = c * std::pow(d1, -a);
    return g;
}

double ber_bound_integral(const GammaDensity& density, int order, double h, int panels)
{
    if (density.lo == density.hi) return density.coeff * cpm_ber_kernel(density.lo, order, h);
    if (!(density.lo > 0) || !(density.hi > density.lo)) throw InvalidArgument("ber_bound_integral: bad support");
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double u0 = std::log(density.lo);
    const double u1 = std::log(density.hi);
    const double du = (u1 - u0) / panels;
    auto f = [&](double u) {
        const double g = std::exp(u);
        return cpm_ber_kernel(g, order, h) * density.coeff * std::exp(u * (density.exponent + 1.0));
    };
    double acc = f(u0) + f(u1);
    for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(u0 + i * du);
    return acc * du / 3.0;
}

std::vector<BerPoint> ber_curve(const SystemConfig& cfg, PrecoderKind kind, std::span<const double> snr_db,
                                const BerOptions& opt)
{
    if (snr_db.empty()) throw InvalidArgument("ber_curve: empty SNR grid");
    const int bps = log2_order(cfg.mask_order);
    rational_index(cfg.mod_index);
    const Direction target{cfg.target_theta, cfg.target_phi};
    const double amp = target_amplitude(cfg, cfg.target_range, cfg.target_rcs);
    MmlmOptions mo;
    mo.nu_max = cfg.nu_max;
    mo.epsilon = cfg.epsilon;

    std::vector<BerPoint> out(snr_db.size());
    parallel_for(snr_db.size(), [&](size_t idx) {
        const double sigma2 = cfg.p_tot * std::pow(10.0, -snr_db[idx] / 10.0);
        double errors = 0, bits = 0;
        for (std::uint64_t drop = 0;
             drop < static_cast<std::uint64_t>(std::max(1, opt.min_drops)) || (errors < opt.min_errors && bits < opt.max_bits);
             ++drop) {
            Rng geo(derive_seed(cfg.seed, drop));
            auto candidates = spawn_users(cfg, cfg.n_candidates, cfg.cell_radius, geo);
            SelectionResult sel = smi_select(candidates, cfg.n_users, cfg, target);
            std::vector<UserRecord> users;
            for (int id : sel.chosen)
                for (const auto& u : candidates)
                    if (u.id == id) users.push_back(u);
            ChannelSet cs = build_channel_set(users, target, cfg);
            DesignProblem prob = make_problem(cs, cfg, amp);
            prob.sigma2 = sigma2;
            prob.sigma_k2 = Eigen::VectorXd::Constant(cs.H.rows(), sigma2);
            prob.fixed_target_power = cfg.target_power_fraction * cfg.p_tot;
            prob.rho_user = prob.rho_target = 0.0;
            const MmlmResult res = design(prob, kind, mo);
            const Eigen::MatrixXcd S = cs.H * res.state.effective();
            const int k = static_cast<int>(cs.H.rows());
            const int streams = k + 1;

            Rng sym(derive_seed(derive_seed(cfg.seed, drop), idx + 1));
            std::bernoulli_distribution coin(0.5);
            std::vector<std::vector<int>> tx_bits(static_cast<size_t>(streams));
            std::vector<std::vector<cd>> chips(static_cast<size_t>(streams));
            std::vector<cd> y(static_cast<size_t>(cfg.n_symbols));
            for (int b = 0; b < opt.blocks_per_drop; ++b) {
                for (int j = 0; j < streams; ++j) {
                    auto& tb = tx_bits[static_cast<size_t>(j)];
                    tb.resize(static_cast<size_t>(cfg.n_symbols * bps));
                    for (int& v : tb) v = coin(sym) ? 1 : 0;
                    chips[static_cast<size_t>(j)] = cpm_modulate(mask_map(tb, cfg.mask_order), cfg.mod_index).samples;
                }
                for (int u = 0; u < k; ++u) {
                    for (int n = 0; n < cfg.n_symbols; ++n) {
                        cd v = complex_normal(sym, sigma2);
                        for (int j = 0; j < streams; ++j) v += S(u, j) * chips[static_cast<size_t>(j)][static_cast<size_t>(n)];
                        y[static_cast<size_t>(n)] = v;
                    }
                    auto rx = viterbi_cpm_detect(y, cfg.mask_order, cfg.mod_index, S(u, u + 1));
                    const auto& ref = tx_bits[static_cast<size_t>(u + 1)];
                    for (size_t i = 0; i < rx.size(); ++i) errors += rx[i] != ref[i];
                    bits += static_cast<double>(rx.size());
                }
            }
        }
        BerPoint pt;
        pt.snr_db = snr_db[idx];
        pt.bits_simulated = bits;
        pt.ber = bits > 0 ? errors / bits : 0.0;
        pt.ci95 = bits > 0 ? 1.96 * std::sqrt(pt.ber * (1.0 - pt.ber) / bits) : 0.0;
        out[idx] = pt;
    });
    return out;
}

std::vector<BerPoint> ber_upper_bound(const SystemConfig& cfg, std::span<const double> snr_db, const BerOptions& opt)
{
    if (snr_db.empty()) throw InvalidArgument("ber_upper_bound: empty SNR grid");
    const double pt = cfg.target_power_fraction * cfg.p_tot;
    const double p_user = (cfg.p_tot - pt) / cfg.n_users;
    const InterferenceMoments mom = interference_moments(cfg, pt, opt.moment_draws, derive_seed(cfg.seed, 0x1b0d));
    std::vector<BerPoint> out;
    for (double snr : snr_db) {
        const double sigma_k2 = cfg.p_tot * std::pow(10.0, -snr / 10.0);
        const GammaDensity g = sinr_density(cfg, std::sqrt(mom.variance), std::sqrt(sigma_k2), p_user);
        BerPoint p;
        p.snr_db = snr;
        p.ber = std::min(1.0, ber_bound_integral(g, cfg.mask_order, cfg.mod_index));
        out.push_back(p);
    }
    return out;
}

}  // namespace dfrc
