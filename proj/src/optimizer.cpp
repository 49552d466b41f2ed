#include "dfrc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace dfrc {

namespace {

constexpr double kLog2e = 1.4426950408889634;

double threshold(double rho) { return std::exp2(rho) - 1.0; }

// Per-stream SINRs [gamma_T, gamma_1 .. gamma_K].
Eigen::VectorXd stream_gammas(const DesignProblem& prob, const PrecoderState& s)
{
    const int k = prob.users();
    Eigen::VectorXd g(k + 1);
    for (int i = 0; i < k; ++i) g(i + 1) = sinr_user(i, prob.H, s, prob.sigma_k2(i));
    g(0) = sinr_target(s.V, prob.Z, s.effective(), prob.A_K, prob.sigma2, prob.e_rad);
    return g;
}

double processor_noise(const DesignProblem& prob, const Eigen::RowVectorXcd& V)
{
    double d = prob.sigma2 * V.squaredNorm();
    if (prob.A_K.cols() > 0) d += (V * prob.A_K).squaredNorm();
    return d;
}

Eigen::VectorXcd unit(const Eigen::VectorXcd& v)
{
    double n = v.norm();
    if (n == 0.0) throw InvalidArgument("zero-norm beam");
    return v / n;
}

// Rotate b so that <a, b> is real and non-negative.
template <class V>
V align_phase(const V& b, const V& a)
{
    cd c = (a.adjoint() * b)(0, 0);
    if (std::abs(c) == 0.0) return b;
    return b * (std::conj(c) / std::abs(c));
}

}  // namespace

double target_amplitude(const SystemConfig& cfg, double range, double rcs)
{
    return std::sqrt(radar_path_loss(range, cfg) * rcs);
}

DesignProblem make_problem(const ChannelSet& cs, const SystemConfig& cfg, double target_amp)
{
    DesignProblem p;
    p.H = cs.H;
    const double tau = 2.0 * cfg.target_range / kSpeedOfLight;
    const double phase = 2 * kPi * cfg.f_c * tau + kPi * cfg.mu * tau * tau;
    p.Z = target_amp * std::polar(1.0, phase) * cs.A;
    p.A_K = cs.A_K;
    p.a_t = cs.a_t;
    p.sigma_k2 = Eigen::VectorXd::Constant(cs.H.rows(), cfg.ue_noise_power);
    p.sigma2 = cfg.noise_power;
    p.e_rad = cfg.n_symbols;
    p.p_tot = cfg.p_tot;
    p.rho_user = cfg.rho_user;
    p.rho_target = cfg.rho_target;
    return p;
}

double RateReport::max_residual() const
{
    double r = std::max(residual_target, residual_power);
    for (double v : residual_users) r = std::max(r, v);
    return r;
}

double sinr_user(int k, const Eigen::MatrixXcd& H, const PrecoderState& state, double sigma_k2)
{
    if (k < 0 || k >= H.rows() || state.W.cols() != H.rows() + 1 || state.W.rows() != H.cols())
        throw InvalidArgument("sinr_user: dimension mismatch");
    const Eigen::RowVectorXcd s = H.row(k) * state.W;
    double signal = 0.0, interference = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        double p = std::max(0.0, state.P(j)) * std::norm(s(j));
        if (j == k + 1) signal = p;
        else interference += p;
    }
    return signal / (interference + sigma_k2);
}

double sinr_target(const Eigen::RowVectorXcd& V, const Eigen::MatrixXcd& Z, const Eigen::MatrixXcd& W_eff,
                   const Eigen::MatrixXcd& A_K, double sigma2, double e_rad)
{
    if (V.squaredNorm() == 0.0) throw InvalidArgument("sinr_target: V must be non-zero");
    double num = (V * Z * W_eff).squaredNorm();
    double den = sigma2 * V.squaredNorm();
    if (A_K.cols() > 0) den += (V * A_K).squaredNorm();
    return e_rad * num / den;
}

RateReport sum_rate(const DesignProblem& prob, const PrecoderState& state)
{
    RateReport r;
    Eigen::VectorXd g = stream_gammas(prob, state);
    const double thr_u = threshold(prob.rho_user);
    for (int k = 0; k < prob.users(); ++k) {
        r.gamma_users.push_back(g(k + 1));
        r.r_com += std::log2(1.0 + g(k + 1));
        r.residual_users.push_back(std::max(0.0, thr_u - g(k + 1)));
    }
    r.gamma_target = g(0);
    if (prob.radar_stream) {
        r.r_rad = std::log2(1.0 + g(0));
        r.residual_target = std::max(0.0, threshold(prob.rho_target) - g(0));
    }
    r.r_sum = r.r_com + r.r_rad;
    r.residual_power = std::max(0.0, state.P.sum() - prob.p_tot * (1.0 + 1e-12));
    return r;
}

double log2_det_rate(std::span<const double> gammas)
{
    const Eigen::Index n = static_cast<Eigen::Index>(gammas.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) += gammas[static_cast<size_t>(i)];
    return std::log2(m.determinant());
}

// ---------------------------------------------------------------- selection

SelectionScorer::SelectionScorer(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                                 const Direction& scan)
{
    if (candidates.empty()) throw InvalidArgument("selection: empty candidate set");
    if (k < 1) throw InvalidArgument("selection: K must be >= 1");
    const int u = static_cast<int>(candidates.size());
    Eigen::MatrixXcd H(u, cfg.n_t());
    for (int i = 0; i < u; ++i) {
        H.row(i) = channel_row(candidates[static_cast<size_t>(i)], cfg);
        ids_.push_back(candidates[static_cast<size_t>(i)].id);
    }
    Eigen::MatrixXcd W = H.adjoint();
    for (int j = 0; j < u; ++j) W.col(j).normalize();
    cross_ = (H * W).cwiseAbs2();
    const Eigen::RowVectorXcd a_t = steering(scan, tx_geometry(cfg), cfg.wavelength());
    target_ = (H * a_t.adjoint()).cwiseAbs2();
    power_ = cfg.p_tot / (k + 1);
    noise_ = cfg.ue_noise_power;
}

double SelectionScorer::rate(std::span<const int> subset) const
{
    double r = 0.0;
    for (int i : subset) {
        double interf = target_(i);
        for (int j : subset)
            if (j != i) interf += cross_(i, j);
        r += std::log2(1.0 + power_ * cross_(i, i) / (power_ * interf + noise_));
    }
    return r;
}

SelectionResult smi_select(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                           const Direction& scan)
{
    SelectionScorer scorer(candidates, k, cfg, scan);
    const int u = scorer.size();
    SelectionResult res;
    std::vector<int> chosen;
    if (u <= k) {
        chosen.resize(static_cast<size_t>(u));
        std::iota(chosen.begin(), chosen.end(), 0);
        res.rate = scorer.rate(chosen);
        res.trace.push_back(res.rate);
    } else {
        std::vector<bool> used(static_cast<size_t>(u), false);
        double c_delta = 0.0;
        for (int round = 0; round < k; ++round) {
            double best = -std::numeric_limits<double>::infinity();
            int arg = -1;
            std::vector<int> trial = chosen;
            trial.push_back(0);
            for (int q = 0; q < u; ++q) {
                if (used[static_cast<size_t>(q)]) continue;
                trial.back() = q;
                double c = scorer.rate(trial);
                if (c > best) {  // strict: the lowest index wins ties
                    best = c;
                    arg = q;
                }
            }
            res.trace.push_back(best);
            if (!(best > c_delta)) break;
            c_delta = best;
            chosen.push_back(arg);
            used[static_cast<size_t>(arg)] = true;
        }
        res.rate = c_delta;
    }
    for (int idx : chosen) res.chosen.push_back(scorer.id(idx));
    return res;
}

namespace {

double binomial(int n, int r)
{
    if (r < 0 || r > n) return 0.0;
    double b = 1.0;
    for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
    return b;
}

}  // namespace

SelectionResult traversal_select(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                                 const Direction& scan, double max_subsets)
{
    SelectionScorer scorer(candidates, k, cfg, scan);
    const int u = scorer.size();
    SelectionResult res;
    if (u <= k) {
        std::vector<int> all(static_cast<size_t>(u));
        std::iota(all.begin(), all.end(), 0);
        res.rate = scorer.rate(all);
        res.trace.push_back(res.rate);
        for (int idx : all) res.chosen.push_back(scorer.id(idx));
        return res;
    }
    double count = 0.0;
    for (int r = 1; r <= k; ++r) count += binomial(u, r);
    if (count > max_subsets) throw GuardExceeded("traversal_select: subset count exceeds guard");

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_set;
    // Sizes ascending, lexicographic within a size; strict improvement keeps the first maximiser.
    for (int r = 1; r <= k; ++r) {
        std::vector<int> idx(static_cast<size_t>(r));
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            double c = scorer.rate(idx);
            if (c > best) {
                best = c;
                best_set = idx;
            }
            int pos = r - 1;
            while (pos >= 0 && idx[static_cast<size_t>(pos)] == u - r + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<size_t>(pos)];
            for (int q = pos + 1; q < r; ++q) idx[static_cast<size_t>(q)] = idx[static_cast<size_t>(q - 1)] + 1;
        }
    }
    res.rate = best;
    res.trace.push_back(best);
    for (int i : best_set) res.chosen.push_back(scorer.id(i));
    return res;
}

double smi_multiplies(int u, int k) { return static_cast<double>(u) * k; }
double traversal_multiplies(int u, int k) { return std::pow(static_cast<double>(u), k); }

// ---------------------------------------------------------------- MM pieces

double surrogate_value(std::span<const double> gamma, std::span<const double> gamma0)
{
    if (gamma.size() != gamma0.size()) throw InvalidArgument("surrogate_value: size mismatch");
    double v = 0.0;
    for (size_t i = 0; i < gamma.size(); ++i) {
        if (gamma[i] < 0 || gamma0[i] < 0) throw InvalidArgument("surrogate_value: negative SINR");
        double a = 1.0 + gamma0[i];
        v += -std::log2(a) + kLog2e * (a / (1.0 + gamma[i]) - 1.0);
    }
    return v;
}

double lagrangian(const DesignProblem& prob, const PrecoderState& state, const Eigen::VectorXd& eta)
{
    Eigen::VectorXd g = stream_gammas(prob, state);
    return ((Eigen::VectorXd::Ones(g.size()) + eta).array() * g.array()).sum();
}

Eigen::VectorXcd kkt_grad_w(int col, const DesignProblem& prob, const PrecoderState& state,
                            const Eigen::VectorXd& eta)
{
    const int k = prob.users();
    if (col < 0 || col > k || eta.size() != k + 1) throw InvalidArgument("kkt_grad_w: bad column or eta");
    const Eigen::VectorXd& P = state.P;
    const Eigen::VectorXcd wj = state.W.col(col);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(prob.n_t());

    // Radar term.
    const Eigen::RowVectorXcd vz = state.V * prob.Z;
    const double den_t = processor_noise(prob, state.V);
    g += (1.0 + eta(0)) * prob.e_rad * P(col) / den_t * vz.adjoint() * (vz * wj)(0);

    // User terms.
    const Eigen::MatrixXcd S = prob.H * state.W;
    for (int i = 0; i < k; ++i) {
        double d = prob.sigma_k2(i);
        for (int l = 0; l <= k; ++l)
            if (l != i + 1) d += P(l) * std::norm(S(i, l));
        const double gam = P(i + 1) * std::norm(S(i, i + 1)) / d;
        const Eigen::VectorXcd hh = prob.H.row(i).adjoint();
        if (col == i + 1) g += (1.0 + eta(i + 1)) * P(col) / d * hh * S(i, col);
        else g -= (1.0 + eta(i + 1)) * gam * P(col) / d * hh * S(i, col);
    }
    return g;
}

Eigen::VectorXcd kkt_grad_v(const DesignProblem& prob, const PrecoderState& state, double eta_t)
{
    const Eigen::MatrixXcd We = state.effective();
    const Eigen::MatrixXcd zw = prob.Z * We;
    const Eigen::MatrixXcd Q1 = zw * zw.adjoint();
    Eigen::MatrixXcd Q2 = prob.sigma2 * Eigen::MatrixXcd::Identity(prob.n_r(), prob.n_r());
    if (prob.A_K.cols() > 0) Q2 += prob.A_K * prob.A_K.adjoint();
    const Eigen::VectorXcd v = state.V.adjoint();
    const double a = (v.adjoint() * Q1 * v)(0, 0).real();
    const double b = (v.adjoint() * Q2 * v)(0, 0).real();
    return (1.0 + eta_t) * prob.e_rad * (Q1 * v * b - a * (Q2 * v)) / (b * b);
}

Eigen::RowVectorXcd optimal_processor(const DesignProblem& prob, const Eigen::MatrixXcd& W_eff,
                                      const Eigen::RowVectorXcd& previous)
{
    const Eigen::MatrixXcd zw = prob.Z * W_eff;
    const Eigen::MatrixXcd Q1 = zw * zw.adjoint();
    Eigen::MatrixXcd Q2 = prob.sigma2 * Eigen::MatrixXcd::Identity(prob.n_r(), prob.n_r());
    if (prob.A_K.cols() > 0) Q2 += prob.A_K * prob.A_K.adjoint();

    Eigen::RowVectorXcd prev = previous;
    if (prev.size() != prob.n_r() || prev.squaredNorm() == 0.0)
        prev = Eigen::RowVectorXcd::Ones(prob.n_r());
    prev.normalize();
    if (Q1.norm() == 0.0) return prev;

    // Q1 = zw zw^H has rank <= 1 here (Z is rank one); the generalised
    // eigenvector is then Q2^-1 times the range vector of Q1.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(Q1, Q2);
    Eigen::VectorXcd x = ges.eigenvectors().col(prob.n_r() - 1);
    Eigen::RowVectorXcd V = x.adjoint();
    V.normalize();
    return align_phase<Eigen::VectorXcd>(V.transpose(), prev.transpose()).transpose();
}

Eigen::MatrixXcd update_precoder(const DesignProblem& prob, const PrecoderState& state,
                                 const Eigen::VectorXd& weights, double damping, int max_steps)
{
    const int k = prob.users();
    const int nt = prob.n_t();
    Eigen::MatrixXcd W = state.W;
    const Eigen::VectorXd& P = state.P;
    const Eigen::RowVectorXcd vz = state.V * prob.Z;
    const Eigen::VectorXcd u = vz.adjoint();
    const double den_t = processor_noise(prob, state.V);
    std::vector<Eigen::MatrixXcd> hh(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) hh[static_cast<size_t>(i)] = prob.H.row(i).adjoint() * prob.H.row(i);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
    for (int step = 0; step < max_steps; ++step) {
        const Eigen::MatrixXcd Wold = W;
        const Eigen::MatrixXcd S = prob.H * W;
        Eigen::VectorXd d(k), gam(k);
        for (int i = 0; i < k; ++i) {
            d(i) = prob.sigma_k2(i);
            for (int l = 0; l <= k; ++l)
                if (l != i + 1) d(i) += P(l) * std::norm(S(i, l));
            gam(i) = P(i + 1) * std::norm(S(i, i + 1)) / d(i);
        }
        for (int j = 0; j <= k; ++j) {
            if (P(j) <= 0.0) continue;  // column carries no power; leave it
            Eigen::MatrixXcd M = (weights(0) * prob.e_rad * P(j) / den_t) * (u * u.adjoint());
            for (int i = 0; i < k; ++i) {
                const double c = j == i + 1 ? weights(i + 1) * P(j) / d(i)
                                            : -weights(i + 1) * gam(i) * P(j) / d(i);
                M += c * hh[static_cast<size_t>(i)];
            }
            es.compute(M);
            Eigen::VectorXcd w = es.eigenvectors().col(nt - 1);
            w = align_phase<Eigen::VectorXcd>(w, Wold.col(j));
            Eigen::VectorXcd mixed = damping * Wold.col(j) + (1.0 - damping) * w;
            if (mixed.norm() < 1e-12) mixed = w;
            W.col(j) = unit(mixed);
        }
        if ((W - Wold).norm() < 1e-10) break;
    }
    return W;
}

Eigen::VectorXd water_fill(const Eigen::VectorXd& gains, double p_tot, const Eigen::VectorXd& floors,
                           WaterFillObjective objective)
{
    const Eigen::Index n = gains.size();
    if (floors.size() != n) throw InvalidArgument("water_fill: floors size mismatch");
    if (!(p_tot >= 0)) throw InvalidArgument("water_fill: p_tot must be non-negative");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(gains(i) >= 0) || !std::isfinite(gains(i))) throw InvalidArgument("water_fill: gains must be finite and >= 0");
        if (!(floors(i) >= 0)) throw InvalidArgument("water_fill: floors must be >= 0");
    }
    if (n == 0) return Eigen::VectorXd();

    const double fsum = floors.sum();
    if (fsum > p_tot * (1.0 + 1e-12)) {
        Eigen::Index worst;
        floors.maxCoeff(&worst);
        std::ostringstream msg;
        msg << "water_fill: C3 total power binding (floors sum to " << fsum << " > p_tot " << p_tot
            << "); largest floor is stream " << worst << (worst == 0 ? " (C2 target)" : " (C1 user)");
        throw Infeasible(msg.str());
    }
    Eigen::VectorXd p = floors;
    const double residual = p_tot - fsum;
    if (residual <= 0.0) return p;

    if (objective == WaterFillObjective::Linear) {
        const double gmax = gains.maxCoeff();
        std::vector<Eigen::Index> best;
        for (Eigen::Index i = 0; i < n; ++i)
            if (gains(i) >= gmax * (1.0 - 1e-12)) best.push_back(i);
        for (Eigen::Index i : best) p(i) += residual / static_cast<double>(best.size());
        return p;
    }

    // P_i = max(floor_i, nu - 1/g_i); find the water level nu by bisection,
    // then solve it exactly on the resulting active set.
    auto inv = [&](Eigen::Index i) { return gains(i) > 0 ? 1.0 / gains(i) : std::numeric_limits<double>::infinity(); };
    auto total = [&](double nu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += std::max(floors(i), nu - inv(i));
        return s;
    };
    double lo = 0.0, hi = p_tot;
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::isfinite(inv(i))) hi = std::max(hi, p_tot + floors(i) + inv(i));
    if (!(gains.maxCoeff() > 0)) {
        p += Eigen::VectorXd::Constant(n, residual / n);  // no useful stream; spread evenly
        return p;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (total(mid) > p_tot ? hi : lo) = mid;
    }
    const double nu0 = 0.5 * (lo + hi);
    double fixed = 0.0, inv_sum = 0.0;
    int active = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (nu0 - inv(i) > floors(i)) {
            ++active;
            inv_sum += inv(i);
        } else {
            fixed += floors(i);
        }
    }
    if (active == 0) return p;
    const double nu = (p_tot - fixed + inv_sum) / active;
    for (Eigen::Index i = 0; i < n; ++i) p(i) = nu0 - inv(i) > floors(i) ? nu - inv(i) : floors(i);
    return p;
}

Eigen::VectorXd allocate_power(const DesignProblem& prob, const PrecoderState& state)
{
    const int k = prob.users();
    Eigen::VectorXd P = state.P;
    if (k == 0) {
        P(0) = prob.radar_stream ? prob.p_tot : 0.0;
        return P;
    }
    const Eigen::MatrixXcd S = prob.H * state.W;
    Eigen::VectorXd g(k + 1), floors = Eigen::VectorXd::Zero(k + 1);
    const double thr_u = threshold(prob.rho_user);
    for (int i = 0; i < k; ++i) {
        double d = prob.sigma_k2(i);
        for (int l = 0; l <= k; ++l)
            if (l != i + 1) d += state.P(l) * std::norm(S(i, l));
        g(i + 1) = std::norm(S(i, i + 1)) / d;
        if (thr_u > 0) {
            if (g(i + 1) <= 0) throw Infeasible("allocate_power: C1 user " + std::to_string(i) + " has zero gain");
            floors(i + 1) = thr_u / g(i + 1);
        }
    }
    const double den_t = processor_noise(prob, state.V);
    g(0) = prob.e_rad * std::norm((state.V * prob.Z * state.W.col(0))(0)) / den_t;
    const double thr_t = threshold(prob.rho_target);
    if (prob.radar_stream && thr_t > 0) {
        if (g(0) <= 0) throw Infeasible("allocate_power: C2 target has zero gain");
        floors(0) = thr_t / g(0);
    }

    if (!prob.radar_stream || prob.fixed_target_power >= 0) {
        const double pt = prob.radar_stream ? prob.fixed_target_power : 0.0;
        if (pt > prob.p_tot) throw Infeasible("allocate_power: fixed target power exceeds p_tot");
        Eigen::VectorXd pu = water_fill(g.tail(k), prob.p_tot - pt, floors.tail(k));
        P(0) = pt;
        P.tail(k) = pu;
        return P;
    }
    return water_fill(g, prob.p_tot, floors);
}

std::string MmlmTrace::to_lines() const
{
    std::ostringstream out;
    out << std::setprecision(12);
    for (const auto& r : records)
        out << r.iteration << ',' << r.r_sum << ',' << r.surrogate << ',' << r.residual << '\n';
    return out.str();
}

PrecoderState initial_state(const DesignProblem& prob)
{
    const int k = prob.users();
    PrecoderState s;
    s.W.resize(prob.n_t(), k + 1);
    s.W.col(0) = unit(prob.a_t.adjoint());
    for (int i = 0; i < k; ++i) s.W.col(i + 1) = unit(prob.H.row(i).adjoint());
    s.P = Eigen::VectorXd::Zero(k + 1);
    if (!prob.radar_stream) {
        if (k > 0) s.P.tail(k).setConstant(prob.p_tot / k);
    } else if (prob.fixed_target_power >= 0) {
        s.P(0) = prob.fixed_target_power;
        if (k > 0) s.P.tail(k).setConstant((prob.p_tot - prob.fixed_target_power) / k);
    } else {
        s.P.setConstant(prob.p_tot / (k + 1));
    }
    s.V = optimal_processor(prob, s.effective(), Eigen::RowVectorXcd());
    return s;
}

namespace {

double r_sum_of(const DesignProblem& prob, const PrecoderState& s) { return sum_rate(prob, s).r_sum; }

MmlmRecord make_record(int it, const PrecoderState& s, double surrogate, const RateReport& rep)
{
    return {it, s.W, s.V, s.P, surrogate, rep.r_sum, rep.max_residual()};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// (constraint violation, -r_sum); smaller is better. Violations below 1e-9 count as zero.
std::pair<double, double> rank_key(const DesignProblem& prob, const PrecoderState& s)
{
    const RateReport r = sum_rate(prob, s);
    const double v = r.max_residual();
    return {v > 1e-9 ? v : 0.0, -r.r_sum};
}

// Power update for fixed W, V. Floors depend on the interference the new
// powers create, so repeat while a floor is still missed. Empty when no
// power split meets the floors at this W, V.
std::optional<PrecoderState> power_step(const DesignProblem& prob, const PrecoderState& from)
{
    PrecoderState s = from;
    try {
        for (int rep = 0; rep < 5; ++rep) {
            s.P = allocate_power(prob, s);
            if (sum_rate(prob, s).max_residual() <= 1e-9) break;
        }
    } catch (const Infeasible&) {
        return std::nullopt;
    }
    return s;
}

}  // namespace

MmlmResult mmlm(const DesignProblem& prob, const MmlmOptions& opt)
{
    const int k = prob.users();
    MmlmResult res;
    PrecoderState cur = initial_state(prob);
    RateReport rep = sum_rate(prob, cur);
    {
        auto g = to_std(stream_gammas(prob, cur));
        res.trace.records.push_back(make_record(0, cur, surrogate_value(g, g), rep));
    }
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(k + 1);
    const Eigen::VectorXd thr = [&] {
        Eigen::VectorXd t = Eigen::VectorXd::Constant(k + 1, threshold(prob.rho_user));
        t(0) = threshold(prob.rho_target);
        return t;
    }();

    for (int it = 1; it <= opt.nu_max; ++it) {
        const Eigen::VectorXd g0 = stream_gammas(prob, cur);

        // V, then W, then P.
        PrecoderState sv = cur;
        sv.V = optimal_processor(prob, cur.effective(), cur.V);
        PrecoderState sw = sv;
        // The majorizer is re-anchored at every inner step so the weights track
        // the current SINRs; a single Jacobi sweep per anchor.
        for (int step = 0; step < opt.inner_steps; ++step) {
            const Eigen::VectorXd gs = stream_gammas(prob, sw);
            Eigen::VectorXd ws = (Eigen::VectorXd::Ones(k + 1) + eta).array() / (1.0 + gs.array());
            if (!prob.radar_stream) ws(0) = 0.0;
            const Eigen::MatrixXcd prev = sw.W;
            sw.W = update_precoder(prob, sw, ws, opt.damping, 1);
            if ((sw.W - prev).norm() < 1e-10) break;
        }
        std::vector<PrecoderState> cands{sv, sw};
        for (const PrecoderState* base : {&sw, &sv}) {
            if (auto ps = power_step(prob, *base)) cands.push_back(*ps);
        }

        // Keep the best of the full step and its partial updates. Feasibility
        // ranks first; among feasible points the V-only step never lowers
        // r_sum, so the sequence is monotone.
        const PrecoderState* best = &cands[0];
        std::pair<double, double> best_key = rank_key(prob, *best);
        for (const PrecoderState& c : cands) {
            auto key = rank_key(prob, c);
            if (key < best_key) {
                best_key = key;
                best = &c;
            }
        }
        const double dW = (best->W - cur.W).squaredNorm();
        const double dV = (best->V - cur.V).squaredNorm();
        const double dP = (best->P - cur.P).squaredNorm() / (prob.p_tot * prob.p_tot);
        cur = *best;
        rep = sum_rate(prob, cur);

        const Eigen::VectorXd g1 = stream_gammas(prob, cur);
        const double step = 0.1 / std::sqrt(static_cast<double>(it));
        for (int j = 0; j <= k; ++j)
            eta(j) = std::clamp(eta(j) + step * (g1(j) - thr(j)) / (1.0 + thr(j)), -1.0, 0.0);

        std::vector<double> a = to_std(g1), b = to_std(g0);
        if (!prob.radar_stream) a[0] = b[0] = 0.0;
        res.trace.records.push_back(make_record(it, cur, surrogate_value(a, b), rep));
        res.trace.iterations = it;
        // A power-only step leaves W and V in place, so P must settle as well.
        if (dW < opt.epsilon && dV < opt.epsilon && dP < opt.epsilon) {
            res.trace.reason = Termination::Converged;
            break;
        }
    }
    if (rep.max_residual() > 1e-6) {
        std::ostringstream msg;
        msg << "mmlm: constraints C1-C3 violated by " << rep.max_residual() << " at termination";
        throw Infeasible(msg.str());
    }
    res.state = cur;
    res.report = rep;
    return res;
}

// ---------------------------------------------------------------- baselines

PrecoderKind parse_precoder_kind(const std::string& s)
{
    if (s == "mrt" || s == "MRT") return PrecoderKind::MRT;
    if (s == "zf" || s == "ZF") return PrecoderKind::ZF;
    if (s == "mmse" || s == "MMSE") return PrecoderKind::MMSE;
    if (s == "mmlm" || s == "MMLM") return PrecoderKind::MMLM;
    throw InvalidArgument("unknown precoder kind '" + s + "'");
}

std::string to_string(PrecoderKind k)
{
    switch (k) {
    case PrecoderKind::MRT: return "mrt";
    case PrecoderKind::ZF: return "zf";
    case PrecoderKind::MMSE: return "mmse";
    case PrecoderKind::MMLM: return "mmlm";
    }
    return "?";
}

BaselineResult baseline_precoders(const Eigen::MatrixXcd& H, PrecoderKind kind, double sigma2, double p_tot)
{
    const Eigen::Index k = H.rows();
    if (k > H.cols()) throw InvalidArgument("baseline_precoders: K exceeds N_t");
    BaselineResult out;
    const Eigen::MatrixXcd Hh = H.adjoint();
    switch (kind) {
    case PrecoderKind::MRT:
        out.W = Hh;
        break;
    case PrecoderKind::ZF: {
        const Eigen::MatrixXcd G = H * Hh;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(G);
        if (cod.rank() < k) {
            out.used_pinv = true;
            out.W = Hh * cod.pseudoInverse();
        } else {
            out.W = Hh * G.ldlt().solve(Eigen::MatrixXcd::Identity(k, k));
        }
        break;
    }
    case PrecoderKind::MMSE: {
        const Eigen::MatrixXcd G =
            H * Hh + (static_cast<double>(k) * sigma2 / p_tot) * Eigen::MatrixXcd::Identity(k, k);
        out.W = Hh * G.ldlt().solve(Eigen::MatrixXcd::Identity(k, k));
        break;
    }
    case PrecoderKind::MMLM:
        throw InvalidArgument("baseline_precoders: MMLM is not a closed-form precoder");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        double n = out.W.col(j).norm();
        if (n > 0) out.W.col(j) /= n;
    }
    return out;
}

MmlmResult design_baseline(const DesignProblem& prob, PrecoderKind kind)
{
    const int k = prob.users();
    PrecoderState s = initial_state(prob);
    if (k > 0) {
        const double noise = prob.sigma_k2.size() ? prob.sigma_k2.mean() : prob.sigma2;
        s.W.rightCols(k) = baseline_precoders(prob.H, kind, noise, prob.p_tot).W;
    }
    s.V = optimal_processor(prob, s.effective(), s.V);

    MmlmResult res;
    PrecoderState best = s;
    double best_r = r_sum_of(prob, s);
    res.trace.records.push_back(make_record(0, s, 0.0, sum_rate(prob, s)));
    // Water-filling against interference that depends on P: iterate and keep the best point.
    for (int it = 1; it <= 20; ++it) {
        s.P = allocate_power(prob, s);
        s.V = optimal_processor(prob, s.effective(), s.V);
        double r = r_sum_of(prob, s);
        if (r > best_r) {
            best_r = r;
            best = s;
        }
        res.trace.records.push_back(make_record(it, s, 0.0, sum_rate(prob, s)));
        res.trace.iterations = it;
    }
    res.state = best;
    res.report = sum_rate(prob, best);
    return res;
}

MmlmResult design(const DesignProblem& prob, PrecoderKind kind, const MmlmOptions& opt)
{
    if (kind == PrecoderKind::MMLM) return mmlm(prob, opt);
    return design_baseline(prob, kind);
}

}  // namespace dfrc
