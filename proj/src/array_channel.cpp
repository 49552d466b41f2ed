#include "dfrc/array_channel.hpp"

#include <cmath>

namespace dfrc {

ArrayGeometry tx_geometry(const SystemConfig& cfg)
{
    return {cfg.n_tx, cfg.n_ty, cfg.d_x, cfg.d_y};
}

ArrayGeometry rx_geometry(const SystemConfig& cfg)
{
    return {cfg.n_rx, cfg.n_ry, cfg.d_x, cfg.d_y};
}

Eigen::RowVectorXcd steering(const Direction& dir, const ArrayGeometry& geo, double wavelength)
{
    const double ux = std::cos(dir.theta) * std::cos(dir.phi);
    const double uy = std::cos(dir.theta) * std::sin(dir.phi);
    const double norm = 1.0 / std::sqrt(static_cast<double>(geo.size()));
    Eigen::RowVectorXcd a(geo.size());
    for (int iy = 0; iy < geo.ny; ++iy) {
        for (int ix = 0; ix < geo.nx; ++ix) {
            double ph = 2 * kPi * (ix * geo.dx * ux + iy * geo.dy * uy) / wavelength;
            a(iy * geo.nx + ix) = std::polar(norm, ph);
        }
    }
    return a;
}

double large_scale_gain(const UserRecord& user, const SystemConfig& cfg)
{
    return std::sqrt(std::pow(user.distance / cfg.d_0, -cfg.alpha) * user.shadow);
}

Eigen::RowVectorXcd channel_row(const UserRecord& user, const SystemConfig& cfg)
{
    if (user.distance < cfg.d_0) throw InvalidArgument("channel_row: distance below d_0");
    return large_scale_gain(user, cfg) * steering(user.direction, tx_geometry(cfg), cfg.wavelength());
}

ChannelSet build_channel_set(std::span<const UserRecord> users, const Direction& target_dir,
                             const SystemConfig& cfg)
{
    const int k = static_cast<int>(users.size());
    const double lambda = cfg.wavelength();
    ChannelSet cs;
    cs.H.resize(k, cfg.n_t());
    cs.A_K.resize(cfg.n_r(), k);
    cs.gains.resize(k);
    for (int i = 0; i < k; ++i) {
        const UserRecord& u = users[static_cast<size_t>(i)];
        cs.H.row(i) = channel_row(u, cfg);
        cs.A_K.col(i) = steering(u.direction, rx_geometry(cfg), lambda).transpose();
        cs.gains(i) = large_scale_gain(u, cfg);
        cs.user_ids.push_back(u.id);
    }
    cs.a_t = steering(target_dir, tx_geometry(cfg), lambda);
    cs.a_r = steering(target_dir, rx_geometry(cfg), lambda);
    cs.A = cs.a_r.transpose() * cs.a_t;
    return cs;
}

double radar_path_loss(double range, const SystemConfig& cfg)
{
    const double lambda = cfg.wavelength();
    const double fourpi = 4 * kPi;
    return std::pow(10.0, cfg.radar_link_gain_db / 10.0) * lambda * lambda /
           (fourpi * fourpi * fourpi * std::pow(range, 4));
}

EchoParams make_echo(double range, double velocity, double rcs, const SystemConfig& cfg)
{
    EchoParams e;
    e.tau = 2.0 * range / kSpeedOfLight;
    e.f_d = 2.0 * velocity / cfg.wavelength();
    e.rcs = rcs;
    e.gain = std::sqrt(radar_path_loss(range, cfg) * rcs);
    return e;
}

namespace {

void add_noise(std::vector<cd>& y, double noise_power, Rng& rng)
{
    if (noise_power <= 0) return;
    std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2));
    for (cd& v : y) {
        const double re = n(rng);
        const double im = n(rng);
        v += cd(re, im);
    }
}

}  // namespace

ComplexSignal ue_receive(std::span<const ComplexSignal> tx, const Eigen::RowVectorXcd& h,
                         double noise_power, Rng& rng)
{
    if (static_cast<Eigen::Index>(tx.size()) != h.size())
        throw InvalidArgument("ue_receive: antenna count mismatch");
    if (tx.empty()) throw InvalidArgument("ue_receive: no antennas");
    const size_t len = tx[0].size();
    ComplexSignal y;
    y.sample_rate = tx[0].sample_rate;
    y.t0 = tx[0].t0;
    y.samples.assign(len, cd(0.0, 0.0));
    for (size_t a = 0; a < tx.size(); ++a) {
        if (tx[a].size() != len) throw InvalidArgument("ue_receive: ragged antenna signals");
        const cd ha = h(static_cast<Eigen::Index>(a));
        for (size_t k = 0; k < len; ++k) y.samples[k] += ha * tx[a].samples[k];
    }
    add_noise(y.samples, noise_power, rng);
    return y;
}

std::vector<cd> fractional_delay(std::span<const cd> x, double sample_rate, double tau)
{
    const double shift = tau * sample_rate;
    const double rounded = std::round(shift);
    const long n = static_cast<long>(x.size());
    std::vector<cd> y(x.size(), cd(0.0, 0.0));
    if (std::abs(shift - rounded) < 1e-12) {
        long d = static_cast<long>(rounded);
        for (long k = 0; k < n; ++k)
            if (k - d >= 0 && k - d < n) y[static_cast<size_t>(k)] = x[static_cast<size_t>(k - d)];
        return y;
    }
    for (long k = 0; k < n; ++k) {
        cd acc(0.0, 0.0);
        for (long m = 0; m < n; ++m) {
            double arg = kPi * (static_cast<double>(k - m) - shift);
            acc += x[static_cast<size_t>(m)] * (std::sin(arg) / arg);
        }
        y[static_cast<size_t>(k)] = acc;
    }
    return y;
}

std::vector<ComplexSignal> target_echo(std::span<const ComplexSignal> tx, const EchoParams& echo,
                                       const Direction& dir, const ChannelSet* interferers,
                                       const SystemConfig& cfg, double noise_power, Rng& rng)
{
    if (static_cast<int>(tx.size()) != cfg.n_t()) throw InvalidArgument("target_echo: need one signal per transmit antenna");
    if (echo.tau < 0 || echo.gain < 0) throw InvalidArgument("target_echo: negative delay or gain");
    const size_t len = tx[0].size();
    const double fs = tx[0].sample_rate;
    if (echo.tau >= len / fs) throw OutOfWindow("target_echo: delay beyond the block window");

    const double lambda = cfg.wavelength();
    const Eigen::RowVectorXcd a_t = steering(dir, tx_geometry(cfg), lambda);
    const Eigen::RowVectorXcd a_r = steering(dir, rx_geometry(cfg), lambda);

    // A s(t) = a_r^T (a_t s(t)): combine toward the target first, delay once.
    std::vector<cd> toward(len, cd(0.0, 0.0));
    for (size_t a = 0; a < tx.size(); ++a) {
        if (tx[a].size() != len) throw InvalidArgument("target_echo: ragged antenna signals");
        const cd w = a_t(static_cast<Eigen::Index>(a));
        for (size_t k = 0; k < len; ++k) toward[k] += w * tx[a].samples[k];
    }
    std::vector<cd> delayed = fractional_delay(toward, fs, echo.tau);
    const cd rot = std::polar(echo.gain, -2 * kPi * cfg.f_c * echo.tau);
    for (size_t k = 0; k < len; ++k) {
        double t = tx[0].t0 + static_cast<double>(k) / fs;
        delayed[k] *= rot * std::polar(1.0, 2 * kPi * echo.f_d * t);
    }

    std::vector<ComplexSignal> out(static_cast<size_t>(cfg.n_r()));
    for (int r = 0; r < cfg.n_r(); ++r) {
        ComplexSignal& s = out[static_cast<size_t>(r)];
        s.sample_rate = fs;
        s.t0 = tx[0].t0;
        s.samples.resize(len);
        for (size_t k = 0; k < len; ++k) s.samples[k] = a_r(r) * delayed[k];
    }

    if (interferers && interferers->A_K.cols() > 0) {
        std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
        const Eigen::MatrixXcd& ak = interferers->A_K;
        for (Eigen::Index u = 0; u < ak.cols(); ++u) {
            for (size_t k = 0; k < len; ++k) {
                cd i_k = std::polar(1.0, ph(rng));
                for (int r = 0; r < cfg.n_r(); ++r) out[static_cast<size_t>(r)].samples[k] += ak(r, u) * i_k;
            }
        }
    }
    for (auto& s : out) add_noise(s.samples, noise_power, rng);
    return out;
}

}  // namespace dfrc
