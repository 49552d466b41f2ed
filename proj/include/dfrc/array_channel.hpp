#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dfrc/core.hpp"
#include "dfrc/waveform.hpp"

namespace dfrc {

struct ArrayGeometry {
    int nx = 1;
    int ny = 1;
    double dx = 0.0;
    double dy = 0.0;
    int size() const { return nx * ny; }
};

ArrayGeometry tx_geometry(const SystemConfig& cfg);
ArrayGeometry rx_geometry(const SystemConfig& cfg);

/// Unit-norm URA response. Entry n = (ny-1)*Nx + nx (zero-based: iy*nx + ix)
/// carries phase 2pi[ix dx/lambda cos(theta)cos(phi) + iy dy/lambda cos(theta)sin(phi)].
Eigen::RowVectorXcd steering(const Direction& dir, const ArrayGeometry& geo, double wavelength);

/// sqrt((d/d_0)^-alpha * shadow).
double large_scale_gain(const UserRecord& user, const SystemConfig& cfg);

Eigen::RowVectorXcd channel_row(const UserRecord& user, const SystemConfig& cfg);

struct ChannelSet {
    Eigen::MatrixXcd H;     // K x N_t
    Eigen::MatrixXcd A;     // N_r x N_t, a_r^T a_t
    Eigen::MatrixXcd A_K;   // N_r x K, columns a_r(theta_k, phi_k)^T
    Eigen::VectorXd gains;  // K
    Eigen::RowVectorXcd a_t;
    Eigen::RowVectorXcd a_r;
    std::vector<int> user_ids;
};

ChannelSet build_channel_set(std::span<const UserRecord> users, const Direction& target_dir,
                             const SystemConfig& cfg);

struct EchoParams {
    double tau = 0.0;
    double f_d = 0.0;
    double gain = 0.0;  // sqrt(L_T * rcs)
    double rcs = 0.0;
};

/// Two-way radar law lambda^2 / ((4 pi)^3 d^4), scaled by radar_link_gain_db.
double radar_path_loss(double range, const SystemConfig& cfg);

EchoParams make_echo(double range, double velocity, double rcs, const SystemConfig& cfg);

/// UE receive chain at complex baseband: y = sum_nt h[nt] x_nt(t) + CN(0, noise_power).
ComplexSignal ue_receive(std::span<const ComplexSignal> tx, const Eigen::RowVectorXcd& h,
                         double noise_power, Rng& rng);

/// Band-limited (sinc) delay of a sampled sequence by tau seconds.
std::vector<cd> fractional_delay(std::span<const cd> x, double sample_rate, double tau);

/// Target echo at the BS at complex baseband, one output per receive antenna.
/// interferers may be null (no UE uplink interference).
std::vector<ComplexSignal> target_echo(std::span<const ComplexSignal> tx, const EchoParams& echo,
                                       const Direction& dir, const ChannelSet* interferers,
                                       const SystemConfig& cfg, double noise_power, Rng& rng);

}  // namespace dfrc
