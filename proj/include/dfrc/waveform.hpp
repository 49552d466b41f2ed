#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dfrc/core.hpp"

namespace dfrc {

struct SymbolStream {
    std::vector<int> symbols;  // odd levels in [-(M-1), M-1]
};

struct CpmBaseband {
    std::vector<double> phases;  // unwrapped beta_n
    std::vector<cd> samples;     // exp(j beta_n)
};

struct ComplexSignal {
    std::vector<cd> samples;
    double sample_rate = 1.0;
    double t0 = 0.0;

    size_t size() const { return samples.size(); }
    double duration() const { return samples.size() / sample_rate; }
    double energy() const;  // sum |s|^2 / fs
};

/// Columns of W are w_T, w_1 .. w_K; P follows the same order.
struct PrecoderState {
    Eigen::MatrixXcd W;
    Eigen::RowVectorXcd V;
    Eigen::VectorXd P;

    int streams() const { return static_cast<int>(W.cols()); }
    /// W * diag(sqrt(P)).
    Eigen::MatrixXcd effective() const;
};

/// Gray-coded MASK: each group of log2(order) bits (MSB first) maps to an
/// odd level; adjacent levels differ in exactly one bit.
SymbolStream mask_map(std::span<const int> bits, int order);
std::vector<int> mask_demap(std::span<const int> symbols, int order);

CpmBaseband cpm_modulate(const SymbolStream& stream, double h);

/// X = W diag(sqrt(P)) C, C being (K+1) x N.
Eigen::MatrixXcd precode_block(const Eigen::MatrixXcd& C, const PrecoderState& state);

/// Unit-energy transmit pulse occupying symbol slot [0, T_s). The raised
/// cosine is centred on the slot and truncated to +-4 symbols.
double pulse_value(PulseKind kind, double t, double t_s, double rolloff);
inline constexpr double kRaisedCosineSpan = 4.0;

/// One block of complex-baseband CPM-LFM: sum_n x_n g(t - n T_s) exp(j pi sign mu t^2),
/// t in [0, N T_s) block-local.
ComplexSignal synthesize_chirp(std::span<const cd> x_row, const SystemConfig& cfg, int chirp_sign,
                               PulseKind pulse, double sample_rate);

/// Minimum sample rate accepted by synthesize_chirp.
double min_sample_rate(const SystemConfig& cfg);

/// B_w = |mu| N T_s.
double sweep_bandwidth(const SystemConfig& cfg);

}  // namespace dfrc
