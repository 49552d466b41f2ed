#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dfrc/array_channel.hpp"
#include "dfrc/core.hpp"
#include "dfrc/waveform.hpp"

namespace dfrc {

/// Everything the joint design needs for one scan block. Stream 0 is the
/// radar stream (w_T), streams 1..K are the users.
struct DesignProblem {
    Eigen::MatrixXcd H;        // K x N_t
    Eigen::MatrixXcd Z;        // N_r x N_t target response L * A * exp(j phase)
    Eigen::MatrixXcd A_K;      // N_r x K
    Eigen::RowVectorXcd a_t;   // scan steering (w_T initialisation)
    Eigen::VectorXd sigma_k2;  // per-user noise
    double sigma2 = 1.0;       // BS noise
    double e_rad = 1.0;        // pilot energy per block
    double p_tot = 1.0;
    double rho_user = 0.0;
    double rho_target = 0.0;
    bool radar_stream = true;        // false: communication-only design (P_T = 0)
    double fixed_target_power = -1;  // >= 0 pins P_T and water-fills the rest

    int users() const { return static_cast<int>(H.rows()); }
    int n_t() const { return static_cast<int>(H.cols()); }
    int n_r() const { return static_cast<int>(Z.rows()); }
};

/// Target amplitude L = sqrt(L_T * rcs) from the configured range and RCS.
double target_amplitude(const SystemConfig& cfg, double range, double rcs);

DesignProblem make_problem(const ChannelSet& cs, const SystemConfig& cfg, double target_amp);

struct RateReport {
    std::vector<double> gamma_users;
    double gamma_target = 0.0;
    double r_com = 0.0;
    double r_rad = 0.0;
    double r_sum = 0.0;
    std::vector<double> residual_users;  // max(0, 2^rho - 1 - gamma_k)
    double residual_target = 0.0;
    double residual_power = 0.0;  // max(0, sum P - p_tot)

    double max_residual() const;
};

/// User SINR with independent streams: P_k |h_k w_k|^2 / (sum_{j != k} P_j |h_k w_j|^2 + sigma_k^2).
/// k is the zero-based user index (stream k + 1).
double sinr_user(int k, const Eigen::MatrixXcd& H, const PrecoderState& state, double sigma_k2);

/// Target SINR: E_rad ||V Z W_eff||^2 / (||V A_K||^2 + sigma^2 ||V||^2), W_eff = W diag(sqrt P).
double sinr_target(const Eigen::RowVectorXcd& V, const Eigen::MatrixXcd& Z, const Eigen::MatrixXcd& W_eff,
                   const Eigen::MatrixXcd& A_K, double sigma2, double e_rad);

RateReport sum_rate(const DesignProblem& prob, const PrecoderState& state);

/// log2 det(I + Gamma) for Gamma = diag(gammas), evaluated as a determinant.
double log2_det_rate(std::span<const double> gammas);

// ---------------------------------------------------------------- selection

struct SelectionResult {
    std::vector<int> chosen;
    std::vector<double> trace;
    double rate = 0.0;  // R_com of the chosen set under the scoring model
};

/// Scoring model shared by both selectors: MRT user beams, w_T = a_t(scan)^H,
/// equal power p_tot / (K + 1) on every stream.
class SelectionScorer {
public:
    SelectionScorer(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                    const Direction& scan);
    double rate(std::span<const int> subset) const;  // indices into candidates
    int size() const { return static_cast<int>(ids_.size()); }
    int id(int idx) const { return ids_[static_cast<size_t>(idx)]; }

private:
    std::vector<int> ids_;
    Eigen::MatrixXd cross_;   // |h_i w_j|^2
    Eigen::VectorXd target_;  // |h_i w_T|^2
    double power_;
    double noise_;
};

SelectionResult smi_select(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                           const Direction& scan);

/// Exhaustive search over subsets of at most K users (all users when U <= K).
/// Throws GuardExceeded above max_subsets.
SelectionResult traversal_select(std::span<const UserRecord> candidates, int k, const SystemConfig& cfg,
                                 const Direction& scan, double max_subsets = 1e6);

double smi_multiplies(int u, int k);        // U K
double traversal_multiplies(int u, int k);  // U^K

// ---------------------------------------------------------------- MM pieces

/// Majorizer of -log2 det(I + Gamma) anchored at Gamma0:
/// -log2 det(I + Gamma0) + log2(e) tr[(I + Gamma0)((I + Gamma)^-1 - (I + Gamma0)^-1)].
/// Tight at Gamma = Gamma0 with matching first derivative.
double surrogate_value(std::span<const double> gamma, std::span<const double> gamma0);

/// Weighted Lagrangian sum_j (1 + eta_j) gamma_j over streams (0 = target).
double lagrangian(const DesignProblem& prob, const PrecoderState& state, const Eigen::VectorXd& eta);

/// dL/d conj(w_col) (Wirtinger) of the Lagrangian above, unit-norm columns and P held separately.
Eigen::VectorXcd kkt_grad_w(int col, const DesignProblem& prob, const PrecoderState& state,
                            const Eigen::VectorXd& eta);

/// dL/d conj(v) for v = V^H, radar term (1 + eta_T) gamma_T only.
Eigen::VectorXcd kkt_grad_v(const DesignProblem& prob, const PrecoderState& state, double eta_t);

/// Maximiser of gamma_T over V for fixed W, P (generalised eigenvector of (Q1, Q2)).
Eigen::RowVectorXcd optimal_processor(const DesignProblem& prob, const Eigen::MatrixXcd& W_eff,
                                      const Eigen::RowVectorXcd& previous);

/// Damped fixed-point on grad-W = 0 with per-stream weights; returns new W.
Eigen::MatrixXcd update_precoder(const DesignProblem& prob, const PrecoderState& state,
                                 const Eigen::VectorXd& weights, double damping = 0.5, int max_steps = 50);

enum class WaterFillObjective { Linear, Log };

/// Maximise sum g_i P_i (Linear) or sum log(1 + g_i P_i) (Log) with P_i >= floor_i
/// and sum P = p_tot. Throws Infeasible naming the binding constraint.
Eigen::VectorXd water_fill(const Eigen::VectorXd& gains, double p_tot, const Eigen::VectorXd& floors,
                           WaterFillObjective objective = WaterFillObjective::Log);

/// One power step for the current W, V: effective gains, SINR floors, log water-fill.
Eigen::VectorXd allocate_power(const DesignProblem& prob, const PrecoderState& state);

struct MmlmOptions {
    int nu_max = 50;
    double epsilon = 1e-3;
    double damping = 0.5;
    int inner_steps = 50;
};

struct MmlmRecord {
    int iteration = 0;
    Eigen::MatrixXcd W;
    Eigen::RowVectorXcd V;
    Eigen::VectorXd P;
    double surrogate = 0.0;
    double r_sum = 0.0;
    double residual = 0.0;
};

enum class Termination { MaxIter, Converged };

struct MmlmTrace {
    std::vector<MmlmRecord> records;  // records[0] is the initial point
    int iterations = 0;
    Termination reason = Termination::MaxIter;

    /// "iteration,r_sum,surrogate,residual" lines.
    std::string to_lines() const;
};

struct MmlmResult {
    PrecoderState state;
    MmlmTrace trace;
    RateReport report;
};

/// Initial point: w_T = a_t^H, MRT user columns, equal power, optimal V.
PrecoderState initial_state(const DesignProblem& prob);

MmlmResult mmlm(const DesignProblem& prob, const MmlmOptions& opt = {});

// ---------------------------------------------------------------- baselines

enum class PrecoderKind { MRT, ZF, MMSE, MMLM };

PrecoderKind parse_precoder_kind(const std::string& s);
std::string to_string(PrecoderKind k);

struct BaselineResult {
    Eigen::MatrixXcd W;  // N_t x K, unit columns
    bool used_pinv = false;
};

/// MRT: H^H; ZF: H^H (H H^H)^-1; MMSE: H^H (H H^H + (K sigma^2 / p_tot) I)^-1.
BaselineResult baseline_precoders(const Eigen::MatrixXcd& H, PrecoderKind kind, double sigma2, double p_tot);

/// Baseline user beams plus w_T = a_t^H, optimal V, power by iterated log water-fill.
MmlmResult design_baseline(const DesignProblem& prob, PrecoderKind kind);

/// MMLM or a baseline, selected by kind.
MmlmResult design(const DesignProblem& prob, PrecoderKind kind, const MmlmOptions& opt = {});

}  // namespace dfrc
