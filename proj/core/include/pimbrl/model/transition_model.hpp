#pragma once

#include <optional>
#include <vector>

#include "pimbrl/env/env.hpp"
#include "pimbrl/model/physics.hpp"
#include "pimbrl/nn/layers.hpp"
#include "pimbrl/rl/replay_buffer.hpp"

namespace pimbrl::model {

enum class ModelVariant { dense_ode, encoder_lstm_decoder };

/// Network shape of the learned transition map. dense_ode is the direct
/// next-state MLP used for the ODE environments (N = 1); the
/// encoder_lstm_decoder unrolls an LSTM over N intermediate latent states
/// between two control steps and decodes each to a physical state.
struct ModelArchitecture {
    ModelVariant variant = ModelVariant::dense_ode;
    int n_intermediate = 1;
    int dense_hidden = 256;
    int latent_width = 64;
    std::vector<int> conv_channels = {16, 32};
    std::vector<int> conv_strides = {2, 2};
    int conv_kernel = 5;
    int decoder_hidden = 256;
    /// Decode state increments on top of the input state instead of raw
    /// states (off reduces the head to a plain decoder).
    bool residual_head = true;
};

ModelArchitecture default_architecture(env::EnvId id, int n_intermediate);

/// Intermediate states of one predicted control step; states[N-1] is the
/// next control-step state.
struct ModelPrediction {
    std::vector<Eigen::VectorXd> states;

    const Eigen::VectorXd& next_state() const { return states.back(); }
};

/// The learned environment model F~: (u_t, a_t) -> u_{t+1} with intermediate
/// outputs for the governing-equation residual.
class TransitionModel {
public:
    TransitionModel(const env::EnvSpec& spec, ModelArchitecture arch, std::uint64_t seed);

    const ModelArchitecture& architecture() const { return arch_; }
    const env::EnvSpec& env_spec() const { return spec_; }
    nn::NormKind norm_kind() const;

    nn::ParameterSet& params() { return params_; }
    const nn::ParameterSet& params() const { return params_; }

    /// Pure-function prediction (inference path, no gradients).
    ModelPrediction predict(const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                            const Eigen::VectorXd& aux) const;

    /// Batched inference: returns N matrices of predicted states, columns
    /// aligned with the input columns.
    std::vector<nn::Matrix> predict_batch(const nn::Matrix& obs, const nn::Matrix& actions,
                                          const nn::Matrix& aux) const;

    /// Records the prediction graph on a tape (training path); returns the N
    /// predicted state Vars.
    std::vector<nn::Var> unroll(nn::Tape& t, nn::Var obs, const nn::Matrix& actions,
                                const nn::Matrix& aux);

    /// One Adam step on the data loss over the given batch; returns the
    /// batch loss before the step.
    double train_data_batch(std::span<const rl::Transition* const> batch, double lr);

    /// One Adam step on the physics loss evaluated on model predictions from
    /// the batch states; next-state labels are never read.
    double train_physics_batch(std::span<const rl::Transition* const> batch,
                               const DifferentiablePhysics& physics, double lr);

    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;

private:
    nn::Var model_input(nn::Tape& t, nn::Var obs, const nn::Matrix& actions,
                        const nn::Matrix& aux) const;
    nn::Matrix input_features(const nn::Matrix& obs, const nn::Matrix& actions,
                              const nn::Matrix& aux) const;
    nn::Matrix aux_features(const nn::Matrix& aux) const;

    env::EnvSpec spec_;
    ModelArchitecture arch_;
    nn::ParameterSet params_;

    // dense_ode trunk
    nn::DenseLayer d1_, d2_, d_head_;
    // encoder / lstm / decoder
    std::vector<nn::Conv1dCircularLayer> conv_;
    nn::DenseLayer to_latent_;
    nn::LstmCell lstm_;
    nn::DenseLayer dec1_, dec_head_;
};

/// Batch-mean mismatch between predicted and observed next states: plain
/// Euclidean norm for ODE state vectors, grid-RMS discrete L2 for fields.
double data_loss(const std::vector<Eigen::VectorXd>& predicted,
                 const std::vector<Eigen::VectorXd>& truth,
                 nn::NormKind kind = nn::NormKind::Euclidean);

/// Mean forward-Euler residual of the governing equations over the
/// prediction's intermediate states (value-only path of the training loss).
double physics_loss(const ModelPrediction& prediction, const Eigen::VectorXd& obs0,
                    const Eigen::VectorXd& action, const Eigen::VectorXd& aux,
                    const DifferentiablePhysics& physics);

/// Tape form shared by training and the value-only op: `states` holds the
/// control-step start (an input leaf) followed by the N predictions.
nn::Var physics_residual_loss(nn::Tape& t, const std::vector<nn::Var>& states,
                              const nn::Matrix& actions, const nn::Matrix& aux,
                              const DifferentiablePhysics& physics);

/// Algorithm-gated model updates. Both return std::nullopt as the skip
/// signal when their buffer thresholds are not met.
std::optional<double> train_on_real_batch(TransitionModel& model,
                                          const rl::ReplayBuffer& real, int batch_size,
                                          long min_samples, double lr, Rng& rng);

std::optional<double> train_on_physics_batch(TransitionModel& model,
                                             const rl::ReplayBuffer& real,
                                             const rl::ReplayBuffer& fake, int batch_size,
                                             long min_total,
                                             const DifferentiablePhysics& physics,
                                             double lr, Rng& rng);

}  // namespace pimbrl::model
