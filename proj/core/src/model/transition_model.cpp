#include "pimbrl/model/transition_model.hpp"

#include <cmath>
#include <stdexcept>

#include "pimbrl/env/burgers.hpp"

namespace pimbrl::model {

using nn::Activation;
using nn::Matrix;
using nn::NormKind;
using nn::Tape;
using nn::Var;

ModelArchitecture default_architecture(env::EnvId id, int n_intermediate) {
    ModelArchitecture a;
    switch (id) {
        case env::EnvId::cartpole:
        case env::EnvId::pendulum:
            a.variant = ModelVariant::dense_ode;
            a.n_intermediate = 1;
            return a;
        case env::EnvId::burgers:
            a.variant = ModelVariant::encoder_lstm_decoder;
            a.n_intermediate = n_intermediate;
            a.conv_strides = {2, 3};  // 150 -> 75 -> 25 nodes
            return a;
        case env::EnvId::ks:
            a.variant = ModelVariant::encoder_lstm_decoder;
            a.n_intermediate = n_intermediate;
            a.conv_strides = {2, 2};  // 64 -> 32 -> 16 nodes
            return a;
    }
    throw std::invalid_argument("default_architecture: unknown EnvId");
}

TransitionModel::TransitionModel(const env::EnvSpec& spec, ModelArchitecture arch,
                                 std::uint64_t seed)
    : spec_(spec), arch_(std::move(arch)) {
    Rng rng(seed);
    const int in_dim = spec_.obs_dim + spec_.action_dim + spec_.aux_dim;
    if (arch_.variant == ModelVariant::dense_ode) {
        if (arch_.n_intermediate != 1) {
            throw std::invalid_argument("dense_ode models use N = 1 intermediate state");
        }
        d1_.init(params_, "trunk1", in_dim, arch_.dense_hidden, Activation::Relu, rng);
        d2_.init(params_, "trunk2", arch_.dense_hidden, arch_.dense_hidden,
                 Activation::Relu, rng);
        d_head_.init(params_, "head", arch_.dense_hidden, spec_.obs_dim,
                     Activation::Linear, rng, 0.01);
        return;
    }

    if (arch_.n_intermediate < 1) {
        throw std::invalid_argument("encoder_lstm_decoder needs N >= 1");
    }
    if (arch_.conv_channels.size() != arch_.conv_strides.size()) {
        throw std::invalid_argument("conv channel and stride lists must match");
    }
    int nodes = spec_.obs_dim;
    int channels = 1;
    for (std::size_t i = 0; i < arch_.conv_channels.size(); ++i) {
        nn::Conv1dCircularLayer layer;
        layer.init(params_, "enc" + std::to_string(i), channels, arch_.conv_channels[i],
                   arch_.conv_kernel, arch_.conv_strides[i], nodes, Activation::Relu, rng);
        channels = arch_.conv_channels[i];
        nodes = layer.out_nodes();
        conv_.push_back(layer);
    }
    to_latent_.init(params_, "to_latent", channels * nodes, arch_.latent_width,
                    Activation::Linear, rng);
    lstm_.init(params_, "lstm",
               arch_.latent_width + spec_.action_dim + spec_.aux_dim, arch_.latent_width,
               rng);
    dec1_.init(params_, "dec1", arch_.latent_width, arch_.decoder_hidden,
               Activation::Relu, rng);
    dec_head_.init(params_, "dec_head", arch_.decoder_hidden, spec_.obs_dim,
                   Activation::Linear, rng, 0.01);
}

nn::NormKind TransitionModel::norm_kind() const {
    return (spec_.id == env::EnvId::burgers || spec_.id == env::EnvId::ks)
               ? NormKind::GridRms
               : NormKind::Euclidean;
}

Matrix TransitionModel::aux_features(const Matrix& aux) const {
    if (spec_.id == env::EnvId::burgers) {
        // the model sees the reference level, not the raw phase
        Matrix f(aux.rows(), aux.cols());
        for (int j = 0; j < aux.cols(); ++j) f(0, j) = env::burgers_reference(aux(0, j));
        return f;
    }
    return aux;
}

Matrix TransitionModel::input_features(const Matrix& obs, const Matrix& actions,
                                       const Matrix& aux) const {
    if (obs.rows() != spec_.obs_dim || actions.rows() != spec_.action_dim ||
        aux.rows() != spec_.aux_dim) {
        throw std::invalid_argument("TransitionModel: input dimension mismatch");
    }
    Matrix features(spec_.obs_dim + spec_.action_dim + spec_.aux_dim, obs.cols());
    features.topRows(spec_.obs_dim) = obs;
    // actions enter normalized to [-1, 1]
    for (int j = 0; j < actions.cols(); ++j) {
        features.block(spec_.obs_dim, j, spec_.action_dim, 1) =
            spec_.action_space.to_raw(actions.col(j));
    }
    if (spec_.aux_dim > 0) features.bottomRows(spec_.aux_dim) = aux_features(aux);
    return features;
}

std::vector<Var> TransitionModel::unroll(Tape& t, Var obs, const Matrix& actions,
                                         const Matrix& aux) {
    const Matrix& obs_value = t.value(obs);
    Matrix act_aux(spec_.action_dim + spec_.aux_dim, obs_value.cols());
    for (int j = 0; j < actions.cols(); ++j) {
        act_aux.block(0, j, spec_.action_dim, 1) =
            spec_.action_space.to_raw(actions.col(j));
    }
    if (spec_.aux_dim > 0) act_aux.bottomRows(spec_.aux_dim) = aux_features(aux);

    if (arch_.variant == ModelVariant::dense_ode) {
        std::array<Var, 2> in_parts = {obs, t.input(act_aux)};
        Var x = t.concat_rows(in_parts);
        Var h = d2_.forward(t, params_, d1_.forward(t, params_, x));
        Var y = d_head_.forward(t, params_, h);
        if (arch_.residual_head) y = t.add(y, obs);
        return {y};
    }

    Var feat = obs;
    for (const auto& layer : conv_) feat = layer.forward(t, params_, feat);
    Var z = to_latent_.forward(t, params_, feat);
    std::array<Var, 2> lstm_in_parts = {z, t.input(act_aux)};
    Var lstm_in = t.concat_rows(lstm_in_parts);

    const int batch = static_cast<int>(obs_value.cols());
    nn::LstmCell::State state{t.input(Matrix::Zero(arch_.latent_width, batch)),
                              t.input(Matrix::Zero(arch_.latent_width, batch))};
    std::vector<Var> out;
    out.reserve(arch_.n_intermediate);
    for (int i = 0; i < arch_.n_intermediate; ++i) {
        state = lstm_.forward(t, params_, lstm_in, state);
        Var y = dec_head_.forward(t, params_, dec1_.forward(t, params_, state.h));
        if (arch_.residual_head) y = t.add(y, obs);
        out.push_back(y);
    }
    return out;
}

std::vector<Matrix> TransitionModel::predict_batch(const Matrix& obs, const Matrix& actions,
                                                   const Matrix& aux) const {
    if (obs.rows() != spec_.obs_dim || actions.rows() != spec_.action_dim ||
        aux.rows() != spec_.aux_dim) {
        throw std::invalid_argument("TransitionModel::predict_batch: dimension mismatch");
    }
    Matrix act_aux(spec_.action_dim + spec_.aux_dim, obs.cols());
    for (int j = 0; j < actions.cols(); ++j) {
        act_aux.block(0, j, spec_.action_dim, 1) =
            spec_.action_space.to_raw(actions.col(j));
    }
    if (spec_.aux_dim > 0) act_aux.bottomRows(spec_.aux_dim) = aux_features(aux);

    if (arch_.variant == ModelVariant::dense_ode) {
        Matrix x(obs.rows() + act_aux.rows(), obs.cols());
        x.topRows(obs.rows()) = obs;
        x.bottomRows(act_aux.rows()) = act_aux;
        Matrix y = d_head_.forward(params_, d2_.forward(params_, d1_.forward(params_, x)));
        if (arch_.residual_head) y += obs;
        return {std::move(y)};
    }

    Matrix feat = obs;
    for (const auto& layer : conv_) feat = layer.forward(params_, feat);
    Matrix z = to_latent_.forward(params_, feat);
    Matrix lstm_in(z.rows() + act_aux.rows(), z.cols());
    lstm_in.topRows(z.rows()) = z;
    lstm_in.bottomRows(act_aux.rows()) = act_aux;

    nn::LstmCell::MatrixState state{Matrix::Zero(arch_.latent_width, obs.cols()),
                                    Matrix::Zero(arch_.latent_width, obs.cols())};
    std::vector<Matrix> out;
    out.reserve(arch_.n_intermediate);
    for (int i = 0; i < arch_.n_intermediate; ++i) {
        state = lstm_.forward(params_, lstm_in, state);
        Matrix y = dec_head_.forward(params_, dec1_.forward(params_, state.h));
        if (arch_.residual_head) y += obs;
        out.push_back(std::move(y));
    }
    return out;
}

ModelPrediction TransitionModel::predict(const Eigen::VectorXd& obs,
                                         const Eigen::VectorXd& action,
                                         const Eigen::VectorXd& aux) const {
    auto batches = predict_batch(obs, action, aux);
    ModelPrediction p;
    p.states.reserve(batches.size());
    for (const auto& m : batches) p.states.emplace_back(m.col(0));
    return p;
}

namespace {

struct BatchMatrices {
    Matrix obs, actions, aux, obs_next;
};

BatchMatrices pack_batch(std::span<const rl::Transition* const> batch,
                         const env::EnvSpec& spec) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const int n = static_cast<int>(batch.size());
    BatchMatrices m;
    m.obs.resize(spec.obs_dim, n);
    m.actions.resize(spec.action_dim, n);
    m.aux.resize(spec.aux_dim, n);
    m.obs_next.resize(spec.obs_dim, n);
    for (int j = 0; j < n; ++j) {
        m.obs.col(j) = batch[j]->obs;
        m.actions.col(j) = batch[j]->action;
        m.obs_next.col(j) = batch[j]->obs_next;
        if (spec.aux_dim > 0) m.aux.col(j) = batch[j]->aux;
    }
    return m;
}

}  // namespace

double TransitionModel::train_data_batch(std::span<const rl::Transition* const> batch,
                                         double lr) {
    BatchMatrices m = pack_batch(batch, spec_);
    params_.zero_grad();
    Tape t;
    std::vector<Var> pred = unroll(t, t.input(m.obs), m.actions, m.aux);
    Var loss = t.column_norm_mean(t.sub(pred.back(), t.input(m.obs_next)), norm_kind());
    const double value = t.value(loss)(0, 0);
    t.backward(loss);
    nn::adam_update(params_, lr, adam_beta1, adam_beta2, adam_eps);
    return value;
}

double TransitionModel::train_physics_batch(std::span<const rl::Transition* const> batch,
                                            const DifferentiablePhysics& physics,
                                            double lr) {
    BatchMatrices m = pack_batch(batch, spec_);
    params_.zero_grad();
    Tape t;
    std::vector<Var> states;
    states.push_back(t.input(m.obs));
    for (Var v : unroll(t, states[0], m.actions, m.aux)) states.push_back(v);
    Var loss = physics_residual_loss(t, states, m.actions, m.aux, physics);
    const double value = t.value(loss)(0, 0);
    t.backward(loss);
    nn::adam_update(params_, lr, adam_beta1, adam_beta2, adam_eps);
    return value;
}

double data_loss(const std::vector<Eigen::VectorXd>& predicted,
                 const std::vector<Eigen::VectorXd>& truth, NormKind kind) {
    if (predicted.empty() || predicted.size() != truth.size()) {
        throw std::invalid_argument("data_loss: empty or mismatched batch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].size() != truth[i].size()) {
            throw std::invalid_argument("data_loss: state dimension mismatch");
        }
        const double sq = (predicted[i] - truth[i]).squaredNorm();
        acc += kind == NormKind::GridRms
                   ? std::sqrt(sq / static_cast<double>(predicted[i].size()))
                   : std::sqrt(sq);
    }
    return acc / static_cast<double>(predicted.size());
}

Var physics_residual_loss(Tape& t, const std::vector<Var>& states, const Matrix& actions,
                          const Matrix& aux, const DifferentiablePhysics& physics) {
    if (states.size() < 2) {
        throw std::invalid_argument("physics_residual_loss: need N >= 1 predicted states");
    }
    const int n_steps = static_cast<int>(states.size()) - 1;
    const double delta_tau = physics.control_duration() / n_steps;

    std::vector<Var> physical;
    physical.reserve(states.size());
    for (int i = 0; i <= n_steps; ++i) {
        physical.push_back(physics.to_physical(t, states[i], aux, i, n_steps));
    }

    Var total{};
    for (int i = 0; i < n_steps; ++i) {
        Var rate = t.scale(physics.state_difference(t, physical[i + 1], physical[i]),
                           1.0 / delta_tau);
        Var residual = t.sub(rate, physics.rhs(t, physical[i], actions));
        Var norm = t.column_norm_mean(residual, physics.norm_kind());
        total = i == 0 ? norm : t.add(total, norm);
    }
    return t.scale(total, 1.0 / n_steps);
}

double physics_loss(const ModelPrediction& prediction, const Eigen::VectorXd& obs0,
                    const Eigen::VectorXd& action, const Eigen::VectorXd& aux,
                    const DifferentiablePhysics& physics) {
    Tape t;
    std::vector<Var> states;
    states.push_back(t.input(obs0));
    for (const auto& s : prediction.states) states.push_back(t.input(s));
    Var loss = physics_residual_loss(t, states, action, aux, physics);
    return t.value(loss)(0, 0);
}

std::optional<double> train_on_real_batch(TransitionModel& model,
                                          const rl::ReplayBuffer& real, int batch_size,
                                          long min_samples, double lr, Rng& rng) {
    if (static_cast<long>(real.size()) < min_samples || real.empty()) return std::nullopt;
    std::vector<const rl::Transition*> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) batch.push_back(&real.sample(rng));
    return model.train_data_batch(batch, lr);
}

std::optional<double> train_on_physics_batch(TransitionModel& model,
                                             const rl::ReplayBuffer& real,
                                             const rl::ReplayBuffer& fake, int batch_size,
                                             long min_total,
                                             const DifferentiablePhysics& physics,
                                             double lr, Rng& rng) {
    const long total = static_cast<long>(real.size() + fake.size());
    if (total < min_total || fake.empty()) return std::nullopt;
    std::vector<const rl::Transition*> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    for (int i = 0; i < batch_size; ++i) batch.push_back(&fake.sample(rng));
    return model.train_physics_batch(batch, physics, lr);
}

}  // namespace pimbrl::model
