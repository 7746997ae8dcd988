#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bot/env.hpp"
#include "bot/models.hpp"

namespace bot {

struct Hyperparams {
    std::vector<int> hidden_sizes{256, 128, 64};
    int batch_size = 256;
    double learning_rate = 3e-4;
    double grad_clip = 1.0;
    int ref_update_every = 4;
    double tau = 0.01;
    double epsilon0 = 1.0;
    double epsilon_min = 0.05;
    double epsilon_decay = 0.99994;
    double gamma = 0.99;
    long episodes = 50000;
    long replay_capacity = 200000;

    void validate() const;
};

// Fully connected ReLU network, linear output. Weights are out-by-in.
class QNetwork {
  public:
    QNetwork() = default;

    static QNetwork make(const std::vector<int>& layer_sizes, Rng& rng);

    // Single-sample inference; checks every intermediate for finiteness.
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    struct ForwardCache {
        std::vector<Eigen::MatrixXd> act;  // act[0] = input, act.back() = output
    };

    // Columns are samples. No finiteness checks on the training path.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X, ForwardCache* cache) const;

    const std::vector<int>& sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    std::size_t layer_count() const { return W.size(); }

    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

  private:
    std::vector<int> sizes_;
};

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;
};

// Mean squared error on the selected-action outputs. Returns the loss and
// fills grads; actions are 1-based ids.
double backward(const QNetwork& net, const QNetwork::ForwardCache& cache,
                const std::vector<int>& actions, const std::vector<double>& targets,
                Gradients& grads);

double global_grad_norm(const Gradients& grads);

struct AdamState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState make(const QNetwork& net);
};

// Global-norm clip then Adam with bias correction.
void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double lr,
               double clip);

// ref = (1 - tau) * ref + tau * online.
void soft_update(QNetwork& ref, const QNetwork& online, double tau);

double epsilon_at(long episode, const Hyperparams& hp);

struct Transition {
    std::array<double, 12> obs{};
    int action = 0;
    double reward = 0.0;
    bool terminal = true;
    std::array<double, 12> next_obs{};
};

class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

    // Uniform without replacement within the batch; consumes exactly batch
    // draws from rng.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

  private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

// Scales network inputs to comparable magnitudes; bearing slots untouched.
struct ObsNormalizer {
    double d_max = 26.0;
    double v_max = 3.0;

    ObsVec apply(const ObsVec& o) const;
};

struct DqnModel {
    QNetwork net;
    ObsNormalizer norm;
    double beta = 0.5;
};

void save_checkpoint(const std::string& path, const DqnModel& model);
DqnModel load_checkpoint(const std::string& path);

struct TrainLogRow {
    long episode = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    double reward_ma100 = 0.0;
};

using CheckpointSink = std::function<void(long episode, const DqnModel&)>;

struct TrainResult {
    DqnModel model;
    std::vector<TrainLogRow> log;
};

// Full training loop: one environment episode per iteration, epsilon-greedy
// action, terminal transition into replay, one gradient step per episode once
// a batch is available, periodic soft reference update.
TrainResult train(const ScenarioConfig& scenario, const Hyperparams& hp, double beta,
                  std::uint64_t seed, const CheckpointSink& sink = nullptr);

}  // namespace bot
