#include "bot/dqn.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <unordered_set>

#include "bot/errors.hpp"

namespace bot {

void Hyperparams::validate() const {
    if (hidden_sizes.empty()) throw ConfigError("hidden_sizes must be non-empty");
    for (int h : hidden_sizes)
        if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (grad_clip <= 0.0) throw ConfigError("grad_clip must be > 0");
    if (ref_update_every < 1) throw ConfigError("ref_update_every must be >= 1");
    if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must be in [0, 1]");
    if (epsilon0 < 0.0 || epsilon0 > 1.0) throw ConfigError("epsilon0 must be in [0, 1]");
    if (epsilon_min < 0.0 || epsilon_min > epsilon0)
        throw ConfigError("require 0 <= epsilon_min <= epsilon0");
    if (epsilon_decay <= 0.0 || epsilon_decay > 1.0)
        throw ConfigError("epsilon_decay must be in (0, 1]");
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must be in [0, 1]");
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (replay_capacity < batch_size)
        throw ConfigError("replay_capacity must be >= batch_size");
}

QNetwork QNetwork::make(const std::vector<int>& layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 2) throw ConfigError("need at least input and output sizes");
    QNetwork net;
    net.sizes_ = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int in = layer_sizes[l], out = layer_sizes[l + 1];
        if (in < 1 || out < 1) throw ConfigError("layer sizes must be >= 1");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Eigen::MatrixXd w(out, in);
        for (int i = 0; i < out; ++i)
            for (int j = 0; j < in; ++j) w(i, j) = rng.uniform(-bound, bound);
        net.W.push_back(std::move(w));
        net.b.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
}

Eigen::VectorXd QNetwork::forward(const Eigen::VectorXd& x) const {
    if (x.size() != input_dim()) throw ConfigError("input dimension mismatch");
    if (!x.allFinite()) throw ModelCorruption("non-finite network input");
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l < W.size(); ++l) {
        a = (W[l] * a + b[l]).eval();
        if (l + 1 < W.size()) a = a.cwiseMax(0.0);
        if (!a.allFinite()) throw ModelCorruption("non-finite network activation");
    }
    return a;
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& X,
                                        ForwardCache* cache) const {
    if (X.rows() != input_dim()) throw ConfigError("input dimension mismatch");
    if (cache) {
        cache->act.clear();
        cache->act.push_back(X);
    }
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < W.size(); ++l) {
        a = ((W[l] * a).colwise() + b[l]).eval();
        if (l + 1 < W.size()) a = a.cwiseMax(0.0);
        if (cache) cache->act.push_back(a);
    }
    return a;
}

double backward(const QNetwork& net, const QNetwork::ForwardCache& cache,
                const std::vector<int>& actions, const std::vector<double>& targets,
                Gradients& grads) {
    const std::size_t L = net.layer_count();
    const auto& act = cache.act;
    const Eigen::MatrixXd& out = act.back();
    const auto B = out.cols();
    if (actions.size() != static_cast<std::size_t>(B) || targets.size() != actions.size())
        throw ConfigError("batch size mismatch");

    grads.dW.assign(L, {});
    grads.db.assign(L, {});

    double loss = 0.0;
    Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), B);
    for (Eigen::Index i = 0; i < B; ++i) {
        const int a = actions[static_cast<std::size_t>(i)] - 1;
        if (a < 0 || a >= out.rows()) throw ConfigError("action id out of range");
        const double err = out(a, i) - targets[static_cast<std::size_t>(i)];
        loss += err * err;
        delta(a, i) = 2.0 * err / static_cast<double>(B);
    }
    loss /= static_cast<double>(B);

    for (std::size_t l = L; l-- > 0;) {
        grads.dW[l] = delta * act[l].transpose();
        grads.db[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = (net.W[l].transpose() * delta)
                        .cwiseProduct((act[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

double global_grad_norm(const Gradients& grads) {
    double sq = 0.0;
    for (const auto& g : grads.dW) sq += g.squaredNorm();
    for (const auto& g : grads.db) sq += g.squaredNorm();
    return std::sqrt(sq);
}

AdamState AdamState::make(const QNetwork& net) {
    AdamState s;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        s.mW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        s.vW.push_back(Eigen::MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        s.mb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
        s.vb.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
    return s;
}

void adam_step(QNetwork& net, const Gradients& grads, AdamState& state, double lr,
               double clip) {
    const double norm = global_grad_norm(grads);
    const double scale = (clip > 0.0 && norm > clip) ? clip / norm : 1.0;

    state.t += 1;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

    auto apply = [&](auto& param, const auto& grad, auto& m, auto& v) {
        const auto g = (scale * grad).eval();
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        apply(net.W[l], grads.dW[l], state.mW[l], state.vW[l]);
        apply(net.b[l], grads.db[l], state.mb[l], state.vb[l]);
    }
}

void soft_update(QNetwork& ref, const QNetwork& online, double tau) {
    if (ref.layer_count() != online.layer_count())
        throw ConfigError("network shape mismatch");
    for (std::size_t l = 0; l < ref.layer_count(); ++l) {
        if (ref.W[l].rows() != online.W[l].rows() || ref.W[l].cols() != online.W[l].cols())
            throw ConfigError("network shape mismatch");
        ref.W[l] = (1.0 - tau) * ref.W[l] + tau * online.W[l];
        ref.b[l] = (1.0 - tau) * ref.b[l] + tau * online.b[l];
    }
}

double epsilon_at(long episode, const Hyperparams& hp) {
    return std::max(hp.epsilon_min,
                    hp.epsilon0 * std::pow(hp.epsilon_decay, static_cast<double>(episode)));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw ConfigError("replay capacity must be >= 1");
    data_.reserve(capacity_);
}

void ReplayBuffer::push(const Transition& t) {
    if (size_ < capacity_) {
        data_.push_back(t);
        size_ += 1;
    } else {
        data_[head_] = t;
        head_ = (head_ + 1) % capacity_;
    }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, Rng& rng) const {
    if (batch > size_) throw UsageError("batch larger than buffer");
    std::vector<std::size_t> picks;
    picks.reserve(batch);
    std::unordered_set<std::size_t> chosen;
    for (std::size_t i = size_ - batch; i < size_; ++i) {
        const std::size_t j = rng.uniform_int(i + 1);
        if (chosen.insert(j).second) {
            picks.push_back(j);
        } else {
            chosen.insert(i);
            picks.push_back(i);
        }
    }
    return picks;
}

ObsVec ObsNormalizer::apply(const ObsVec& o) const {
    ObsVec n = o;
    n[0] /= d_max;
    n[1] /= d_max;
    n[2] /= v_max;
    n[3] /= v_max;
    n[4] /= d_max * d_max;
    n[5] /= d_max * d_max;
    n[6] /= d_max * d_max;
    n[7] /= v_max * v_max;
    n[8] /= v_max * v_max;
    n[9] /= v_max * v_max;
    return n;
}

namespace {

constexpr char kMagic[8] = {'B', 'O', 'T', 'D', 'Q', 'N', '0', '1'};

void put_f64(std::ofstream& f, double v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u32(std::ofstream& f, std::uint32_t v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double get_f64(std::ifstream& f) {
    double v = 0.0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!f) throw ConfigError("truncated checkpoint");
    return v;
}

std::uint32_t get_u32(std::ifstream& f) {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!f) throw ConfigError("truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const DqnModel& model) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open checkpoint for writing: " + path);
    f.write(kMagic, sizeof(kMagic));
    put_f64(f, model.beta);
    put_f64(f, model.norm.d_max);
    put_f64(f, model.norm.v_max);
    const auto& sizes = model.net.sizes();
    put_u32(f, static_cast<std::uint32_t>(model.net.layer_count()));
    for (int s : sizes) put_u32(f, static_cast<std::uint32_t>(s));
    for (std::size_t l = 0; l < model.net.layer_count(); ++l) {
        const auto& w = model.net.W[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) put_f64(f, w(i, j));
        for (Eigen::Index i = 0; i < model.net.b[l].size(); ++i)
            put_f64(f, model.net.b[l][i]);
    }
    if (!f) throw ConfigError("failed writing checkpoint: " + path);
}

DqnModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open checkpoint: " + path);
    char magic[8] = {};
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("not a checkpoint file: " + path);

    DqnModel model;
    model.beta = get_f64(f);
    model.norm.d_max = get_f64(f);
    model.norm.v_max = get_f64(f);
    const std::uint32_t n_layers = get_u32(f);
    if (n_layers < 1 || n_layers > 64) throw ConfigError("corrupt checkpoint layer count");
    std::vector<int> sizes;
    for (std::uint32_t i = 0; i <= n_layers; ++i) {
        const std::uint32_t s = get_u32(f);
        if (s < 1 || s > 1000000) throw ConfigError("corrupt checkpoint layer size");
        sizes.push_back(static_cast<int>(s));
    }
    Rng dummy(0);
    model.net = QNetwork::make(sizes, dummy);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        auto& w = model.net.W[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = get_f64(f);
        for (Eigen::Index i = 0; i < model.net.b[l].size(); ++i)
            model.net.b[l][i] = get_f64(f);
    }
    f.peek();
    if (!f.eof()) throw ConfigError("trailing bytes in checkpoint: " + path);
    for (const auto& w : model.net.W)
        if (!w.allFinite()) throw ConfigError("non-finite checkpoint weights");
    for (const auto& bb : model.net.b)
        if (!bb.allFinite()) throw ConfigError("non-finite checkpoint biases");
    if (!(model.beta >= 0.0 && model.beta <= 1.0))
        throw ConfigError("checkpoint beta out of range");
    return model;
}

TrainResult train(const ScenarioConfig& scenario, const Hyperparams& hp, double beta,
                  std::uint64_t seed, const CheckpointSink& sink) {
    scenario.validate();
    hp.validate();
    if (beta < 0.0 || beta > 1.0) throw ConfigError("beta must be in [0, 1]");

    constexpr std::uint64_t kNetStream = 10, kExploreStream = 11, kEnvStream = 12;
    Rng net_rng(Rng::substream_seed(seed, kNetStream));
    Rng explore_rng(Rng::substream_seed(seed, kExploreStream));
    const std::uint64_t env_seed_base = Rng::substream_seed(seed, kEnvStream);

    std::vector<int> sizes;
    sizes.push_back(12);
    for (int h : hp.hidden_sizes) sizes.push_back(h);
    sizes.push_back(kNumActions);

    DqnModel model;
    model.net = QNetwork::make(sizes, net_rng);
    model.norm = ObsNormalizer{scenario.d_max, scenario.v_max};
    model.beta = beta;

    QNetwork ref = model.net;
    AdamState adam = AdamState::make(model.net);
    ReplayBuffer replay(static_cast<std::size_t>(hp.replay_capacity));
    Environment env(scenario, RewardParams{beta, 1e-9});

    TrainResult result;
    result.log.reserve(static_cast<std::size_t>(hp.episodes));

    std::deque<double> ma_window;
    double ma_sum = 0.0;

    const std::size_t batch = static_cast<std::size_t>(hp.batch_size);
    Eigen::MatrixXd X(12, batch);
    std::vector<int> actions(batch);
    std::vector<double> targets(batch);
    Gradients grads;
    QNetwork::ForwardCache cache;

    for (long e = 0; e < hp.episodes; ++e) {
        const double eps = epsilon_at(e, hp);

        const ObsVec raw_obs = env.reset(env_seed_base + static_cast<std::uint64_t>(e));
        const ObsVec obs = model.norm.apply(raw_obs);

        int action;
        if (explore_rng.uniform01() < eps) {
            action = static_cast<int>(explore_rng.uniform_int(kNumActions)) + 1;
        } else {
            const Eigen::VectorXd q = model.net.forward(obs);
            action = 1;
            for (int a = 1; a < kNumActions; ++a)
                if (q[a] > q[action - 1]) action = a + 1;
        }

        const EpisodeOutcome outcome = env.step(action);

        Transition t;
        Eigen::Map<ObsVec>(t.obs.data()) = obs;
        t.action = action;
        t.reward = outcome.reward;
        t.terminal = true;
        replay.push(t);

        double loss = 0.0;
        if (replay.size() >= batch) {
            const auto idx = replay.sample_indices(batch, explore_rng);
            std::vector<Eigen::Index> boot_cols;
            for (std::size_t i = 0; i < batch; ++i) {
                const Transition& tr = replay.at(idx[i]);
                X.col(static_cast<Eigen::Index>(i)) =
                    Eigen::Map<const ObsVec>(tr.obs.data());
                actions[i] = tr.action;
                targets[i] = tr.reward;
                if (!tr.terminal) boot_cols.push_back(static_cast<Eigen::Index>(i));
            }
            if (!boot_cols.empty()) {
                Eigen::MatrixXd Xn(12, boot_cols.size());
                for (std::size_t i = 0; i < boot_cols.size(); ++i)
                    Xn.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const ObsVec>(
                        replay.at(idx[static_cast<std::size_t>(boot_cols[i])]).next_obs.data());
                const Eigen::MatrixXd qn = ref.forward_batch(Xn, nullptr);
                for (std::size_t i = 0; i < boot_cols.size(); ++i)
                    targets[static_cast<std::size_t>(boot_cols[i])] +=
                        hp.gamma * qn.col(static_cast<Eigen::Index>(i)).maxCoeff();
            }
            model.net.forward_batch(X, &cache);
            loss = backward(model.net, cache, actions, targets, grads);
            if (!std::isfinite(loss)) throw ModelCorruption("non-finite training loss");
            adam_step(model.net, grads, adam, hp.learning_rate, hp.grad_clip);
        }

        if ((e + 1) % hp.ref_update_every == 0) soft_update(ref, model.net, hp.tau);

        ma_window.push_back(outcome.reward);
        ma_sum += outcome.reward;
        if (ma_window.size() > 100) {
            ma_sum -= ma_window.front();
            ma_window.pop_front();
        }
        result.log.push_back(
            {e, eps, loss, ma_sum / static_cast<double>(ma_window.size())});

        if (sink && (e + 1) % 10000 == 0) sink(e + 1, model);
    }

    if (sink) sink(hp.episodes, model);
    result.model = std::move(model);
    return result;
}

}  // namespace bot
