#pragma once

#include <memory>
#include <optional>
#include <string>

#include "bot/dqn.hpp"
#include "bot/env.hpp"

namespace bot {

// Everything a policy may consult at the single decision point. The observer
// state is part of it because the own-ship state is known to the platform.
struct DecisionPoint {
    ObsVec observation;
    GaussianBelief belief;
    PlatformState observer;
};

// Perpendicular-to-bearing: of the two grid headings nearest the
// line-of-sight perpendiculars, pick the one oriented toward the predicted
// target position (position estimate advanced by one leg of estimated
// velocity). Ties go to the lower id.
int ptb_action(const GaussianBelief& belief, const ScenarioConfig& cfg);

// Information-theoretic: maximise det of the predicted position Fisher
// information accumulated over the next leg, candidate headings propagated on
// the belief mean with no noise.
int ito_action(const GaussianBelief& belief, const PlatformState& observer,
               double sigma_nu, int M, const ScenarioConfig& cfg);

int random_action(Rng& rng);

// Greedy argmax over the 16 Q-values; ties go to the lower id.
int dqn_action(const ObsVec& obs, const DqnModel& model);

// Nearest grid action to a free heading; ties go to the lower id.
int nearest_action(double heading);

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual int act(const DecisionPoint& dp, Rng& policy_rng) = 0;
    // Reward weighting the policy was trained for, if any.
    virtual std::optional<double> reward_beta() const { return std::nullopt; }
};

class PtbPolicy : public Policy {
  public:
    explicit PtbPolicy(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "ptb"; }
    int act(const DecisionPoint& dp, Rng&) override { return ptb_action(dp.belief, cfg_); }

  private:
    ScenarioConfig cfg_;
};

class ItoPolicy : public Policy {
  public:
    explicit ItoPolicy(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}
    std::string name() const override { return "ito"; }
    int act(const DecisionPoint& dp, Rng&) override {
        return ito_action(dp.belief, dp.observer, cfg_.bearing_noise_sigma,
                          cfg_.steps_per_leg, cfg_);
    }

  private:
    ScenarioConfig cfg_;
};

class RandomPolicy : public Policy {
  public:
    std::string name() const override { return "random"; }
    int act(const DecisionPoint&, Rng& policy_rng) override {
        return random_action(policy_rng);
    }
};

class DqnPolicy : public Policy {
  public:
    explicit DqnPolicy(DqnModel model, std::string name = "dqn")
        : model_(std::move(model)), name_(std::move(name)) {}
    std::string name() const override { return name_; }
    int act(const DecisionPoint& dp, Rng&) override {
        return dqn_action(dp.observation, model_);
    }
    std::optional<double> reward_beta() const override { return model_.beta; }
    const DqnModel& model() const { return model_; }

  private:
    DqnModel model_;
    std::string name_;
};

// name is one of ptb | ito | dqn | random; dqn requires a checkpoint path.
std::unique_ptr<Policy> make_policy(const std::string& name, const ScenarioConfig& cfg,
                                    const std::string& model_path = "");

}  // namespace bot
