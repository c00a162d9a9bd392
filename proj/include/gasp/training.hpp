#pragma once

#include <string>
#include <vector>

#include "gasp/checkpoint.hpp"
#include "gasp/hypernet.hpp"
#include "gasp/optim.hpp"
#include "gasp/pointconv.hpp"

namespace gasp {

struct TrainingConfig {
    double lr_generator = 1e-4;
    double lr_discriminator = 4e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t batch_size = 8;
    std::size_t epochs = 1;
    std::size_t k_subsample = 0; // 0 = use full clouds
    double r1_weight = 10.0;
    std::uint64_t seed = 0;
    std::size_t checkpoint_every = 0; // steps; 0 = only the final checkpoint
    std::string out_dir;              // empty = keep everything in memory

    void validate() const;
};

// Non-saturating losses. The probability-space forms implement
// -log(p) / -log(1-p) with a 1e-12 clamp; the logit forms compute the same
// values through softplus and are what the training loop uses.
Tensor g_loss(const Tensor& d_fake);
Tensor d_loss(const Tensor& d_real, const Tensor& d_fake);
Tensor g_loss_logit(const Tensor& fake_logit);
Tensor d_loss_logit(const Tensor& real_logit, const Tensor& fake_logit);

// 0.5 * sum_i ||d(output)/d(feature row i)||^2, graph-connected to whatever
// `output` depends on (double backward), so it can be differentiated again
// w.r.t. discriminator parameters.
Tensor r1_of(const Tensor& output, const Tensor& feats);

// R1 penalty of the stack on a real cloud: gradient of D's probability output
// w.r.t. the feature rows.
Tensor r1_penalty(DiscriminatorStack& stack, const PointCloud& real, bool training = true);

struct LossRow {
    std::size_t step = 0;
    double d_loss = 0.0; // adversarial part, without the R1 term
    double g_loss = 0.0;
    double r1 = 0.0;
};

void write_loss_csv(const std::string& path, const std::vector<LossRow>& history);

// Alternating 1:1 GAN updates. Fake features are evaluated at the same
// coordinates as the paired real batch element. All randomness is derived
// from (seed, step), so a checkpoint resume continues bitwise.
class GanTrainer {
public:
    GanTrainer(std::vector<PointCloud> dataset, Hypernetwork gen, DiscriminatorStack disc,
               TrainingConfig config);

    void step_once();
    void run(); // until epochs * steps_per_epoch

    void save(const std::string& path) const;
    static GanTrainer load(const std::string& path, std::vector<PointCloud> dataset);

    Hypernetwork& generator() { return gen_; }
    DiscriminatorStack& discriminator() { return disc_; }
    const std::vector<LossRow>& history() const { return history_; }
    std::size_t next_step() const { return next_step_; }
    std::size_t total_steps() const;
    std::size_t steps_per_epoch() const;
    const TrainingConfig& config() const { return config_; }

private:
    void refresh_epoch_perm(std::size_t epoch);
    PointCloud batch_element(std::size_t step, std::size_t slot, Rng& step_rng) const;

    std::vector<PointCloud> dataset_;
    Hypernetwork gen_;
    DiscriminatorStack disc_;
    TrainingConfig config_;
    Adam adam_g_;
    Adam adam_d_;
    std::vector<LossRow> history_;
    std::size_t next_step_ = 0;
    std::size_t perm_epoch_ = static_cast<std::size_t>(-1);
    std::vector<std::size_t> perm_;
};

struct TrainResult {
    std::vector<LossRow> history;
};

// Convenience wrapper; gen/disc parameters are updated in place.
TrainResult train(const std::vector<PointCloud>& dataset, Hypernetwork& gen,
                  DiscriminatorStack& disc, const TrainingConfig& config);

// Model (de)serialization on the raw checkpoint format.
CheckpointData gan_to_checkpoint(const Hypernetwork& gen, const DiscriminatorStack& disc,
                                 const TrainingConfig& config, const Adam* adam_g,
                                 const Adam* adam_d, std::size_t next_step);

struct GanModels {
    Hypernetwork gen;
    DiscriminatorStack disc;
    TrainingConfig config;
    std::size_t next_step = 0;
    // Adam accumulators in parameter order (empty when absent).
    std::vector<AdamState> g_states;
    std::vector<AdamState> d_states;
};

GanModels gan_from_checkpoint(const CheckpointData& data);

void save_fit_checkpoint(const std::string& path, const FunctionRep& rep, double final_mse);
FunctionRep load_fit_checkpoint(const std::string& path, double* final_mse = nullptr);

} // namespace gasp
