#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inkline/rng.hpp"

namespace inkline {

// Dense row-major matrix of 64-bit reals.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> entries;  // row-major, rows*cols values

    static Matrix zeros(int rows, int cols);
    static Matrix identity(int n);

    double& at(int r, int c) { return entries[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }
    double at(int r, int c) const { return entries[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)]; }

    bool operator==(const Matrix&) const = default;
};

// Low-rank weight update W += B*A with B n-by-r and A r-by-m.
struct LoraAdapter {
    Matrix B;
    Matrix A;
    int rank = 0;
};

struct WeightedAdapter {
    LoraAdapter adapter;
    double weight = 0.0;
};

// Weighted adapter sum to fold into a base matrix.
struct MergeSpec {
    std::vector<WeightedAdapter> items;
};

// Forward noising coefficients per discrete timestep t in 1..T:
// z_t = alpha_t * x + sigma_t * eps. alphas/sigmas are indexed t-1.
struct NoiseSchedule {
    std::vector<double> alphas;
    std::vector<double> sigmas;

    int T() const { return static_cast<int>(alphas.size()); }
    double alpha(int t) const { return alphas[static_cast<size_t>(t - 1)]; }
    double sigma(int t) const { return sigmas[static_cast<size_t>(t - 1)]; }

    // Checks T >= 1, both coefficient lists positive and equally sized,
    // alphas strictly decreasing, sigmas strictly increasing.
    void validate() const;

    // alpha_t = 1 - t/(T+1), sigma_t = t/(T+1).
    static NoiseSchedule linear(int T);
};

// (style image, regularization image) with their condition vectors; the
// style condition carries the reserved identifier token, the
// regularization condition does not.
struct TrainingPair {
    std::vector<double> x_style;
    std::vector<double> x_reg;
    std::vector<double> c_style;
    std::vector<double> c_reg;
};

struct LossWeights {
    double lambda1 = 0.5;   // style reconstruction weight
    double lambda2 = 0.5;   // regularization reconstruction weight
    double w_t = 0.5;       // reconstruction term weight
    double w_t_prime = 0.5; // context-consistency term weight
    bool operator==(const LossWeights&) const = default;
};

// Denoiser interface: deterministic map (noisy latent, condition) -> image.
class Denoiser {
   public:
    virtual ~Denoiser() = default;
    virtual std::vector<double> evaluate(const std::vector<double>& z,
                                         const std::vector<double>& c) const = 0;
    virtual int image_dim() const = 0;
    virtual int cond_dim() const = 0;
};

// Affine toy denoiser x_hat = P*z + Q*c + b with theta = vec(P, Q, b)
// (row-major P, then row-major Q, then b).
class AffineDenoiser final : public Denoiser {
   public:
    AffineDenoiser(int image_dim, int cond_dim);

    std::vector<double> evaluate(const std::vector<double>& z,
                                 const std::vector<double>& c) const override;
    int image_dim() const override { return image_dim_; }
    int cond_dim() const override { return cond_dim_; }

    int param_count() const;
    std::vector<double> theta() const;
    void set_theta(const std::vector<double>& theta);

    Matrix P;               // image_dim x image_dim
    Matrix Q;               // image_dim x cond_dim
    std::vector<double> b;  // image_dim

   private:
    int image_dim_ = 0;
    int cond_dim_ = 0;
};

// One iteration's sampled randomness. z_src is the shared source latent the
// consistency term generates from; it is drawn independently of (eps, t).
struct LossDraws {
    std::vector<double> eps;
    int t = 1;
    std::vector<double> eps_prime;
    int t_prime = 1;
    std::vector<double> z_src;
};

// Toy text encoder: each token hashes (FNV-1a 64) to a seeded pseudo-random
// unit vector; the sum over tokens in sorted order, plus a fixed identifier
// vector when has_identifier, is the condition. Deterministic.
std::vector<double> encode_prompt(const std::vector<std::string>& tokens,
                                  bool has_identifier, int dim = 16);

// The fixed vector encode_prompt adds for the reserved identifier token.
std::vector<double> identifier_vector(int dim = 16);

// z_t = alpha_t * x + sigma_t * eps.
std::vector<double> add_noise(const std::vector<double>& x, int t,
                              const std::vector<double>& eps,
                              const NoiseSchedule& sched);

// W' = W + sum_i w_i * B_i * A_i. W is not modified. Rows are computed in
// parallel with a fixed per-entry accumulation order, so results are
// bitwise identical to the serial reference.
Matrix merge_lora(const Matrix& W, const MergeSpec& spec);

// lambda1*||den(noised style, c_style) - x_style||^2 +
// lambda2*||den(noised reg, c_reg) - x_reg||^2, sharing (eps, t).
double reconstruction_loss(const Denoiser& den, const TrainingPair& pair,
                           const std::vector<double>& eps, int t,
                           const NoiseSchedule& sched, const LossWeights& lw);

// Generates x'_style / x'_reg from the shared latent z_src under each
// condition, re-noises both with shared (eps_prime, t_prime), and returns
// the squared distance between their re-denoised images.
double context_consistency_loss(const Denoiser& den, const TrainingPair& pair,
                                const std::vector<double>& z_src,
                                const std::vector<double>& eps_prime,
                                int t_prime, const NoiseSchedule& sched);

// w_t * reconstruction + w_t_prime * consistency for the given draws.
double total_loss(const Denoiser& den, const TrainingPair& pair,
                  const LossDraws& draws, const NoiseSchedule& sched,
                  const LossWeights& lw);

// Analytic gradient of total_loss over theta for the affine toy denoiser.
// through_generation=true differentiates the generated images x' as
// functions of theta (the default); false treats them as constants.
// Rejects non-affine denoisers.
std::vector<double> loss_gradient(const Denoiser& den,
                                  const TrainingPair& pair,
                                  const LossDraws& draws,
                                  const NoiseSchedule& sched,
                                  const LossWeights& lw,
                                  bool through_generation = true);

// Loss weights active over an inclusive 1-based iteration range.
struct SchedulePhase {
    int first_iteration = 1;
    int last_iteration = 1;
    LossWeights weights;
};

// Two-phase default: equal term weights for iterations 1-500, then 0.8
// reconstruction / 0.2 consistency for 501-1000.
std::vector<SchedulePhase> default_schedule();

struct FineTuneOptions {
    double step_size = 1e-3;
    uint64_t seed = 1;
    int snapshot_every = 100;      // record theta every N iterations
    bool through_generation = true;
};

struct LossRecord {
    int iteration = 0;  // 1-based
    double l_rec = 0.0;
    double l_con = 0.0;
    double l_tot = 0.0;
    LossWeights applied;
};

struct FineTuneResult {
    std::vector<LossRecord> curve;                  // one row per iteration
    std::vector<int> snapshot_iterations;           // 0, N, 2N, ..., final
    std::vector<std::vector<double>> theta_snapshots;
};

// Plain gradient descent on total_loss. Per iteration the seeded sampler
// draws, in this fixed order: pair index, t, t_prime, eps, eps_prime,
// z_src (standard normal). Deterministic given the seed; aborts with a
// diagnostic if the loss exceeds 1e12.
FineTuneResult fine_tune(AffineDenoiser& den,
                         const std::vector<TrainingPair>& dataset,
                         const NoiseSchedule& sched,
                         const std::vector<SchedulePhase>& schedule,
                         const FineTuneOptions& options);

// JSON layout: matrices as {"rows", "cols", "entries"} with row-major
// entries; adapters as {"B", "A", "rank"}; merge inputs as
// {"base", "adapters": [{"adapter", "weight"}, ...]}.
std::string matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const std::string& text);

struct MergeInput {
    Matrix base;
    MergeSpec spec;
};
MergeInput merge_input_from_json(const std::string& text);

// CSV with header "iteration,l_rec,l_con,l_tot".
std::string loss_curve_to_csv(const std::vector<LossRecord>& curve);

}  // namespace inkline
