#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "animesh/rng.hpp"

namespace animesh {

/// Variance-preserving diffusion schedule with linearly spaced betas.
struct DiffusionSchedule {
  std::vector<double> betas;
  std::vector<double> alpha_bars;  // running product of (1 - beta)

  static DiffusionSchedule linear_vp(int steps = 1000, double beta_start = 1e-4,
                                     double beta_end = 0.02);
  int steps() const { return static_cast<int>(betas.size()); }
};

/// Predicts the noise inside a noised sample. Implementations must return
/// a vector of the same size as z and be deterministic functions of their
/// inputs. `poses` is null for pose-free evaluation; `view` selects the
/// relevant entry when poses are given. The condition token is opaque; the
/// empty string means unconditional.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Eigen::VectorXd predict_noise(const Eigen::VectorXd& z, const std::string& cond, int t,
                                        double alpha_bar,
                                        const std::vector<Eigen::Matrix4d>* poses,
                                        int view) const = 0;
};

struct DistillConfig {
  /// Weight as a function of the schedule fraction t/(steps-1); null means 1.
  std::function<double(double)> weight_fn;
  double t_min = 0.02;  // draw window as fractions of the schedule
  double t_max = 0.98;
  double guidance_scale = 1.0;  // blend e_uncond + s * (e_cond - e_uncond); 1 = conditional only
  DiffusionSchedule schedule = DiffusionSchedule::linear_vp();

  void validate() const;
  double weight(double t_fraction) const;

  /// Draw protocol, shared by every distillation form so tests can replay
  /// streams: first one uniform_index over the step window picks t, then
  /// one normal() per element (in order) forms the noise.
  int draw_step(Rng& rng) const;
};

Eigen::VectorXd draw_noise(Rng& rng, Eigen::Index size);

/// Score-distillation gradient w(t) * (e_hat(z_t, cond, t) - eps) where
/// z_t = sqrt(alpha_bar_t) x + sqrt(1 - alpha_bar_t) eps. Chaining into
/// upstream parameters is the caller's job.
Eigen::VectorXd sds_gradient(const Eigen::VectorXd& x, const Denoiser& denoiser,
                             const std::string& cond, const DistillConfig& cfg, Rng& rng);

/// Multi-view form: one t and one noise drawn for the whole batch, poses
/// forwarded to the denoiser (one pose per view, matching sizes required).
std::vector<Eigen::VectorXd> mv_sds_gradient(const std::vector<Eigen::VectorXd>& views,
                                             const Denoiser& denoiser, const std::string& cond,
                                             const std::vector<Eigen::Matrix4d>& poses,
                                             const DistillConfig& cfg, Rng& rng);

/// Variational form: w(t) * (e_hat - e_hat') with the same z_t fed to both
/// denoisers; the finetuned one also receives the poses.
Eigen::VectorXd vsd_gradient(const Eigen::VectorXd& x, const Denoiser& pretrained,
                             const Denoiser& finetuned, const std::string& cond,
                             const std::vector<Eigen::Matrix4d>* poses, const DistillConfig& cfg,
                             Rng& rng);

/// Closed-form denoiser for data distributed N(mu, sigma^2 I):
/// e_hat = sqrt(1-a) (z - sqrt(a) mu) / (a sigma^2 + 1 - a), a = alpha_bar.
/// Optional per-condition means override mu (used to exercise guidance).
class GaussianToyDenoiser : public Denoiser {
 public:
  GaussianToyDenoiser(Eigen::VectorXd mu, double sigma);
  void set_condition_mean(const std::string& cond, Eigen::VectorXd mu);
  Eigen::VectorXd predict_noise(const Eigen::VectorXd& z, const std::string& cond, int t,
                                double alpha_bar, const std::vector<Eigen::Matrix4d>* poses,
                                int view) const override;

 private:
  Eigen::VectorXd mu_;
  double sigma_;
  std::vector<std::pair<std::string, Eigen::VectorXd>> cond_means_;
};

/// Trainable elementwise-affine predictor e_hat' = a .* z + b, the stand-in
/// for a low-rank finetuned branch. cond and poses are ignored.
class AffineToyDenoiser : public Denoiser {
 public:
  explicit AffineToyDenoiser(Eigen::Index size);
  Eigen::VectorXd predict_noise(const Eigen::VectorXd& z, const std::string& cond, int t,
                                double alpha_bar, const std::vector<Eigen::Matrix4d>* poses,
                                int view) const override;

  Eigen::VectorXd scale;   // a, initialized to 1
  Eigen::VectorXd offset;  // b, initialized to 0
};

/// One SGD step on the denoising objective mean_i ||e_hat'(z_i) - eps_i||^2
/// with explicit step indices and noises (the deterministic core). Returns
/// the pre-step batch objective.
double lora_finetune_core(AffineToyDenoiser& model, const std::vector<Eigen::VectorXd>& batch,
                          const DistillConfig& cfg, const std::vector<int>& steps,
                          const std::vector<Eigen::VectorXd>& noises, double learning_rate);

/// Convenience wrapper drawing (t, eps) per batch item with the standard
/// protocol, then delegating to the core.
double lora_finetune_step(AffineToyDenoiser& model, const std::vector<Eigen::VectorXd>& batch,
                          const DistillConfig& cfg, double learning_rate, Rng& rng);

}  // namespace animesh
