#include "animesh/distill.hpp"

#include <cmath>
#include <utility>

#include "animesh/errors.hpp"

namespace animesh {

DiffusionSchedule DiffusionSchedule::linear_vp(int steps, double beta_start, double beta_end) {
  if (steps < 2) throw ValidationError("diffusion schedule: needs at least 2 steps");
  if (!(beta_start > 0.0) || !(beta_end < 1.0) || beta_start > beta_end)
    throw ValidationError("diffusion schedule: need 0 < beta_start <= beta_end < 1");
  DiffusionSchedule s;
  s.betas.resize(static_cast<std::size_t>(steps));
  s.alpha_bars.resize(static_cast<std::size_t>(steps));
  double running = 1.0;
  for (int t = 0; t < steps; ++t) {
    const double beta =
        beta_start + (beta_end - beta_start) * static_cast<double>(t) / static_cast<double>(steps - 1);
    s.betas[static_cast<std::size_t>(t)] = beta;
    running *= 1.0 - beta;
    s.alpha_bars[static_cast<std::size_t>(t)] = running;
  }
  return s;
}

void DistillConfig::validate() const {
  if (!(t_min >= 0.0) || !(t_min < t_max) || !(t_max <= 1.0))
    throw ValidationError("distill config: need 0 <= t_min < t_max <= 1");
  if (schedule.steps() < 2) throw ValidationError("distill config: empty schedule");
  if (!(guidance_scale == guidance_scale))
    throw ValidationError("distill config: guidance scale is NaN");
}

double DistillConfig::weight(double t_fraction) const {
  const double w = weight_fn ? weight_fn(t_fraction) : 1.0;
  if (!std::isfinite(w)) throw NumericalError("distill config: weight function returned non-finite value");
  return w;
}

int DistillConfig::draw_step(Rng& rng) const {
  const int last = schedule.steps() - 1;
  const int lo = static_cast<int>(std::llround(t_min * last));
  const int hi = static_cast<int>(std::llround(t_max * last));
  return lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - lo + 1)));
}

Eigen::VectorXd draw_noise(Rng& rng, Eigen::Index size) {
  Eigen::VectorXd eps(size);
  for (Eigen::Index i = 0; i < size; ++i) eps[i] = rng.normal();
  return eps;
}

namespace {

void check_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) throw ValidationError(std::string(what) + ": non-finite input");
}

Eigen::VectorXd guided_predict(const Denoiser& denoiser, const Eigen::VectorXd& z,
                               const std::string& cond, int t, double alpha_bar,
                               const std::vector<Eigen::Matrix4d>* poses, int view,
                               double scale) {
  Eigen::VectorXd e_cond = denoiser.predict_noise(z, cond, t, alpha_bar, poses, view);
  if (e_cond.size() != z.size())
    throw ValidationError("denoiser: output size does not match the sample");
  if (scale == 1.0) return e_cond;
  Eigen::VectorXd e_uncond = denoiser.predict_noise(z, std::string(), t, alpha_bar, poses, view);
  if (e_uncond.size() != z.size())
    throw ValidationError("denoiser: output size does not match the sample");
  return e_uncond + scale * (e_cond - e_uncond);
}

}  // namespace

Eigen::VectorXd sds_gradient(const Eigen::VectorXd& x, const Denoiser& denoiser,
                             const std::string& cond, const DistillConfig& cfg, Rng& rng) {
  cfg.validate();
  check_finite(x, "sds_gradient");
  const int t = cfg.draw_step(rng);
  const Eigen::VectorXd eps = draw_noise(rng, x.size());
  const double ab = cfg.schedule.alpha_bars[static_cast<std::size_t>(t)];
  const Eigen::VectorXd z = std::sqrt(ab) * x + std::sqrt(1.0 - ab) * eps;
  const Eigen::VectorXd e_hat =
      guided_predict(denoiser, z, cond, t, ab, nullptr, 0, cfg.guidance_scale);
  const double w = cfg.weight(static_cast<double>(t) / (cfg.schedule.steps() - 1));
  return w * (e_hat - eps);
}

std::vector<Eigen::VectorXd> mv_sds_gradient(const std::vector<Eigen::VectorXd>& views,
                                             const Denoiser& denoiser, const std::string& cond,
                                             const std::vector<Eigen::Matrix4d>& poses,
                                             const DistillConfig& cfg, Rng& rng) {
  cfg.validate();
  if (views.empty()) throw ValidationError("mv_sds_gradient: no views");
  if (poses.size() != views.size())
    throw ValidationError("mv_sds_gradient: pose count does not match view count");
  const Eigen::Index size = views.front().size();
  for (const Eigen::VectorXd& v : views) {
    check_finite(v, "mv_sds_gradient");
    if (v.size() != size) throw ValidationError("mv_sds_gradient: views differ in size");
  }

  // One (t, eps) draw shared by the whole batch.
  const int t = cfg.draw_step(rng);
  const Eigen::VectorXd eps = draw_noise(rng, size);
  const double ab = cfg.schedule.alpha_bars[static_cast<std::size_t>(t)];
  const double w = cfg.weight(static_cast<double>(t) / (cfg.schedule.steps() - 1));

  std::vector<Eigen::VectorXd> grads(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Eigen::VectorXd z = std::sqrt(ab) * views[v] + std::sqrt(1.0 - ab) * eps;
    const Eigen::VectorXd e_hat = guided_predict(denoiser, z, cond, t, ab, &poses,
                                                 static_cast<int>(v), cfg.guidance_scale);
    grads[v] = w * (e_hat - eps);
  }
  return grads;
}

Eigen::VectorXd vsd_gradient(const Eigen::VectorXd& x, const Denoiser& pretrained,
                             const Denoiser& finetuned, const std::string& cond,
                             const std::vector<Eigen::Matrix4d>* poses, const DistillConfig& cfg,
                             Rng& rng) {
  cfg.validate();
  check_finite(x, "vsd_gradient");
  const int t = cfg.draw_step(rng);
  const Eigen::VectorXd eps = draw_noise(rng, x.size());
  const double ab = cfg.schedule.alpha_bars[static_cast<std::size_t>(t)];
  const Eigen::VectorXd z = std::sqrt(ab) * x + std::sqrt(1.0 - ab) * eps;
  const Eigen::VectorXd e_pre =
      guided_predict(pretrained, z, cond, t, ab, nullptr, 0, cfg.guidance_scale);
  const Eigen::VectorXd e_fine =
      guided_predict(finetuned, z, cond, t, ab, poses, 0, cfg.guidance_scale);
  const double w = cfg.weight(static_cast<double>(t) / (cfg.schedule.steps() - 1));
  return w * (e_pre - e_fine);
}

GaussianToyDenoiser::GaussianToyDenoiser(Eigen::VectorXd mu, double sigma)
    : mu_(std::move(mu)), sigma_(sigma) {
  if (!(sigma_ >= 0.0)) throw ValidationError("gaussian toy denoiser: sigma must be >= 0");
}

void GaussianToyDenoiser::set_condition_mean(const std::string& cond, Eigen::VectorXd mu) {
  for (auto& [name, mean] : cond_means_) {
    if (name == cond) {
      mean = std::move(mu);
      return;
    }
  }
  cond_means_.emplace_back(cond, std::move(mu));
}

Eigen::VectorXd GaussianToyDenoiser::predict_noise(const Eigen::VectorXd& z,
                                                   const std::string& cond, int /*t*/,
                                                   double alpha_bar,
                                                   const std::vector<Eigen::Matrix4d>* /*poses*/,
                                                   int /*view*/) const {
  const Eigen::VectorXd* mu = &mu_;
  for (const auto& [name, mean] : cond_means_)
    if (name == cond) mu = &mean;
  if (mu->size() != z.size())
    throw ValidationError("gaussian toy denoiser: sample size does not match mu");
  const double a = alpha_bar;
  const double denom = a * sigma_ * sigma_ + 1.0 - a;
  return std::sqrt(1.0 - a) * (z - std::sqrt(a) * (*mu)) / denom;
}

AffineToyDenoiser::AffineToyDenoiser(Eigen::Index size)
    : scale(Eigen::VectorXd::Ones(size)), offset(Eigen::VectorXd::Zero(size)) {
  if (size < 1) throw ValidationError("affine toy denoiser: size must be >= 1");
}

Eigen::VectorXd AffineToyDenoiser::predict_noise(const Eigen::VectorXd& z,
                                                 const std::string& /*cond*/, int /*t*/,
                                                 double /*alpha_bar*/,
                                                 const std::vector<Eigen::Matrix4d>* /*poses*/,
                                                 int /*view*/) const {
  if (z.size() != scale.size())
    throw ValidationError("affine toy denoiser: sample size does not match parameters");
  return scale.cwiseProduct(z) + offset;
}

double lora_finetune_core(AffineToyDenoiser& model, const std::vector<Eigen::VectorXd>& batch,
                          const DistillConfig& cfg, const std::vector<int>& steps,
                          const std::vector<Eigen::VectorXd>& noises, double learning_rate) {
  cfg.validate();
  if (batch.empty()) throw ValidationError("lora_finetune: empty batch");
  if (steps.size() != batch.size() || noises.size() != batch.size())
    throw ValidationError("lora_finetune: per-item draw counts do not match the batch");

  const Eigen::Index size = model.scale.size();
  Eigen::VectorXd grad_scale = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd grad_offset = Eigen::VectorXd::Zero(size);
  double objective = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    check_finite(batch[i], "lora_finetune");
    if (batch[i].size() != size || noises[i].size() != size)
      throw ValidationError("lora_finetune: item size does not match the model");
    const int t = steps[i];
    if (t < 0 || t >= cfg.schedule.steps())
      throw ValidationError("lora_finetune: step index out of schedule range");
    const double ab = cfg.schedule.alpha_bars[static_cast<std::size_t>(t)];
    const Eigen::VectorXd z = std::sqrt(ab) * batch[i] + std::sqrt(1.0 - ab) * noises[i];
    const Eigen::VectorXd residual =
        model.predict_noise(z, std::string(), t, ab, nullptr, 0) - noises[i];
    objective += residual.squaredNorm();
    grad_scale += 2.0 * residual.cwiseProduct(z);
    grad_offset += 2.0 * residual;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  objective *= inv;
  if (!std::isfinite(objective)) throw NumericalError("lora_finetune: non-finite objective");
  model.scale -= learning_rate * inv * grad_scale;
  model.offset -= learning_rate * inv * grad_offset;
  return objective;
}

double lora_finetune_step(AffineToyDenoiser& model, const std::vector<Eigen::VectorXd>& batch,
                          const DistillConfig& cfg, double learning_rate, Rng& rng) {
  cfg.validate();
  if (batch.empty()) throw ValidationError("lora_finetune: empty batch");
  std::vector<int> steps(batch.size());
  std::vector<Eigen::VectorXd> noises(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    steps[i] = cfg.draw_step(rng);
    noises[i] = draw_noise(rng, batch[i].size());
  }
  return lora_finetune_core(model, batch, cfg, steps, noises, learning_rate);
}

}  // namespace animesh
