#pragma once

#include "strandkit/common.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace strandkit {

// Diffusion tensors are spatial positions x channels. A scalp sample
// y = [T, D] has R*R rows and 64 latent channels plus one density channel.
using Tensor = Eigen::ArrayXXd;

// Conditioning vector; std::nullopt is the null token used for
// classifier-free guidance.
using Condition = std::optional<Eigen::VectorXd>;

struct PrecondCoeffs {
  double c_skip = 0.0;
  double c_in = 0.0;
  double c_out = 0.0;
  double c_noise = 0.0;
  double sigma = 0.0;
  double sigma_data = 1.0;
};

PrecondCoeffs precond_coeffs(double sigma, double sigma_data = 1.0);

// The raw network F: maps (c_in * x, c_noise, condition) to a tensor of the
// same shape. Implementations must be deterministic.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Tensor evaluate(const Tensor& scaled_input, double c_noise, const Condition& cond) const = 0;
};

// Adapts any callable to the Denoiser interface.
class FunctionDenoiser : public Denoiser {
 public:
  using Fn = std::function<Tensor(const Tensor&, double, const Condition&)>;
  explicit FunctionDenoiser(Fn fn) : fn_(std::move(fn)) {}
  Tensor evaluate(const Tensor& x, double c_noise, const Condition& cond) const override {
    return fn_(x, c_noise, cond);
  }

 private:
  Fn fn_;
};

// c_skip * x + c_out * F(c_in * x; c_noise).
Tensor denoise(const Denoiser& net, const Tensor& x, double sigma, const Condition& cond = std::nullopt,
               double sigma_data = 1.0);

// Closed-form network for Gaussian data N(mu, Sigma) over the flattened
// (column-major) tensor. It inverts the preconditioning so that the wrapped
// denoiser returns the exact posterior mean mu + Sigma (Sigma + s^2 I)^-1 (x - mu).
// With a condition c the data mean becomes mu + condition_map * c.
class GaussianDenoiser : public Denoiser {
 public:
  GaussianDenoiser(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance, Eigen::Index rows,
                   double sigma_data = 1.0, Eigen::MatrixXd condition_map = {});

  static GaussianDenoiser diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances,
                                   Eigen::Index rows, double sigma_data = 1.0);

  Tensor evaluate(const Tensor& scaled_input, double c_noise, const Condition& cond) const override;

  Eigen::VectorXd posterior_mean(const Eigen::VectorXd& x, double sigma, const Condition& cond) const;
  Eigen::VectorXd data_mean(const Condition& cond) const;

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return mean_.size() / rows_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd condition_map_;
  Eigen::Index rows_;
  double sigma_data_;
};

// Element-wise squared error of the wrapped denoiser on x = y + n.
Tensor edm_loss(const Denoiser& net, const Tensor& y, const Tensor& n, double sigma,
                const Condition& cond = std::nullopt, double sigma_data = 1.0);

// Log-variance u(sigma), piecewise linear in ln(sigma) over the knots.
struct UncertaintyModel {
  Eigen::VectorXd log_sigma;  // strictly increasing knots
  Eigen::VectorXd values;

  double operator()(double sigma) const;
  static UncertaintyModel constant(double value, double sigma_min, double sigma_max);
};

struct LossSample {
  Tensor y;
  Tensor n;
  double sigma = 1.0;
  Condition cond;
};

struct SigmaDiagnostic {
  double sigma = 0.0;
  double raw_loss = 0.0;       // mean element loss
  double u = 0.0;
  double weighted_loss = 0.0;  // mean of data / e^u + u
  int count = 0;
};

struct WeightedLoss {
  double loss = 0.0;
  std::vector<SigmaDiagnostic> per_sigma;  // ascending sigma
};

struct WeightedLossOptions {
  // Weight of a trailing density channel; defaults to mean(w).
  std::optional<double> density_weight;
  double sigma_data = 1.0;
};

// Batch mean of (sum_c w_c * mean_spatial(loss_c)) / e^{u(sigma)} + u(sigma).
// y may carry exactly w.size() channels, or one extra density channel.
WeightedLoss weighted_loss(const Denoiser& net, const UncertaintyModel& u, const Eigen::VectorXd& w,
                           const std::vector<LossSample>& batch, const WeightedLossOptions& options = {});

// Columns: sigma, raw_loss, u, weighted_loss.
void write_loss_csv(std::ostream& out, const std::vector<SigmaDiagnostic>& rows);

// rho-spaced noise levels from sigma_max down to sigma_min, then a final 0.
std::vector<double> sigma_schedule(int steps, double sigma_min = 0.002, double sigma_max = 80.0,
                                   double rho = 7.0);

struct CfgConfig {
  double drop_probability = 0.1;
  double guidance_scale = 1.0;

  void validate() const;
};

Condition cfg_dropout(const Condition& cond, Rng& rng, double drop_probability = 0.1);

// Deterministic second-order Heun integration of the probability-flow ODE,
// starting from N(0, schedule[0]^2 I). With a CfgConfig and a condition, each
// prediction is uncond + scale * (cond - uncond).
Tensor heun_sample(const Denoiser& net, const std::vector<double>& schedule, Eigen::Index rows,
                   Eigen::Index cols, Rng& rng, const std::optional<CfgConfig>& cfg = std::nullopt,
                   const Condition& cond = std::nullopt, double sigma_data = 1.0);

}  // namespace strandkit
