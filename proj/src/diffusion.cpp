#include "strandkit/diffusion.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>

namespace strandkit {

PrecondCoeffs precond_coeffs(double sigma, double sigma_data) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::invalid_argument,
          "precond_coeffs: sigma must be positive");
  require(sigma_data > 0.0, ErrorCode::invalid_argument, "precond_coeffs: sigma_data must be positive");
  const double s2 = sigma * sigma, d2 = sigma_data * sigma_data;
  const double norm = std::sqrt(s2 + d2);
  PrecondCoeffs c;
  c.sigma = sigma;
  c.sigma_data = sigma_data;
  c.c_skip = d2 / (s2 + d2);
  c.c_in = 1.0 / norm;
  c.c_out = sigma * sigma_data / norm;
  c.c_noise = std::log(sigma) / 4.0;
  return c;
}

Tensor denoise(const Denoiser& net, const Tensor& x, double sigma, const Condition& cond,
               double sigma_data) {
  const PrecondCoeffs c = precond_coeffs(sigma, sigma_data);
  const Tensor f = net.evaluate(c.c_in * x, c.c_noise, cond);
  require(f.rows() == x.rows() && f.cols() == x.cols(), ErrorCode::sizing,
          "denoise: network output shape differs from its input");
  return c.c_skip * x + c.c_out * f;
}

GaussianDenoiser::GaussianDenoiser(Eigen::VectorXd mean, const Eigen::MatrixXd& covariance,
                                   Eigen::Index rows, double sigma_data, Eigen::MatrixXd condition_map)
    : mean_(std::move(mean)),
      covariance_(covariance),
      condition_map_(std::move(condition_map)),
      rows_(rows),
      sigma_data_(sigma_data) {
  const Eigen::Index d = mean_.size();
  require(rows_ > 0 && d % rows_ == 0, ErrorCode::sizing, "GaussianDenoiser: rows must divide the dimension");
  require(covariance.rows() == d && covariance.cols() == d, ErrorCode::sizing,
          "GaussianDenoiser: covariance shape mismatch");
  require(condition_map_.size() == 0 || condition_map_.rows() == d, ErrorCode::sizing,
          "GaussianDenoiser: condition map rows must match the dimension");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  require(eig.info() == Eigen::Success, ErrorCode::degenerate, "GaussianDenoiser: eigen decomposition failed");
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  require(eig.eigenvalues().minCoeff() >= -1e-12 * scale, ErrorCode::invalid_argument,
          "GaussianDenoiser: covariance is not positive semi-definite");
  eigenvectors_ = eig.eigenvectors();
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
}

GaussianDenoiser GaussianDenoiser::diagonal(Eigen::VectorXd mean, const Eigen::VectorXd& variances,
                                            Eigen::Index rows, double sigma_data) {
  return GaussianDenoiser(std::move(mean), variances.asDiagonal().toDenseMatrix(), rows, sigma_data);
}

Eigen::VectorXd GaussianDenoiser::data_mean(const Condition& cond) const {
  if (!cond || condition_map_.size() == 0) return mean_;
  require(cond->size() == condition_map_.cols(), ErrorCode::sizing,
          "GaussianDenoiser: condition length mismatch");
  return mean_ + condition_map_ * *cond;
}

Eigen::VectorXd GaussianDenoiser::posterior_mean(const Eigen::VectorXd& x, double sigma,
                                                 const Condition& cond) const {
  const Eigen::VectorXd mu = data_mean(cond);
  const Eigen::VectorXd shrink =
      eigenvalues_.array() / (eigenvalues_.array() + sigma * sigma);
  return mu + eigenvectors_ * shrink.asDiagonal() * (eigenvectors_.transpose() * (x - mu));
}

Tensor GaussianDenoiser::evaluate(const Tensor& scaled_input, double c_noise,
                                  const Condition& cond) const {
  require(scaled_input.size() == mean_.size() && scaled_input.rows() == rows_, ErrorCode::sizing,
          "GaussianDenoiser: input shape mismatch");
  const double sigma = std::exp(4.0 * c_noise);
  const PrecondCoeffs c = precond_coeffs(sigma, sigma_data_);
  const Eigen::Map<const Eigen::VectorXd> flat(scaled_input.data(), scaled_input.size());
  const Eigen::VectorXd x = flat / c.c_in;
  const Eigen::VectorXd f = (posterior_mean(x, sigma, cond) - c.c_skip * x) / c.c_out;
  return Eigen::Map<const Tensor>(f.data(), scaled_input.rows(), scaled_input.cols());
}

Tensor edm_loss(const Denoiser& net, const Tensor& y, const Tensor& n, double sigma,
                const Condition& cond, double sigma_data) {
  require(y.rows() == n.rows() && y.cols() == n.cols(), ErrorCode::sizing,
          "edm_loss: clean sample and noise shapes differ");
  return (denoise(net, y + n, sigma, cond, sigma_data) - y).square();
}

double UncertaintyModel::operator()(double sigma) const {
  require(log_sigma.size() >= 1 && log_sigma.size() == values.size(), ErrorCode::sizing,
          "UncertaintyModel: knots and values differ in length");
  require(sigma > 0.0, ErrorCode::invalid_argument, "UncertaintyModel: sigma must be positive");
  const double ls = std::log(sigma);
  const double lo = log_sigma[0], hi = log_sigma[log_sigma.size() - 1];
  constexpr double slack = 1e-12;
  require(ls >= lo - slack && ls <= hi + slack, ErrorCode::invalid_argument,
          "UncertaintyModel: sigma " + std::to_string(sigma) + " outside the knot range");
  if (log_sigma.size() == 1) return values[0];
  const double* begin = log_sigma.data();
  const double* end = begin + log_sigma.size();
  Eigen::Index k = std::upper_bound(begin, end, ls) - begin - 1;
  k = std::clamp<Eigen::Index>(k, 0, log_sigma.size() - 2);
  const double t = std::clamp((ls - log_sigma[k]) / (log_sigma[k + 1] - log_sigma[k]), 0.0, 1.0);
  return std::lerp(values[k], values[k + 1], t);
}

UncertaintyModel UncertaintyModel::constant(double value, double sigma_min, double sigma_max) {
  UncertaintyModel u;
  u.log_sigma = Eigen::Vector2d(std::log(sigma_min), std::log(sigma_max));
  u.values = Eigen::Vector2d(value, value);
  return u;
}

WeightedLoss weighted_loss(const Denoiser& net, const UncertaintyModel& u, const Eigen::VectorXd& w,
                           const std::vector<LossSample>& batch, const WeightedLossOptions& options) {
  require(!batch.empty(), ErrorCode::invalid_argument, "weighted_loss: empty batch");
  const Eigen::Index latent = w.size();
  const double density_weight = options.density_weight.value_or(w.mean());

  struct Acc {
    double raw = 0.0, weighted = 0.0, u = 0.0;
    int count = 0;
  };
  std::map<double, Acc> groups;
  double total = 0.0;
  for (const auto& s : batch) {
    require(s.y.cols() == latent || s.y.cols() == latent + 1, ErrorCode::sizing,
            "weighted_loss: sample has " + std::to_string(s.y.cols()) + " channels, weights cover " +
                std::to_string(latent));
    const double us = u(s.sigma);
    const Tensor loss = edm_loss(net, s.y, s.n, s.sigma, s.cond, options.sigma_data);
    const Eigen::ArrayXd channel_mean = loss.colwise().mean().transpose();
    double data = (w.array() * channel_mean.head(latent)).sum();
    if (s.y.cols() == latent + 1) data += density_weight * channel_mean[latent];
    const double term = data / std::exp(us) + us;
    total += term;

    Acc& g = groups[s.sigma];
    g.raw += loss.mean();
    g.weighted += term;
    g.u = us;
    ++g.count;
  }

  WeightedLoss out;
  out.loss = total / static_cast<double>(batch.size());
  for (const auto& [sigma, g] : groups)
    out.per_sigma.push_back({sigma, g.raw / g.count, g.u, g.weighted / g.count, g.count});
  return out;
}

void write_loss_csv(std::ostream& out, const std::vector<SigmaDiagnostic>& rows) {
  out.precision(10);
  out << "sigma,raw_loss,u,weighted_loss\n";
  for (const auto& r : rows) out << r.sigma << ',' << r.raw_loss << ',' << r.u << ',' << r.weighted_loss << '\n';
}

std::vector<double> sigma_schedule(int steps, double sigma_min, double sigma_max, double rho) {
  require(steps >= 1, ErrorCode::invalid_argument, "sigma_schedule: steps must be >= 1");
  require(sigma_min > 0.0 && sigma_min < sigma_max && rho > 0.0, ErrorCode::invalid_argument,
          "sigma_schedule: need 0 < sigma_min < sigma_max and rho > 0");
  std::vector<double> s;
  s.reserve(steps + 1);
  if (steps == 1) {
    s.push_back(sigma_max);
  } else {
    const double a = std::pow(sigma_max, 1.0 / rho), b = std::pow(sigma_min, 1.0 / rho);
    for (int i = 0; i < steps; ++i) s.push_back(std::pow(a + i / double(steps - 1) * (b - a), rho));
    s.front() = sigma_max;
    s.back() = sigma_min;
  }
  s.push_back(0.0);
  return s;
}

void CfgConfig::validate() const {
  require(drop_probability >= 0.0 && drop_probability <= 1.0, ErrorCode::invalid_argument,
          "cfg: drop probability must lie in [0, 1]");
  require(guidance_scale >= 0.0, ErrorCode::invalid_argument, "cfg: guidance scale must be >= 0");
}

Condition cfg_dropout(const Condition& cond, Rng& rng, double drop_probability) {
  require(drop_probability >= 0.0 && drop_probability <= 1.0, ErrorCode::invalid_argument,
          "cfg_dropout: probability must lie in [0, 1]");
  if (rng.uniform() < drop_probability) return std::nullopt;
  return cond;
}

Tensor heun_sample(const Denoiser& net, const std::vector<double>& schedule, Eigen::Index rows,
                   Eigen::Index cols, Rng& rng, const std::optional<CfgConfig>& cfg,
                   const Condition& cond, double sigma_data) {
  require(schedule.size() >= 2 && schedule.back() == 0.0 && schedule.front() > 0.0,
          ErrorCode::invalid_argument, "heun_sample: schedule must start positive and end at 0");
  for (std::size_t i = 0; i + 1 < schedule.size(); ++i)
    require(schedule[i] > schedule[i + 1], ErrorCode::invalid_argument,
            "heun_sample: schedule must be strictly decreasing");
  if (cfg) cfg->validate();

  auto predict = [&](const Tensor& x, double sigma) -> Tensor {
    if (!cfg || !cond) return denoise(net, x, sigma, cond, sigma_data);
    const Tensor uncond = denoise(net, x, sigma, std::nullopt, sigma_data);
    const Tensor conditioned = denoise(net, x, sigma, cond, sigma_data);
    return uncond + cfg->guidance_scale * (conditioned - uncond);
  };

  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = schedule.front() * normal(rng);

  for (std::size_t i = 0; i + 1 < schedule.size(); ++i) {
    const double s0 = schedule[i], s1 = schedule[i + 1];
    const Tensor d0 = (x - predict(x, s0)) / s0;
    Tensor next = x + (s1 - s0) * d0;
    if (s1 != 0.0) {
      const Tensor d1 = (next - predict(next, s1)) / s1;
      next = x + (s1 - s0) * 0.5 * (d0 + d1);
    }
    x = std::move(next);
  }
  return x;
}

}  // namespace strandkit
