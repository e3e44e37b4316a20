#include "cvqec/nla.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cvqec/errors.hpp"

namespace cvqec {

namespace {

void check_gain(double gain) {
  if (!(gain >= 1.0) || std::isinf(gain)) {
    std::ostringstream msg;
    msg << "NLA gain G=" << gain << " must be finite and >= 1 (deamplification is not modelled)";
    throw InvalidParameter(msg.str());
  }
}

void check_chi_eta(double chi, double eta) {
  if (!(chi >= 0.0 && chi < 1.0)) throw InvalidParameter("chi must lie in [0, 1)");
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("eta must lie in [0, 1]");
}

Eigen::VectorXd nla_diagonal(double gain, int dim) {
  // G^((n - n_max)/2) computed in log space to avoid overflow at large cutoffs.
  Eigen::VectorXd d(dim);
  const double lg = std::log(gain);
  for (int n = 0; n < dim; ++n) d(n) = std::exp(0.5 * (n - (dim - 1)) * lg);
  return d;
}

}  // namespace

void NlaConfig::validate() const {
  check_gain(gain);
  if (paths < 1) throw InvalidParameter("NLA paths must be >= 1");
  if (dim < 2) throw InvalidDimension("NLA cutoff must be >= 2");
}

FockOperator ideal_nla_operator(double gain, int dim) {
  check_gain(gain);
  if (dim < 1) throw InvalidDimension("NLA cutoff must be positive");
  return FockOperator({dim}, nla_diagonal(gain, dim).cast<Complex>().asDiagonal().toDenseMatrix());
}

HeraldedOutcome<FockKet> ideal_nla(const NlaConfig& config, const FockKet& input) {
  config.validate();
  if (input.mode_dims() != ModeDims{config.dim}) {
    throw InvalidDimension("ideal_nla: input must be a single mode at the configured cutoff");
  }
  const Eigen::VectorXd d = nla_diagonal(config.gain, config.dim);
  const Vector out = d.cast<Complex>().cwiseProduct(input.amplitudes());
  const double p = out.squaredNorm() / input.amplitudes().squaredNorm();
  if (!(p > 0.0)) throw DegenerateConfiguration("ideal_nla: zero success probability");
  return {FockKet({config.dim}, out, true).normalized(), std::min(p, 1.0)};
}

HeraldedOutcome<DensityOperator> ideal_nla(const NlaConfig& config, const DensityOperator& input) {
  config.validate();
  if (input.mode_dims() != ModeDims{config.dim}) {
    throw InvalidDimension("ideal_nla: input must be a single mode at the configured cutoff");
  }
  const Eigen::VectorXd d = nla_diagonal(config.gain, config.dim);
  const Matrix out = d.cast<Complex>().asDiagonal() * input.matrix() * d.cast<Complex>().asDiagonal();
  const double p = out.trace().real() / input.trace();
  if (!(p > 0.0)) throw DegenerateConfiguration("ideal_nla: zero success probability");
  return {DensityOperator({config.dim}, out / out.trace().real()), std::min(p, 1.0)};
}

HeraldedOutcome<KetEnsemble> ideal_nla_on_mode(const NlaConfig& config, const KetEnsemble& input,
                                               int mode) {
  config.validate();
  if (mode < 0 || mode >= static_cast<int>(input.mode_dims().size()) ||
      input.mode_dims()[mode] != config.dim) {
    throw InvalidDimension("ideal_nla_on_mode: mode cutoff differs from the configured cutoff");
  }
  const Matrix op = nla_diagonal(config.gain, config.dim).cast<Complex>().asDiagonal().toDenseMatrix();
  const KetEnsemble out = apply_on_mode(op, mode, input);
  const double p = out.trace() / input.trace();
  if (!(p > 0.0)) throw DegenerateConfiguration("ideal_nla: zero success probability");
  return {out.scaled(1.0 / out.trace()), std::min(p, 1.0)};
}

// --- bounds ------------------------------------------------------------------------

void EnsembleSpec::validate() const {
  if (!(v_t >= 1.0) || !(v_t_prime >= v_t)) {
    throw InvalidParameter("ensemble variances must satisfy V_t' >= V_t >= 1");
  }
}

double gaussian_ensemble_bound(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.v_t_prime == 1.0) return 1.0;
  return std::clamp((spec.v_t - 1.0) / (spec.v_t_prime - 1.0), 0.0, 1.0);
}

double success_bound(double chi, double eta, double gain) {
  check_chi_eta(chi, eta);
  check_gain(gain);
  const double x = 1.0 + (gain - 1.0) * eta;
  const double c2 = chi * chi;
  const double num = 1.0 - c2 * x;
  if (num <= 0.0) return 0.0;
  return std::clamp(num / (x * (1.0 - c2)), 0.0, 1.0);
}

EffectiveEpr effective_epr_params(double chi, double eta, double gain) {
  check_chi_eta(chi, eta);
  check_gain(gain);
  const double x = 1.0 + (gain - 1.0) * eta;
  const double chi_eff = chi * std::sqrt(x);
  if (chi_eff >= 1.0) {
    std::ostringstream msg;
    msg << "gain " << gain << " drives chi_eff=" << chi_eff << " to or beyond 1";
    throw UnphysicalOutput(msg.str());
  }
  return {chi_eff, gain * eta / x};
}

EprIdentityReport verify_epr_identity(double chi, double eta, double gain, int dim) {
  const EffectiveEpr params = effective_epr_params(chi, eta, gain);
  const KetEnsemble lossy = lossy_epr(chi, eta, dim, dim);
  NlaConfig cfg;
  cfg.gain = gain;
  cfg.dim = dim;
  const auto amplified = ideal_nla_on_mode(cfg, lossy, 1);
  const KetEnsemble reference = lossy_epr(params.chi_eff, params.eta_eff, dim, dim);
  EprIdentityReport report;
  report.fidelity = fidelity(amplified.state, reference);
  report.p_success = amplified.p_success;
  report.p_bound = success_bound(chi, eta, gain);
  report.tail = epr_tail_weight(params.chi_eff, dim);
  report.params = params;
  return report;
}

int ensemble_cutoff(double v_t, int samples) {
  if (!(v_t >= 1.0) || samples < 1) throw InvalidParameter("ensemble_cutoff needs v_t >= 1 and samples >= 1");
  // |alpha|^2 is exponential with mean 2 sigma^2; keep the chance that any
  // draw exceeds dim/4 below 1e-6.
  const double mean = (v_t - 1.0) / 2.0;
  const double largest = mean * std::log(samples * 1e6);
  return std::max(40, static_cast<int>(std::ceil(4.0 * largest)) + 8);
}

EnsembleSampleReport sample_ensemble_success(double v_t, double gain, int samples,
                                             std::uint64_t seed, int dim) {
  check_gain(gain);
  if (samples < 2) throw InvalidParameter("need at least two ensemble samples");
  const EnsembleSpec spec{v_t, 1.0 + gain * (v_t - 1.0)};
  spec.validate();
  // Quadrature variance V = 1 + 4 sigma^2 for Re(alpha), Im(alpha) ~ N(0, sigma^2).
  const double sigma = std::sqrt((v_t - 1.0) / 4.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  NlaConfig cfg;
  cfg.gain = gain;
  cfg.dim = dim;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Complex alpha(sigma * normal(rng), sigma * normal(rng));
    const double p = ideal_nla(cfg, coherent_ket(alpha, dim)).p_success;
    sum += p;
    sum_sq += p * p;
  }
  const double mean = sum / samples;
  const double var = std::max(0.0, (sum_sq / samples - mean * mean) * samples / (samples - 1.0));
  EnsembleSampleReport r;
  r.spec = spec;
  r.gain = gain;
  r.samples = samples;
  r.mean_p = mean;
  r.std_err = std::sqrt(var / samples);
  r.bound = gaussian_ensemble_bound(spec);
  r.within_bound = mean <= r.bound + 3.0 * r.std_err;
  return r;
}

}  // namespace cvqec
