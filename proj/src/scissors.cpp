// Linear-optics noiseless amplification by quantum scissors.
//
// Unit circuit (modes s = signal, c = ancilla output, d = ancilla arm):
//   |n>_s |1>_c |0>_d  --BS(tau) on (c, d)-->  --BS(1/2) on (s, d)-->
//   count photons in s and d; success is one photon in total.
// The unit Kraus map is read off the simulated output amplitudes, so the
// gain and the sign of each click pattern come from the circuit itself.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cvqec/errors.hpp"
#include "cvqec/nla.hpp"

namespace cvqec {

namespace {

struct UnitSimulation {
  int dim;          // signal cutoff
  int circuit_dim;  // per-mode cutoff inside the circuit
  // Output amplitudes for each signal basis input, indexed (s, c, d).
  std::vector<Vector> outputs;
};

UnitSimulation simulate_unit(double unit_gain, int dim) {
  if (!(unit_gain >= 1.0)) throw InvalidParameter("scissors unit gain must be >= 1");
  if (dim < 2) throw InvalidDimension("scissors cutoff must be >= 2");
  const double tau = std::isinf(unit_gain) ? 1.0 : unit_gain / (1.0 + unit_gain);
  // Total photon number is n + 1 <= dim, so a per-mode cutoff of dim + 1
  // keeps every beamsplitter block complete.
  const int cd = dim + 1;
  const ModeDims dims{cd, cd, cd};
  const Matrix ancilla_split = beamsplitter_op(tau, cd, cd).matrix();
  const Matrix mixer = beamsplitter_op(0.5, cd, cd).matrix();
  UnitSimulation sim{dim, cd, {}};
  for (int n = 0; n < dim; ++n) {
    const int occ[3] = {n, 1, 0};
    Vector v = FockKet::basis(dims, occ).amplitudes();
    v = apply_on_modes(ancilla_split, 1, 2, dims, v);
    v = apply_on_modes(mixer, 0, 2, dims, v);
    sim.outputs.push_back(std::move(v));
  }
  return sim;
}

// Kraus map on the output mode for one detector pattern (ns, nd).
Matrix pattern_kraus(const UnitSimulation& sim, int ns, int nd) {
  const int cd = sim.circuit_dim;
  Matrix k = Matrix::Zero(sim.dim, sim.dim);
  for (int n = 0; n < sim.dim; ++n) {
    for (int m = 0; m < sim.dim; ++m) {
      k(m, n) = sim.outputs[n]((static_cast<Eigen::Index>(ns) * cd + m) * cd + nd);
    }
  }
  return k;
}

// Rotates the global phase so that <0|K|0> is real and positive.
Matrix fix_phase(const Matrix& k) {
  const Complex k00 = k(0, 0);
  if (std::abs(k00) == 0.0) return k;
  return k * (std::conj(k00) / std::abs(k00));
}

Matrix parity(int dim) {
  Matrix z = Matrix::Zero(dim, dim);
  for (int m = 0; m < dim; ++m) z(m, m) = (m % 2 == 0) ? 1.0 : -1.0;
  return z;
}

struct UnitKraus {
  std::vector<Matrix> kraus;
  // The two single-click patterns, designated first.
  int designated_ns, designated_nd;
};

UnitKraus unit_kraus(double unit_gain, int dim, bool feed_forward) {
  const UnitSimulation sim = simulate_unit(unit_gain, dim);
  const Matrix k10 = pattern_kraus(sim, 1, 0);
  const Matrix k01 = pattern_kraus(sim, 0, 1);
  if (std::abs(k10(0, 0)) == 0.0 || std::abs(k01(0, 0)) == 0.0) {
    throw DegenerateConfiguration("scissors herald has zero probability on vacuum input");
  }
  // The designated pattern is the one that amplifies without a sign flip.
  const Complex r10 = k10(1, 1) / k10(0, 0);
  const bool first = r10.real() >= 0.0;
  UnitKraus out;
  out.designated_ns = first ? 1 : 0;
  out.designated_nd = first ? 0 : 1;
  const Matrix& designated = first ? k10 : k01;
  const Matrix& other = first ? k01 : k10;
  out.kraus.push_back(fix_phase(designated));
  if (feed_forward) out.kraus.push_back(fix_phase(parity(dim) * other));
  return out;
}

long long checked_pow(int base, int exp, std::size_t budget) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > static_cast<long long>(budget)) return -1;
  }
  return v;
}

// All occupation patterns over `modes` modes with per-mode cutoff `cut`,
// in row-major order.
std::vector<std::vector<int>> occupations(int modes, int cut) {
  std::vector<std::vector<int>> out{{}};
  for (int m = 0; m < modes; ++m) {
    std::vector<std::vector<int>> next;
    for (const auto& o : out) {
      for (int k = 0; k < cut; ++k) {
        auto e = o;
        e.push_back(k);
        next.push_back(std::move(e));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

QuantumChannel scissors_unit(double unit_gain, int dim, bool feed_forward) {
  return QuantumChannel(dim, unit_kraus(unit_gain, dim, feed_forward).kraus, ChannelKind::Heralded);
}

FailureBranch scissors_unit_failure(double unit_gain, const FockKet& input, bool feed_forward) {
  if (input.num_modes() != 1) throw InvalidDimension("scissors_unit_failure: single-mode input only");
  const int dim = input.dim();
  const UnitSimulation sim = simulate_unit(unit_gain, dim);
  const UnitKraus unit = unit_kraus(unit_gain, dim, feed_forward);
  const int cd = sim.circuit_dim;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(cd) * cd * cd);
  for (int n = 0; n < dim; ++n) out += input.amplitudes()(n) * sim.outputs[n];

  auto heralds = [&](int ns, int nd) {
    if (ns == unit.designated_ns && nd == unit.designated_nd) return true;
    return feed_forward && ns + nd == 1;
  };
  double p_fail = 0.0, vacuum = 0.0;
  for (int ns = 0; ns < cd; ++ns) {
    for (int nd = 0; nd < cd; ++nd) {
      if (heralds(ns, nd)) continue;
      for (int m = 0; m < cd; ++m) {
        const double w = std::norm(out((static_cast<Eigen::Index>(ns) * cd + m) * cd + nd));
        p_fail += w;
        if (m == 0) vacuum += w;
      }
    }
  }
  return {p_fail, p_fail > 0.0 ? vacuum / p_fail : 0.0};
}

ScissorsDevice scissors_device(const NlaConfig& config) {
  config.validate();
  const int p = config.dim;
  const int paths = config.paths;
  if (checked_pow(p, paths, config.memory_budget) < 0) {
    std::ostringstream msg;
    msg << "scissors device with " << paths << " paths at cutoff " << p << " needs " << p << "^"
        << paths << " amplitudes, above the memory budget of " << config.memory_budget
        << "; reduce the cutoff or the number of paths";
    throw ResourceError(msg.str());
  }

  // Per-path gain equals the device gain for a balanced splitter and its
  // inverse; device_gain below confirms it from the simulated map.
  const UnitKraus unit = unit_kraus(config.gain, p, config.feed_forward);
  int support = 1;
  for (const auto& k : unit.kraus) {
    for (int m = 0; m < p; ++m) {
      if (k.row(m).cwiseAbs().maxCoeff() > 1e-15) support = std::max(support, m + 1);
    }
  }
  std::vector<Matrix> unit_ops;
  for (const auto& k : unit.kraus) unit_ops.emplace_back(k.topRows(support));

  // Balanced DFT multiport U(j, k) = exp(2 pi i j k / N) / sqrt(N); the
  // recombiner is its inverse.
  Matrix dft(paths, paths);
  for (int j = 0; j < paths; ++j) {
    for (int k = 0; k < paths; ++k) {
      dft(j, k) = std::polar(1.0 / std::sqrt(static_cast<double>(paths)),
                             2.0 * std::numbers::pi * j * k / paths);
    }
  }
  const Matrix recombine = dft.adjoint();

  const ModeDims fan_dims(paths, p);
  const auto fan_out_occ = occupations(paths, p);
  const auto fan_in_occ = occupations(paths, support);

  // Fan-out of |n> into the N paths: sqrt(n! / prod k_j!) prod U(j,0)^k_j.
  std::vector<Vector> fanned(p, Vector::Zero(static_cast<Eigen::Index>(fan_out_occ.size())));
  for (std::size_t idx = 0; idx < fan_out_occ.size(); ++idx) {
    const auto& k = fan_out_occ[idx];
    int n = 0;
    double log_w = 0.0;
    Complex phase = 1.0;
    for (int j = 0; j < paths; ++j) {
      n += k[j];
      log_w -= std::lgamma(k[j] + 1.0);
      phase *= std::pow(dft(j, 0), k[j]);
    }
    if (n >= p) continue;
    log_w += std::lgamma(n + 1.0);
    fanned[n](static_cast<Eigen::Index>(idx)) = std::exp(0.5 * log_w) * phase;
  }
  // Fan-in amplitude onto output port 0 with vacuum in the other ports.
  Vector fan_in(static_cast<Eigen::Index>(fan_in_occ.size()));
  std::vector<int> fan_in_total(fan_in_occ.size());
  for (std::size_t idx = 0; idx < fan_in_occ.size(); ++idx) {
    const auto& k = fan_in_occ[idx];
    int m = 0;
    double log_w = 0.0;
    Complex phase = 1.0;
    for (int j = 0; j < paths; ++j) {
      m += k[j];
      log_w -= std::lgamma(k[j] + 1.0);
      phase *= std::pow(recombine(0, j), k[j]);
    }
    log_w += std::lgamma(m + 1.0);
    fan_in(static_cast<Eigen::Index>(idx)) = std::exp(0.5 * log_w) * phase;
    fan_in_total[idx] = m;
  }

  // One device Kraus operator per combination of unit click patterns.
  const int choices = static_cast<int>(unit_ops.size());
  const auto combos = occupations(paths, choices);
  std::vector<Matrix> kraus;
  for (const auto& combo : combos) {
    Matrix dev = Matrix::Zero(p, p);
    for (int n = 0; n < p; ++n) {
      ModeDims dims = fan_dims;
      Vector v = fanned[n];
      for (int j = 0; j < paths; ++j) {
        v = apply_on_mode(unit_ops[combo[j]], j, dims, v);
        dims[j] = support;
      }
      for (std::size_t idx = 0; idx < fan_in_occ.size(); ++idx) {
        const int m = fan_in_total[idx];
        if (m < p) dev(m, n) += fan_in(static_cast<Eigen::Index>(idx)) * v(static_cast<Eigen::Index>(idx));
      }
    }
    kraus.push_back(fix_phase(dev));
  }

  const Matrix& k0 = kraus.front();
  const double device_gain = std::norm(k0(1, 1) / k0(0, 0));
  return {QuantumChannel(p, std::move(kraus), ChannelKind::Heralded), config.gain, device_gain};
}

HeraldedOutcome<DensityOperator> scissors_nla(const NlaConfig& config, const DensityOperator& input) {
  if (input.mode_dims() != ModeDims{config.dim}) {
    throw InvalidDimension("scissors_nla: input must be a single mode at the configured cutoff");
  }
  const ScissorsDevice device = scissors_device(config);
  const DensityOperator out = device.channel.apply(input);
  const double p = out.trace() / input.trace();
  return {out.normalized(), p};
}

HeraldedOutcome<DensityOperator> scissors_nla(const NlaConfig& config, const FockKet& input) {
  return scissors_nla(config, DensityOperator::from_ket(input.normalized()));
}

HeraldedOutcome<KetEnsemble> scissors_nla_on_mode(const NlaConfig& config, const KetEnsemble& input,
                                                  int mode) {
  if (mode < 0 || mode >= static_cast<int>(input.mode_dims().size()) ||
      input.mode_dims()[mode] != config.dim) {
    throw InvalidDimension("scissors_nla_on_mode: mode cutoff differs from the configured cutoff");
  }
  const ScissorsDevice device = scissors_device(config);
  const KetEnsemble out = device.channel.apply_on_mode(input, mode);
  const double p = out.trace() / input.trace();
  if (!(p > 0.0)) throw DegenerateConfiguration("scissors_nla: zero success probability");
  return {out.scaled(1.0 / out.trace()), p};
}

ScalingReport lo_success_scaling(const std::vector<double>& gains, int paths, const FockKet& input,
                                 bool feed_forward) {
  if (gains.empty()) throw InvalidParameter("lo_success_scaling needs at least one gain");
  ScalingReport r;
  r.paths = paths;
  r.gains = gains;
  NlaConfig cfg;
  cfg.paths = paths;
  cfg.dim = input.dim();
  cfg.feed_forward = feed_forward;
  for (double g : gains) {
    cfg.gain = g;
    cfg.paths = paths;
    const double p = scissors_nla(cfg, input).p_success;
    cfg.paths = paths + 1;
    const double p_next = scissors_nla(cfg, input).p_success;
    r.p_success.push_back(p);
    r.xi.push_back(p * std::pow(1.0 + g, paths));
    r.next_path_ratio.push_back(p_next / p * (1.0 + g));
  }
  const auto [lo, hi] = std::minmax_element(r.xi.begin(), r.xi.end());
  double sum = 0.0;
  for (double x : r.xi) sum += x;
  r.xi_mean = sum / static_cast<double>(r.xi.size());
  r.xi_variation = (*hi - *lo) / r.xi_mean;
  return r;
}

}  // namespace cvqec
