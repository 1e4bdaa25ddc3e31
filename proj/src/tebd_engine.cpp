#include "hpte/tebd_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace hpte {

namespace {

constexpr double kItacFloor = 1e-12;
constexpr double kBoundTolerance = 1e-9;

int whole_steps(double span, double dt, const char* what) {
  const double ratio = span / std::abs(dt);
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument(std::string(what) + " must be a whole multiple of dt");
  return static_cast<int>(rounded);
}

struct LayerOutcome {
  double discarded = 0.0;
  int degenerate = 0;
};

LayerOutcome apply_layer(VectorizedMPO& state, BondParity parity, const TwoSiteSuperGate& gate,
                         const TruncationPolicy& policy, int threads) {
  std::vector<int> bonds;
  for (int b = parity == BondParity::Even ? 1 : 2; b < state.length; b += 2) bonds.push_back(b);
  std::vector<GateOutcome> outcomes(bonds.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(bonds.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < bonds.size(); ++i) outcomes[i] = detail::apply_gate_local(state, bonds[i], gate, policy);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < bonds.size(); i += workers)
            outcomes[i] = detail::apply_gate_local(state, bonds[i], gate, policy);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  // Summed in bond order so the result does not depend on the schedule.
  LayerOutcome out;
  for (const auto& o : outcomes) {
    out.discarded += o.discarded;
    out.degenerate += o.degenerate_cut ? 1 : 0;
  }
  return out;
}

std::vector<Substep> merged_layers(const TrotterSchedule& schedule, int steps) {
  std::vector<Substep> layers;
  for (int s = 0; s < steps; ++s)
    for (const auto& sub : schedule.substeps) {
      if (!layers.empty() && layers.back().parity == sub.parity)
        layers.back().coefficient += sub.coefficient;
      else
        layers.push_back(sub);
    }
  return layers;
}

}  // namespace

TrotterSchedule build_schedule(int order, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  TrotterSchedule s;
  s.order = order;
  s.dt = dt;
  const auto strang = [](double w, std::vector<Substep>& out) {
    out.push_back({BondParity::Even, w / 2.0});
    out.push_back({BondParity::Odd, w});
    out.push_back({BondParity::Even, w / 2.0});
  };
  if (order == 2) {
    strang(1.0, s.substeps);
  } else if (order == 4) {
    const double p = 1.0 / (4.0 - std::cbrt(4.0));
    std::vector<Substep> raw;
    for (double w : {p, p, 1.0 - 4.0 * p, p, p}) strang(w, raw);
    for (const auto& sub : raw) {
      if (!s.substeps.empty() && s.substeps.back().parity == sub.parity)
        s.substeps.back().coefficient += sub.coefficient;
      else
        s.substeps.push_back(sub);
    }
  } else {
    throw std::invalid_argument("unsupported Trotter order " + std::to_string(order) + " (use 2 or 4)");
  }
  return s;
}

TrotterSchedule time_reversed(const TrotterSchedule& schedule) {
  TrotterSchedule r = schedule;
  r.dt = -schedule.dt;
  std::reverse(r.substeps.begin(), r.substeps.end());
  return r;
}

double TimeSeriesRecord::entropy(double alpha, int bond) const {
  const auto it = std::find(alphas.begin(), alphas.end(), alpha);
  if (it == alphas.end()) throw std::invalid_argument("entropy index was not recorded");
  const auto& row = entropies[it - alphas.begin()];
  if (bond < 1 || bond > static_cast<int>(row.size())) throw std::out_of_range("bond index out of range");
  return row[bond - 1];
}

double TimeSeriesRecord::max_entropy(double alpha) const {
  const auto it = std::find(alphas.begin(), alphas.end(), alpha);
  if (it == alphas.end()) throw std::invalid_argument("entropy index was not recorded");
  const auto& row = entropies[it - alphas.begin()];
  return row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
}

double entropy_bound_rhs(cplx value, double alpha) {
  if (!(alpha > 1.0)) return std::numeric_limits<double>::quiet_NaN();
  const double a = std::abs(value);
  if (a < kItacFloor) return std::numeric_limits<double>::infinity();
  return -(2.0 * alpha / (alpha - 1.0)) * std::log2(a);
}

BoundCheck check_entropy_bound(const TimeSeriesRecord& record, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("the ITAC entropy bound needs alpha > 1");
  BoundCheck c;
  c.entropy = record.max_entropy(alpha);
  c.rhs = entropy_bound_rhs(record.itac, alpha);
  if (std::isinf(c.rhs)) {
    c.vacuous = true;
    c.holds = true;
    c.slack = c.rhs;
    return c;
  }
  c.slack = c.rhs - c.entropy;
  c.holds = c.entropy <= c.rhs + kBoundTolerance;
  return c;
}

cplx itac(const VectorizedMPO& mpo_t, const VectorizedMPO& mpo_0) {
  // Divide out the rounding drift of the stored normalization.
  const double na = normalized_overlap(mpo_t, mpo_t).real();
  const double nb = normalized_overlap(mpo_0, mpo_0).real();
  return normalized_overlap(mpo_t, mpo_0) / std::sqrt(na * nb);
}

TimeSeriesRecord measure(const VectorizedMPO& state, const VectorizedMPO& initial, double t,
                         const std::vector<double>& alphas) {
  TimeSeriesRecord r;
  r.t = t;
  r.alphas = alphas;
  r.entropies.assign(alphas.size(), std::vector<double>(std::max(0, state.length - 1), 0.0));
  for (int b = 1; b < state.length; ++b) {
    const auto spectrum = schmidt_spectrum(state, b);
    for (std::size_t i = 0; i < alphas.size(); ++i) r.entropies[i][b - 1] = renyi_entropy(spectrum, alphas[i]);
  }
  r.itac = itac(state, initial);
  r.discarded_weight = state.discarded_weight;
  r.chi_used = state.max_bond_dimension();
  for (double a : alphas) r.bound_rhs.push_back(entropy_bound_rhs(r.itac, a));
  return r;
}

double light_cone_time(int length, double velocity) { return length / (2.0 * velocity); }

EvolveResult evolve(const VectorizedMPO& initial, const BondHamiltonian& hamiltonian,
                    const TrotterSchedule& schedule, const EvolveOptions& options) {
  return evolve_from(initial, initial, 0.0, hamiltonian, schedule, options);
}

EvolveResult evolve_from(const VectorizedMPO& state, const VectorizedMPO& initial, double t_start,
                         const BondHamiltonian& hamiltonian, const TrotterSchedule& schedule,
                         const EvolveOptions& options) {
  options.policy.validate();
  if (hamiltonian.kind != state.kind) throw std::invalid_argument("Hamiltonian and operator differ in spin kind");
  if (state.length != initial.length || state.kind != initial.kind)
    throw std::invalid_argument("state and initial operator live on different chains");
  if (schedule.dt == 0.0 || schedule.substeps.empty()) throw std::invalid_argument("empty Trotter schedule");
  if (!(options.measure_every > 0.0)) throw std::invalid_argument("measure_every must be positive");
  const double span = options.t_final - t_start;
  if (span * schedule.dt < 0.0) throw std::invalid_argument("t_final lies behind the direction of dt");

  const int n_steps = whole_steps(std::abs(span), schedule.dt, "t_final");
  const int per_measure = std::max(1, whole_steps(options.measure_every, schedule.dt, "measure_every"));

  EvolveResult result;
  result.light_cone_time = light_cone_time(state.length);
  result.final_state = state;
  VectorizedMPO& current = result.final_state;
  result.records.push_back(measure(current, initial, t_start, options.alphas));

  std::map<double, TwoSiteSuperGate> gates;
  const auto gate_for = [&](double tau) -> const TwoSiteSuperGate& {
    auto it = gates.find(tau);
    if (it == gates.end()) it = gates.emplace(tau, TwoSiteSuperGate(hamiltonian, tau)).first;
    return it->second;
  };

  int step = 0;
  while (step < n_steps) {
    const int chunk = std::min(per_measure, n_steps - step);
    for (const auto& layer : merged_layers(schedule, chunk)) {
      const auto out = apply_layer(current, layer.parity, gate_for(layer.coefficient * schedule.dt), options.policy,
                                   options.threads);
      current.discarded_weight += out.discarded;
      current.degenerate_cuts += out.degenerate;
    }
    step += chunk;
    result.records.push_back(measure(current, initial, t_start + step * schedule.dt, options.alphas));
    if (options.on_record) options.on_record(result.records.back());
    if (current.discarded_weight > options.abort_discarded) {
      result.aborted = true;
      result.abort_reason = "discarded weight " + std::to_string(current.discarded_weight) + " exceeds threshold";
      break;
    }
  }
  result.degenerate_cuts = current.degenerate_cuts;
  return result;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint file " + path);
  out.write("HPTECKP1", 8);
  out.write(reinterpret_cast<const char*>(&checkpoint.t), sizeof(double));
  write_mpo(out, checkpoint.state);
  write_mpo(out, checkpoint.initial);
  if (!out) throw std::runtime_error("failed to write checkpoint " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint file " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "HPTECKP1") throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint c;
  in.read(reinterpret_cast<char*>(&c.t), sizeof(double));
  c.state = read_mpo(in);
  c.initial = read_mpo(in);
  return c;
}

}  // namespace hpte
