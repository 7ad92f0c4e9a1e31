#include "cclab/info_gain.hpp"

#include <cmath>
#include <memory>
#include <set>

#include "cclab/info.hpp"

namespace cclab {

ExtReal info_gain_distortion(int w, const Belief& z_prev, const Belief& z,
                             const MarkovSource& source) {
  const Belief phi = ospu(z_prev, source);
  // measure-level absolute continuity of z w.r.t. the prediction
  for (int v = 0; v < z.size(); ++v)
    if (phi(v) == 0.0 && z(v) > 0.0) return ExtReal::infinity();
  if (phi(w) == 0.0 || z(w) == 0.0) return ExtReal::infinity();
  return ExtReal(-std::log(z(w) / phi(w)));
}

ExtReal bar_d_infogain(const Belief& b, const Belief& z_prev, const Belief& z,
                       const MarkovSource& source) {
  const Belief phi = ospu(z_prev, source);
  for (int v = 0; v < z.size(); ++v) {
    if (phi(v) == 0.0 && z(v) > 0.0) return ExtReal::infinity();  // z << Phi(z_prev)
    if (z(v) == 0.0 && b(v) > 0.0) return ExtReal::infinity();    // b << z
  }
  const ExtReal first = kl_divergence(b, z);
  const ExtReal second = kl_divergence(b, phi);
  if (first.is_inf() || second.is_inf()) return ExtReal::infinity();
  return ExtReal(first.value() - second.value());
}

CostSpec make_infogain_cost(const MarkovSource& source, const BeliefGrid& grid, double alpha,
                            Vector eta) {
  struct Tables {
    std::vector<Belief> phi;               // Phi of every grid point
    std::vector<std::vector<char>> ac_ok;  // [z_prev][z]: z << Phi(z_prev)
    std::vector<Belief> points;
  };
  auto tables = std::make_shared<Tables>();
  tables->phi.reserve(grid.size());
  tables->points.reserve(grid.size());
  for (int g = 0; g < grid.size(); ++g) {
    tables->phi.push_back(ospu(grid.point(g), source));
    tables->points.push_back(grid.point(g));
  }
  tables->ac_ok.assign(grid.size(), std::vector<char>(grid.size(), 1));
  for (int zp = 0; zp < grid.size(); ++zp) {
    const Belief& phi = tables->phi[zp];
    for (int z = 0; z < grid.size(); ++z) {
      const Belief& zb = tables->points[z];
      for (int v = 0; v < zb.size(); ++v) {
        if (phi(v) == 0.0 && zb(v) > 0.0) {
          tables->ac_ok[zp][z] = 0;
          break;
        }
      }
    }
  }

  CostSpec spec;
  spec.alpha = alpha;
  spec.eta = std::move(eta);
  spec.d = [tables](int w, int z_prev, int z) -> ExtReal {
    if (!tables->ac_ok[z_prev][z]) return ExtReal::infinity();
    const double phi_w = tables->phi[z_prev](w);
    const double z_w = tables->points[z](w);
    if (phi_w == 0.0 || z_w == 0.0) return ExtReal::infinity();
    return ExtReal(-std::log(z_w / phi_w));
  };
  return spec;
}

// ---------------------------------------------------------------------------
// Encoder search
// ---------------------------------------------------------------------------

namespace {

// encoder assembled from per-output-history source maps; decoder constant
// (the decoder never influences I(W;Y) or the input cost)
class NodeEncoderPolicy final : public CausalPolicy {
 public:
  NodeEncoderPolicy(int horizon, int y_size, std::vector<EncoderMap> emaps)
      : y_size_(y_size), emaps_(std::move(emaps)) {
    node_offset_.assign(horizon + 1, 0);
    for (int i = 1; i <= horizon; ++i)
      node_offset_[i] = node_offset_[i - 1] + static_cast<int>(pow_int(y_size, i - 1));
    assignment_.assign(node_offset_[horizon], 0);
  }

  static std::size_t pow_int(int b, int e) {
    std::size_t r = 1;
    while (e-- > 0) r *= static_cast<std::size_t>(b);
    return r;
  }

  int encode(int stage, std::span<const int> w_hist, std::span<const int> y_hist) const override {
    std::size_t idx = 0;
    for (int i = 0; i + 1 < stage; ++i) idx = idx * y_size_ + y_hist[i];
    return emaps_[assignment_[node_offset_[stage - 1] + idx]](w_hist[stage - 1]);
  }
  int decode(int, std::span<const int>) const override { return 0; }
  int decoder_alphabet_size() const override { return 1; }
  int initial_decoder_output() const override { return 0; }

  std::vector<int> assignment_;  // per-node emap index

 private:
  int y_size_;
  std::vector<int> node_offset_;
  std::vector<EncoderMap> emaps_;
};

// unrestricted causal encoder e_i(w^i, y^{i-1}); constant decoder
class GeneralEncoderPolicy final : public CausalPolicy {
 public:
  GeneralEncoderPolicy(int horizon, int w_size, int y_size)
      : w_size_(w_size), y_size_(y_size) {
    enc_.resize(horizon);
    for (int i = 1; i <= horizon; ++i)
      enc_[i - 1].assign(NodeEncoderPolicy::pow_int(w_size, i) *
                             NodeEncoderPolicy::pow_int(y_size, i - 1),
                         0);
  }

  int encode(int stage, std::span<const int> w_hist, std::span<const int> y_hist) const override {
    std::size_t idx = 0;
    for (int i = 0; i < stage; ++i) idx = idx * w_size_ + w_hist[i];
    for (int i = 0; i + 1 < stage; ++i) idx = idx * y_size_ + y_hist[i];
    return enc_[stage - 1][idx];
  }
  int decode(int, std::span<const int>) const override { return 0; }
  int decoder_alphabet_size() const override { return 1; }
  int initial_decoder_output() const override { return 0; }

  std::vector<std::vector<int>> enc_;

 private:
  int w_size_, y_size_;
};

double encoder_objective(const CausalPolicy& policy, const MarkovSource& source,
                         const StochKernel& channel, double alpha, const Vector& eta,
                         int horizon, double* mi_out) {
  const JointLaw law = enumerate_joint_law(source, channel, policy, horizon);
  const double mi = law_mutual_information(law, proj_w(1, horizon), proj_y(1, horizon));
  double cost = 0.0;
  for (std::size_t t = 0; t < law.num_atoms(); ++t)
    for (int i = 1; i <= horizon; ++i) cost += law.prob(t) * eta(law.x(t, i));
  if (mi_out != nullptr) *mi_out = mi;
  return -mi + alpha * cost;
}

bool advance_cells(std::vector<int>& cells, int radix) {
  for (auto& c : cells) {
    if (++c < radix) return true;
    c = 0;
  }
  return false;
}

}  // namespace

EncoderSearchResult min_encoder_objective(const MarkovSource& source, const StochKernel& channel,
                                          double alpha, const Vector& eta, int horizon,
                                          EncoderClass encoder_class) {
  const int w_size = source.alphabet_size();
  const int x_size = channel.input_size();
  const int y_size = channel.output_size();
  EncoderSearchResult result{std::numeric_limits<double>::infinity(), 0.0, 0};

  if (encoder_class == EncoderClass::per_y_history) {
    std::vector<EncoderMap> emaps = enumerate_encoder_maps(w_size, x_size);
    const int num_emaps = static_cast<int>(emaps.size());
    NodeEncoderPolicy policy(horizon, y_size, std::move(emaps));
    const double combos =
        std::pow(static_cast<double>(num_emaps), static_cast<double>(policy.assignment_.size()));
    if (combos > 2e6)
      throw EnumerationLimitError("min_encoder_objective: encoder tree space too large");
    bool more = true;
    while (more) {
      double mi = 0.0;
      const double obj = encoder_objective(policy, source, channel, alpha, eta, horizon, &mi);
      ++result.encoders_tried;
      if (obj < result.best_objective) {
        result.best_objective = obj;
        result.best_mi = mi;
      }
      more = advance_cells(policy.assignment_, num_emaps);
    }
    return result;
  }

  GeneralEncoderPolicy policy(horizon, w_size, y_size);
  double cells = 0.0;
  for (const auto& t : policy.enc_) cells += static_cast<double>(t.size());
  if (std::pow(static_cast<double>(x_size), cells) > 2e6)
    throw EnumerationLimitError("min_encoder_objective: general encoder space too large");
  bool more = true;
  while (more) {
    double mi = 0.0;
    const double obj = encoder_objective(policy, source, channel, alpha, eta, horizon, &mi);
    ++result.encoders_tried;
    if (obj < result.best_objective) {
      result.best_objective = obj;
      result.best_mi = mi;
    }
    more = [&] {
      for (auto& t : policy.enc_) {
        for (auto& c : t) {
          if (++c < x_size) return true;
          c = 0;
        }
      }
      return false;
    }();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Posterior-decoder verification
// ---------------------------------------------------------------------------

PosteriorDecoderReport verify_posterior_decoder(
    const MarkovSource& source, const StochKernel& channel, double alpha, const Vector& eta,
    int horizon, int grid_resolution, EncoderClass encoder_class) {
  const BeliefGrid grid(source.alphabet_size(), grid_resolution);
  const CostSpec spec = make_infogain_cost(source, grid, alpha, eta);
  const std::vector<EncoderMap> emaps =
      enumerate_encoder_maps(source.alphabet_size(), channel.input_size());
  const Belief b0 = source.initial;
  const int z0 = grid.project(b0);

  const DpResult dp =
      value_recursion(horizon, spec, source, channel, grid, grid.size(), z0, b0, emaps);

  PosteriorDecoderReport report;
  report.dp_value = dp.value;
  report.grid_tolerance = 2.0 * horizon / static_cast<double>(grid_resolution);

  // Q-value of control (e, z) at stage k, recomputed from the stored tables
  const int G = grid.size();
  const auto qvalue = [&](int k, int zp, int g, int e, int z) -> ExtReal {
    const BeliefState s{zp, grid.point(g)};
    ExtReal total = (k > 0) ? bar_d(s, z, spec) : ExtReal(0.0);
    if (total.is_inf()) return total;
    if (k == horizon) return total;
    total += ExtReal(spec.alpha * bar_eta(s, emaps[e], spec, source));
    const auto moves = mdp_transition(BeliefState{z, grid.point(g)},
                                      ControlChoice{emaps[e], z}, source, channel);
    for (const auto& [p, st] : moves) {
      total += p * dp.tables[k + 1].value[static_cast<std::size_t>(z) * G +
                                          grid.project(st.belief)];
      if (total.is_inf()) break;
    }
    return total;
  };

  // forward closure of (z_prev, belief) pairs under the argmin policy.  The
  // optimality statement is existential, so ties are resolved by Q-value: the
  // posterior must attain the minimum, and one emap must be simultaneously
  // optimal across every z_prev row that shares a belief.  Continuations run
  // through projected successors, so the per-state slack carries the
  // projection diameter.
  report.posterior_tolerance = 1e-9 + 4.0 / static_cast<double>(grid_resolution);
  const double kTieTol = report.posterior_tolerance;
  std::set<std::pair<int, int>> layer{{z0, dp.initial_belief_idx}};
  for (int k = 0; k <= horizon; ++k) {
    std::map<int, std::set<int>> optimal_emaps_by_belief;  // intersection across z_prev rows
    std::set<int> beliefs_seen;
    std::set<std::pair<int, int>> next_layer;
    for (const auto& [zp, g] : layer) {
      ++report.reachable_states;
      const std::size_t state = static_cast<std::size_t>(zp) * G + g;
      const Control u = dp.tables[k].argmin[state];
      const ExtReal chosen = dp.tables[k].value[state];
      if (!u.valid() || chosen.is_inf()) {
        report.decoder_is_posterior = false;
        continue;
      }
      if (k > 0 && u.z != g) {
        // a different z won the tie-break; the posterior must still attain
        // the same value through some emap
        ExtReal best_with_posterior = ExtReal::infinity();
        for (int e = 0; e < static_cast<int>(emaps.size()); ++e) {
          const ExtReal q = qvalue(k, zp, g, e, g);
          if (q < best_with_posterior) best_with_posterior = q;
        }
        if (best_with_posterior.is_inf()) {
          report.decoder_is_posterior = false;
        } else {
          const double gap = best_with_posterior.value() - chosen.value();
          report.worst_posterior_gap = std::max(report.worst_posterior_gap, gap);
          if (gap > kTieTol) report.decoder_is_posterior = false;
        }
      }
      if (k < horizon) {
        // emaps optimal at this state (within tie tolerance)
        std::set<int> optimal_here;
        for (int e = 0; e < static_cast<int>(emaps.size()); ++e) {
          ExtReal best_z = ExtReal::infinity();
          const int z_lo = (k == 0) ? z0 : 0;
          const int z_hi = (k == 0) ? z0 + 1 : G;
          for (int z = z_lo; z < z_hi; ++z) {
            const ExtReal q = qvalue(k, zp, g, e, z);
            if (q < best_z) best_z = q;
          }
          if (!best_z.is_inf() && best_z.value() <= chosen.value() + kTieTol)
            optimal_here.insert(e);
        }
        if (beliefs_seen.insert(g).second) {
          optimal_emaps_by_belief[g] = optimal_here;
        } else {
          std::set<int> inter;
          for (int e : optimal_emaps_by_belief[g])
            if (optimal_here.count(e)) inter.insert(e);
          optimal_emaps_by_belief[g] = std::move(inter);
        }
        const auto moves = mdp_transition(BeliefState{0, grid.point(g)},
                                          ControlChoice{emaps[u.emap], u.z}, source, channel);
        for (const auto& [p, st] : moves) next_layer.insert({u.z, grid.project(st.belief)});
      }
    }
    for (const auto& [g, common] : optimal_emaps_by_belief)
      if (common.empty()) report.encoder_zprev_independent = false;
    layer = std::move(next_layer);
  }

  const EncoderSearchResult search =
      min_encoder_objective(source, channel, alpha, eta, horizon, encoder_class);
  report.encoder_search_objective = search.best_objective;
  report.gap = std::abs(dp.value - search.best_objective);
  report.optimal_cost_matches = report.gap <= 1e-6 + report.grid_tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// HMM special case
// ---------------------------------------------------------------------------

namespace {

// expected information-gain cost of the exact-filter decoder under the
// identity encoder, by recursion over output histories:
//   sum_i E[ sum_w B_{i|i}(w) * (-log B_{i|i}(w)/B_{i|i-1}(w)) ]
double filter_decoder_cost(const MarkovSource& source, const StochKernel& channel, int horizon) {
  const EncoderMap id = EncoderMap::identity(source.alphabet_size());
  double total = 0.0;
  struct Node {
    Belief b;
    double prob;
  };
  std::vector<Node> layer{{source.initial, 1.0}};
  for (int i = 1; i <= horizon; ++i) {
    std::vector<Node> next;
    for (const auto& node : layer) {
      const Belief predicted = ospu(node.b, source);
      const FiniteDist q = output_predictive(node.b, id, channel, source);
      for (int y = 0; y < q.size(); ++y) {
        if (q(y) == 0.0) continue;
        const Belief filtered = nlf(node.b, y, id, channel, source);
        double gain = 0.0;
        for (int w = 0; w < filtered.size(); ++w)
          if (filtered(w) > 0.0) gain += filtered(w) * (-std::log(filtered(w) / predicted(w)));
        total += node.prob * q(y) * gain;
        next.push_back(Node{filtered, node.prob * q(y)});
      }
    }
    layer = std::move(next);
  }
  return total;
}

// identity encoder + exact nonlinear-filter decoder; decoder outputs are
// output-history node indices (a finite relabeling of the reachable posteriors)
class FilterDecoderPolicy final : public CausalPolicy {
 public:
  FilterDecoderPolicy(int horizon, int y_size) : y_size_(y_size) {
    z_size_ = 1;
    std::size_t nodes = 1;
    for (int i = 0; i < horizon; ++i) {
      nodes *= static_cast<std::size_t>(y_size);
      z_size_ += static_cast<int>(nodes);
    }
  }
  int encode(int stage, std::span<const int> w, std::span<const int>) const override {
    return w[stage - 1];
  }
  int decode(int stage, std::span<const int> y) const override {
    std::size_t idx = 0, level_base = 1, level_size = 1;
    for (int i = 0; i < stage; ++i) {
      idx = idx * y_size_ + y[i];
      if (i + 1 < stage) {
        level_size *= static_cast<std::size_t>(y_size_);
        level_base += level_size;
      }
    }
    return static_cast<int>(level_base + idx) - 1;
  }
  int decoder_alphabet_size() const override { return z_size_; }
  int initial_decoder_output() const override { return 0; }

 private:
  int y_size_;
  int z_size_;
};

}  // namespace

HmmReport hmm_mode(const MarkovSource& source, const StochKernel& channel, int horizon,
                   int grid_resolution) {
  if (source.alphabet_size() != channel.input_size())
    throw PreconditionError("hmm_mode: identity encoder needs matching source/input alphabets");

  HmmReport report;
  report.filter_policy_cost = filter_decoder_cost(source, channel, horizon);

  const JointLaw law = enumerate_joint_law(
      source, channel, FilterDecoderPolicy(horizon, channel.output_size()), horizon);
  report.minus_mi = -law_mutual_information(law, proj_w(1, horizon), proj_y(1, horizon));
  report.cost_equals_minus_mi = std::abs(report.filter_policy_cost - report.minus_mi) < 1e-9;

  // best grid decoder under the identity encoder, executed exactly; no grid
  // decoder can beat the exact filter
  const BeliefGrid grid(source.alphabet_size(), grid_resolution);
  const CostSpec spec =
      make_infogain_cost(source, grid, 0.0, Vector::Zero(channel.input_size()));
  const std::vector<EncoderMap> identity_only{EncoderMap::identity(source.alphabet_size())};
  const Belief b0 = source.initial;
  const DpResult dp = value_recursion(horizon, spec, source, channel, grid, grid.size(),
                                      grid.project(b0), b0, identity_only);
  const StructuralPolicy pol = extract_structural_policy(
      dp, source, channel, grid, identity_only, grid.size(), grid.project(b0), b0);
  report.dp_executed_cost = evaluate_policy_exact(pol, spec, source, channel, horizon).as_double();
  report.filter_not_beaten = report.dp_executed_cost >= report.minus_mi - 1e-9;
  return report;
}

}  // namespace cclab
