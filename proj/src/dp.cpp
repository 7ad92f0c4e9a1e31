#include "cclab/dp.hpp"

#include <algorithm>
#include <cmath>

#include "cclab/parallel.hpp"

namespace cclab {

CostSpec mismatch_cost(int input_alphabet_size, double alpha) {
  CostSpec spec;
  spec.d = [](int w, int /*z_prev*/, int z) { return ExtReal(w == z ? 0.0 : 1.0); };
  spec.eta = Vector::Zero(input_alphabet_size);
  spec.alpha = alpha;
  return spec;
}

std::vector<EncoderMap> enumerate_encoder_maps(int src_size, int input_size,
                                               std::uint64_t cap) {
  if (src_size < 1 || input_size < 1)
    throw PreconditionError("enumerate_encoder_maps: alphabets must be non-empty");
  const double total = std::pow(static_cast<double>(input_size), src_size);
  if (total > static_cast<double>(cap))
    throw EnumerationLimitError("enumerate_encoder_maps: " + std::to_string(total) +
                                " maps exceed the cap");
  std::vector<EncoderMap> maps;
  maps.reserve(static_cast<std::size_t>(total));
  std::vector<int> table(src_size, 0);
  while (true) {
    maps.emplace_back(table, input_size);
    int pos = src_size - 1;
    while (pos >= 0 && ++table[pos] == input_size) table[pos--] = 0;
    if (pos < 0) break;
  }
  return maps;
}

// ---------------------------------------------------------------------------
// BeliefGrid
// ---------------------------------------------------------------------------

namespace {

void enumerate_lattice(int dim, int remaining, std::vector<int>& coords,
                       std::vector<std::vector<int>>& out) {
  if (static_cast<int>(coords.size()) == dim - 1) {
    coords.push_back(remaining);
    out.push_back(coords);
    coords.pop_back();
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    coords.push_back(k);
    enumerate_lattice(dim, remaining - k, coords, out);
    coords.pop_back();
  }
}

}  // namespace

BeliefGrid::BeliefGrid(int dim, int resolution) : dim_(dim), res_(resolution) {
  if (dim < 2) throw PreconditionError("BeliefGrid: need alphabet size >= 2");
  if (resolution < 1) throw PreconditionError("BeliefGrid: resolution must be >= 1");
  std::vector<std::vector<int>> lattice;
  std::vector<int> coords;
  enumerate_lattice(dim, resolution, coords, lattice);
  points_.reserve(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    Vector p(dim);
    for (int d = 0; d < dim; ++d) p(d) = static_cast<double>(lattice[i][d]) / resolution;
    points_.push_back(FiniteDist::normalized(p));
    index_[lattice[i]] = static_cast<int>(i);
  }
}

int BeliefGrid::project(const Belief& b) const {
  if (b.size() != dim_) throw DimensionError("BeliefGrid::project: belief dimension mismatch");
  // nearest lattice point: round each coordinate, then repair the sum one unit
  // at a time, always moving the coordinate where a unit step is cheapest in
  // squared error (greedy is exact for this separable convex objective)
  std::vector<double> target(dim_);
  std::vector<int> k(dim_);
  long long sum = 0;
  for (int d = 0; d < dim_; ++d) {
    target[d] = b(d) * res_;
    k[d] = static_cast<int>(std::llround(target[d]));
    if (k[d] < 0) k[d] = 0;
    sum += k[d];
  }
  while (sum > res_) {
    int best = -1;
    double best_over = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim_; ++d) {
      if (k[d] == 0) continue;
      const double over = k[d] - target[d];
      if (over > best_over) {
        best_over = over;
        best = d;
      }
    }
    --k[best];
    --sum;
  }
  while (sum < res_) {
    int best = -1;
    double best_under = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < dim_; ++d) {
      const double under = target[d] - k[d];
      if (under > best_under) {
        best_under = under;
        best = d;
      }
    }
    ++k[best];
    ++sum;
  }
  return index_.at(k);
}

int BeliefGrid::find_exact(const Belief& b) const {
  if (b.size() != dim_) return -1;
  std::vector<int> k(dim_);
  for (int d = 0; d < dim_; ++d) {
    const double t = b(d) * res_;
    const double r = static_cast<double>(std::llround(t));
    if (std::abs(t - r) > 1e-9) return -1;
    k[d] = static_cast<int>(r);
  }
  const auto it = index_.find(k);
  return it == index_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------
// MDP pieces
// ---------------------------------------------------------------------------

ExtReal bar_d(const BeliefState& s, int z, const CostSpec& spec) {
  ExtReal total(0.0);
  for (int w = 0; w < s.belief.size(); ++w) {
    const double bw = s.belief(w);
    if (bw == 0.0) continue;
    total += bw * spec.d(w, s.z_prev, z);
    if (total.is_inf()) return total;
  }
  return total;
}

double bar_eta(const BeliefState& s, const EncoderMap& emap, const CostSpec& spec,
               const MarkovSource& source) {
  const Belief predicted = ospu(s.belief, source);
  double total = 0.0;
  for (int w = 0; w < predicted.size(); ++w) total += predicted(w) * spec.eta(emap(w));
  return total;
}

std::vector<std::pair<double, BeliefState>> mdp_transition(const BeliefState& s,
                                                           const ControlChoice& u,
                                                           const MarkovSource& source,
                                                           const StochKernel& channel) {
  const FiniteDist predictive = output_predictive(s.belief, u.emap, channel, source);
  std::vector<std::pair<double, BeliefState>> out;
  for (int y = 0; y < predictive.size(); ++y) {
    if (predictive(y) == 0.0) continue;
    Belief next = nlf(s.belief, y, u.emap, channel, source);
    bool merged = false;
    for (auto& [p, st] : out) {
      if (st.belief == next) {
        p += predictive(y);
        merged = true;
        break;
      }
    }
    if (!merged) out.emplace_back(predictive(y), BeliefState{u.z, std::move(next)});
  }
  return out;
}

ExtReal stage_cost(const BeliefState& s, const ControlChoice& u, const CostSpec& spec,
                   int stage, int horizon, const MarkovSource& source) {
  if (stage < 0 || stage > horizon) throw PreconditionError("stage_cost: stage out of range");
  if (stage == horizon) return bar_d(s, u.z, spec);  // terminal, also the one-stage problem
  if (stage == 0) return ExtReal(spec.alpha * bar_eta(s, u.emap, spec, source));
  return bar_d(s, u.z, spec) + ExtReal(spec.alpha * bar_eta(s, u.emap, spec, source));
}

// ---------------------------------------------------------------------------
// Value recursion
// ---------------------------------------------------------------------------

DpResult value_recursion(int horizon, const CostSpec& spec, const MarkovSource& source,
                         const StochKernel& channel, const BeliefGrid& grid, int z_size,
                         int z0, const Belief& initial_belief) {
  return value_recursion(horizon, spec, source, channel, grid, z_size, z0, initial_belief,
                         enumerate_encoder_maps(source.alphabet_size(), channel.input_size()));
}

DpResult value_recursion(int horizon, const CostSpec& spec, const MarkovSource& source,
                         const StochKernel& channel, const BeliefGrid& grid, int z_size,
                         int z0, const Belief& initial_belief,
                         const std::vector<EncoderMap>& emaps) {
  if (horizon < 0) throw PreconditionError("value_recursion: horizon must be >= 0");
  if (z_size < 1 || z0 < 0 || z0 >= z_size)
    throw PreconditionError("value_recursion: invalid decoder alphabet or z0");
  if (grid.dim() != source.alphabet_size())
    throw DimensionError("value_recursion: grid dimension != source alphabet");
  if (spec.eta.size() != channel.input_size())
    throw DimensionError("value_recursion: eta length != channel input alphabet");
  if (emaps.empty()) throw PreconditionError("value_recursion: empty encoder map set");

  const int num_emaps = static_cast<int>(emaps.size());
  const int G = grid.size();
  const int S = z_size * G;

  // successor states and expected input cost depend on (belief, emap) only
  struct Successor {
    double prob;
    int belief_idx;
  };
  std::vector<std::vector<Successor>> successors(static_cast<std::size_t>(G) * num_emaps);
  std::vector<double> etabar(static_cast<std::size_t>(G) * num_emaps, 0.0);
  parallel_for(G, [&](int g) {
    const Belief& b = grid.point(g);
    const BeliefState s{0, b};
    for (int e = 0; e < num_emaps; ++e) {
      const std::size_t idx = static_cast<std::size_t>(g) * num_emaps + e;
      etabar[idx] = bar_eta(s, emaps[e], spec, source);
      const FiniteDist predictive = output_predictive(b, emaps[e], channel, source);
      auto& succ = successors[idx];
      for (int y = 0; y < predictive.size(); ++y) {
        if (predictive(y) == 0.0) continue;
        const int nb = grid.project(nlf(b, y, emaps[e], channel, source));
        bool merged = false;
        for (auto& sc : succ) {
          if (sc.belief_idx == nb) {
            sc.prob += predictive(y);
            merged = true;
            break;
          }
        }
        if (!merged) succ.push_back(Successor{predictive(y), nb});
      }
    }
  });

  DpResult result;
  result.tables.resize(horizon + 1);
  for (int k = horizon; k >= 0; --k) {
    ValueTable& vt = result.tables[k];
    vt.stage = k;
    vt.value.assign(S, ExtReal::infinity());
    vt.argmin.assign(S, Control{});
    const ValueTable* next = (k < horizon) ? &result.tables[k + 1] : nullptr;

    parallel_for(S, [&](int state) {
      const int z_prev = state / G;
      const int g = state % G;
      const BeliefState s{z_prev, grid.point(g)};

      const bool terminal = (k == horizon);
      std::vector<ExtReal> dbar_row;
      if (k > 0 || terminal) {
        dbar_row.resize(z_size);
        for (int z = 0; z < z_size; ++z) dbar_row[z] = bar_d(s, z, spec);
      }

      ExtReal best = ExtReal::infinity();
      Control best_c{};
      if (terminal) {
        // terminal stage: the encoder component never matters, fix emap 0
        for (int z = 0; z < z_size; ++z) {
          if (dbar_row[z] < best) {
            best = dbar_row[z];
            best_c = Control{0, z};
          }
        }
      } else {
        const int z_lo = (k == 0) ? z0 : 0;
        const int z_hi = (k == 0) ? z0 + 1 : z_size;
        for (int e = 0; e < num_emaps; ++e) {
          const std::size_t pre = static_cast<std::size_t>(g) * num_emaps + e;
          const double input_cost = spec.alpha * etabar[pre];
          for (int z = z_lo; z < z_hi; ++z) {
            ExtReal total(input_cost);
            if (k > 0) total += dbar_row[z];
            if (!total.is_inf() && next != nullptr) {
              for (const auto& sc : successors[pre]) {
                total += sc.prob * next->value[static_cast<std::size_t>(z) * G + sc.belief_idx];
                if (total.is_inf()) break;
              }
            }
            if (total < best) {
              best = total;
              best_c = Control{e, z};
            }
          }
        }
      }
      vt.value[state] = best;
      vt.argmin[state] = best_c;
    });
  }

  result.initial_belief_idx = grid.project(initial_belief);
  const ExtReal v0 =
      result.tables[0].value[static_cast<std::size_t>(z0) * G + result.initial_belief_idx];
  result.value = v0.as_double();
  return result;
}

// ---------------------------------------------------------------------------
// StructuralPolicy
// ---------------------------------------------------------------------------

StructuralPolicy::StructuralPolicy(const DpResult& dp, MarkovSource source, StochKernel channel,
                                   BeliefGrid grid, std::vector<EncoderMap> emaps, int z_size,
                                   int z0, const Belief& initial_belief)
    : source_(std::move(source)),
      channel_(std::move(channel)),
      grid_(std::move(grid)),
      emaps_(std::move(emaps)),
      z_size_(z_size),
      z0_(z0) {
  controls_.reserve(dp.tables.size());
  for (const auto& vt : dp.tables) controls_.push_back(vt.argmin);
  b0_idx_ = grid_.project(initial_belief);
}

Control StructuralPolicy::control_at(int stage, int z_prev, int belief_idx) const {
  return controls_.at(stage)[static_cast<std::size_t>(z_prev) * grid_.size() + belief_idx];
}

StructuralPolicy::ReplayState StructuralPolicy::replay(std::span<const int> y_hist) const {
  // s_0 carries no meaningful z_prev; the z0 row is as good as any
  ReplayState st{z0_, b0_idx_};
  for (std::size_t t = 1; t <= y_hist.size(); ++t) {
    const Control u_prev = control_at(static_cast<int>(t) - 1, st.z_prev, st.belief_idx);
    if (!u_prev.valid())
      throw PreconditionError("StructuralPolicy: replay reached an infinite-cost state");
    const EncoderMap& em = emaps_[u_prev.emap];
    const Belief& b = grid_.point(st.belief_idx);
    const int y = y_hist[t - 1];
    const FiniteDist predictive = output_predictive(b, em, channel_, source_);
    int next_idx;
    if (predictive(y) > 0.0) {
      next_idx = grid_.project(nlf(b, y, em, channel_, source_));
    } else {
      // observation impossible under the gridded belief (projection artifact):
      // treated as uninformative
      next_idx = grid_.project(ospu(b, source_));
    }
    st = ReplayState{u_prev.z, next_idx};
  }
  return st;
}

int StructuralPolicy::encode(int stage, std::span<const int> w_hist,
                             std::span<const int> y_hist) const {
  const ReplayState st = replay(y_hist);  // s_{stage-1}
  const Control u = control_at(stage - 1, st.z_prev, st.belief_idx);
  if (!u.valid()) throw PreconditionError("StructuralPolicy: no finite control at this state");
  return emaps_[u.emap](w_hist[stage - 1]);
}

int StructuralPolicy::decode(int stage, std::span<const int> y_hist) const {
  const ReplayState st = replay(y_hist);  // s_stage
  const Control u = control_at(stage, st.z_prev, st.belief_idx);
  if (!u.valid()) throw PreconditionError("StructuralPolicy: no finite control at this state");
  return u.z;
}

StructuralPolicy extract_structural_policy(const DpResult& dp, const MarkovSource& source,
                                           const StochKernel& channel, const BeliefGrid& grid,
                                           const std::vector<EncoderMap>& emaps, int z_size,
                                           int z0, const Belief& initial_belief) {
  return StructuralPolicy(dp, source, channel, grid, emaps, z_size, z0, initial_belief);
}

ExtReal evaluate_policy_exact(const CausalPolicy& policy, const CostSpec& spec,
                              const MarkovSource& source, const StochKernel& channel,
                              int horizon, std::uint64_t atom_cap) {
  const JointLaw law = enumerate_joint_law(source, channel, policy, horizon, atom_cap);
  return law_expected_cost(law, [&spec](int w, int zprev, int z, int x) {
    return spec.d(w, zprev, z) + ExtReal(spec.alpha * spec.eta(x));
  });
}

// ---------------------------------------------------------------------------
// Brute-force global optimum on tiny instances
// ---------------------------------------------------------------------------

namespace {

// fully tabular history-dependent policy: e_i(w^i, y^{i-1}), d_i(y^i)
class TabularPolicy final : public CausalPolicy {
 public:
  TabularPolicy(int horizon, int w_size, int y_size, int z_size, int z0)
      : n_(horizon), w_size_(w_size), y_size_(y_size), z_size_(z_size), z0_(z0) {
    enc_.resize(n_);
    dec_.resize(n_);
    for (int i = 1; i <= n_; ++i) {
      enc_[i - 1].assign(pow_int(w_size_, i) * pow_int(y_size_, i - 1), 0);
      dec_[i - 1].assign(pow_int(y_size_, i), 0);
    }
  }

  static std::size_t pow_int(int base, int e) {
    std::size_t r = 1;
    for (int k = 0; k < e; ++k) r *= static_cast<std::size_t>(base);
    return r;
  }

  int encode(int stage, std::span<const int> w_hist, std::span<const int> y_hist) const override {
    std::size_t idx = 0;
    for (int i = 0; i < stage; ++i) idx = idx * w_size_ + w_hist[i];
    for (int i = 0; i + 1 < stage; ++i) idx = idx * y_size_ + y_hist[i];
    return enc_[stage - 1][idx];
  }

  int decode(int stage, std::span<const int> y_hist) const override {
    std::size_t idx = 0;
    for (int i = 0; i < stage; ++i) idx = idx * y_size_ + y_hist[i];
    return dec_[stage - 1][idx];
  }

  int decoder_alphabet_size() const override { return z_size_; }
  int initial_decoder_output() const override { return z0_; }

  std::vector<std::vector<int>> enc_, dec_;

 private:
  int n_, w_size_, y_size_, z_size_, z0_;
};

// odometer over a set of table cells with the given radix; false on wrap-around
bool advance_tables(std::vector<std::vector<int>>& tables, int radix) {
  for (auto& table : tables) {
    for (auto& cell : table) {
      if (++cell < radix) return true;
      cell = 0;
    }
  }
  return false;
}

}  // namespace

BruteForceResult brute_force_optimal(const CostSpec& spec, const MarkovSource& source,
                                     const StochKernel& channel, int horizon, int z_size,
                                     int z0) {
  const int w_size = source.alphabet_size();
  const int x_size = channel.input_size();
  const int y_size = channel.output_size();
  if (w_size > 2 || x_size > 2 || y_size > 2 || z_size > 2 || horizon > 2 || horizon < 1)
    throw EnumerationLimitError(
        "brute_force_optimal: policy enumeration requires binary alphabets and horizon <= 2");

  auto policy = std::make_shared<TabularPolicy>(horizon, w_size, y_size, z_size, z0);
  auto best_policy = std::make_shared<TabularPolicy>(*policy);
  ExtReal best = ExtReal::infinity();

  bool more_dec = true;
  while (more_dec) {
    for (auto& t : policy->enc_) std::fill(t.begin(), t.end(), 0);
    bool more_enc = true;
    while (more_enc) {
      const ExtReal cost = evaluate_policy_exact(*policy, spec, source, channel, horizon);
      if (cost < best) {
        best = cost;
        *best_policy = *policy;
      }
      more_enc = advance_tables(policy->enc_, x_size);
    }
    more_dec = advance_tables(policy->dec_, z_size);
  }

  return BruteForceResult{best.as_double(), best_policy};
}

}  // namespace cclab
