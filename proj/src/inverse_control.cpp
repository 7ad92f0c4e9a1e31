#include "cclab/inverse_control.hpp"
#include <cstdio>

#include <algorithm>
#include <cmath>

#include "cclab/filtering.hpp"
#include "cclab/info.hpp"
#include "cclab/rng.hpp"

namespace cclab {

void SMPolicy::validate(int w_size, int x_size, int y_size) const {
  if (static_cast<int>(enc.size()) != w_size)
    throw DimensionError("SMPolicy: encoder table must cover the source alphabet");
  for (const auto& row : enc) {
    if (static_cast<int>(row.size()) != z_size)
      throw DimensionError("SMPolicy: encoder row must cover the decoder alphabet");
    for (int x : row)
      if (x < 0 || x >= x_size) throw DimensionError("SMPolicy: encoder output out of range");
  }
  if (static_cast<int>(dec.size()) != z_size)
    throw DimensionError("SMPolicy: decoder table must cover the decoder alphabet");
  for (const auto& row : dec) {
    if (static_cast<int>(row.size()) != y_size)
      throw DimensionError("SMPolicy: decoder row must cover the output alphabet");
    for (int z : row)
      if (z < 0 || z >= z_size) throw DimensionError("SMPolicy: decoder output out of range");
  }
  if (z0 < 0 || z0 >= z_size) throw DimensionError("SMPolicy: z0 out of range");
}

// ---------------------------------------------------------------------------
// Worked instances
// ---------------------------------------------------------------------------

InverseInstance make_queue_instance(const QueueModel& q, bool exact_stationary_init) {
  MarkovSource source = queue_source(q);
  if (exact_stationary_init)
    source = MarkovSource{queue_exact_stationary(q), source.kernel};
  const int n_states = q.truncation + 1;
  StochKernel channel = z_channel(q.mu * q.delta, n_states);

  SMPolicy policy;
  policy.z_size = n_states;
  policy.z0 = 0;
  policy.enc.assign(n_states, std::vector<int>(n_states, 0));
  for (int w = 0; w < n_states; ++w)
    for (int z = 0; z < n_states; ++z)
      policy.enc[w][z] = std::clamp(w - z, 0, n_states - 1);
  policy.dec.assign(n_states, std::vector<int>(2, 0));
  for (int z = 0; z < n_states; ++z) {
    policy.dec[z][0] = z;
    policy.dec[z][1] = std::min(z + 1, n_states - 1);
  }
  return InverseInstance{std::move(source), std::move(channel), std::move(policy)};
}

InverseInstance make_trapdoor_instance(const TrapdoorModel& t, int horizon) {
  MarkovSource source = trapdoor_counting_source(t, horizon);
  StochKernel channel = inverted_e_channel();
  const int w_size = source.alphabet_size();
  const int z_size = horizon + 1;  // at most one departure per step

  SMPolicy policy;
  policy.z_size = z_size;
  policy.z0 = 0;
  policy.enc.assign(w_size, std::vector<int>(z_size, 0));
  for (int w = 0; w < w_size; ++w)
    for (int z = 0; z < z_size; ++z) policy.enc[w][z] = std::clamp(w - z, 0, 2);
  policy.dec.assign(z_size, std::vector<int>(2, 0));
  for (int z = 0; z < z_size; ++z) {
    policy.dec[z][0] = z;
    policy.dec[z][1] = std::min(z + 1, z_size - 1);
  }
  return InverseInstance{std::move(source), std::move(channel), std::move(policy)};
}

// ---------------------------------------------------------------------------
// Output i.i.d. check
// ---------------------------------------------------------------------------

IidReport check_iid_outputs(const SMPolicy& policy, const MarkovSource& source,
                            const StochKernel& channel, int horizon, double tol,
                            std::uint64_t atom_cap) {
  const SMPolicyView view(policy, source.alphabet_size(), channel.input_size(),
                          channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon, atom_cap);

  IidReport report;
  std::vector<double> first_marginal(channel.output_size(), 0.0);
  for (int i = 1; i <= horizon; ++i) {
    std::vector<double> marginal(channel.output_size(), 0.0);
    for (std::size_t t = 0; t < law.num_atoms(); ++t) marginal[law.y(t, i)] += law.prob(t);
    if (i == 1) {
      first_marginal = marginal;
    } else {
      double tv = 0.0;
      for (int y = 0; y < channel.output_size(); ++y)
        tv += std::abs(marginal[y] - first_marginal[y]);
      report.max_marginal_tv = std::max(report.max_marginal_tv, 0.5 * tv);
      report.max_dependence = std::max(
          report.max_dependence,
          law_mutual_information(law, proj_y(i, i), proj_y(1, i - 1)));
    }
  }
  report.iid = report.max_dependence < tol && report.max_marginal_tv < tol;
  return report;
}

// ---------------------------------------------------------------------------
// Induced kernels and costs
// ---------------------------------------------------------------------------

InducedKernels derive_induced_kernels(const SMPolicy& policy, const MarkovSource& source,
                                      const StochKernel& channel, int horizon, double tol) {
  const int w_size = source.alphabet_size();
  const int z_size = policy.z_size;
  const SMPolicyView view(policy, w_size, channel.input_size(), channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon);

  InducedKernels out;
  out.w_size = w_size;
  out.z_size = z_size;

  // Q_{Z'|Z,W'} is analytic in the policy and channel
  out.q_joint = Matrix::Zero(static_cast<Eigen::Index>(z_size) * w_size, z_size);
  for (int z = 0; z < z_size; ++z)
    for (int w = 0; w < w_size; ++w)
      for (int y = 0; y < channel.output_size(); ++y)
        out.q_joint(static_cast<Eigen::Index>(z) * w_size + w, policy.dec[z][y]) +=
            channel(policy.enc[w][z], y);

  // Q_{Z'|Z} per stage from the law; the i.i.d.-output premise makes it
  // time-invariant.  Extended-precision accumulation keeps the conditional
  // rows exact to ~1e-15 even when the conditioning mass is small.
  out.q_marg = Matrix::Zero(z_size, z_size);
  out.z_reached.assign(z_size, 0);
  std::vector<int> first_stage(z_size, -1);
  for (int i = 1; i <= horizon; ++i) {
    std::vector<long double> joint(static_cast<std::size_t>(z_size) * z_size, 0.0L);
    std::vector<long double> mass(z_size, 0.0L);
    for (std::size_t t = 0; t < law.num_atoms(); ++t) {
      joint[static_cast<std::size_t>(law.z(t, i - 1)) * z_size + law.z(t, i)] += law.prob(t);
      mass[law.z(t, i - 1)] += law.prob(t);
    }
    for (int z = 0; z < z_size; ++z) {
      if (mass[z] <= 0.0L) continue;
      Vector row(z_size);
      for (int zn = 0; zn < z_size; ++zn)
        row(zn) = static_cast<double>(joint[static_cast<std::size_t>(z) * z_size + zn] / mass[z]);
      if (first_stage[z] < 0) {
        first_stage[z] = i;
        out.z_reached[z] = 1;
        out.q_marg.row(z) = row.transpose();
      } else {
        const double dev = (row.transpose() - out.q_marg.row(z)).cwiseAbs().maxCoeff();
        out.max_time_variation = std::max(out.max_time_variation, dev);
        if (dev > tol) {
          char msg[160];
          std::snprintf(msg, sizeof(msg),
                        "derive_induced_kernels: Q_{Z'|Z} varies with time at stage %d "
                        "(deviation %.3e, tol %.3e)",
                        i, dev, tol);
          throw PremiseViolationError(msg);
        }
      }
    }
  }

  // marginal mixture consistency at the first stage each row is reached:
  // q_marg(z'|z) = sum_w P(W_i = w | Z_{i-1} = z) q_joint(z'|z,w)
  for (int z = 0; z < z_size; ++z) {
    if (!out.z_reached[z]) continue;
    const int i = first_stage[z];
    Vector w_given_z = Vector::Zero(w_size);
    double mass = 0.0;
    for (std::size_t t = 0; t < law.num_atoms(); ++t) {
      if (law.z(t, i - 1) != z) continue;
      w_given_z(law.w(t, i)) += law.prob(t);
      mass += law.prob(t);
    }
    w_given_z /= mass;
    Vector mix = Vector::Zero(z_size);
    for (int w = 0; w < w_size; ++w)
      mix += w_given_z(w) * out.q_joint.row(static_cast<Eigen::Index>(z) * w_size + w).transpose();
    const double dev = (mix.transpose() - out.q_marg.row(z)).cwiseAbs().maxCoeff();
    if (dev > 1e-10)
      throw ModelError("derive_induced_kernels: mixture identity violated (" +
                       std::to_string(dev) + ")");
  }

  std::vector<long double> y_acc(channel.output_size(), 0.0L);
  for (std::size_t t = 0; t < law.num_atoms(); ++t) y_acc[law.y(t, 1)] += law.prob(t);
  Vector y_marg(channel.output_size());
  for (int y = 0; y < channel.output_size(); ++y) y_marg(y) = static_cast<double>(y_acc[y]);
  out.y_marginal = FiniteDist::normalized(y_marg);
  return out;
}

std::vector<ExtReal> induced_eta(const StochKernel& channel, const FiniteDist& y_marginal) {
  if (y_marginal.size() != channel.output_size())
    throw DimensionError("induced_eta: output marginal size mismatch");
  std::vector<ExtReal> eta;
  eta.reserve(channel.input_size());
  for (int x = 0; x < channel.input_size(); ++x)
    eta.push_back(kl_divergence(channel.row(x), y_marginal));
  return eta;
}

DistTable induced_dist(const InducedKernels& kernels) {
  DistTable table(kernels.w_size, kernels.z_size);
  for (int w = 0; w < kernels.w_size; ++w) {
    for (int zp = 0; zp < kernels.z_size; ++zp) {
      if (!kernels.z_reached[zp]) continue;  // rows stay at the +inf sentinel
      for (int z = 0; z < kernels.z_size; ++z) {
        const double qj = kernels.q_joint(static_cast<Eigen::Index>(zp) * kernels.w_size + w, z);
        const double qm = kernels.q_marg(zp, z);
        if (qj > 0.0 && qm > 0.0) table.set(w, zp, z, ExtReal(-std::log(qj / qm)));
      }
    }
  }
  return table;
}

DistTable induced_dist_invertible(const SMPolicy& policy, const StochKernel& channel,
                                  const FiniteDist& y_marginal,
                                  const std::vector<char>& reachable) {
  const int z_size = policy.z_size;
  const int y_size = channel.output_size();
  const auto covered = [&](int z) {
    return reachable.empty() || (z < static_cast<int>(reachable.size()) && reachable[z]);
  };
  // dec(z, .) must be injective on covered rows
  std::vector<std::vector<int>> preimage(z_size, std::vector<int>(z_size, -1));
  for (int z = 0; z < z_size; ++z) {
    if (!covered(z)) continue;
    for (int y = 0; y < y_size; ++y) {
      const int zn = policy.dec[z][y];
      if (preimage[z][zn] != -1)
        throw PreconditionError("induced_dist_invertible: decoder is not injective at z=" +
                                std::to_string(z));
      preimage[z][zn] = y;
    }
  }
  const int w_size = static_cast<int>(policy.enc.size());
  DistTable table(w_size, z_size);
  for (int w = 0; w < w_size; ++w) {
    for (int zp = 0; zp < z_size; ++zp) {
      if (!covered(zp)) continue;
      for (int z = 0; z < z_size; ++z) {
        const int y = preimage[zp][z];
        if (y < 0) continue;
        const double lik = channel(policy.enc[w][zp], y);
        if (lik > 0.0 && y_marginal(y) > 0.0)
          table.set(w, zp, z, ExtReal(-std::log(lik / y_marginal(y))));
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

VariationalReport verify_variational(const SMPolicy& policy, const MarkovSource& source,
                                     const StochKernel& channel, const DistTable& dist,
                                     double alpha2, int horizon, double tol) {
  const SMPolicyView view(policy, source.alphabet_size(), channel.input_size(),
                          channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon);

  std::map<AtomKey, double> pw, pz;
  std::map<AtomKey, std::map<AtomKey, double>> pwz;
  const auto kw = proj_w(1, horizon);
  const auto kz = proj_z(1, horizon);
  for (std::size_t t = 0; t < law.num_atoms(); ++t) {
    const double p = law.prob(t);
    AtomKey w = kw(law, t), z = kz(law, t);
    pw[w] += p;
    pz[z] += p;
    pwz[w][z] += p;
  }

  VariationalReport report;
  report.holds = true;
  for (const auto& [w, zmap] : pwz) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    AtomKey lo_z, hi_z;
    for (const auto& [z, p] : zmap) {
      if (p <= 0.0) continue;
      double dsum = 0.0;
      int zp = policy.z0;
      for (int i = 0; i < horizon; ++i) {
        const ExtReal d = dist(w[i], zp, z[i]);
        if (d.is_inf()) {
          dsum = std::numeric_limits<double>::infinity();
          break;
        }
        dsum += d.value();
        zp = z[i];
      }
      const double val = std::log(p / pw.at(w) / pz.at(z)) + alpha2 * dsum;
      if (val < lo) {
        lo = val;
        lo_z = z;
      }
      if (val > hi) {
        hi = val;
        hi_z = z;
      }
    }
    const double spread = hi - lo;
    if (spread > report.worst_spread || !std::isfinite(spread)) {
      report.worst_spread = spread;
      report.worst_w = w;
      report.worst_z = hi_z;
    }
    if (!(spread <= tol)) report.holds = false;
  }
  return report;
}

ChainReport verify_chain(const SMPolicy& policy, const MarkovSource& source,
                         const StochKernel& channel, const DistTable* dist,
                         const std::vector<ExtReal>& eta, int horizon) {
  if (static_cast<int>(eta.size()) != channel.input_size())
    throw DimensionError("verify_chain: eta length mismatch");
  const SMPolicyView view(policy, source.alphabet_size(), channel.input_size(),
                          channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon);
  const double n = static_cast<double>(horizon);

  ChainReport report;
  report.mi_wz = law_mutual_information(law, proj_w(1, horizon), proj_z(1, horizon)) / n;
  report.mi_wy = law_mutual_information(law, proj_w(1, horizon), proj_y(1, horizon)) / n;
  for (int i = 1; i <= horizon; ++i)
    report.sum_mi_xy += law_mutual_information(law, proj_x(i, i), proj_y(i, i)) / n;

  Vector eta_finite(channel.input_size());
  for (int x = 0; x < channel.input_size(); ++x) {
    if (eta[x].is_inf())
      throw PremiseViolationError(
          "verify_chain: induced eta is infinite at input " + std::to_string(x) +
          "; the capacity-cost side is undefined");
    eta_finite(x) = eta[x].value();
  }
  double cost = 0.0;
  for (std::size_t t = 0; t < law.num_atoms(); ++t)
    for (int i = 1; i <= horizon; ++i) cost += law.prob(t) * eta_finite(law.x(t, i));
  report.realized_cost = cost / n;
  report.capacity =
      capacity_cost(CostedChannel{channel, eta_finite, report.realized_cost}).capacity;

  if (dist != nullptr) {
    const ExtReal d = law_expected_cost(
        law, [&](int w, int zp, int z, int) { return (*dist)(w, zp, z); });
    report.realized_distortion = d.as_double() / n;
  }

  report.weak_chain_holds = report.mi_wz <= report.mi_wy + 1e-12 &&
                            report.mi_wy <= report.sum_mi_xy + 1e-12 &&
                            report.sum_mi_xy <= report.capacity + 1e-8;
  report.max_equality_gap =
      std::max({report.mi_wy - report.mi_wz, report.sum_mi_xy - report.mi_wy,
                report.capacity - report.sum_mi_xy});
  return report;
}

DetailedBalanceReport detailed_balance_check(const StochKernel& chain,
                                             const std::optional<FiniteDist>& pi, double tol) {
  if (chain.input_size() != chain.output_size())
    throw DimensionError("detailed_balance_check: chain must be square");
  const int n = chain.input_size();

  FiniteDist stationary = pi.value_or(FiniteDist::uniform(n));
  if (!pi.has_value()) {
    // damped power iteration (damping kills periodicity, keeps the fixed point)
    Vector v = Vector::Constant(n, 1.0 / n);
    for (int it = 0; it < 1000000; ++it) {
      Vector next = 0.5 * v + 0.5 * (chain.matrix().transpose() * v);
      const double delta = (next - v).cwiseAbs().sum();
      v = next / next.sum();
      if (delta < 1e-13) break;
    }
    stationary = FiniteDist::normalized(v);
  }

  DetailedBalanceReport report{stationary};
  const Vector pushed = chain.matrix().transpose() * stationary.vec();
  report.stationarity_gap = (pushed - stationary.vec()).cwiseAbs().maxCoeff();
  report.supplied_law_stationary = report.stationarity_gap <= 1e-12;

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      report.max_violation =
          std::max(report.max_violation,
                   std::abs(stationary(a) * chain(a, b) - stationary(b) * chain(b, a)));
  report.reversible = report.max_violation <= tol;
  return report;
}

// ---------------------------------------------------------------------------
// Reversible-compatible dynamics
// ---------------------------------------------------------------------------

IrcMaps IrcMaps::additive(int xt_size, int wt_size, int x_size, int y_size) {
  IrcMaps maps;
  maps.f.assign(xt_size, std::vector<int>(wt_size, -1));
  for (int xt = 0; xt < xt_size; ++xt)
    for (int wt = 0; wt < wt_size; ++wt)
      if (xt + wt < x_size) maps.f[xt][wt] = xt + wt;
  maps.g.assign(x_size, std::vector<int>(y_size, -1));
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      if (x - y >= 0 && x - y < xt_size) maps.g[x][y] = x - y;
  return maps;
}

IrcReport irc_decomposition_check(const IrcMaps& maps, const SMPolicy& policy,
                                  const MarkovSource& source, const StochKernel& channel,
                                  int horizon) {
  IrcReport report;
  // invertibility of each slice over its defined domain
  for (std::size_t xt = 0; xt < maps.f.size(); ++xt) {
    std::vector<char> seen(maps.f.size() + maps.f[xt].size() + 8, 0);
    for (int v : maps.f[xt]) {
      if (v < 0) continue;
      if (static_cast<std::size_t>(v) >= seen.size()) seen.resize(v + 1, 0);
      if (seen[v]++) {
        report.f_invertible = false;
        report.counterexample = "f slice x_tilde=" + std::to_string(xt) + " repeats " +
                                std::to_string(v);
      }
    }
  }
  for (std::size_t x = 0; x < maps.g.size(); ++x) {
    std::vector<char> seen(maps.g.size() + maps.g[x].size() + 8, 0);
    for (int v : maps.g[x]) {
      if (v < 0) continue;
      if (static_cast<std::size_t>(v) >= seen.size()) seen.resize(v + 1, 0);
      if (seen[v]++) {
        report.g_invertible = false;
        report.counterexample =
            "g slice x=" + std::to_string(x) + " repeats " + std::to_string(v);
      }
    }
  }

  // consistency along every realized trajectory: x_{i+1} = f(g(x_i, y_i), w_{i+1}-w_i)
  const SMPolicyView view(policy, source.alphabet_size(), channel.input_size(),
                          channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon);
  for (std::size_t t = 0; t < law.num_atoms() && report.consistent; ++t) {
    if (law.prob(t) <= 0.0) continue;
    for (int i = 1; i < horizon; ++i) {
      const int x = law.x(t, i), y = law.y(t, i);
      const int wt = law.w(t, i + 1) - law.w(t, i);
      if (x >= static_cast<int>(maps.g.size()) || y >= static_cast<int>(maps.g[x].size()) ||
          maps.g[x][y] < 0) {
        report.consistent = false;
        report.counterexample = "g undefined at (x=" + std::to_string(x) +
                                ", y=" + std::to_string(y) + ")";
        break;
      }
      const int xt = maps.g[x][y];
      if (wt < 0 || xt >= static_cast<int>(maps.f.size()) ||
          wt >= static_cast<int>(maps.f[xt].size()) || maps.f[xt][wt] < 0) {
        report.consistent = false;
        report.counterexample = "f undefined at (x_tilde=" + std::to_string(xt) +
                                ", w_tilde=" + std::to_string(wt) + ")";
        break;
      }
      if (maps.f[xt][wt] != law.x(t, i + 1)) {
        report.consistent = false;
        report.counterexample = "trajectory mismatch at stage " + std::to_string(i) +
                                ": f(g(x,y), w_tilde) = " + std::to_string(maps.f[xt][wt]) +
                                " but x_next = " + std::to_string(law.x(t, i + 1));
        break;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Information-gain corollary
// ---------------------------------------------------------------------------

PmBscGridInstance make_pm_bsc_grid_instance(int cells, double epsilon, int horizon) {
  if (cells < 2 || horizon < 1)
    throw PreconditionError("make_pm_bsc_grid_instance: need >= 2 cells and horizon >= 1");
  MarkovSource source{FiniteDist::uniform(cells), StochKernel::identity(cells)};
  StochKernel channel = bsc(epsilon);

  // decoder alphabet: output-history tree, breadth-first; node 0 is the root
  const int z_size = (1 << (horizon + 1)) - 1;
  PmBscGridInstance out{
      InverseInstance{std::move(source), std::move(channel), SMPolicy{}},
      {}};
  SMPolicy& policy = out.inst.policy;
  policy.z_size = z_size;
  policy.z0 = 0;
  policy.dec.assign(z_size, std::vector<int>(2, 0));
  for (int z = 0; z < z_size; ++z) {
    for (int y = 0; y < 2; ++y) {
      const int child = 2 * z + 1 + y;
      policy.dec[z][y] = child < z_size ? child : z;  // leaves absorb (never used)
    }
  }

  // median-threshold encoder per node: input 1 on the upper half of the
  // node's posterior, split chosen to balance the two masses
  const auto threshold_of = [cells](const FiniteDist& belief) {
    double cum = 0.0;
    int t = cells - 1;
    for (int k = 0; k < cells; ++k) {
      cum += belief(k);
      if (cum >= 0.5) {
        t = k;
        break;
      }
    }
    const double mass_ge = 1.0 - (cum - belief(t));  // mass of {w >= t}
    const double mass_gt = 1.0 - cum;                // mass of {w > t}
    return (std::abs(mass_ge - 0.5) <= std::abs(mass_gt - 0.5)) ? t : t + 1;
  };

  out.beliefs.assign(z_size, FiniteDist::uniform(cells));
  policy.enc.assign(cells, std::vector<int>(z_size, 0));
  const EncoderMap dummy = EncoderMap::identity(2);
  (void)dummy;
  for (int z = 0; z < z_size; ++z) {
    const int t = threshold_of(out.beliefs[z]);
    for (int w = 0; w < cells; ++w) policy.enc[w][z] = (w >= t) ? 1 : 0;
    // children posteriors by exact Bayes with this node's threshold map
    const int child0 = policy.dec[z][0], child1 = policy.dec[z][1];
    if (child0 == z) continue;  // leaf
    std::vector<int> table(cells);
    for (int w = 0; w < cells; ++w) table[w] = policy.enc[w][z];
    const EncoderMap emap(table, 2);
    for (int y = 0; y < 2; ++y) {
      const Belief next = nlf(out.beliefs[z], y, emap, out.inst.channel, out.inst.source);
      out.beliefs[y == 0 ? child0 : child1] = next;
    }
  }
  return out;
}

InfogainCertificate infogain_inverse_certificate(const SMPolicy& policy,
                                                 const std::vector<FiniteDist>& beliefs,
                                                 const MarkovSource& source,
                                                 const StochKernel& channel, double alpha,
                                                 int horizon, double iid_tol) {
  if (static_cast<int>(beliefs.size()) != policy.z_size)
    throw DimensionError("infogain_inverse_certificate: one belief per decoder symbol");

  InfogainCertificate cert;

  // premise 1: the decoder is the nonlinear filter over its reachable symbols
  cert.filter_decoder_ok = true;
  std::vector<char> reachable(policy.z_size, 0);
  std::vector<int> stack{policy.z0};
  reachable[policy.z0] = 1;
  std::vector<std::vector<char>> edge_taken(policy.z_size,
                                            std::vector<char>(channel.output_size(), 0));
  while (!stack.empty()) {
    const int z = stack.back();
    stack.pop_back();
    std::vector<int> table(source.alphabet_size());
    for (int w = 0; w < source.alphabet_size(); ++w) table[w] = policy.enc[w][z];
    const EncoderMap emap(table, channel.input_size());
    const FiniteDist predictive = output_predictive(beliefs[z], emap, channel, source);
    for (int y = 0; y < channel.output_size(); ++y) {
      if (predictive(y) == 0.0) continue;
      const int zn = policy.dec[z][y];
      if (zn == z) continue;  // absorbing leaf
      edge_taken[z][y] = 1;
      const Belief expect = nlf(beliefs[z], y, emap, channel, source);
      const double dev = (expect.vec() - beliefs[zn].vec()).cwiseAbs().maxCoeff();
      if (dev > 1e-12) cert.filter_decoder_ok = false;
      if (!reachable[zn]) {
        reachable[zn] = 1;
        stack.push_back(zn);
      }
    }
  }

  // premise 2: outputs i.i.d. within the supplied tolerance
  cert.iid = check_iid_outputs(policy, source, channel, horizon, iid_tol);

  const InducedKernels kernels =
      derive_induced_kernels(policy, source, channel, horizon, std::max(1e-12, iid_tol));
  const DistTable dist = induced_dist(kernels);

  // the induced distortion equals the information-gain log-ratio on every
  // reachable (z, y) transition and source atom (the Bayes identity)
  cert.dist_matches_infogain = true;
  for (int z = 0; z < policy.z_size; ++z) {
    if (!reachable[z] || !kernels.z_reached[z]) continue;
    const Belief phi = ospu(beliefs[z], source);
    for (int y = 0; y < channel.output_size(); ++y) {
      if (!edge_taken[z][y]) continue;
      const int zn = policy.dec[z][y];
      for (int w = 0; w < source.alphabet_size(); ++w) {
        if (phi(w) == 0.0) continue;
        const ExtReal lhs = dist(w, z, zn);
        const double bz = beliefs[zn](w);
        if (bz == 0.0) {
          if (!lhs.is_inf()) cert.dist_matches_infogain = false;
          continue;
        }
        const double rhs = -std::log(bz / phi(w));
        if (lhs.is_inf()) {
          cert.dist_matches_infogain = false;
          continue;
        }
        cert.worst_dist_gap = std::max(cert.worst_dist_gap, std::abs(lhs.value() - rhs));
      }
    }
  }
  if (cert.worst_dist_gap > 1e-9) cert.dist_matches_infogain = false;

  // cost identity J = (alpha - 1) n C at the realized input cost
  const std::vector<ExtReal> eta = induced_eta(channel, kernels.y_marginal);
  Vector eta_finite(channel.input_size());
  for (int x = 0; x < channel.input_size(); ++x) {
    if (eta[x].is_inf())
      throw PremiseViolationError("infogain_inverse_certificate: infinite induced eta");
    eta_finite(x) = eta[x].value();
  }
  const SMPolicyView view(policy, source.alphabet_size(), channel.input_size(),
                          channel.output_size());
  const JointLaw law = enumerate_joint_law(source, channel, view, horizon);
  const ExtReal j = law_expected_cost(law, [&](int w, int zp, int z, int x) {
    return dist(w, zp, z) + ExtReal(alpha * eta_finite(x));
  });
  double cost = 0.0;
  for (std::size_t t = 0; t < law.num_atoms(); ++t)
    for (int i = 1; i <= horizon; ++i) cost += law.prob(t) * eta_finite(law.x(t, i));
  const double capacity =
      capacity_cost(CostedChannel{channel, eta_finite, cost / horizon}).capacity;
  cert.j_alpha = j.as_double();
  cert.target = (alpha - 1.0) * horizon * capacity;
  cert.gap = std::abs(cert.j_alpha - cert.target);
  return cert;
}

// ---------------------------------------------------------------------------
// Gauss-Markov / AGN
// ---------------------------------------------------------------------------

GaussianInverseReport gaussian_inverse_report(const GaussianModel& g, int horizon, int trials,
                                              std::uint64_t seed) {
  if (horizon < 1 || trials < 1000)
    throw PreconditionError("gaussian_inverse_report: need horizon >= 1, trials >= 1000");
  GaussianInverseReport report;

  // exact second moments of the state (W_i, Z_{i-1}, Z_i, Y_i) via the linear
  // update s' = A s + B (wtilde, v)
  Eigen::Matrix4d A = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 2> B = Eigen::Matrix<double, 4, 2>::Zero();
  const double gb = g.gamma * g.beta;
  A(0, 0) = g.rho;
  A(1, 2) = 1.0;
  A(2, 0) = gb * g.rho;
  A(2, 2) = g.rho - gb * g.rho;
  A(3, 0) = g.beta * g.rho;
  A(3, 2) = -g.beta * g.rho;
  B(0, 0) = 1.0;
  B(2, 0) = gb;
  B(2, 1) = g.gamma;
  B(3, 0) = g.beta;
  B(3, 1) = 1.0;
  const Eigen::Matrix2d noise =
      Eigen::Vector2d(g.sigma_m2, g.sigma_v2).asDiagonal();

  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  cov(0, 0) = g.w0_var;  // (W_0, Z_{-1}=0, Z_0=0, Y_0=0)
  const double c_shrink = g.sigma_v2 / (g.power + g.sigma_v2);

  double lhs = 0.0;  // sum_i E[d(W_i, Z_{i-1}, Z_i)] with the induced quadratic distortion
  std::vector<double> mse(horizon + 1, 0.0);
  for (int i = 1; i <= horizon; ++i) {
    const Eigen::Matrix4d cross = A * cov;  // E[s_i s_{i-1}^T]
    cov = A * cov * A.transpose() + B * noise * B.transpose();
    const double pred_err = cov(0, 0) - 2.0 * g.rho * cov(0, 1) + g.rho * g.rho * cov(1, 1);
    const double var_x = g.beta * g.beta * pred_err;
    report.pred_err_exact.push_back(pred_err);
    report.var_x_exact.push_back(var_x);
    report.stationarity_gap = std::max(report.stationarity_gap, std::abs(pred_err - g.C));
    mse[i] = cov(0, 0) - 2.0 * cov(0, 2) + cov(2, 2);
    report.mse_exact.push_back(mse[i]);
    lhs += mse[i] - c_shrink * pred_err;
    if (i >= 2) {
      // corr(X_i, Y_{i-1}) from E[s_i s_{i-1}^T]: X_i = beta (W_i - rho Z_{i-1})
      const double exy = g.beta * (cross(0, 3) - g.rho * cross(1, 3));
      const double vy = g.power + g.sigma_v2;
      report.max_xy_corr_exact =
          std::max(report.max_xy_corr_exact, std::abs(exy) / std::sqrt(var_x * vy));
    }
  }

  // part-(b) telescoping identity on exact moments:
  //   sum d_i = (1 - c rho^2)[ sum_{i<n} mse_i + mse_n / (1 - c rho^2) ]
  //             - c rho^2 E[W_0^2] - c n sigma_m^2
  const double crho2 = c_shrink * g.rho * g.rho;
  double rhs = 0.0;
  for (int i = 1; i < horizon; ++i) rhs += mse[i];
  rhs += mse[horizon] / (1.0 - crho2);
  const double affine = (1.0 - crho2) * rhs - crho2 * g.w0_var -
                        c_shrink * horizon * g.sigma_m2;
  report.identity_gap = std::abs(lhs - affine);

  // seeded simulation
  std::vector<double> sx(horizon + 1, 0.0), sx2(horizon + 1, 0.0), sy(horizon + 1, 0.0),
      sy2(horizon + 1, 0.0), sxy(horizon + 1, 0.0);
  for (int t = 0; t < trials; ++t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    double w = std::sqrt(g.w0_var) * rng.normal();
    double z = 0.0;
    double y_prev = 0.0;
    for (int i = 1; i <= horizon; ++i) {
      w = g.rho * w + std::sqrt(g.sigma_m2) * rng.normal();
      const double x = g.beta * (w - g.rho * z);
      const double y = x + std::sqrt(g.sigma_v2) * rng.normal();
      z = g.rho * z + g.gamma * y;
      sx[i] += x;
      sx2[i] += x * x;
      if (i >= 2) {
        sy[i] += y_prev;
        sy2[i] += y_prev * y_prev;
        sxy[i] += x * y_prev;
      }
      y_prev = y;
    }
  }
  for (int i = 1; i <= horizon; ++i) {
    const double mx = sx[i] / trials;
    const double vx = sx2[i] / trials - mx * mx;
    report.max_var_x_sim_rel = std::max(report.max_var_x_sim_rel,
                                        std::abs(vx - g.power) / g.power);
    if (i >= 2) {
      const double my = sy[i] / trials;
      const double vy = sy2[i] / trials - my * my;
      const double cxy = sxy[i] / trials - mx * my;
      report.max_xy_corr_sim =
          std::max(report.max_xy_corr_sim, std::abs(cxy) / std::sqrt(vx * vy));
    }
  }

  report.pass_var = report.max_var_x_sim_rel < 0.02;
  report.pass_corr = report.max_xy_corr_sim < 0.01;
  report.pass_identity = report.identity_gap < 1e-10 * std::max(1.0, std::abs(lhs));
  report.pass_stationary = report.stationarity_gap < 1e-12 * std::max(1.0, g.C);
  return report;
}

}  // namespace cclab
