#include "cclab/joint_law.hpp"

#include <cmath>

namespace cclab {

void JointLaw::add_atom(int w0, std::span<const int> w, std::span<const int> x,
                        std::span<const int> y, std::span<const int> z, double p) {
  if (static_cast<int>(w.size()) != n_ || static_cast<int>(x.size()) != n_ ||
      static_cast<int>(y.size()) != n_ || static_cast<int>(z.size()) != n_)
    throw DimensionError("JointLaw::add_atom: trajectory length != horizon");
  data_.push_back(w0);
  data_.insert(data_.end(), w.begin(), w.end());
  data_.insert(data_.end(), x.begin(), x.end());
  data_.insert(data_.end(), y.begin(), y.end());
  data_.insert(data_.end(), z.begin(), z.end());
  probs_.push_back(p);
}

void JointLaw::finalize() const {
  const double s = total_probability();
  if (std::abs(s - 1.0) > 1e-10)
    throw ModelError("JointLaw: atom probabilities sum to " + std::to_string(s));
}

namespace {

struct Enumerator {
  const MarkovSource& source;
  const StochKernel& channel;
  const CausalPolicy& policy;
  int n;
  std::uint64_t atom_cap;
  JointLaw& law;
  std::uint64_t atoms = 0;

  std::vector<int> w{}, x{}, y{}, z{};

  void run() {
    w.assign(n, 0);
    x.assign(n, 0);
    y.assign(n, 0);
    z.assign(n, 0);
    for (int w0 = 0; w0 < source.alphabet_size(); ++w0) {
      const double p0 = source.initial(w0);
      if (p0 > 0.0) step(1, w0, w0, p0);
    }
  }

  // prev_w is w_{stage-1} (or w_0 at stage 1)
  void step(int stage, int w0, int prev_w, double prob) {
    if (stage > n) {
      if (++atoms > atom_cap)
        throw EnumerationLimitError("enumerate_joint_law: atom cap exceeded at horizon " +
                                    std::to_string(n));
      law.add_atom(w0, w, x, y, z, prob);
      return;
    }
    const auto w_hist = [&](int upto) { return std::span<const int>(w.data(), upto); };
    const auto y_hist = [&](int upto) { return std::span<const int>(y.data(), upto); };
    for (int wi = 0; wi < source.alphabet_size(); ++wi) {
      const double pw = source.kernel(prev_w, wi);
      if (pw == 0.0) continue;
      w[stage - 1] = wi;
      const int xi = policy.encode(stage, w_hist(stage), y_hist(stage - 1));
      if (xi < 0 || xi >= channel.input_size())
        throw DimensionError("enumerate_joint_law: encoder output outside channel alphabet");
      x[stage - 1] = xi;
      for (int yi = 0; yi < channel.output_size(); ++yi) {
        const double py = channel(xi, yi);
        if (py == 0.0) continue;
        y[stage - 1] = yi;
        const int zi = policy.decode(stage, y_hist(stage));
        if (zi < 0 || zi >= policy.decoder_alphabet_size())
          throw DimensionError("enumerate_joint_law: decoder output outside its alphabet");
        z[stage - 1] = zi;
        step(stage + 1, w0, wi, prob * pw * py);
      }
    }
  }
};

}  // namespace

JointLaw enumerate_joint_law(const MarkovSource& source, const StochKernel& channel,
                             const CausalPolicy& policy, int horizon,
                             std::uint64_t atom_cap) {
  JointLaw law(horizon, policy.initial_decoder_output());
  Enumerator e{source, channel, policy, horizon, atom_cap, law};
  e.run();
  law.finalize();
  return law;
}

// ---------------------------------------------------------------------------
// Information functionals.
// ---------------------------------------------------------------------------

namespace {

using KeyDist = std::map<AtomKey, double>;

AtomKey concat(AtomKey a, const AtomKey& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

double law_mutual_information(const JointLaw& law, const AtomProjection& a,
                              const AtomProjection& b) {
  if (law.num_atoms() == 0) return 0.0;
  KeyDist pa, pb, pab;
  for (std::size_t t = 0; t < law.num_atoms(); ++t) {
    const double p = law.prob(t);
    AtomKey ka = a(law, t), kb = b(law, t);
    pa[ka] += p;
    pb[kb] += p;
    pab[concat(std::move(ka), kb)] += p;
  }
  // projection keys have a fixed length, so the joint key splits positionally
  const std::size_t len_a = a(law, 0).size();
  double mi = 0.0;
  for (const auto& [kab, p] : pab) {
    if (p == 0.0) continue;
    const AtomKey ka(kab.begin(), kab.begin() + len_a);
    const AtomKey kb(kab.begin() + len_a, kab.end());
    mi += p * std::log(p / (pa.at(ka) * pb.at(kb)));
  }
  return std::max(mi, 0.0);
}

double law_conditional_mi(const JointLaw& law, const AtomProjection& a,
                          const AtomProjection& b, const AtomProjection& c) {
  if (law.num_atoms() == 0) return 0.0;
  KeyDist pac, pbc, pc, pabc;
  for (std::size_t t = 0; t < law.num_atoms(); ++t) {
    const double p = law.prob(t);
    AtomKey ka = a(law, t), kb = b(law, t), kc = c(law, t);
    pc[kc] += p;
    pac[concat(ka, kc)] += p;
    pbc[concat(kb, kc)] += p;
    pabc[concat(concat(std::move(ka), kb), kc)] += p;
  }
  const std::size_t len_a = a(law, 0).size();
  const std::size_t len_b = b(law, 0).size();
  double mi = 0.0;
  for (const auto& [kabc, p] : pabc) {
    if (p == 0.0) continue;
    const AtomKey ka(kabc.begin(), kabc.begin() + len_a);
    const AtomKey kb(kabc.begin() + len_a, kabc.begin() + len_a + len_b);
    const AtomKey kc(kabc.begin() + len_a + len_b, kabc.end());
    mi += p * std::log(p * pc.at(kc) / (pac.at(concat(ka, kc)) * pbc.at(concat(kb, kc))));
  }
  return std::max(mi, 0.0);
}

AtomProjection proj_w(int lo, int hi) {
  return [lo, hi](const JointLaw& l, std::size_t t) {
    AtomKey k;
    for (int i = lo; i <= hi; ++i) k.push_back(l.w(t, i));
    return k;
  };
}

AtomProjection proj_x(int lo, int hi) {
  return [lo, hi](const JointLaw& l, std::size_t t) {
    AtomKey k;
    for (int i = lo; i <= hi; ++i) k.push_back(l.x(t, i));
    return k;
  };
}

AtomProjection proj_y(int lo, int hi) {
  return [lo, hi](const JointLaw& l, std::size_t t) {
    AtomKey k;
    for (int i = lo; i <= hi; ++i) k.push_back(l.y(t, i));
    return k;
  };
}

AtomProjection proj_z(int lo, int hi) {
  return [lo, hi](const JointLaw& l, std::size_t t) {
    AtomKey k;
    for (int i = lo; i <= hi; ++i) k.push_back(l.z(t, i));
    return k;
  };
}

AtomProjection proj_empty() {
  return [](const JointLaw&, std::size_t) { return AtomKey{}; };
}

MiDecomposition mi_decompositions(const JointLaw& law) {
  const int n = law.horizon();
  MiDecomposition out{};
  out.mi_direct = law_mutual_information(law, proj_w(1, n), proj_y(1, n));

  out.mi_chain_rule = 0.0;
  for (int i = 1; i <= n; ++i)
    out.mi_chain_rule +=
        law_conditional_mi(law, proj_w(1, n), proj_y(i, i),
                           i > 1 ? proj_y(1, i - 1) : proj_empty());

  // beliefs straight from the law: B_{i|i}(w) = P(W_i = w | Y^i), and the
  // prediction B_{i|i-1}(w) = P(W_i = w | Y^{i-1})
  out.mi_sequential_gains = 0.0;
  for (int i = 1; i <= n; ++i) {
    KeyDist filt, filt_marg, pred, pred_marg;
    for (std::size_t t = 0; t < law.num_atoms(); ++t) {
      const double p = law.prob(t);
      AtomKey yi = proj_y(1, i)(law, t);
      AtomKey yim1 = i > 1 ? proj_y(1, i - 1)(law, t) : AtomKey{};
      filt_marg[yi] += p;
      pred_marg[yim1] += p;
      AtomKey kw{law.w(t, i)};
      filt[concat(kw, yi)] += p;
      pred[concat(std::move(kw), yim1)] += p;
    }
    double gain = 0.0;
    for (std::size_t t = 0; t < law.num_atoms(); ++t) {
      const double p = law.prob(t);
      if (p == 0.0) continue;
      AtomKey yi = proj_y(1, i)(law, t);
      AtomKey yim1 = i > 1 ? proj_y(1, i - 1)(law, t) : AtomKey{};
      AtomKey kw{law.w(t, i)};
      const double b_filt = filt[concat(kw, yi)] / filt_marg[yi];
      const double b_pred = pred[concat(std::move(kw), yim1)] / pred_marg[yim1];
      gain += p * std::log(b_filt / b_pred);
    }
    out.mi_sequential_gains += gain;
  }
  return out;
}

ExtReal law_expected_cost(const JointLaw& law,
                          const std::function<ExtReal(int w, int zprev, int z, int x)>& g) {
  ExtReal total(0.0);
  for (std::size_t t = 0; t < law.num_atoms(); ++t) {
    const double p = law.prob(t);
    if (p == 0.0) continue;
    for (int i = 1; i <= law.horizon(); ++i) {
      total += p * g(law.w(t, i), law.z(t, i - 1), law.z(t, i), law.x(t, i));
      if (total.is_inf()) return total;
    }
  }
  return total;
}

}  // namespace cclab
