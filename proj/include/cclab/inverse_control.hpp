#pragma once

#include <optional>
#include <string>

#include "cclab/capacity.hpp"
#include "cclab/joint_law.hpp"
#include "cclab/models.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// SMPolicy: stationary Markov coordination strategy
//   x_i = enc(w_i, z_{i-1}),  z_i = dec(z_{i-1}, y_i)
// with a finite decoder alphabet and known initial output z0.
// ---------------------------------------------------------------------------
struct SMPolicy {
  std::vector<std::vector<int>> enc;  // [w][z] -> x
  std::vector<std::vector<int>> dec;  // [z][y] -> z'
  int z_size = 0;
  int z0 = 0;

  void validate(int w_size, int x_size, int y_size) const;
};

/// Adapts an SMPolicy to the general causal-policy interface by folding the
/// decoder over the output history.
class SMPolicyView final : public CausalPolicy {
 public:
  SMPolicyView(const SMPolicy& p, int w_size, int x_size, int y_size)
      : p_(p), w_size_(w_size) {
    p.validate(w_size, x_size, y_size);
  }

  int z_after(std::span<const int> y_hist) const {
    int z = p_.z0;
    for (int y : y_hist) z = p_.dec[z][y];
    return z;
  }

  int encode(int stage, std::span<const int> w_hist, std::span<const int> y_hist) const override {
    (void)stage;
    return p_.enc[w_hist.back()][z_after(y_hist)];
  }
  int decode(int stage, std::span<const int> y_hist) const override {
    (void)stage;
    return z_after(y_hist);
  }
  int decoder_alphabet_size() const override { return p_.z_size; }
  int initial_decoder_output() const override { return p_.z0; }

 private:
  const SMPolicy& p_;
  int w_size_;
};

// ---------------------------------------------------------------------------
// Worked instances.
// ---------------------------------------------------------------------------
struct InverseInstance {
  MarkovSource source;
  StochKernel channel;
  SMPolicy policy;
};

/// ./M/1 queue loop: counting arrivals, Z channel departures, accumulator
/// decoder.  With `exact_stationary_init` the initial occupancy is the exact
/// stationary law of the sampled chain (Burke-exact at every delta); otherwise
/// the geometric law, which is stationary only in the delta -> 0 limit.
InverseInstance make_queue_instance(const QueueModel& q, bool exact_stationary_init = true);

/// Trapdoor loop: counting blue-ball source, inverted-E channel, accumulator
/// decoder; horizon fixes the counting alphabets.
InverseInstance make_trapdoor_instance(const TrapdoorModel& t, int horizon);

// ---------------------------------------------------------------------------
// Output i.i.d. check (the Burke-property premise).
// ---------------------------------------------------------------------------
struct IidReport {
  bool iid = false;
  double max_dependence = 0.0;   // max_i I(Y_i; Y^{i-1}) in nats
  double max_marginal_tv = 0.0;  // max_i TV(P_{Y_i}, P_{Y_1})
};

IidReport check_iid_outputs(const SMPolicy& policy, const MarkovSource& source,
                            const StochKernel& channel, int horizon, double tol = 1e-10,
                            std::uint64_t atom_cap = 10'000'000);

// ---------------------------------------------------------------------------
// Induced kernels and costs (the probabilistic-matching construction).
// ---------------------------------------------------------------------------
struct InducedKernels {
  Matrix q_joint;                // rows indexed z * w_size + w', columns z'
  Matrix q_marg;                 // rows z, columns z'; meaningful only where reached
  std::vector<char> z_reached;   // decoder symbols observed as some Z_{i-1}
  FiniteDist y_marginal = FiniteDist::uniform(1);  // stationary channel output law
  double max_time_variation = 0.0;
  int w_size = 0;
  int z_size = 0;
};

/// Exact induced kernels Q_{Z'|Z,W'} (analytic in the policy and channel) and
/// Q_{Z'|Z} (from the joint law, verified time-invariant within `tol`, which
/// requires the i.i.d.-output premise).  Throws PremiseViolationError naming
/// the stage when time-invariance fails.
InducedKernels derive_induced_kernels(const SMPolicy& policy, const MarkovSource& source,
                                      const StochKernel& channel, int horizon,
                                      double tol = 1e-12);

/// Induced channel-input cost eta(x) = D(P_{Y|X=x} || y_marginal), returned
/// unscaled (positive scaling is the construction's only freedom).  Entries go
/// to the +inf sentinel when the output marginal misses a reachable output.
std::vector<ExtReal> induced_eta(const StochKernel& channel, const FiniteDist& y_marginal);

/// Dense distortion table d(w, z_prev, z).
class DistTable {
 public:
  DistTable(int w_size, int z_size)
      : w_size_(w_size), z_size_(z_size),
        d_(static_cast<std::size_t>(w_size) * z_size * z_size, ExtReal::infinity()) {}

  ExtReal operator()(int w, int z_prev, int z) const { return d_[index(w, z_prev, z)]; }
  void set(int w, int z_prev, int z, ExtReal v) { d_[index(w, z_prev, z)] = v; }
  int w_size() const { return w_size_; }
  int z_size() const { return z_size_; }

 private:
  std::size_t index(int w, int z_prev, int z) const {
    return (static_cast<std::size_t>(w) * z_size_ + z_prev) * z_size_ + z;
  }
  int w_size_, z_size_;
  std::vector<ExtReal> d_;
};

/// Induced distortion d(w, z_prev, z) = -log( q_joint(z|z_prev,w) / q_marg(z|z_prev) ),
/// +inf where q_joint vanishes or z_prev was never reached.
DistTable induced_dist(const InducedKernels& kernels);

/// The same table computed through the decoder inverse (requires dec(z, .)
/// injective on the covered rows): d = -log( P(y*|enc(w,z_prev)) / y_marginal(y*) )
/// with y* the preimage of z under dec(z_prev, .).  Agrees with induced_dist
/// whenever the i.i.d.-output premise holds.  `reachable` restricts the
/// injectivity requirement to rows the dynamics can visit (finite-state
/// truncations clamp the decoder at the alphabet boundary); empty means all.
DistTable induced_dist_invertible(const SMPolicy& policy, const StochKernel& channel,
                                  const FiniteDist& y_marginal,
                                  const std::vector<char>& reachable = {});

// ---------------------------------------------------------------------------
// Certificates.
// ---------------------------------------------------------------------------
struct VariationalReport {
  bool holds = false;
  double worst_spread = 0.0;  // max over w^n of (max - min) over z^n
  std::vector<int> worst_w;
  std::vector<int> worst_z;
};

/// Variational-equation check: log(P(z^n|w^n)/P(z^n)) + alpha2 * sum_i d(...)
/// must be constant in z^n for every fixed w^n (within tol).
VariationalReport verify_variational(const SMPolicy& policy, const MarkovSource& source,
                                     const StochKernel& channel, const DistTable& dist,
                                     double alpha2, int horizon, double tol = 1e-9);

struct ChainReport {
  double mi_wz = 0.0;        // (1/n) I(W^n; Z^n)
  double mi_wy = 0.0;        // (1/n) I(W^n; Y^n)
  double sum_mi_xy = 0.0;    // (1/n) sum_i I(X_i; Y_i)
  double capacity = 0.0;     // C(realized average input cost)
  double realized_cost = 0.0;
  double realized_distortion = 0.0;  // (1/n) E sum d, +inf reported as such
  bool weak_chain_holds = false;
  double max_equality_gap = 0.0;  // max pairwise gap along the chain
};

/// The data-processing chain (1/n)I(W;Z) <= (1/n)I(W;Y) <= (1/n)sum I(X_i;Y_i)
/// <= C(cost).  Weak inequalities always; equalities hold for matched
/// policies and are reported through max_equality_gap.
ChainReport verify_chain(const SMPolicy& policy, const MarkovSource& source,
                         const StochKernel& channel, const DistTable* dist,
                         const std::vector<ExtReal>& eta, int horizon);

struct DetailedBalanceReport {
  bool reversible = false;
  double max_violation = 0.0;       // max |pi(a)P(b|a) - pi(b)P(a|b)|
  bool supplied_law_stationary = true;
  double stationarity_gap = 0.0;
  FiniteDist stationary;

  explicit DetailedBalanceReport(FiniteDist pi) : stationary(std::move(pi)) {}
};

/// Detailed balance of a finite chain against a supplied or power-iterated
/// stationary law.  A supplied non-stationary law is reported, not fatal.
DetailedBalanceReport detailed_balance_check(const StochKernel& chain,
                                             const std::optional<FiniteDist>& pi = std::nullopt,
                                             double tol = 1e-12);

// ---------------------------------------------------------------------------
// Reversible-compatibility of the dynamics (the invertible f/g factorization
// X = f_{xt}(wt), XT = g_x(y)); entries of -1 mean undefined.
// ---------------------------------------------------------------------------
struct IrcMaps {
  std::vector<std::vector<int>> f;  // [x_tilde][w_tilde] -> x
  std::vector<std::vector<int>> g;  // [x][y] -> x_tilde

  /// The additive structure x = x_tilde + w_tilde, x_tilde = x - y.
  static IrcMaps additive(int xt_size, int wt_size, int x_size, int y_size);
};

struct IrcReport {
  bool f_invertible = true;
  bool g_invertible = true;
  bool consistent = true;  // maps reproduce the realized trajectories
  std::string counterexample;
  bool pass() const { return f_invertible && g_invertible && consistent; }
};

/// Checks invertibility of f_{xt}(.) and g_x(.) on their defined domains and
/// replays every positive-probability trajectory of the policy through them
/// (source innovations are the counting increments w_i - w_{i-1}).
IrcReport irc_decomposition_check(const IrcMaps& maps, const SMPolicy& policy,
                                  const MarkovSource& source, const StochKernel& channel,
                                  int horizon);

// ---------------------------------------------------------------------------
// Information-gain corollary: a filter decoder with i.i.d. outputs is inverse
// control optimal for the information-gain distortion, with optimal cost
// (alpha - 1) * n * C.
// ---------------------------------------------------------------------------
struct InfogainCertificate {
  bool filter_decoder_ok = false;  // supplied beliefs follow the nonlinear filter
  IidReport iid;
  bool dist_matches_infogain = false;
  double worst_dist_gap = 0.0;
  double j_alpha = 0.0;   // E sum d + alpha sum E eta under the policy
  double target = 0.0;    // (alpha - 1) * n * C(realized cost)
  double gap = 0.0;
  bool pass(double tol) const {
    return filter_decoder_ok && iid.iid && dist_matches_infogain && gap <= tol;
  }
};

/// `beliefs` attaches the decoder's posterior to each z symbol; the filter
/// premise, the induced-vs-information-gain distortion identity on reachable
/// atoms, and the (alpha-1)nC cost identity are all verified.
InfogainCertificate infogain_inverse_certificate(const SMPolicy& policy,
                                                 const std::vector<FiniteDist>& beliefs,
                                                 const MarkovSource& source,
                                                 const StochKernel& channel, double alpha,
                                                 int horizon, double iid_tol = 1e-10);

/// PM-over-BSC on a message grid of `cells` atoms, horizon steps: repetition
/// source over cells, median-threshold encoder, exact-filter decoder with the
/// output-history tree as the decoder alphabet.  Returns the instance plus the
/// belief attached to each tree node.
struct PmBscGridInstance {
  InverseInstance inst;
  std::vector<FiniteDist> beliefs;
};
PmBscGridInstance make_pm_bsc_grid_instance(int cells, double epsilon, int horizon);

// ---------------------------------------------------------------------------
// Gauss-Markov / AGN closed-form report.
// ---------------------------------------------------------------------------
struct GaussianInverseReport {
  std::vector<double> var_x_exact;      // per step, from covariance propagation
  std::vector<double> pred_err_exact;   // E[(W_i - rho Z_{i-1})^2]
  std::vector<double> mse_exact;        // E[(W_i - Z_i)^2]
  double max_xy_corr_exact = 0.0;       // corr(X_i, Y_{i-1}) from exact moments
  double identity_gap = 0.0;            // part-(b) telescoping residual
  double max_var_x_sim_rel = 0.0;       // max_i |sim Var(X_i)/power - 1|
  double max_xy_corr_sim = 0.0;         // max_i |sim corr(X_i, Y_{i-1})|
  double stationarity_gap = 0.0;        // max_i |pred_err_i - C|
  bool pass_var = false, pass_corr = false, pass_identity = false, pass_stationary = false;
  bool pass() const { return pass_var && pass_corr && pass_identity && pass_stationary; }
};

GaussianInverseReport gaussian_inverse_report(const GaussianModel& g, int horizon, int trials,
                                              std::uint64_t seed);

}  // namespace cclab
