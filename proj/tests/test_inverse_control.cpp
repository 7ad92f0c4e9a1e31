#include "doctest.h"

#include <cmath>

#include "cclab/inverse_control.hpp"
#include "cclab/rng.hpp"

using namespace cclab;

namespace {

SMPolicy random_binary_sm_policy(RngStream& rng, int z_size) {
  SMPolicy p;
  p.z_size = z_size;
  p.z0 = 0;
  p.enc.assign(2, std::vector<int>(z_size, 0));
  for (auto& row : p.enc)
    for (int& x : row) x = rng.uniform_int(2);
  p.dec.assign(z_size, std::vector<int>(2, 0));
  for (auto& row : p.dec)
    for (int& z : row) z = rng.uniform_int(z_size);
  return p;
}

StochKernel random_positive_channel(RngStream& rng, int nin, int nout) {
  Matrix m(nin, nout);
  for (int r = 0; r < nin; ++r) {
    double s = 0.0;
    for (int c = 0; c < nout; ++c) {
      m(r, c) = 0.05 + rng.uniform();
      s += m(r, c);
    }
    m.row(r) /= s;
  }
  return StochKernel(std::move(m));
}

}  // namespace

TEST_SUITE("inverse_control") {

TEST_CASE("queue: Burke property gives exactly i.i.d. outputs") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const InverseInstance inst = make_queue_instance(q, /*exact_stationary_init=*/true);
  const IidReport r = check_iid_outputs(inst.policy, inst.source, inst.channel, 4);
  CHECK(r.iid);
  CHECK(r.max_dependence < 1e-10);
  CHECK(r.max_marginal_tv < 1e-10);

  // the geometric initialization is stationary only in the delta -> 0 limit
  const InverseInstance geo = make_queue_instance(q, /*exact_stationary_init=*/false);
  const IidReport rg = check_iid_outputs(geo.policy, geo.source, geo.channel, 4);
  CHECK(!rg.iid);
  CHECK(rg.max_marginal_tv > 1e-10);
  CHECK(rg.max_marginal_tv < 1e-4);
}

TEST_CASE("trapdoor: outputs i.i.d. and chain in detailed balance") {
  const TrapdoorModel t(0.5);
  const InverseInstance inst = make_trapdoor_instance(t, 3);
  CHECK(check_iid_outputs(inst.policy, inst.source, inst.channel, 3).iid);

  const TrapdoorLaws laws = trapdoor_source_and_init(t);
  const auto db = detailed_balance_check(laws.transition, laws.initial_state);
  CHECK(db.reversible);
  CHECK(db.max_violation < 1e-14);
  CHECK(db.supplied_law_stationary);
}

TEST_CASE("queue: detailed balance of the rate chain and the sampled chain") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  // the idealized chain (up lambda delta, down mu delta) vs the geometric law
  const MarkovSource geo = queue_source(q);
  const auto db_rate = detailed_balance_check(queue_rate_chain(q), geo.initial);
  CHECK(db_rate.reversible);
  CHECK(db_rate.max_violation < 1e-12);
  // the exact sampled chain vs its own stationary law
  const auto db_exact = detailed_balance_check(queue_length_chain(q), queue_chain_stationary(q));
  CHECK(db_exact.reversible);
  CHECK(db_exact.supplied_law_stationary);
}

TEST_CASE("detailed balance: power iteration and an irreversible 3-cycle") {
  // asymmetric rotation with uniform stationary law is the canonical
  // irreversible chain
  Matrix rot(3, 3);
  rot << 0.1, 0.8, 0.1, 0.1, 0.1, 0.8, 0.8, 0.1, 0.1;
  const auto db = detailed_balance_check(StochKernel(rot), std::nullopt);
  CHECK(db.supplied_law_stationary);  // power iteration found the fixed point
  for (int i = 0; i < 3; ++i) CHECK(db.stationary(i) == doctest::Approx(1.0 / 3));
  CHECK(!db.reversible);
}

TEST_CASE("induced kernels: queue cells and trapdoor marginal") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const InverseInstance inst = make_queue_instance(q);
  const InducedKernels k = derive_induced_kernels(inst.policy, inst.source, inst.channel, 4);
  // q_joint(z+1 | z, w with x = w - z > 0) = mu delta
  CHECK(k.q_joint(0 * k.w_size + 3, 1) == doctest::Approx(q.mu * q.delta));
  CHECK(k.q_joint(2 * k.w_size + 5, 3) == doctest::Approx(q.mu * q.delta));
  // empty queue cannot emit a departure
  CHECK(k.q_joint(2 * k.w_size + 2, 3) == doctest::Approx(0.0));
  // stationary output marginal P(Y=1) = lambda delta, exactly at finite delta
  CHECK(k.y_marginal(1) == doctest::Approx(q.lambda * q.delta).epsilon(1e-12));
  CHECK(k.max_time_variation < 1e-13);

  const InverseInstance trap = make_trapdoor_instance(TrapdoorModel(0.5), 3);
  const InducedKernels kt = derive_induced_kernels(trap.policy, trap.source, trap.channel, 3);
  CHECK(kt.y_marginal(1) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(kt.q_marg(0, 1) == doctest::Approx(0.5).epsilon(1e-12));  // q_marg(z+1|z) = P(Y=1)
}

TEST_CASE("induced_eta closed forms") {
  // symmetric channel at the capacity-achieving (uniform) output marginal:
  // every input has eta = capacity
  const StochKernel ch = bsc(0.1);
  const auto eta = induced_eta(ch, FiniteDist::uniform(2));
  const double cap = std::log(2.0) - binary_entropy(0.1);
  CHECK(eta[0].value() == doctest::Approx(cap));
  CHECK(eta[1].value() == doctest::Approx(cap));

  const auto eta_noiseless = induced_eta(StochKernel::identity(2), FiniteDist::uniform(2));
  CHECK(eta_noiseless[0].value() == doctest::Approx(std::log(2.0)));
  CHECK(eta_noiseless[1].value() == doctest::Approx(std::log(2.0)));

  // missing output support produces the sentinel
  const auto eta_inf = induced_eta(StochKernel::identity(2), FiniteDist::point_mass(2, 0));
  CHECK(eta_inf[1].is_inf());
}

TEST_CASE("trapdoor induced distortion is the closed-form four-cell table") {
  const double p = 0.5;
  const InverseInstance inst = make_trapdoor_instance(TrapdoorModel(p), 3);
  const InducedKernels k = derive_induced_kernels(inst.policy, inst.source, inst.channel, 3);
  const DistTable d = induced_dist(k);
  // cells indexed by (x = w - z_prev, y = z - z_prev); scale 1, natural log
  // x=0,y=0 -> log p; x=1,y=0 -> log 2p; x=1,y=1 -> log 2(1-p); x=2,y=1 -> log(1-p)
  CHECK(d(1, 1, 1).value() == doctest::Approx(std::log(p)).epsilon(1e-12));
  CHECK(d(2, 1, 1).value() == doctest::Approx(std::log(2 * p)).epsilon(1e-12));
  CHECK(d(2, 1, 2).value() == doctest::Approx(std::log(2 * (1 - p))).epsilon(1e-12));
  CHECK(d(3, 1, 2).value() == doctest::Approx(std::log(1 - p)).epsilon(1e-12));
  // infeasible cells carry the sentinel: x=0 cannot produce y=1
  CHECK(d(1, 1, 2).is_inf());

  // expected distortion per step is -(1/2) bits at p = 1/2
  const std::vector<ExtReal> eta = induced_eta(inst.channel, k.y_marginal);
  const ChainReport chain = verify_chain(inst.policy, inst.source, inst.channel, &d, eta, 3);
  CHECK(chain.realized_distortion == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("queue induced distortion cells, exact at finite delta") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const InverseInstance inst = make_queue_instance(q);
  const DistTable d = induced_dist(derive_induced_kernels(inst.policy, inst.source,
                                                          inst.channel, 4));
  const double ld = q.lambda * q.delta, md = q.mu * q.delta;
  // x = w - z_prev = 0, y = 0: -log(1 / (1 - lambda delta))
  CHECK(d(2, 2, 2).value() == doctest::Approx(std::log(1.0 - ld)).epsilon(1e-12));
  // x > 0, y = 0: -log((1 - mu delta)/(1 - lambda delta))
  CHECK(d(3, 1, 1).value() ==
        doctest::Approx(std::log((1.0 - ld) / (1.0 - md))).epsilon(1e-12));
  // x > 0, y = 1: -log(mu delta / lambda delta) = log(lambda/mu), delta-free
  CHECK(d(3, 1, 2).value() == doctest::Approx(std::log(q.lambda / q.mu)).epsilon(1e-12));
  // empty queue cannot emit: sentinel
  CHECK(d(1, 1, 2).is_inf());
}

TEST_CASE("uninformative channel induces a zero distortion table") {
  // q_joint = q_marg whenever the channel carries nothing
  Matrix flat(2, 2);
  flat << 0.5, 0.5, 0.5, 0.5;
  const MarkovSource src{FiniteDist::uniform(2), StochKernel::identity(2)};
  SMPolicy pol;
  pol.z_size = 2;
  pol.z0 = 0;
  pol.enc = {{0, 0}, {1, 1}};
  pol.dec = {{0, 1}, {0, 1}};
  const InducedKernels k = derive_induced_kernels(pol, src, StochKernel(flat), 3);
  const DistTable d = induced_dist(k);
  for (int w = 0; w < 2; ++w)
    for (int zp = 0; zp < 2; ++zp)
      for (int z = 0; z < 2; ++z)
        if (!d(w, zp, z).is_inf()) CHECK(std::abs(d(w, zp, z).value()) < 1e-14);
}

TEST_CASE("corollary route agrees with the kernel route") {
  // K = 60 keeps the truncation tail (~rho^K) below the 1e-12 assertions
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const InverseInstance inst = make_queue_instance(q);
  const InducedKernels k = derive_induced_kernels(inst.policy, inst.source, inst.channel, 3);
  const DistTable a = induced_dist(k);
  const DistTable b = induced_dist_invertible(inst.policy, inst.channel, k.y_marginal,
                                              k.z_reached);
  for (int w = 0; w < 8; ++w) {
    for (int zp = 0; zp < 4; ++zp) {
      if (!k.z_reached[zp]) continue;
      for (int z = 0; z < 4; ++z) {
        CHECK(a(w, zp, z).is_inf() == b(w, zp, z).is_inf());
        if (!a(w, zp, z).is_inf())
          CHECK(std::abs(a(w, zp, z).value() - b(w, zp, z).value()) < 1e-12);
      }
    }
  }

  // a constant decoder is not injective
  SMPolicy constant = inst.policy;
  for (auto& row : constant.dec) row = {0, 0};
  CHECK_THROWS_AS(induced_dist_invertible(constant, inst.channel, k.y_marginal),
                  PreconditionError);
}

TEST_CASE("variational equation holds for queue and trapdoor, fails when perturbed") {
  const QueueModel q(0.5, 1.0, 0.01, 40);
  const InverseInstance queue = make_queue_instance(q);
  const DistTable dq = induced_dist(derive_induced_kernels(queue.policy, queue.source,
                                                           queue.channel, 3));
  const VariationalReport vq =
      verify_variational(queue.policy, queue.source, queue.channel, dq, 1.0, 3);
  CHECK(vq.holds);
  CHECK(vq.worst_spread < 1e-9);

  const InverseInstance trap = make_trapdoor_instance(TrapdoorModel(0.5), 3);
  const DistTable dt = induced_dist(derive_induced_kernels(trap.policy, trap.source,
                                                           trap.channel, 3));
  CHECK(verify_variational(trap.policy, trap.source, trap.channel, dt, 1.0, 3).holds);

  // perturbing one finite cell breaks constancy
  DistTable perturbed = dt;
  perturbed.set(1, 1, 1, ExtReal(dt(1, 1, 1).value() + 0.1));
  const VariationalReport bad =
      verify_variational(trap.policy, trap.source, trap.channel, perturbed, 1.0, 3);
  CHECK(!bad.holds);
  CHECK(bad.worst_spread > 0.01);
}

TEST_CASE("information chain: equalities for matched policies") {
  const TrapdoorModel t(0.5);
  const InverseInstance inst = make_trapdoor_instance(t, 3);
  const InducedKernels k = derive_induced_kernels(inst.policy, inst.source, inst.channel, 3);
  const DistTable d = induced_dist(k);
  const ChainReport r = verify_chain(inst.policy, inst.source, inst.channel, &d,
                                     induced_eta(inst.channel, k.y_marginal), 3);
  CHECK(r.weak_chain_holds);
  CHECK(r.max_equality_gap < 1e-8);
  // trapdoor at p = 1/2 transmits 1/2 bit per use
  CHECK(r.mi_wy == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("information chain: weak inequalities for random SM policies") {
  RngStream rng(321);
  const MarkovSource src{FiniteDist::uniform(2), random_positive_channel(rng, 2, 2)};
  for (int trial = 0; trial < 60; ++trial) {
    const StochKernel channel = random_positive_channel(rng, 2, 2);
    const SMPolicy pol = random_binary_sm_policy(rng, 3);
    const InducedKernels k = derive_induced_kernels(pol, src, channel, 3, 1.0);
    const ChainReport r =
        verify_chain(pol, src, channel, nullptr, induced_eta(channel, k.y_marginal), 3);
    CHECK(r.weak_chain_holds);
  }
}

TEST_CASE("information chain: lossy decoder makes the first inequality strict") {
  const TrapdoorModel t(0.5);
  InverseInstance inst = make_trapdoor_instance(t, 3);
  for (auto& row : inst.policy.dec) row = {0, 0};  // z stays 0: no information kept
  const InducedKernels k =
      derive_induced_kernels(inst.policy, inst.source, inst.channel, 3, 1.0);
  const ChainReport r = verify_chain(inst.policy, inst.source, inst.channel, nullptr,
                                     induced_eta(inst.channel, k.y_marginal), 3);
  CHECK(r.weak_chain_holds);
  CHECK(r.mi_wz == doctest::Approx(0.0));
  CHECK(r.mi_wy > 0.1);
}

TEST_CASE("reversible-compatible dynamics: additive maps pass, lossy maps fail") {
  const QueueModel q(0.5, 1.0, 0.01, 40);
  const InverseInstance queue = make_queue_instance(q);
  const int K = q.truncation;
  const IrcMaps add = IrcMaps::additive(K + 1, 2, K + 1, 2);
  CHECK(irc_decomposition_check(add, queue.policy, queue.source, queue.channel, 3).pass());

  const InverseInstance trap = make_trapdoor_instance(TrapdoorModel(0.5), 3);
  const IrcMaps trap_maps = IrcMaps::additive(2, 2, 3, 2);
  CHECK(irc_decomposition_check(trap_maps, trap.policy, trap.source, trap.channel, 3).pass());

  // a state update that drops information: g slice with a repeated value
  IrcMaps lossy = trap_maps;
  lossy.g[1] = {1, 1};  // x=1 maps both outputs to the same x_tilde
  const IrcReport bad =
      irc_decomposition_check(lossy, trap.policy, trap.source, trap.channel, 3);
  CHECK(!bad.g_invertible);

  // max-decoder dynamics are not additive: consistency breaks
  InverseInstance maxdec = make_trapdoor_instance(TrapdoorModel(0.5), 3);
  for (std::size_t z = 0; z < maxdec.policy.dec.size(); ++z)
    maxdec.policy.dec[z] = {static_cast<int>(z), std::max(static_cast<int>(z), 1)};
  const IrcReport inc =
      irc_decomposition_check(trap_maps, maxdec.policy, maxdec.source, maxdec.channel, 3);
  CHECK(!inc.consistent);
}

TEST_CASE("information-gain certificate on the PM-BSC message grid") {
  const int cells = 1024;
  const double eps = 0.2;
  const int n = 3;
  const PmBscGridInstance pm = make_pm_bsc_grid_instance(cells, eps, n);
  const double cap = std::log(2.0) - binary_entropy(eps);

  // grid granularity keeps the outputs i.i.d. only up to ~1/cells effects
  const double iid_tol = 1e-2;
  const InfogainCertificate at1 = infogain_inverse_certificate(
      pm.inst.policy, pm.beliefs, pm.inst.source, pm.inst.channel, 1.0, n, iid_tol);
  CHECK(at1.filter_decoder_ok);
  CHECK(at1.iid.iid);
  CHECK(at1.iid.max_dependence < 1e-5);
  CHECK(at1.dist_matches_infogain);
  CHECK(at1.worst_dist_gap < 1e-10);
  // alpha = 1: the gain reward and the input cost cancel
  CHECK(std::abs(at1.j_alpha) < 1e-4);
  CHECK(std::abs(at1.target) < 1e-4);

  const InfogainCertificate at0 = infogain_inverse_certificate(
      pm.inst.policy, pm.beliefs, pm.inst.source, pm.inst.channel, 0.0, n, iid_tol);
  CHECK(std::abs(at0.target + n * cap) < 1e-6);
  CHECK(std::abs(at0.j_alpha + n * cap) < 1e-3);  // grid slack only

  // a fixed-threshold encoder (not the running median) breaks the i.i.d.
  // premise; the certificate reports it instead of throwing
  PmBscGridInstance broken = pm;
  for (int z = 0; z < broken.inst.policy.z_size; ++z)
    for (int w = 0; w < cells; ++w)
      broken.inst.policy.enc[w][z] = (w >= cells / 2) ? 1 : 0;
  // rebuild beliefs so the decoder is still the exact filter for this encoder
  for (int z = 0; z < broken.inst.policy.z_size; ++z) {
    const int c0 = broken.inst.policy.dec[z][0];
    if (c0 == z) continue;
    std::vector<int> table(cells);
    for (int w = 0; w < cells; ++w) table[w] = broken.inst.policy.enc[w][z];
    const EncoderMap emap(table, 2);
    for (int y = 0; y < 2; ++y)
      broken.beliefs[broken.inst.policy.dec[z][y]] =
          nlf(broken.beliefs[z], y, emap, broken.inst.channel, broken.inst.source);
  }
  const InfogainCertificate bad = infogain_inverse_certificate(
      broken.inst.policy, broken.beliefs, broken.inst.source, broken.inst.channel, 1.0, n,
      1e-10);
  CHECK(bad.filter_decoder_ok);
  CHECK(!bad.iid.iid);
}

TEST_CASE("gaussian inverse report: closed forms and simulation") {
  const GaussianModel g = gaussian_steady_state(0.5, 1.0, 1.0, 1.0);
  const GaussianInverseReport r = gaussian_inverse_report(g, 10, 50000, 777);
  CHECK(r.pass_stationary);
  CHECK(r.stationarity_gap < 1e-12);
  CHECK(r.pass_identity);
  CHECK(r.max_xy_corr_exact < 1e-12);
  CHECK(r.pass_var);
  CHECK(r.pass_corr);

  // rho = 0 decouples the steps entirely
  const GaussianModel g0 = gaussian_steady_state(0.0, 1.0, 1.0, 1.0);
  const GaussianInverseReport r0 = gaussian_inverse_report(g0, 5, 50000, 778);
  CHECK(r0.pass());
  for (double v : r0.pred_err_exact) CHECK(v == doctest::Approx(g0.C));
}

}  // TEST_SUITE
