// The algorithm-equivalence suite: pairs of engines that must produce the
// same iterates under the documented variable correspondences, each checked
// per-iterate over 50 iterations on seeded desk problems.

#include <gtest/gtest.h>

#include <random>

#include "proxsplit/models.hpp"
#include "proxsplit/steps.hpp"
#include "test_support.hpp"

using namespace proxsplit;

namespace {

constexpr int kIters = 50;
constexpr double kTol = 1e-10;

struct Setup {
  std::size_t n = 12;
  Fun f_l1 = Fun::l1(0.3);
  Fun g_l1 = Fun::l1(0.5);
  Fun h;
  LinOp L;
  double beta = 0.0;
  Vec x0, u0;

  explicit Setup(std::uint64_t seed, std::size_t udim = 8) {
    std::mt19937_64 rng(seed);
    h = Fun::quadratic(certified(testsupport::random_psd(rng, n, 0.3)),
                       testsupport::random_vec(rng, n));
    L = certified(testsupport::random_dense(rng, udim, n, 0.5));
    beta = h.smooth_info()->lipschitz;
    x0 = testsupport::random_vec(rng, n);
    u0 = testsupport::random_vec(rng, udim);
  }
};

IterState state_of(Vec primary, std::vector<Vec> duals = {},
                   std::map<std::string, Vec> aux = {}) {
  IterState z;
  z.primary = std::move(primary);
  z.duals = std::move(duals);
  z.aux = std::move(aux);
  return z;
}

}  // namespace

// L = Id and sigma = 1/tau turn the primal-dual forward-backward iteration
// into the plain forward-backward one, from any dual start.
TEST(Equivalence, LvRevertsToFb) {
  Setup s(1, 12);
  const double tau = 0.9 / s.beta;
  auto lv = make_lv_step(s.g_l1, LinOp::identity(s.n), s.h, tau, 1.0 / tau);
  auto fb = make_fb_step(s.g_l1, s.h, tau);
  IterState za = state_of(s.x0, {testsupport::random_vec(*new std::mt19937_64(9), s.n)});
  IterState zb = state_of(s.x0);
  const double rho = 1.4;
  for (int i = 0; i < kIters; ++i) {
    auto oa = lv(za, rho);
    auto ob = fb(zb, rho);
    ASSERT_LE(norm(oa.next.primary - ob.next.primary), kTol) << "iteration " << i;
    za = oa.next;
    zb = ob.next;
  }
}

// sigma = 1/tau and identity coupling: the s = x - tau u change of variable
// maps the primal-dual iteration onto Douglas-Rachford.
TEST(Equivalence, CpRevertsToDr) {
  Setup s(2, 12);
  const double tau = 0.8;
  auto cp = make_cp_step(s.f_l1, s.g_l1, LinOp::identity(s.n), tau, 1.0 / tau, PdForm::I);
  auto dr = make_dr_step(s.f_l1, s.g_l1, tau);
  IterState zc = state_of(s.x0, {0.3 * s.x0});
  IterState zd = state_of(axpy(-tau, zc.duals[0], s.x0));
  const double rho = 1.6;
  for (int i = 0; i < kIters; ++i) {
    auto oc = cp(zc, rho);
    auto od = dr(zd, rho);
    ASSERT_LE(norm(oc.half.primary - aux_block(od.half, "x_half")), kTol);
    ASSERT_LE(norm(axpy(-tau, oc.next.duals[0], oc.next.primary) - od.next.primary),
              kTol);
    zc = oc.next;
    zd = od.next;
  }
}

TEST(Equivalence, CvRevertsToCpWithoutSmoothTerm) {
  Setup s(3);
  const double tau = 0.6, sigma = 0.4;
  for (auto form : {PdForm::I, PdForm::II}) {
    auto cv = make_cv_step(s.f_l1, s.g_l1, s.L, Fun::zero(), tau, sigma, form);
    auto cp = make_cp_step(s.f_l1, s.g_l1, s.L, tau, sigma, form);
    IterState za = state_of(s.x0, {s.u0});
    IterState zb = za;
    for (int i = 0; i < kIters; ++i) {
      auto oa = cv(za, 1.5);
      auto ob = cp(zb, 1.5);
      ASSERT_LE(norm(oa.next.primary - ob.next.primary), kTol);
      ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
      za = oa.next;
      zb = ob.next;
    }
  }
}

// PD3O degenerations: h = 0 gives Chambolle-Pock (s = x - tau L* u), f = 0
// gives Loris-Verhoeven (s plays x), and L = Id with sigma = 1/tau gives
// Davis-Yin on the s variable alone.
TEST(Equivalence, Pd3oDegenerations) {
  Setup s(4);
  {  // -> CP
    const double tau = 0.7, sigma = 0.5, rho = 1.7;
    auto pd = make_pd3o_step(s.f_l1, s.g_l1, s.L, Fun::zero(), tau, sigma);
    auto cp = make_cp_step(s.f_l1, s.g_l1, s.L, tau, sigma, PdForm::I);
    IterState zp = state_of(axpy(-tau, s.L.adjoint(s.u0), s.x0), {s.u0});
    IterState zc = state_of(s.x0, {s.u0});
    for (int i = 0; i < kIters; ++i) {
      auto op = pd(zp, rho);
      auto oc = cp(zc, rho);
      ASSERT_LE(norm(aux_block(op.half, "x_half") - oc.half.primary), kTol);
      ASSERT_LE(norm(op.next.duals[0] - oc.next.duals[0]), kTol);
      zp = op.next;
      zc = oc.next;
    }
  }
  {  // -> LV
    const double tau = 0.9 / s.beta, sigma = 0.4, rho = 1.3;
    auto pd = make_pd3o_step(Fun::zero(), s.g_l1, s.L, s.h, tau, sigma);
    auto lv = make_lv_step(s.g_l1, s.L, s.h, tau, sigma);
    IterState zp = state_of(s.x0, {s.u0});
    IterState zl = zp;
    for (int i = 0; i < kIters; ++i) {
      auto op = pd(zp, rho);
      auto ol = lv(zl, rho);
      ASSERT_LE(norm(op.next.primary - ol.next.primary), kTol);
      ASSERT_LE(norm(op.next.duals[0] - ol.next.duals[0]), kTol);
      zp = op.next;
      zl = ol.next;
    }
  }
  {  // -> DY
    const double tau = 0.8 / s.beta, rho = 1.4;
    auto pd = make_pd3o_step(s.f_l1, s.g_l1, LinOp::identity(s.n), s.h, tau, 1.0 / tau);
    auto dy = make_dy_step(s.f_l1, s.g_l1, s.h, tau);
    IterState zp = state_of(s.x0, {0.2 * s.x0});
    IterState zd = state_of(s.x0);
    for (int i = 0; i < kIters; ++i) {
      auto op = pd(zp, rho);
      auto od = dy(zd, rho);
      ASSERT_LE(norm(op.next.primary - od.next.primary), kTol);
      zp = op.next;
      zd = od.next;
    }
  }
}

TEST(Equivalence, PdfpRevertsToLvWithoutF) {
  Setup s(5);
  const double tau = 0.8 / s.beta, sigma = 0.3, rho = 1.2;
  auto pf = make_pdfp_step(Fun::zero(), s.g_l1, s.L, s.h, tau, sigma);
  auto lv = make_lv_step(s.g_l1, s.L, s.h, tau, sigma);
  IterState za = state_of(s.x0, {s.u0});
  IterState zb = za;
  for (int i = 0; i < kIters; ++i) {
    auto oa = pf(za, rho);
    auto ob = lv(zb, rho);
    ASSERT_LE(norm(oa.next.primary - ob.next.primary), kTol);
    ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
    za = oa.next;
    zb = ob.next;
  }
}

// PDFP with f = (beta_f/2)||.||^2 and step tau' equals Loris-Verhoeven on
// the shifted smooth term h + f with tau = tau'/(1 + tau' beta_f).
TEST(Equivalence, PdfpQuadraticReparameterizesToLv) {
  Setup s(6);
  const double beta_f = 1.7;
  const double tau_p = 0.5 / (s.beta + beta_f);
  const double tau = tau_p / (1.0 + tau_p * beta_f);
  const double sigma = 0.3, rho = 1.3;
  auto pf = make_pdfp_step(Fun::squared_l2(beta_f), s.g_l1, s.L, s.h, tau_p, sigma);
  // h' = h + (beta_f/2)||.||^2
  proxsplit::detail::Matrix qm =
      proxsplit::detail::materialize(s.h.quadratic_op(s.n));
  qm.diagonal().array() += beta_f;
  std::vector<double> qv(qm.data(), qm.data() + qm.size());
  Fun h_shift = Fun::quadratic(
      certified(LinOp::dense(s.n, s.n, qv, "Q+betaI")), s.h.quadratic_lin(s.n));
  auto lv = make_lv_step(s.g_l1, s.L, h_shift, tau, sigma);
  IterState za = state_of(s.x0, {s.u0});
  IterState zb = za;
  for (int i = 0; i < kIters; ++i) {
    auto oa = pf(za, rho);
    auto ob = lv(zb, rho);
    ASSERT_LE(norm(oa.next.primary - ob.next.primary), kTol);
    ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
    za = oa.next;
    zb = ob.next;
  }
}

// K = Id, eta = 1/tau: generalized form recovers Chambolle-Pock form I on
// f + <., c>, whatever the v start.
TEST(Equivalence, GcpRevertsToCp) {
  Setup s(7);
  std::mt19937_64 rng(77);
  Vec c = testsupport::random_vec(rng, s.n);
  const double tau = 0.7, sigma = 0.4, rho = 1.5;
  auto gcp = make_gcp_step(s.f_l1, LinOp::identity(s.n), s.g_l1, s.L, c, tau, sigma,
                           1.0 / tau);
  Fun f_shift = Fun::custom(
      [f = s.f_l1, c](double t, const Vec& w) { return prox(f, t, axpy(-t, c, w)).point; },
      s.n, nullptr, nullptr, true, "f-with-linear-drift");
  auto cp = make_cp_step(f_shift, s.g_l1, s.L, tau, sigma, PdForm::I);
  IterState zg = state_of(s.x0, {s.u0, testsupport::random_vec(rng, s.n)});
  IterState zc = state_of(s.x0, {s.u0});
  for (int i = 0; i < kIters; ++i) {
    auto og = gcp(zg, rho);
    auto oc = cp(zc, rho);
    ASSERT_LE(norm(og.next.primary - oc.next.primary), kTol);
    ASSERT_LE(norm(og.next.duals[0] - oc.next.duals[0]), kTol);
    zg = og.next;
    zc = oc.next;
  }
}

// g = (1/2)||.||^2 with sigma = 1 and u0 = L x0: the u block stays equal to
// L x and the iteration collapses to Loris-Verhoeven on f(K.) + h with
// Q = L^T L.
TEST(Equivalence, GcpQuadraticRevertsToLv) {
  Setup s(8);
  std::mt19937_64 rng(88);
  LinOp K = certified(testsupport::random_dense(rng, 6, s.n, 0.6));
  Vec c = testsupport::random_vec(rng, s.n);
  const double tau = 0.2, eta = 0.3, rho = 1.2;
  auto gcp = make_gcp_step(s.f_l1, K, Fun::squared_l2(1.0), s.L, c, tau, 1.0, eta);
  proxsplit::detail::Matrix qm = proxsplit::detail::materialize(gram(s.L));
  std::vector<double> qv(qm.data(), qm.data() + qm.size());
  Fun h_lv = Fun::quadratic(certified(LinOp::dense(s.n, s.n, qv, "LtL")), c);
  auto lv = make_lv_step(s.f_l1, K, h_lv, tau, eta);
  IterState zg = state_of(s.x0, {s.L.apply(s.x0), s.u0.dim() == 6 ? s.u0 : Vec(6)});
  IterState zl = state_of(s.x0, {Vec(6)});
  zg.duals[1] = Vec(6);
  for (int i = 0; i < kIters; ++i) {
    auto og = gcp(zg, rho);
    auto ol = lv(zl, rho);
    ASSERT_LE(norm(og.next.primary - ol.next.primary), kTol) << i;
    ASSERT_LE(norm(og.next.duals[1] - ol.next.duals[0]), kTol) << i;
    // the u block tracks L x throughout
    ASSERT_LE(norm(og.next.duals[0] - s.L.apply(og.next.primary)), kTol) << i;
    zg = og.next;
    zl = ol.next;
  }
}

// The proximal method of multipliers is simultaneously a Chambolle-Pock run
// on f = <., c> and a Loris-Verhoeven run on h = <., c>.
TEST(Equivalence, PmmEqualsCpEqualsLv) {
  Setup s(9);
  std::mt19937_64 rng(99);
  Vec c = testsupport::random_vec(rng, s.n);
  const double tau = 0.3, sigma = 0.4, rho = 1.6;
  auto pmm = make_pmm_step(s.g_l1, s.L, c, tau, sigma);
  auto cp = make_cp_step(Fun::linear(c), s.g_l1, s.L, tau, sigma, PdForm::I);
  auto lv = make_lv_step(s.g_l1, s.L, Fun::linear(c), tau, sigma);
  IterState zp = state_of(s.x0, {s.u0});
  IterState zc = zp;
  IterState zl = state_of(axpy(-tau, s.L.adjoint(s.u0) + c, s.x0), {s.u0});
  for (int i = 0; i < kIters; ++i) {
    auto op = pmm(zp, rho);
    auto oc = cp(zc, rho);
    auto ol = lv(zl, rho);
    ASSERT_LE(norm(op.next.primary - oc.next.primary), kTol);
    ASSERT_LE(norm(op.next.duals[0] - oc.next.duals[0]), kTol);
    ASSERT_LE(norm(op.next.duals[0] - ol.next.duals[0]), kTol);
    // LV's primal is the shifted PMM primal
    Vec shift = axpy(-tau, s.L.adjoint(op.next.duals[0]) + c, op.next.primary);
    ASSERT_LE(norm(shift - ol.next.primary), kTol);
    zp = op.next;
    zc = oc.next;
    zl = ol.next;
  }
}

// variable correspondence s = w - v~: identical primal half steps
TEST(Equivalence, AdmmMatchesDr) {
  Setup s(10);
  std::mt19937_64 rng(110);
  Fun f = Fun::quadratic(certified(testsupport::random_psd(rng, s.n, 0.2)),
                         testsupport::random_vec(rng, s.n));
  const double tau = 0.9;
  auto admm = make_admm_step(f, s.g_l1, tau);
  auto dr = make_dr_step(f, s.g_l1, tau);
  Vec w0 = testsupport::random_vec(rng, s.n);
  Vec v0 = testsupport::random_vec(rng, s.n);
  IterState za = state_of(w0, {v0});
  IterState zd = state_of(w0 - v0);
  RhoSchedule rho([](int i) { return i % 2 == 0 ? 1.8 : 0.7; });
  for (int i = 0; i < kIters; ++i) {
    auto oa = admm(za, rho.at(i));
    auto od = dr(zd, rho.at(i));
    ASSERT_LE(norm(aux_block(oa.half, "x_half") - aux_block(od.half, "x_half")), kTol);
    ASSERT_LE(norm((oa.next.primary - oa.next.duals[0]) - od.next.primary), kTol);
    za = oa.next;
    zd = od.next;
  }
}

// Self-duality: the same iteration on (f*(-.), g*, 1/tau) started at
// s~ = -s/tau stays the exact mirror of the primal run.
TEST(Equivalence, DrSelfDuality) {
  Setup s(11);
  const double tau = 0.7, rho = 1.5;
  Fun f = s.f_l1;
  Fun g = Fun::box(std::vector<double>(s.n, -1.0), std::vector<double>(s.n, 2.0));
  auto primal = make_dr_step(f, g, tau);
  auto dual = make_dr_step(conjugate_negated(f), conjugate_of(g), 1.0 / tau);
  IterState zp = state_of(s.x0);
  IterState zd = state_of((-1.0 / tau) * s.x0);
  for (int i = 0; i < kIters; ++i) {
    auto op = primal(zp, rho);
    auto od = dual(zd, rho);
    ASSERT_LE(norm(od.next.primary - (-1.0 / tau) * op.next.primary), kTol) << i;
    zp = op.next;
    zd = od.next;
  }
}

// buffered and plain forms produce the same trajectories
TEST(Equivalence, BufferedFormsMatchPlainForms) {
  Setup s(12);
  {  // lv
    const double tau = 0.8 / s.beta, sigma = 0.35, rho = 1.3;
    auto plain = make_lv_step(s.g_l1, s.L, s.h, tau, sigma);
    auto buf = make_lv_step(s.g_l1, s.L, s.h, tau, sigma, /*buffered=*/true);
    IterState zp = state_of(s.x0, {s.u0});
    IterState zb = state_of(s.x0, {s.u0}, {{"l", s.L.adjoint(s.u0)}});
    // single-step agreement is at rounding level
    auto o1 = plain(zp, rho);
    auto o2 = buf(zb, rho);
    EXPECT_LE(norm(o1.next.primary - o2.next.primary), 1e-15 * (1.0 + norm(s.x0)));
    for (int i = 0; i < kIters; ++i) {
      auto oa = plain(zp, rho);
      auto ob = buf(zb, rho);
      ASSERT_LE(norm(oa.next.primary - ob.next.primary), kTol);
      ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
      zp = oa.next;
      zb = ob.next;
    }
  }
  {  // gcp efficient
    std::mt19937_64 rng(121);
    LinOp K = certified(testsupport::random_dense(rng, 6, s.n, 0.6));
    Vec c = testsupport::random_vec(rng, s.n);
    const double tau = 0.4, sigma = 0.3, eta = 0.25, rho = 1.4;
    auto plain = make_gcp_step(s.f_l1, K, s.g_l1, s.L, c, tau, sigma, eta);
    auto eff = make_gcp_step(s.f_l1, K, s.g_l1, s.L, c, tau, sigma, eta,
                             /*efficient=*/true);
    Vec v0 = testsupport::random_vec(rng, 6);
    IterState zp = state_of(s.x0, {s.u0, v0});
    IterState ze = state_of((1.0 / tau) * s.x0, {s.u0, v0},
                            {{"b", K.adjoint(v0)}, {"lu", s.L.adjoint(s.u0)}});
    for (int i = 0; i < kIters; ++i) {
      auto oa = plain(zp, rho);
      auto ob = eff(ze, rho);
      ASSERT_LE(norm(oa.next.primary - tau * ob.next.primary), kTol) << i;
      ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
      ASSERT_LE(norm(oa.next.duals[1] - ob.next.duals[1]), kTol);
      zp = oa.next;
      ze = ob.next;
    }
  }
  {  // pd3o compact
    const double tau = 0.8 / s.beta, sigma = 0.4, rho = 1.4;
    auto plain = make_pd3o_step(s.f_l1, s.g_l1, s.L, s.h, tau, sigma);
    auto compact = make_pd3o_step(s.f_l1, s.g_l1, s.L, s.h, tau, sigma,
                                  /*compact=*/true);
    Vec s0 = s.x0;
    Vec lu0 = s.L.adjoint(s.u0);
    IterState zp = state_of(s0, {s.u0});
    IterState zc = state_of(axpy(tau, lu0, s0), {s.u0}, {{"lu", lu0}});
    for (int i = 0; i < kIters; ++i) {
      auto oa = plain(zp, rho);
      auto ob = compact(zc, rho);
      Vec s_from_compact = axpy(-tau, aux_block(ob.next, "lu"), ob.next.primary);
      ASSERT_LE(norm(oa.next.primary - s_from_compact), kTol) << i;
      ASSERT_LE(norm(oa.next.duals[0] - ob.next.duals[0]), kTol);
      ASSERT_LE(norm(aux_block(oa.half, "x_half") - aux_block(ob.half, "x_half")), kTol);
      zp = oa.next;
      zc = ob.next;
    }
  }
}

// Q = 0 reduces the quadratic primal-dual splitting to the Chambolle-Pock
// iteration under s = x - tau L* u (the linear drift moves into f).
TEST(Equivalence, PddrRevertsToCpWhenQVanishes) {
  Setup s(13);
  std::mt19937_64 rng(131);
  Vec c = testsupport::random_vec(rng, s.n);
  const double tau = 0.7, sigma = 0.3, rho = 1.5;
  auto pddr = make_pddr_quad_step(s.f_l1, s.g_l1, s.L, LinOp::zero(s.n, s.n), c, tau,
                                  sigma, PdForm::I);
  Fun f_shift = Fun::custom(
      [f = s.f_l1, c](double t, const Vec& w) { return prox(f, t, axpy(-t, c, w)).point; },
      s.n, nullptr, nullptr, true, "f-with-linear-drift");
  auto cp = make_cp_step(f_shift, s.g_l1, s.L, tau, sigma, PdForm::I);
  IterState zq = state_of(axpy(-tau, s.L.adjoint(s.u0), s.x0), {s.u0});
  IterState zc = state_of(s.x0, {s.u0});
  for (int i = 0; i < kIters; ++i) {
    auto oq = pddr(zq, rho);
    auto oc = cp(zc, rho);
    ASSERT_LE(norm(aux_block(oq.half, "x_half") - oc.half.primary), kTol) << i;
    ASSERT_LE(norm(oq.next.duals[0] - oc.next.duals[0]), kTol);
    zq = oq.next;
    zc = oc.next;
  }
}
