#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/LU>

#include "fixtures.hpp"
#include "memliou/effective_dynamics.hpp"
#include "memliou/errors.hpp"

using namespace memliou;

namespace {

// Dense full-space oracle for [z - L_Q]^{-1} on image(Q): (z 1 - Q L Q) is
// invertible on the whole space (it acts as multiplication by z on image(P))
// and maps image(Q) to image(Q), so a plain LU solve is an independent check.
Matrix q_resolvent_dense(const ModelPipeline& pipe, Complex z) {
  Matrix a = -pipe.pq.q * pipe.l_tot * pipe.pq.q;
  a.diagonal().array() += z;
  return a.partialPivLu().inverse();
}

}  // namespace

TEST_CASE("q_propagate matches the dense oracle") {
  for (const char* name : {"QB3", "GENERIC"}) {
    const ModelPipeline pipe = build_pipeline(catalog_model(name));
    const Index dim = pipe.l_tot.rows();
    const Matrix inv = q_resolvent_dense(pipe, Complex(0.4, 0.1));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const Vector y = pipe.pq.q * memtest::random_vector(dim, 1000 + seed);
      const Vector expected = inv * y;
      const Vector got = pipe.solver.q_propagate(Complex(0.4, 0.1), y);
      CHECK((got - expected).norm() <= 1e-10 * expected.norm());
    }
  }
}

TEST_CASE("q_propagate rejects inputs with a projector-image component") {
  const ModelPipeline pipe = build_pipeline(catalog_model("QB3"));
  const Vector y = vec(embed_with_env(memtest::random_density(2, 3), pipe.pq.rho_env));
  CHECK_THROWS_AS(pipe.solver.q_propagate(Complex(0.0, 0.5), y), NumericalError);
}

TEST_CASE("effective generator matches the dense composition") {
  for (const char* name : {"QB3", "GENERIC", "DECOUPLED"}) {
    const ModelPipeline pipe = build_pipeline(catalog_model(name));
    for (Complex z : {Complex(0.0, 0.05), Complex(-1.3, 0.4), Complex(2.0, 1.0)}) {
      const Matrix inv = q_resolvent_dense(pipe, z);
      const Matrix l_pr = pipe.bd.restrict_map * pipe.l_tot * pipe.bd.embed_map;
      const Matrix memory = pipe.bd.restrict_map *
                            (pipe.l_tot * (inv * (pipe.pq.q * (pipe.l_tot * pipe.bd.embed_map))));
      const Matrix expected = l_pr + memory;
      const EffectiveLiouvilleEval eval = pipe.solver.effective_liouville(z);
      CHECK(max_abs(eval.l_eff - expected) <= 1e-10 * std::max(1.0, max_abs(expected)));
      CHECK(eval.condition >= 1.0);
    }
  }
}

TEST_CASE("first memory moment") {
  const ModelPipeline pipe = build_pipeline(catalog_model("QB3"));
  const Matrix expected =
      pipe.bd.restrict_map * (pipe.l_tot * (pipe.pq.q * (pipe.l_tot * pipe.bd.embed_map)));
  CHECK(max_abs(pipe.solver.memory_first_moment() - expected) <= 1e-10);
}

TEST_CASE("memory term scales quadratically with the coupling strength") {
  CompositeModel base = catalog_model("QB3");
  CompositeModel half = base;
  half.couplings[0].system_op *= 0.5;
  const Matrix m1 = build_pipeline(base).solver.memory_first_moment();
  const Matrix m2 = build_pipeline(half).solver.memory_first_moment();
  CHECK(max_abs(m2 * 4.0 - m1) <= 1e-10 * max_abs(m1));
}

TEST_CASE("initial shift matches the dense route and vanishes for product states") {
  const ModelPipeline bell = build_pipeline(memtest::bell_model());
  const Complex z(0.7, 0.2);
  const Matrix inv = q_resolvent_dense(bell, z);
  const Matrix expected =
      unvec(bell.bd.restrict_map * (bell.l_tot * (inv * bell.delta_corr)), 2);
  CHECK(max_abs(bell.solver.initial_shift(z, bell.delta_corr) - expected) <= 1e-10);

  const ModelPipeline qb3 = build_pipeline(catalog_model("QB3"));
  for (Complex zz : {Complex(0.0, 0.02), Complex(1.0, 0.5)})
    CHECK(max_abs(qb3.solver.initial_shift(zz, qb3.delta_corr)) <= 1e-12);
}

TEST_CASE("reduced state equals the restriction of the full resolvent") {
  // rho(z) from the effective generator vs i R [z - L_tot]^{-1} vec(rho_tot0)
  for (const CompositeModel& m : {memtest::bell_model(), memtest::qb3_correlated()}) {
    const ModelPipeline pipe = build_pipeline(m);
    const Vector rho_tot0 = vec(build_initial_total(m));
    for (Complex z : {Complex(0.0, 0.05), Complex(-0.8, 0.3), Complex(1.7, 1.0)}) {
      const Matrix expected =
          unvec(Complex(0, 1) * (pipe.bd.restrict_map * (full_resolvent(pipe.l_tot, z) * rho_tot0)),
                m.d_system);
      const FrequencyState state = pipe.solver.rho_z_at(z, pipe.rho_0, pipe.delta_corr);
      CHECK(max_abs(state.rho - expected) <= 1e-9 * std::max(1.0, max_abs(expected)));
      CHECK(std::abs(state.rho.trace() - Complex(0, 1) / z) <=
            1e-9 * std::max(1.0, std::abs(1.0 / z)));
    }
  }
}

TEST_CASE("resolvent identity residuals") {
  for (const char* name : {"QB3", "GENERIC", "DECOUPLED"}) {
    const ModelPipeline pipe = build_pipeline(catalog_model(name));
    for (Complex z : {Complex(0.3, 0.02), Complex(-2.0, 0.3), Complex(0.0, 1.0)}) {
      const ResolventCheck c = verify_resolvent_identities(pipe, z, 7);
      CHECK(c.r_embed <= 1e-8);
      CHECK(c.r_cross <= 1e-8);
      CHECK(c.trace_dev <= 1e-9 * std::max(1.0, std::abs(1.0 / z)));
      CHECK(c.left_zero_norm <= 1e-10);
    }
  }
}

TEST_CASE("free function forms agree with the solver") {
  const CompositeModel m = catalog_model("GENERIC", 3);
  const Matrix l = build_total_liouville(m);
  const ProjectorPair pq = build_projector_pair(m.rho_env, m.d_system, m.d_env);
  const BlockDecomposition bd = decompose_liouville(l, pq);
  const QImageBasis qb = q_image_basis(pq);
  const FrequencySolver solver(bd, qb);
  const Complex z(0.1, 0.25);

  CHECK(max_abs(effective_liouville(bd, qb, z).l_eff - solver.effective_liouville(z).l_eff) ==
        0.0);
  const Vector y = pq.q * memtest::random_vector(l.rows(), 321);
  CHECK((q_propagate(bd, qb, z, y) - solver.q_propagate(z, y)).norm() == 0.0);
}

TEST_CASE("evaluations below the upper-half-plane floor are rejected") {
  const ModelPipeline pipe = build_pipeline(catalog_model("QB3"));
  CHECK_THROWS_AS(pipe.solver.effective_liouville(Complex(0.5, 0.0)), NumericalError);
  CHECK_THROWS_AS(pipe.solver.effective_liouville(Complex(0.5, -0.1)), NumericalError);
  CHECK_THROWS_AS(pipe.solver.rho_z_at(Complex(0.5, 1e-12), pipe.rho_0, pipe.delta_corr),
                  NumericalError);
}

TEST_CASE("near-pole evaluations throw instead of returning garbage") {
  // Large energy scales push the condition number of [z - L_Q] past the guard
  // when z sits essentially on an eigenvalue.
  CompositeModel m = catalog_model("GENERIC", 1);
  m.h_system *= 4.0e4;
  m.h_env *= 4.0e4;
  for (auto& c : m.couplings) {
    c.system_op *= 4.0e4;
    c.env_op *= 1.0;
  }
  const ModelPipeline pipe = build_pipeline(m);
  // a_qq is hermitian here (orthogonal projector), so its spectrum is real;
  // park z a hair above one of its eigenvalues.
  const Matrix a_qq =
      pipe.solver.basis().adjoint() * (pipe.bd.l_q * pipe.solver.basis());
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a_qq + a_qq.adjoint()));
  double lam = 0.0;
  for (Index k = 0; k < es.eigenvalues().size(); ++k)
    lam = std::max(lam, std::abs(es.eigenvalues()(k)));
  bool threw = false;
  try {
    pipe.solver.effective_liouville(Complex(lam, 1e-9));
  } catch (const NearPoleError& e) {
    threw = true;
    CHECK(e.condition > 1e10);
  }
  CHECK(threw);
}

TEST_CASE("frequency grid sweep") {
  const ModelPipeline pipe = build_pipeline(catalog_model("QB3"));
  std::vector<Complex> zs;
  for (int j = 0; j < 8; ++j) zs.push_back(Complex(-2.0 + 0.5 * j, 0.1));
  const auto pts = sweep_frequency_grid(pipe, zs, Exec::Serial);
  REQUIRE(pts.size() == zs.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    CHECK(pts[j].z == zs[j]);
    CHECK(std::abs(pts[j].rho.trace() - Complex(0, 1) / zs[j]) <= 1e-9 * 10.0);
    REQUIRE(pts[j].l_eff_eigenvalues.size() == 4);
    // sorted by |Im| ascending
    for (Index k = 1; k < 4; ++k)
      CHECK(std::abs(pts[j].l_eff_eigenvalues(k - 1).imag()) <=
            std::abs(pts[j].l_eff_eigenvalues(k).imag()) + 1e-15);
  }

  const auto checks = verify_grid(pipe, zs, 99, Exec::Serial);
  for (const auto& c : checks) {
    CHECK(c.r_embed <= 1e-8);
    CHECK(c.r_cross <= 1e-8);
  }
}
