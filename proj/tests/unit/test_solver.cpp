#include <atomic>
#include <stdexcept>

#include <gtest/gtest.h>

#include "dga/parallel.hpp"
#include "dga/solver.hpp"

#include "../common/fixtures.hpp"
#include "../common/plane_wave_box.hpp"

using namespace dga;
using namespace dga::testing;

namespace {

const material_map vacuum_map{{1, material_table::vacuum()}};

assembled_system lossy_box_system(const tet_mesh& m, const topology& top, std::span<const cvector> src,
                                  double f = 2e8)
{
    std::vector<admittance_spec> walls;
    for (int tag = 1; tag <= 6; tag++)
        walls.push_back({select_surface(top, tag, m), 1.0 / eta0, std::nullopt});
    return assemble(m, top, vacuum_map, walls, {}, src, f);
}

} // namespace

TEST(assemble, no_sources_zero_rhs)
{
    auto m = box_mesh(vec3::Zero(), vec3::Ones(), {2, 2, 2});
    auto top = build_topology(m);
    auto sys = lossy_box_system(m, top, {});
    EXPECT_TRUE(sys.rhs.isZero(0.0));
    EXPECT_TRUE(solve(sys).isZero(0.0));
}

TEST(assemble, complex_symmetric)
{
    generator g(9);
    auto m = jittered_box(4, 0.3, g);
    auto top = build_topology(m);
    auto sys = lossy_box_system(m, top, {});
    EXPECT_LT(relative_asymmetry(sys.A), 1e-12);
    EXPECT_LT(relative_asymmetry(sys.K), 1e-12);
}

TEST(assemble, single_tet_equals_element_system)
{
    auto m = unit_tet();
    auto top = build_topology(m);
    material_map mm{{1, material_table::constant("d", cplx(2.5, -0.3), cplx(1.5, 0.0))}};
    auto sys = assemble(m, top, mm, {}, {}, {}, 1.5e8);
    auto Kv = element_system(m, 0, {cplx(2.5, -0.3), cplx(1.5, 0.0)}, sys.omega);
    Eigen::MatrixXcd A(sys.A);
    for (int i = 0; i < 6; i++)
        for (int j = 0; j < 6; j++)
            EXPECT_NEAR(std::abs(A(top.tet_edges[0][i], top.tet_edges[0][j]) - Kv(i, j)), 0.0,
                        1e-14 * Kv.cwiseAbs().maxCoeff());
}

TEST(assemble, source_size_checked)
{
    auto m = unit_tet();
    auto top = build_topology(m);
    std::vector<cvector> bad{cvector::Zero(3)};
    EXPECT_THROW(assemble(m, top, vacuum_map, {}, {}, bad, 1e8), config_error);
}

TEST(solve, linear_in_rhs)
{
    generator g(10);
    auto m = box_mesh(vec3::Zero(), vec3::Ones(), {3, 3, 3});
    auto top = build_topology(m);
    std::vector<cvector> src{g.cvec(top.num_edges())};
    auto sys = lossy_box_system(m, top, src);
    factorized_system fs(sys);
    auto u = fs.solve(sys.rhs);
    auto u2 = fs.solve(2.0 * sys.rhs);
    EXPECT_LT((u2 - 2.0 * u).norm(), 1e-10 * u.norm());
    EXPECT_LT(relative_residual(sys.A, u, sys.rhs), residual_tolerance);
    EXPECT_GT(fs.rcond(), 0.0);
}

TEST(solve, pec_dofs_pinned)
{
    generator g(12);
    auto m = box_mesh(vec3::Zero(), vec3::Ones(), {3, 3, 3});
    auto top = build_topology(m);
    std::vector<surface_selection> pec{select_surface(top, 5, m)};
    std::vector<admittance_spec> walls{{select_surface(top, 6, m), 1.0 / eta0, std::nullopt}};
    std::vector<cvector> src{g.cvec(top.num_edges())};
    auto sys = assemble(m, top, vacuum_map, walls, pec, src, 2e8);
    auto u = solve(sys);
    for (auto e : pec[0].edges)
        EXPECT_EQ(u(e), cplx(0.0));
    EXPECT_LT(relative_asymmetry(sys.A), 1e-12);
}

TEST(solve, singular_system_reported)
{
    auto m = box_mesh(vec3::Zero(), vec3::Ones(), {2, 2, 2});
    auto top = build_topology(m);
    auto sys = assemble(m, top, vacuum_map, {}, {}, {}, 1e8);
    /* rank-deficient: every row equals the first one */
    sparse_matrix S(sys.K.rows(), sys.K.cols());
    std::vector<Eigen::Triplet<cplx>> tr;
    for (Eigen::Index i = 0; i < S.rows(); i++)
        for (Eigen::Index j = 0; j < 3; j++)
            tr.emplace_back(i, j, 1.0);
    S.setFromTriplets(tr.begin(), tr.end());
    sys.A = S;
    EXPECT_THROW(factorized_system{sys}.solve(cvector::Ones(S.rows())), numerical_error);
}

TEST(probe, uniform_field_reproduced)
{
    generator g(13);
    auto m = jittered_box(3, 0.3, g);
    auto top = build_topology(m);
    point_locator loc(m);
    for (int rep = 0; rep < 10; rep++)
    {
        const cvec3 e0 = g.cpoint();
        cvector u(top.num_edges());
        for (std::size_t e = 0; e < top.num_edges(); e++)
            u(e) = tdot(e0, vec3(m.nodes[top.edges[e][1]] - m.nodes[top.edges[e][0]]));
        const vec3 p = g.point(0.05, 0.95);
        EXPECT_LT((probe_field(m, top, loc, u, p).E - e0).norm(), 1e-10 * e0.norm());
    }
}

TEST(probe, dbuv)
{
    EXPECT_NEAR(to_dbuv(1.0), 120.0, 1e-12);
    EXPECT_EQ(to_dbuv(0.0), dbuv_zero_sentinel);
    EXPECT_NEAR(to_dbuv(2.0) - to_dbuv(1.0), 6.0206, 1e-4);
}

TEST(probe, outside_mesh)
{
    auto m = unit_tet();
    auto top = build_topology(m);
    cvector u = cvector::Zero(6);
    EXPECT_THROW(probe_field(m, top, u, vec3(1, 1, 1)), domain_error);
}

TEST(probe, indexed_locator_agrees_with_scan)
{
    auto m = box_mesh(vec3::Zero(), vec3(2, 1, 1), {24, 12, 12});
    ASSERT_GT(m.num_tets(), point_locator::index_threshold);
    point_locator loc(m);
    generator g(14);
    for (int rep = 0; rep < 200; rep++)
    {
        vec3 p(g.uniform(0, 2), g.uniform(0, 1), g.uniform(0, 1));
        auto t = loc.locate(p);
        ASSERT_TRUE(t.has_value());
        auto l = make_tet_element(m, *t).barycentric(p);
        for (double v : l)
            EXPECT_GE(v, -1e-9);
    }
    EXPECT_FALSE(loc.locate(vec3(3, 0.5, 0.5)).has_value());
}

TEST(probe, node_spread_on_lambda_over_10_mesh)
{
    const double f = 3e8, lambda = c0 / f;
    auto box = make_plane_wave_box(vec3(lambda, lambda, 2.0 * lambda), lambda / 10.0, side_walls::symmetry);
    auto u = box.solve_port(box.port(f));
    /* an interior node: evaluate the field from every tet that owns it */
    std::size_t node = no_tet;
    for (std::size_t n = 0; n < box.msh.num_nodes(); n++)
        if ((box.msh.nodes[n] - vec3(0.5 * lambda, 0.5 * lambda, lambda)).norm() < 1e-9)
            node = n;
    ASSERT_NE(node, no_tet);
    double lo = 1e9, hi = 0.0;
    for (std::size_t t = 0; t < box.msh.num_tets(); t++)
        for (auto n : box.msh.tets[t])
            if (n == node)
            {
                auto el = make_tet_element(box.msh, t);
                const double a = el.field(tet_dofs(box.top, u, t), box.msh.nodes[node]).norm();
                lo = std::min(lo, a);
                hi = std::max(hi, a);
            }
    EXPECT_LT((hi - lo) / hi, 0.10);
}

TEST(solve, mirror_symmetry)
{
    /* Kuhn cubes are invariant under x <-> y; so is a box with equal x and y
     * extents and all walls matched */
    const double f = 3e8, lambda = c0 / f;
    auto box = make_plane_wave_box(vec3(lambda, lambda, lambda), lambda / 10.0, side_walls::matched);
    auto ux = box.solve_port(box.port(f, 1.0, vec3::UnitX()));
    auto uy = box.solve_port(box.port(f, 1.0, vec3::UnitY()));
    point_locator loc(box.msh);
    generator g(15);
    for (int rep = 0; rep < 20; rep++)
    {
        vec3 p = g.point(0.1, 0.9) * lambda;
        vec3 q(p(1), p(0), p(2));
        cvec3 a = probe_field(box.msh, box.top, loc, ux, p).E;
        cvec3 b = probe_field(box.msh, box.top, loc, uy, q).E;
        cvec3 bs(b(1), b(0), b(2));
        EXPECT_LT((a - bs).norm(), 0.01 * a.norm());
    }
}

TEST(solve, port_amplitude_linearity)
{
    const double f = 3e8, lambda = c0 / f;
    auto box = make_plane_wave_box(vec3(0.5, 0.5, 1.0) * lambda, lambda / 10.0, side_walls::symmetry);
    auto u1 = box.solve_port(box.port(f, 1.0));
    auto u2 = box.solve_port(box.port(f, cplx(0.0, 3.0)));
    EXPECT_LT((u2 - cplx(0.0, 3.0) * u1).norm(), residual_tolerance * 10.0 * u2.norm());
}

TEST(parallel, ordered_results_and_errors)
{
    std::vector<int> out(100, 0);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); i++)
        EXPECT_EQ(out[i], static_cast<int>(i * i));
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 4)
                                      throw numerical_error("boom");
                              }),
                 numerical_error);
}
