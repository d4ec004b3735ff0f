/*
 * Small meshes and seeded generators shared by the test binaries.
 */
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "dga/geometry.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/meshgen.hpp"

namespace dga::testing {

inline constexpr std::uint32_t default_seed = 20240917u;

/* Deterministic generator of random geometry for property tests. */
class generator
{
    std::mt19937_64 rng_;

public:
    explicit generator(std::uint64_t seed = default_seed) : rng_(seed) {}

    double uniform(double a = 0.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng_); }

    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    vec3 point(double a = -1.0, double b = 1.0) { return {uniform(a, b), uniform(a, b), uniform(a, b)}; }

    cvec3 cpoint(double a = -1.0, double b = 1.0)
    {
        cvec3 v;
        for (int i = 0; i < 3; i++)
            v(i) = {uniform(a, b), uniform(a, b)};
        return v;
    }

    cplx complex(double a = -1.0, double b = 1.0) { return {uniform(a, b), uniform(a, b)}; }

    /* Tet with volume bounded away from zero. */
    std::array<vec3, 4> tet()
    {
        for (;;)
        {
            std::array<vec3, 4> x{point(), point(), point(), point()};
            if (std::abs(signed_volume(x[0], x[1], x[2], x[3])) > 0.02)
                return x;
        }
    }

    cvector cvec(std::size_t n)
    {
        cvector v(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; i++)
            v(static_cast<Eigen::Index>(i)) = complex();
        return v;
    }
};

inline tet_mesh single_tet(const std::array<vec3, 4>& x, int face_tag = 1)
{
    tet_mesh m;
    m.nodes.assign(x.begin(), x.end());
    m.tets.push_back({0, 1, 2, 3});
    m.regions.push_back(1);
    m.faces = {{{1, 2, 3}, face_tag}, {{0, 2, 3}, face_tag}, {{0, 1, 3}, face_tag}, {{0, 1, 2}, face_tag}};
    validate_mesh(m);
    return m;
}

inline tet_mesh unit_tet(int face_tag = 1)
{
    return single_tet({vec3(0, 0, 0), vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1)}, face_tag);
}

/* Two tets sharing the face (0,1,2), apexes on opposite sides. */
inline tet_mesh two_tets(int face_tag = 1)
{
    tet_mesh m;
    m.nodes = {vec3(0, 0, 0), vec3(1, 0, 0), vec3(0, 1, 0), vec3(0.2, 0.3, 1.0), vec3(0.3, 0.2, -1.0)};
    m.tets = {{0, 1, 2, 3}, {0, 1, 2, 4}};
    m.regions = {1, 1};
    m.faces = {{{0, 1, 3}, face_tag}, {{1, 2, 3}, face_tag}, {{0, 2, 3}, face_tag},
               {{0, 1, 4}, face_tag}, {{1, 2, 4}, face_tag}, {{0, 2, 4}, face_tag}};
    validate_mesh(m);
    return m;
}

/* Box [lo, hi] of n^3 Kuhn cells with walls tagged 1..6. */
inline tet_mesh box_mesh(const vec3& lo, const vec3& hi, std::array<std::size_t, 3> n,
                         box_lattice lattice = box_lattice::kuhn)
{
    structured_box b;
    b.lattice = lattice;
    b.lo = lo;
    b.hi = hi;
    b.cells = n;
    b.wall_tags = {1, 2, 3, 4, 5, 6};
    return generate_box_mesh(b);
}

/* Nodes jittered by a fraction of the spacing, walls kept planar. */
inline tet_mesh jittered_box(std::size_t n, double amount, generator& g)
{
    auto m = box_mesh(vec3::Zero(), vec3::Ones(), {n, n, n});
    const double h = 1.0 / static_cast<double>(n);
    for (auto& p : m.nodes)
        for (int d = 0; d < 3; d++)
            if (p(d) > 1e-12 && p(d) < 1.0 - 1e-12)
                p(d) += g.uniform(-amount, amount) * h;
    validate_mesh(m);
    return m;
}

inline tet_mesh parse_string(const std::string& s)
{
    std::istringstream is(s);
    return load_mesh(is);
}

} // namespace dga::testing
