/*
 * Per-element geometry and lowest-order Whitney forms on tetrahedra and
 * triangles. Edge functions carry unit circulation on their own edge, face
 * functions unit flux through their own face, both with the global
 * orientation of mesh.hpp; with that choice curl w_e = sum_f C(f,e) w_f.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>

#include "dga/geometry.hpp"
#include "dga/mesh.hpp"

namespace dga {

struct tet_element
{
    std::array<vec3, 4> x;
    double volume = 0.0;
    std::array<vec3, 4> grad; /* gradients of the barycentric coordinates */

    /* local node pairs ordered by global index, indexed like local_edges */
    std::array<std::array<int, 2>, 6> edge_nodes;
    /* local node triples ordered by global index, indexed like local_faces */
    std::array<std::array<int, 3>, 4> face_nodes;

    std::array<double, 4> barycentric(const vec3& p) const
    {
        std::array<double, 4> l;
        for (int i = 0; i < 4; i++)
            l[i] = 0.25 + grad[i].dot(p - centroid());
        return l;
    }

    vec3 centroid() const { return (x[0] + x[1] + x[2] + x[3]) / 4.0; }

    vec3 edge_vector(int k) const { return x[edge_nodes[k][1]] - x[edge_nodes[k][0]]; }

    vec3 edge_basis(int k, const std::array<double, 4>& l) const
    {
        auto [a, b] = edge_nodes[k];
        return l[a] * grad[b] - l[b] * grad[a];
    }

    vec3 edge_curl(int k) const
    {
        auto [a, b] = edge_nodes[k];
        return 2.0 * grad[a].cross(grad[b]);
    }

    vec3 face_basis(int k, const std::array<double, 4>& l) const
    {
        auto [a, b, c] = face_nodes[k];
        return 2.0 * (l[a] * grad[b].cross(grad[c]) + l[b] * grad[c].cross(grad[a]) +
                      l[c] * grad[a].cross(grad[b]));
    }

    /* Field reconstructed from the six edge EMFs. */
    template<typename Dofs>
    cvec3 field(const Dofs& u, const vec3& p) const
    {
        auto l = barycentric(p);
        cvec3 e = cvec3::Zero();
        for (int k = 0; k < 6; k++)
            e += u[k] * edge_basis(k, l).cast<cplx>();
        return e;
    }

    template<typename Dofs>
    cvec3 curl(const Dofs& u) const
    {
        cvec3 c = cvec3::Zero();
        for (int k = 0; k < 6; k++)
            c += u[k] * edge_curl(k).cast<cplx>();
        return c;
    }
};

inline tet_element make_tet_element(const tet_mesh& msh, std::size_t t)
{
    tet_element el;
    const auto& n = msh.tets[t];
    el.x = msh.tet_points(t);
    el.volume = signed_volume(el.x[0], el.x[1], el.x[2], el.x[3]);

    mat3 J;
    J.col(0) = el.x[1] - el.x[0];
    J.col(1) = el.x[2] - el.x[0];
    J.col(2) = el.x[3] - el.x[0];
    mat3 Jinv = J.inverse();
    for (int i = 0; i < 3; i++)
        el.grad[i + 1] = Jinv.row(i).transpose();
    el.grad[0] = -(el.grad[1] + el.grad[2] + el.grad[3]);

    for (int k = 0; k < 6; k++)
    {
        auto a = local_edges[k][0], b = local_edges[k][1];
        el.edge_nodes[k] = n[a] < n[b] ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
    }
    for (int k = 0; k < 4; k++)
    {
        auto f = local_faces[k];
        std::sort(f.begin(), f.end(), [&](int i, int j) { return n[i] < n[j]; });
        el.face_nodes[k] = f;
    }
    return el;
}

/* Local face-edge incidence (4x6) consistent with the global C. */
inline Eigen::Matrix<double, 4, 6> local_curl_incidence(const tet_element& el)
{
    Eigen::Matrix<double, 4, 6> C = Eigen::Matrix<double, 4, 6>::Zero();
    for (int f = 0; f < 4; f++)
    {
        auto [a, b, c] = el.face_nodes[f];
        const std::array<std::array<int, 2>, 3> fe{{{a, b}, {b, c}, {a, c}}};
        for (int k = 0; k < 3; k++)
            for (int e = 0; e < 6; e++)
                if (el.edge_nodes[e] == fe[k])
                    C(f, e) = topology::face_edge_signs[k];
    }
    return C;
}

struct tri_element
{
    std::array<vec3, 3> x; /* sorted by global node index */
    double area = 0.0;
    vec3 normal;           /* (x1-x0)x(x2-x0), unit */
    std::array<vec3, 3> grad; /* surface gradients of the barycentric coordinates */

    /* tangential edge function for the face edges (0,1), (1,2), (0,2) */
    static constexpr std::array<std::array<int, 2>, 3> edge_nodes{{{0, 1}, {1, 2}, {0, 2}}};

    vec3 point(const std::array<double, 3>& l) const { return l[0] * x[0] + l[1] * x[1] + l[2] * x[2]; }

    vec3 edge_basis(int k, const std::array<double, 3>& l) const
    {
        auto [a, b] = edge_nodes[k];
        return l[a] * grad[b] - l[b] * grad[a];
    }

    vec3 centroid() const { return (x[0] + x[1] + x[2]) / 3.0; }
};

inline tri_element make_tri_element(const tet_mesh& msh, const topology& top, std::size_t f)
{
    tri_element el;
    const auto& n = top.faces[f];
    for (int i = 0; i < 3; i++)
        el.x[i] = msh.nodes[n[i]];
    vec3 cr = (el.x[1] - el.x[0]).cross(el.x[2] - el.x[0]);
    el.area = 0.5 * cr.norm();
    el.normal = cr.normalized();
    const double s = 1.0 / (2.0 * el.area);
    el.grad[0] = s * el.normal.cross(el.x[2] - el.x[1]);
    el.grad[1] = s * el.normal.cross(el.x[0] - el.x[2]);
    el.grad[2] = s * el.normal.cross(el.x[1] - el.x[0]);
    return el;
}

} // namespace dga
