/*
 * Equivalent radiating sphere: total-field / scattered-field injection on a
 * closed interior surface Sigma.
 *
 * Omega_S is the inside of Sigma and carries the scattered field, Omega_T is
 * the outside and carries the total field. Sigma is closed, or open with its
 * rim on symmetry planes of the domain boundary. Edge unknowns on Sigma hold the
 * total field; an Omega_S tet therefore sees x - U_r on its Sigma edges,
 * where U_r are the EMFs of the radiated field along those edges. Moving the
 * known part to the right-hand side gives, per Omega_S tet v touching Sigma,
 *
 *     b^v = K^v U_r^v - i omega F_r^v,
 *
 * with F_r the magnetomotive forces of the radiated H on the boundary dual
 * half edges: for a Sigma face T and one of its edges e, the segment from
 * the barycenter of T to the midpoint of e. Tets touching Sigma only along
 * an edge get F_r^v = 0; tets touching it only at a node contribute nothing.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "dga/constants.hpp"
#include "dga/errors.hpp"
#include "dga/geometry.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/solver.hpp"
#include "dga/sources.hpp"
#include "dga/whitney.hpp"

namespace dga {

enum class sigma_contact { face, edge, vertex };

struct tfsf_interface
{
    surface_selection sigma;              /* closed, normals from Omega_S to Omega_T */
    std::vector<char> in_source_region;   /* per tet, 1 for Omega_S */
    std::vector<char> on_sigma;           /* per edge */
    std::vector<std::size_t> contact_tets; /* Omega_S tets sharing at least a node with Sigma */
    std::vector<sigma_contact> contact;   /* parallel to contact_tets */

    std::size_t num_source_tets() const
    {
        std::size_t n = 0;
        for (auto c : in_source_region)
            n += c ? 1 : 0;
        return n;
    }
};

namespace detail {

inline std::vector<char> flood_tets(const topology& top, std::size_t num_tets, const std::vector<std::size_t>& seeds,
                                    const std::vector<char>& barrier_face)
{
    std::vector<char> mark(num_tets, 0);
    std::queue<std::size_t> q;
    for (auto s : seeds)
        if (!mark[s])
        {
            mark[s] = 1;
            q.push(s);
        }
    while (!q.empty())
    {
        auto t = q.front();
        q.pop();
        for (auto f : top.tet_faces[t])
        {
            if (barrier_face[f])
                continue;
            for (auto n : top.face_tets[f])
                if (n != no_tet && !mark[n])
                {
                    mark[n] = 1;
                    q.push(n);
                }
        }
    }
    return mark;
}

} // namespace detail

inline tfsf_interface build_interface(const tet_mesh& msh, const topology& top, int sigma_tag)
{
    tfsf_interface iface;
    iface.sigma = select_surface(top, sigma_tag, msh);
    auto& sg = iface.sigma;
    if (!sg.closed)
    {
        /* an open Sigma must end on the domain boundary (symmetry planes) */
        std::vector<char> boundary_edge(top.num_edges(), 0);
        for (std::size_t f = 0; f < top.num_faces(); f++)
            if (top.is_boundary_face(f))
                for (auto e : top.face_edges[f])
                    boundary_edge[e] = 1;
        std::map<std::size_t, int> uses;
        for (auto f : sg.faces)
            for (auto e : top.face_edges[f])
                uses[e]++;
        for (const auto& [e, n] : uses)
            if (n != 2 && !(n == 1 && boundary_edge[e]))
                throw topology_error("radiating surface " + std::to_string(sigma_tag) +
                                         " is neither closed nor bounded by the domain boundary",
                                     e);
    }
    for (auto f : sg.faces)
        if (top.is_boundary_face(f))
            throw topology_error("radiating surface " + std::to_string(sigma_tag) + " touches the domain boundary",
                                 f);

    std::vector<char> barrier(top.num_faces(), 0);
    std::vector<std::size_t> inner, outer;
    for (std::size_t i = 0; i < sg.faces.size(); i++)
    {
        auto f = sg.faces[i];
        barrier[f] = 1;
        for (auto t : top.face_tets[f])
            for (int k = 0; k < 4; k++)
                if (top.tet_faces[t][k] == f)
                    (top.tet_face_signs[t][k] == sg.orientation[i] ? inner : outer).push_back(t);
    }

    iface.in_source_region = detail::flood_tets(top, msh.num_tets(), inner, barrier);
    auto outside = detail::flood_tets(top, msh.num_tets(), outer, barrier);
    if (!sg.closed)
    {
        /* orientation of an open Sigma is arbitrary: Omega_S is the smaller side */
        double vin = 0.0, vout = 0.0;
        for (std::size_t t = 0; t < msh.num_tets(); t++)
        {
            const double v = std::abs(msh.tet_volume(t));
            (iface.in_source_region[t] ? vin : vout) += v;
        }
        if (vin > vout)
        {
            std::swap(iface.in_source_region, outside);
            for (auto& o : sg.orientation)
                o = -o;
        }
    }
    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        if (iface.in_source_region[t] && outside[t])
            throw topology_error("radiating surface does not separate the mesh", t);
        if (!iface.in_source_region[t] && !outside[t])
            throw topology_error("tet is neither inside nor outside the radiating surface", t);
    }

    iface.on_sigma.assign(top.num_edges(), 0);
    for (auto e : sg.edges)
        iface.on_sigma[e] = 1;
    std::vector<char> sigma_node(msh.num_nodes(), 0);
    for (auto f : sg.faces)
        for (auto n : top.faces[f])
            sigma_node[n] = 1;

    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        if (!iface.in_source_region[t])
            continue;
        bool node = false, edge = false, face = false;
        for (auto n : msh.tets[t])
            node = node || sigma_node[n];
        if (!node)
            continue;
        for (auto e : top.tet_edges[t])
            edge = edge || iface.on_sigma[e];
        for (auto f : top.tet_faces[t])
            face = face || barrier[f];
        iface.contact_tets.push_back(t);
        iface.contact.push_back(face ? sigma_contact::face : edge ? sigma_contact::edge : sigma_contact::vertex);
    }
    return iface;
}

using field_function = std::function<em_field(const vec3&)>;

inline field_function dipole_source(const dipole_spec& d)
{
    validate(d);
    return [d](const vec3& p) { return dipole_field(d, p); };
}

/* Radiated traces on Sigma. U_r and F_r are indexed by global edge, Phi_r
 * (flux of B through the Sigma faces, along the global face normal) by
 * global face; all are zero away from Sigma. */
struct tfsf_traces
{
    cvector U_r;
    cvector F_r;
    cvector Phi_r;
};

inline constexpr int trace_line_points = 4;

inline tfsf_traces compute_traces(const tfsf_interface& iface, const tet_mesh& msh, const topology& top,
                                  const field_function& source)
{
    tfsf_traces tr;
    tr.U_r = cvector::Zero(top.num_edges());
    tr.F_r = cvector::Zero(top.num_edges());
    tr.Phi_r = cvector::Zero(top.num_faces());

    for (auto e : iface.sigma.edges)
    {
        const vec3& a = msh.nodes[top.edges[e][0]];
        const vec3& b = msh.nodes[top.edges[e][1]];
        tr.U_r(e) = integrate_segment(a, b, [&](const vec3& p) { return source(p).E; }, trace_line_points);
    }

    const auto& sg = iface.sigma;
    for (std::size_t i = 0; i < sg.faces.size(); i++)
    {
        auto f = sg.faces[i];
        const vec3 n = sg.normal(top, i);
        const auto& fn = top.faces[f];
        const vec3 bary = (msh.nodes[fn[0]] + msh.nodes[fn[1]] + msh.nodes[fn[2]]) / 3.0;

        for (int k = 0; k < 3; k++)
        {
            auto e = top.face_edges[f][k];
            const auto [p, q] = top.edges[e];
            std::size_t r = fn[0] + fn[1] + fn[2] - p - q;
            const vec3 mid = 0.5 * (msh.nodes[p] + msh.nodes[q]);
            const double orient = (msh.nodes[q] - msh.nodes[p]).cross(msh.nodes[r] - msh.nodes[p]).dot(n);
            const double s = orient > 0 ? 1.0 : -1.0;
            tr.F_r(e) += s * integrate_segment(bary, mid, [&](const vec3& x) { return source(x).H; },
                                               trace_line_points);
        }

        auto tri = make_tri_element(msh, top, f);
        cplx flux = 0.0;
        for (const auto& qp : triangle_rule6())
            flux += qp.weight * tri.area * tdot(source(tri.point(qp.bary)).H, top.face_normal[f]);
        tr.Phi_r(f) = mu0 * flux;
    }
    return tr;
}

inline cvector assemble_tfsf_rhs(const tfsf_interface& iface, const tfsf_traces& tr, const tet_mesh& msh,
                                 const topology& top, const std::vector<material_value>& mats, double omega)
{
    cvector rhs = cvector::Zero(top.num_edges());
    for (std::size_t c = 0; c < iface.contact_tets.size(); c++)
    {
        if (iface.contact[c] == sigma_contact::vertex)
            continue;
        auto t = iface.contact_tets[c];
        auto Kv = element_system(msh, t, mats[t], omega);
        Eigen::Matrix<cplx, 6, 1> ur;
        for (int k = 0; k < 6; k++)
            ur(k) = tr.U_r(top.tet_edges[t][k]);
        Eigen::Matrix<cplx, 6, 1> bv = Kv * ur;
        for (int k = 0; k < 6; k++)
            rhs(top.tet_edges[t][k]) += bv(k);
    }
    /* F_r lives on Sigma faces, each owned by exactly one Omega_S tet */
    rhs -= (I * omega) * tr.F_r;
    return rhs;
}

/* Edge unknowns as seen from inside tet t: scattered field for Omega_S,
 * total field for Omega_T. */
inline std::array<cplx, 6> region_dofs(const tfsf_interface& iface, const tfsf_traces& tr, const topology& top,
                                       const cvector& u, std::size_t t)
{
    auto d = tet_dofs(top, u, t);
    if (iface.in_source_region[t])
        for (int k = 0; k < 6; k++)
        {
            auto e = top.tet_edges[t][k];
            if (iface.on_sigma[e])
                d[k] -= tr.U_r(e);
        }
    return d;
}

struct region_probe
{
    probe_result field;  /* what the unknowns represent at the point */
    bool scattered;      /* true inside Sigma */
};

inline region_probe probe_region_field(const tfsf_interface& iface, const tfsf_traces& tr, const tet_mesh& msh,
                                       const topology& top, const point_locator& loc, const cvector& u,
                                       const vec3& p)
{
    auto t = loc.locate(p);
    if (!t)
        throw domain_error("probe point (" + std::to_string(p(0)) + ", " + std::to_string(p(1)) + ", " +
                           std::to_string(p(2)) + ") lies outside the mesh");
    auto el = make_tet_element(msh, *t);
    return {{p, el.field(region_dofs(iface, tr, top, u, *t), p), *t}, iface.in_source_region[*t] != 0};
}

/* Total field anywhere: inside Sigma the known radiated field is added
 * back to the scattered part. */
inline probe_result probe_total_field(const tfsf_interface& iface, const tfsf_traces& tr, const tet_mesh& msh,
                                      const topology& top, const point_locator& loc, const cvector& u,
                                      const field_function& source, const vec3& p)
{
    auto r = probe_region_field(iface, tr, msh, top, loc, u, p);
    if (r.scattered)
        r.field.E += source(p).E;
    return r.field;
}

/* Throws unless the source center lies in an Omega_S tet. */
inline void check_source_inside(const tfsf_interface& iface, const point_locator& loc, const vec3& center)
{
    auto t = loc.locate(center);
    if (!t || !iface.in_source_region[*t])
        throw domain_error("radiator center is not inside the radiating surface");
}

inline void write_traces(std::ostream& os, const tfsf_interface& iface, const cvector& values)
{
    os << "dof_id, re, im\n";
    auto old = os.precision(12);
    for (auto e : iface.sigma.edges)
        os << e << ", " << values(e).real() << ", " << values(e).imag() << "\n";
    os.precision(old);
}

} // namespace dga
