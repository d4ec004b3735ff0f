/*
 * Tetrahedral primal grid, its incidence topology and tagged surfaces.
 *
 * The barycentric dual grid is never stored: every dual quantity is
 * reached through the primal entity it is associated with (dual face of an
 * edge, dual edge of a face) plus per-element geometric coefficients.
 *
 * Orientation conventions:
 *  - edges point from the lower to the higher global node index;
 *  - faces are stored with sorted nodes (a < b < c), normal (b-a)x(c-a),
 *    boundary cycle a->b->c->a, so C has +1 on (a,b), (b,c) and -1 on (a,c);
 *  - tets are reordered at load time to have positive signed volume.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "dga/errors.hpp"
#include "dga/geometry.hpp"

namespace dga {

inline constexpr double degenerate_volume = 1e-14;

struct tagged_face
{
    std::array<std::size_t, 3> nodes;
    int tag;
};

struct tet_mesh
{
    std::vector<vec3> nodes;
    std::vector<std::array<std::size_t, 4>> tets;
    std::vector<int> regions;
    std::vector<tagged_face> faces;

    std::size_t num_nodes() const { return nodes.size(); }
    std::size_t num_tets() const { return tets.size(); }

    std::array<vec3, 4> tet_points(std::size_t t) const
    {
        const auto& n = tets[t];
        return {nodes[n[0]], nodes[n[1]], nodes[n[2]], nodes[n[3]]};
    }

    double tet_volume(std::size_t t) const
    {
        const auto p = tet_points(t);
        return signed_volume(p[0], p[1], p[2], p[3]);
    }
};

/* Local edge k of a tet joins local nodes local_edges[k]. Local face k is the
 * face opposite local node k. */
inline constexpr std::array<std::array<int, 2>, 6> local_edges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

inline constexpr std::array<std::array<int, 3>, 4> local_faces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

namespace detail {

template<std::size_t N>
std::array<std::size_t, N> sorted(std::array<std::size_t, N> a)
{
    std::sort(a.begin(), a.end());
    return a;
}

template<typename Key>
std::size_t find_sorted(const std::vector<Key>& v, const Key& k)
{
    auto it = std::lower_bound(v.begin(), v.end(), k);
    if (it == v.end() || *it != k)
        return v.size();
    return static_cast<std::size_t>(it - v.begin());
}

inline bool next_data_line(std::istream& is, std::string& line, std::size_t& lineno)
{
    while (std::getline(is, line))
    {
        lineno++;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        return true;
    }
    return false;
}

inline std::size_t read_section_header(std::istream& is, const std::string& keyword, std::size_t& lineno)
{
    std::string line;
    if (!next_data_line(is, line, lineno))
        throw parse_error("unexpected end of file, expected '" + keyword + "'", lineno + 1);
    std::istringstream ss(line);
    std::string kw;
    long long count = -1;
    ss >> kw >> count;
    if (kw != keyword || ss.fail() || count < 0)
        throw parse_error("expected '" + keyword + " <count>'", lineno);
    std::string extra;
    if (ss >> extra)
        throw parse_error("trailing data after section header", lineno);
    return static_cast<std::size_t>(count);
}

template<std::size_t N>
void read_record(const std::string& line, std::size_t lineno, std::array<double, N>& out)
{
    std::istringstream ss(line);
    for (auto& v : out)
        if (!(ss >> v))
            throw parse_error("expected " + std::to_string(N) + " numbers", lineno);
    std::string extra;
    if (ss >> extra)
        throw parse_error("trailing data on record", lineno);
}

template<std::size_t N>
void read_int_record(const std::string& line, std::size_t lineno, std::array<long long, N>& out)
{
    std::istringstream ss(line);
    for (auto& v : out)
        if (!(ss >> v))
            throw parse_error("expected " + std::to_string(N) + " integers", lineno);
    std::string extra;
    if (ss >> extra)
        throw parse_error("trailing data on record", lineno);
}

} // namespace detail

/* Syntactic parse of the ASCII mesh format, no topological validation.
 *
 *   emtmesh 1
 *   nodes N    then N lines "x y z"
 *   tets M     then M lines "n0 n1 n2 n3 region_tag"
 *   faces K    then K lines "n0 n1 n2 surface_tag"
 */
inline tet_mesh parse_mesh(std::istream& is)
{
    tet_mesh msh;
    std::size_t lineno = 0;
    std::string line;

    if (!detail::next_data_line(is, line, lineno))
        throw parse_error("empty mesh file", 1);
    {
        std::istringstream ss(line);
        std::string magic;
        int version = 0;
        ss >> magic >> version;
        if (magic != "emtmesh" || version != 1)
            throw parse_error("bad header, expected 'emtmesh 1'", lineno);
    }

    auto nn = detail::read_section_header(is, "nodes", lineno);
    msh.nodes.reserve(nn);
    for (std::size_t i = 0; i < nn; i++)
    {
        if (!detail::next_data_line(is, line, lineno))
            throw parse_error("unexpected end of file in nodes section", lineno + 1);
        std::array<double, 3> xyz;
        detail::read_record(line, lineno, xyz);
        msh.nodes.emplace_back(xyz[0], xyz[1], xyz[2]);
    }

    auto nt = detail::read_section_header(is, "tets", lineno);
    msh.tets.reserve(nt);
    msh.regions.reserve(nt);
    for (std::size_t i = 0; i < nt; i++)
    {
        if (!detail::next_data_line(is, line, lineno))
            throw parse_error("unexpected end of file in tets section", lineno + 1);
        std::array<long long, 5> rec;
        detail::read_int_record(line, lineno, rec);
        std::array<std::size_t, 4> t;
        for (int k = 0; k < 4; k++)
        {
            if (rec[k] < 0)
                throw parse_error("negative node index", lineno);
            t[k] = static_cast<std::size_t>(rec[k]);
        }
        msh.tets.push_back(t);
        msh.regions.push_back(static_cast<int>(rec[4]));
    }

    auto nf = detail::read_section_header(is, "faces", lineno);
    msh.faces.reserve(nf);
    for (std::size_t i = 0; i < nf; i++)
    {
        if (!detail::next_data_line(is, line, lineno))
            throw parse_error("unexpected end of file in faces section", lineno + 1);
        std::array<long long, 4> rec;
        detail::read_int_record(line, lineno, rec);
        tagged_face f;
        for (int k = 0; k < 3; k++)
        {
            if (rec[k] < 0)
                throw parse_error("negative node index", lineno);
            f.nodes[k] = static_cast<std::size_t>(rec[k]);
        }
        f.tag = static_cast<int>(rec[3]);
        msh.faces.push_back(f);
    }

    if (detail::next_data_line(is, line, lineno))
        throw parse_error("trailing data after faces section", lineno);

    return msh;
}

/* Checks every structural invariant and canonicalizes tet orientation.
 * Untagged boundary faces are allowed; they carry the natural condition. */
inline void validate_mesh(tet_mesh& msh)
{
    const auto nn = msh.nodes.size();
    std::vector<char> used(nn, 0);

    for (std::size_t t = 0; t < msh.tets.size(); t++)
    {
        auto& tet = msh.tets[t];
        for (auto n : tet)
        {
            if (n >= nn)
                throw topology_error("tet references node " + std::to_string(n) + " of " +
                                         std::to_string(nn),
                                     t);
            used[n] = 1;
        }
        auto s = detail::sorted(tet);
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw topology_error("tet has repeated nodes", t);

        double vol = msh.tet_volume(t);
        if (std::abs(vol) < degenerate_volume)
            throw topology_error("degenerate tet", t);
        if (vol < 0)
            std::swap(tet[2], tet[3]);
    }

    for (std::size_t n = 0; n < nn; n++)
        if (!used[n])
            throw topology_error("dangling node not referenced by any tet", n);

    /* face multiplicities */
    std::vector<std::array<std::size_t, 3>> all;
    all.reserve(4 * msh.tets.size());
    for (const auto& tet : msh.tets)
        for (const auto& lf : local_faces)
            all.push_back(detail::sorted(std::array<std::size_t, 3>{tet[lf[0]], tet[lf[1]], tet[lf[2]]}));
    std::sort(all.begin(), all.end());

    auto multiplicity = [&](const std::array<std::size_t, 3>& f) {
        auto [lo, hi] = std::equal_range(all.begin(), all.end(), f);
        return static_cast<std::size_t>(hi - lo);
    };

    for (std::size_t i = 1; i < all.size(); i++)
        if (i + 1 < all.size() && all[i - 1] == all[i] && all[i] == all[i + 1])
            throw topology_error("face shared by more than two tets", i);

    std::set<std::array<std::size_t, 3>> seen;
    for (std::size_t i = 0; i < msh.faces.size(); i++)
    {
        const auto& f = msh.faces[i];
        for (auto n : f.nodes)
            if (n >= nn)
                throw topology_error("tagged face references node " + std::to_string(n) + " of " +
                                         std::to_string(nn),
                                     i);
        auto s = detail::sorted(f.nodes);
        if (multiplicity(s) == 0)
            throw topology_error("tagged face is not a face of any tet", i);
        if (!seen.insert(s).second)
            throw topology_error("face tagged twice", i);
    }
}

inline tet_mesh load_mesh(std::istream& is)
{
    auto msh = parse_mesh(is);
    validate_mesh(msh);
    return msh;
}

inline tet_mesh load_mesh(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open mesh file '" + path + "'");
    return load_mesh(ifs);
}

inline void write_mesh(std::ostream& os, const tet_mesh& msh)
{
    os << "emtmesh 1\n";
    os << "nodes " << msh.nodes.size() << "\n";
    auto old_prec = os.precision(17);
    for (const auto& p : msh.nodes)
        os << p(0) << " " << p(1) << " " << p(2) << "\n";
    os.precision(old_prec);
    os << "tets " << msh.tets.size() << "\n";
    for (std::size_t t = 0; t < msh.tets.size(); t++)
    {
        const auto& n = msh.tets[t];
        os << n[0] << " " << n[1] << " " << n[2] << " " << n[3] << " " << msh.regions[t] << "\n";
    }
    os << "faces " << msh.faces.size() << "\n";
    for (const auto& f : msh.faces)
        os << f.nodes[0] << " " << f.nodes[1] << " " << f.nodes[2] << " " << f.tag << "\n";
}

inline constexpr std::size_t no_tet = static_cast<std::size_t>(-1);

struct topology
{
    using incidence = Eigen::SparseMatrix<int, Eigen::RowMajor>;

    std::vector<std::array<std::size_t, 2>> edges;
    std::vector<std::array<std::size_t, 3>> faces;

    /* edges of each face in C order (a,b), (b,c), (a,c) and their signs */
    std::vector<std::array<std::size_t, 3>> face_edges;

    std::vector<std::array<std::size_t, 6>> tet_edges; /* indexed like local_edges */
    std::vector<std::array<int, 6>> tet_edge_signs;    /* +1 if local orientation matches global */
    std::vector<std::array<std::size_t, 4>> tet_faces; /* indexed like local_faces */
    std::vector<std::array<int, 4>> tet_face_signs;    /* +1 if face normal points out of the tet */

    std::vector<std::array<std::size_t, 2>> face_tets; /* second is no_tet on the boundary */
    std::vector<int> face_tag;                         /* 0 when untagged */

    std::vector<double> edge_length;
    std::vector<vec3> edge_tangent;
    std::vector<double> face_area;
    std::vector<vec3> face_normal;

    incidence G; /* edges x nodes */
    incidence C; /* faces x edges */
    incidence D; /* tets x faces */

    static constexpr std::array<int, 3> face_edge_signs{+1, +1, -1};

    std::size_t num_edges() const { return edges.size(); }
    std::size_t num_faces() const { return faces.size(); }
    bool is_boundary_face(std::size_t f) const { return face_tets[f][1] == no_tet; }

    std::size_t find_edge(std::size_t a, std::size_t b) const
    {
        if (a > b)
            std::swap(a, b);
        return detail::find_sorted(edges, std::array<std::size_t, 2>{a, b});
    }

    std::size_t find_face(std::array<std::size_t, 3> n) const
    {
        return detail::find_sorted(faces, detail::sorted(n));
    }
};

inline topology build_topology(const tet_mesh& msh)
{
    topology top;
    const auto nt = msh.tets.size();

    top.edges.reserve(6 * nt);
    top.faces.reserve(4 * nt);
    for (const auto& tet : msh.tets)
    {
        for (const auto& le : local_edges)
            top.edges.push_back(detail::sorted(std::array<std::size_t, 2>{tet[le[0]], tet[le[1]]}));
        for (const auto& lf : local_faces)
            top.faces.push_back(detail::sorted(std::array<std::size_t, 3>{tet[lf[0]], tet[lf[1]], tet[lf[2]]}));
    }
    std::sort(top.edges.begin(), top.edges.end());
    top.edges.erase(std::unique(top.edges.begin(), top.edges.end()), top.edges.end());
    std::sort(top.faces.begin(), top.faces.end());
    top.faces.erase(std::unique(top.faces.begin(), top.faces.end()), top.faces.end());

    const auto ne = top.edges.size();
    const auto nf = top.faces.size();

    top.edge_length.resize(ne);
    top.edge_tangent.resize(ne);
    for (std::size_t e = 0; e < ne; e++)
    {
        vec3 d = msh.nodes[top.edges[e][1]] - msh.nodes[top.edges[e][0]];
        top.edge_length[e] = d.norm();
        top.edge_tangent[e] = d / top.edge_length[e];
    }

    top.face_edges.resize(nf);
    top.face_area.resize(nf);
    top.face_normal.resize(nf);
    for (std::size_t f = 0; f < nf; f++)
    {
        const auto [a, b, c] = top.faces[f];
        top.face_edges[f] = {top.find_edge(a, b), top.find_edge(b, c), top.find_edge(a, c)};
        vec3 n = (msh.nodes[b] - msh.nodes[a]).cross(msh.nodes[c] - msh.nodes[a]);
        top.face_area[f] = 0.5 * n.norm();
        top.face_normal[f] = n.normalized();
    }

    top.tet_edges.resize(nt);
    top.tet_edge_signs.resize(nt);
    top.tet_faces.resize(nt);
    top.tet_face_signs.resize(nt);
    top.face_tets.assign(nf, {no_tet, no_tet});
    for (std::size_t t = 0; t < nt; t++)
    {
        const auto& tet = msh.tets[t];
        for (int k = 0; k < 6; k++)
        {
            auto a = tet[local_edges[k][0]], b = tet[local_edges[k][1]];
            top.tet_edges[t][k] = top.find_edge(a, b);
            top.tet_edge_signs[t][k] = a < b ? +1 : -1;
        }
        for (int k = 0; k < 4; k++)
        {
            const auto& lf = local_faces[k];
            auto f = top.find_face({tet[lf[0]], tet[lf[1]], tet[lf[2]]});
            top.tet_faces[t][k] = f;
            vec3 centroid = (msh.nodes[tet[lf[0]]] + msh.nodes[tet[lf[1]]] + msh.nodes[tet[lf[2]]]) / 3.0;
            double s = top.face_normal[f].dot(centroid - msh.nodes[tet[k]]);
            top.tet_face_signs[t][k] = s > 0 ? +1 : -1;
            auto& ft = top.face_tets[f];
            (ft[0] == no_tet ? ft[0] : ft[1]) = t;
        }
    }

    top.face_tag.assign(nf, 0);
    for (const auto& tf : msh.faces)
    {
        auto f = top.find_face(tf.nodes);
        if (f == nf)
            throw topology_error("tagged face is not a face of the mesh", f);
        top.face_tag[f] = tf.tag;
    }

    using trip = Eigen::Triplet<int>;
    std::vector<trip> tr;
    tr.reserve(2 * ne);
    for (std::size_t e = 0; e < ne; e++)
    {
        tr.emplace_back(e, top.edges[e][0], -1);
        tr.emplace_back(e, top.edges[e][1], +1);
    }
    top.G.resize(ne, msh.nodes.size());
    top.G.setFromTriplets(tr.begin(), tr.end());

    tr.clear();
    for (std::size_t f = 0; f < nf; f++)
        for (int k = 0; k < 3; k++)
            tr.emplace_back(f, top.face_edges[f][k], topology::face_edge_signs[k]);
    top.C.resize(nf, ne);
    top.C.setFromTriplets(tr.begin(), tr.end());

    tr.clear();
    for (std::size_t t = 0; t < nt; t++)
        for (int k = 0; k < 4; k++)
            tr.emplace_back(t, top.tet_faces[t][k], top.tet_face_signs[t][k]);
    top.D.resize(nt, nf);
    top.D.setFromTriplets(tr.begin(), tr.end());

    return top;
}

/* A set of tagged faces: an open plane (port, wall, measurement plane) or a
 * closed surface enclosing a volume. */
struct surface_selection
{
    int tag = 0;
    std::vector<std::size_t> faces; /* ascending face ids */
    std::vector<int> orientation;   /* +1 when the stored face normal agrees with the surface */
    std::vector<std::size_t> edges; /* ascending ids of every edge of the selection */
    bool closed = false;
    bool on_boundary = false;       /* every face lies on the domain boundary */

    vec3 normal(const topology& top, std::size_t i) const
    {
        return orientation[i] * top.face_normal[faces[i]];
    }

    double area(const topology& top) const
    {
        double a = 0.0;
        for (auto f : faces)
            a += top.face_area[f];
        return a;
    }
};

inline surface_selection select_surface(const topology& top, int tag, const tet_mesh& msh)
{
    surface_selection sel;
    sel.tag = tag;
    for (std::size_t f = 0; f < top.num_faces(); f++)
        if (top.face_tag[f] == tag)
            sel.faces.push_back(f);
    if (sel.faces.empty())
        throw config_error("no face carries surface tag " + std::to_string(tag));

    const auto nsf = sel.faces.size();

    /* edge -> selected faces incident to it */
    std::map<std::size_t, std::vector<std::size_t>> edge_faces;
    for (std::size_t i = 0; i < nsf; i++)
        for (auto e : top.face_edges[sel.faces[i]])
            edge_faces[e].push_back(i);

    sel.closed = true;
    for (const auto& [e, fl] : edge_faces)
    {
        sel.edges.push_back(e);
        if (fl.size() != 2)
            sel.closed = false;
    }

    sel.on_boundary = std::all_of(sel.faces.begin(), sel.faces.end(),
                                  [&](std::size_t f) { return top.is_boundary_face(f); });

    sel.orientation.assign(nsf, 0);
    if (sel.on_boundary)
    {
        /* outward with respect to the domain */
        for (std::size_t i = 0; i < nsf; i++)
        {
            auto f = sel.faces[i];
            auto t = top.face_tets[f][0];
            for (int k = 0; k < 4; k++)
                if (top.tet_faces[t][k] == f)
                    sel.orientation[i] = top.tet_face_signs[t][k];
        }
        return sel;
    }

    /* Propagate a consistent orientation across manifold edges: two faces
     * sharing an edge must traverse it in opposite directions. */
    auto edge_sign_in_face = [&](std::size_t f, std::size_t e) {
        for (int k = 0; k < 3; k++)
            if (top.face_edges[f][k] == e)
                return topology::face_edge_signs[k];
        return 0;
    };

    for (std::size_t seed = 0; seed < nsf; seed++)
    {
        if (sel.orientation[seed] != 0)
            continue;
        sel.orientation[seed] = 1;
        std::queue<std::size_t> q;
        q.push(seed);
        while (!q.empty())
        {
            auto i = q.front();
            q.pop();
            auto fi = sel.faces[i];
            for (auto e : top.face_edges[fi])
            {
                const auto& fl = edge_faces[e];
                if (fl.size() != 2)
                    continue;
                auto j = fl[0] == i ? fl[1] : fl[0];
                int want = -sel.orientation[i] * edge_sign_in_face(fi, e) * edge_sign_in_face(sel.faces[j], e);
                if (sel.orientation[j] == 0)
                {
                    sel.orientation[j] = want;
                    q.push(j);
                }
            }
        }
    }

    if (sel.closed)
    {
        /* outward: the enclosed volume must come out positive */
        double vol = 0.0;
        for (std::size_t i = 0; i < nsf; i++)
        {
            auto f = sel.faces[i];
            const auto& n = top.faces[f];
            vec3 centroid = (msh.nodes[n[0]] + msh.nodes[n[1]] + msh.nodes[n[2]]) / 3.0;
            vol += sel.orientation[i] * top.face_area[f] * top.face_normal[f].dot(centroid) / 3.0;
        }
        if (vol < 0)
            for (auto& o : sel.orientation)
                o = -o;
    }
    else
    {
        vec3 s = vec3::Zero();
        for (std::size_t i = 0; i < nsf; i++)
            s += sel.orientation[i] * top.face_area[sel.faces[i]] * top.face_normal[sel.faces[i]];
        Eigen::Index k;
        s.cwiseAbs().maxCoeff(&k);
        if (s(k) < 0)
            for (auto& o : sel.orientation)
                o = -o;
    }
    return sel;
}

/* Volume enclosed by the domain boundary, from the divergence theorem. */
inline double boundary_enclosed_volume(const tet_mesh& msh, const topology& top)
{
    double vol = 0.0;
    for (std::size_t f = 0; f < top.num_faces(); f++)
    {
        if (!top.is_boundary_face(f))
            continue;
        auto t = top.face_tets[f][0];
        int sgn = 0;
        for (int k = 0; k < 4; k++)
            if (top.tet_faces[t][k] == f)
                sgn = top.tet_face_signs[t][k];
        const auto& n = top.faces[f];
        vec3 centroid = (msh.nodes[n[0]] + msh.nodes[n[1]] + msh.nodes[n[2]]) / 3.0;
        vol += sgn * top.face_area[f] * top.face_normal[f].dot(centroid) / 3.0;
    }
    return vol;
}

} // namespace dga
