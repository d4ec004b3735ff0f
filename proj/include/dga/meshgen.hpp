/*
 * Structured tetrahedral meshes of axis-aligned boxes, two lattices:
 *
 *   kuhn  every cell split into six tets along its main diagonal. Grid
 *         planes are unions of mesh faces, so interior planes can be tagged.
 *   bcc   body-centered cubic: nodes at cell corners and cell centers, four
 *         tets around every interior cell face, two per boundary face. Edges
 *         are at most one cell size long, against sqrt(3) for kuhn, which
 *         roughly halves the pointwise reconstruction error per unknown.
 *
 * Region tags come from a predicate on cell centers (kuhn) or tet centroids
 * (bcc); tagged surfaces are box walls, interior grid planes (kuhn only) or
 * the boundary of the cells / tets selected by a predicate (used for the
 * radiating sphere).
 *
 * This is scenario plumbing for tests and the bundled examples, not a
 * general mesher.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <vector>

#include "dga/errors.hpp"
#include "dga/mesh.hpp"

namespace dga {

enum class box_side : int { xmin = 0, xmax, ymin, ymax, zmin, zmax };

struct cell_set_surface
{
    std::function<bool(const vec3&)> inside; /* on cell centers */
    int tag;
    /* box sides (by box_side) the set may reach, e.g. symmetry planes; the
     * tagged surface is then open with its rim on those sides */
    std::array<bool, 6> open_sides{};
};

struct grid_plane
{
    int axis;          /* 0, 1, 2 */
    std::size_t index; /* grid plane index along that axis, strictly interior */
    int tag;
};

enum class box_lattice { kuhn, bcc };

struct structured_box
{
    box_lattice lattice = box_lattice::kuhn;
    vec3 lo = vec3::Zero();
    vec3 hi = vec3::Ones();
    std::array<std::size_t, 3> cells{1, 1, 1};
    std::function<int(const vec3&)> region = [](const vec3&) { return 1; };
    std::array<int, 6> wall_tags{0, 0, 0, 0, 0, 0}; /* indexed by box_side, 0 leaves it untagged */
    std::vector<cell_set_surface> enclosures;
    std::vector<grid_plane> planes; /* kuhn only */
    /* Explicit, strictly increasing grid coordinates for an axis (kuhn
     * only); overrides lo, hi and cells along that axis when nonempty. */
    std::array<std::vector<double>, 3> ticks;

    vec3 spacing() const
    {
        return {(hi(0) - lo(0)) / cells[0], (hi(1) - lo(1)) / cells[1], (hi(2) - lo(2)) / cells[2]};
    }

    /* Number of cells so that the spacing does not exceed h along any axis. */
    static std::array<std::size_t, 3> cells_for(const vec3& lo, const vec3& hi, double h)
    {
        std::array<std::size_t, 3> n;
        for (int d = 0; d < 3; d++)
            n[d] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi(d) - lo(d)) / h - 1e-9)));
        return n;
    }
};

namespace detail {

/* Tags the faces separating the tets selected by `inside` (on centroids)
 * from the others. */
inline void tag_tet_set_boundary(tet_mesh& msh, const cell_set_surface& enc, const vec3& lo, const vec3& hi)
{
    std::vector<char> in(msh.num_tets());
    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        auto p = msh.tet_points(t);
        in[t] = enc.inside((p[0] + p[1] + p[2] + p[3]) / 4.0) ? 1 : 0;
    }
    const double tol = 1e-9 * (hi - lo).norm();
    auto on_open_side = [&](const std::array<std::size_t, 3>& key) {
        const vec3 c = (msh.nodes[key[0]] + msh.nodes[key[1]] + msh.nodes[key[2]]) / 3.0;
        for (int d = 0; d < 3; d++)
            if ((enc.open_sides[2 * d] && std::abs(c(d) - lo(d)) < tol) ||
                (enc.open_sides[2 * d + 1] && std::abs(c(d) - hi(d)) < tol))
                return true;
        return false;
    };
    const int tag = enc.tag;
    std::map<std::array<std::size_t, 3>, std::pair<int, std::size_t>> seen; /* face -> (count, first tet) */
    for (std::size_t t = 0; t < msh.num_tets(); t++)
        for (const auto& lf : local_faces)
        {
            auto key = sorted(std::array<std::size_t, 3>{msh.tets[t][lf[0]], msh.tets[t][lf[1]], msh.tets[t][lf[2]]});
            auto [it, fresh] = seen.try_emplace(key, 1, t);
            if (fresh)
                continue;
            it->second.first++;
            if (in[t] != in[it->second.second])
                msh.faces.push_back({key, tag});
        }
    for (const auto& [key, v] : seen)
        if (v.first == 1 && in[v.second] && !on_open_side(key))
            throw config_error("structured box: enclosed tet set touches the box wall");
}

inline tet_mesh generate_bcc_mesh(const structured_box& box)
{
    const auto [nx, ny, nz] = box.cells;
    const std::array<std::size_t, 3> n{nx, ny, nz};
    const vec3 h = box.spacing();
    const std::size_t ncorner = (nx + 1) * (ny + 1) * (nz + 1);

    auto corner_id = [&](const std::array<std::size_t, 3>& c) { return c[0] + (nx + 1) * (c[1] + (ny + 1) * c[2]); };
    auto center_id = [&](const std::array<std::size_t, 3>& c) { return ncorner + c[0] + nx * (c[1] + ny * c[2]); };

    tet_mesh msh;
    msh.nodes.reserve(ncorner + nx * ny * nz);
    for (std::size_t k = 0; k <= nz; k++)
        for (std::size_t j = 0; j <= ny; j++)
            for (std::size_t i = 0; i <= nx; i++)
                msh.nodes.emplace_back(box.lo(0) + i * h(0), box.lo(1) + j * h(1), box.lo(2) + k * h(2));
    for (std::size_t k = 0; k < nz; k++)
        for (std::size_t j = 0; j < ny; j++)
            for (std::size_t i = 0; i < nx; i++)
                msh.nodes.emplace_back(box.lo(0) + (i + 0.5) * h(0), box.lo(1) + (j + 0.5) * h(1),
                                       box.lo(2) + (k + 0.5) * h(2));

    for (int axis = 0; axis < 3; axis++)
    {
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        for (std::size_t k = 0; k < nz; k++)
            for (std::size_t j = 0; j < ny; j++)
                for (std::size_t i = 0; i < nx; i++)
                {
                    const std::array<std::size_t, 3> c{i, j, k};
                    /* the face on the upper side of the cell, plus the lower one on the wall */
                    for (int side : {0, 1})
                    {
                        if (side == 0 && c[axis] != 0)
                            continue;
                        auto fc = [&](std::size_t du, std::size_t dv) {
                            auto q = c;
                            q[axis] += side;
                            q[a1] += du;
                            q[a2] += dv;
                            return corner_id(q);
                        };
                        const std::size_t p00 = fc(0, 0), p10 = fc(1, 0), p11 = fc(1, 1), p01 = fc(0, 1);
                        const std::size_t cc = center_id(c);
                        const bool interior = side == 1 && c[axis] + 1 < n[axis];
                        if (interior)
                        {
                            auto nb = c;
                            nb[axis]++;
                            const std::size_t cn = center_id(nb);
                            for (auto [a, b] : {std::pair{p00, p10}, {p10, p11}, {p11, p01}, {p01, p00}})
                                msh.tets.push_back({cc, cn, a, b});
                        }
                        else
                        {
                            msh.tets.push_back({cc, p00, p10, p11});
                            msh.tets.push_back({cc, p00, p11, p01});
                            const int tag = box.wall_tags[2 * axis + side];
                            if (tag != 0)
                            {
                                msh.faces.push_back({{p00, p10, p11}, tag});
                                msh.faces.push_back({{p00, p11, p01}, tag});
                            }
                        }
                    }
                }
    }

    msh.regions.resize(msh.tets.size());
    for (std::size_t t = 0; t < msh.tets.size(); t++)
    {
        const auto& tt = msh.tets[t];
        msh.regions[t] = box.region((msh.nodes[tt[0]] + msh.nodes[tt[1]] + msh.nodes[tt[2]] + msh.nodes[tt[3]]) / 4.0);
    }
    for (const auto& enc : box.enclosures)
        tag_tet_set_boundary(msh, enc, box.lo, box.hi);

    validate_mesh(msh);
    return msh;
}

} // namespace detail

inline tet_mesh generate_box_mesh(const structured_box& box)
{
    for (int d = 0; d < 3; d++)
        if (box.ticks[d].empty() && (box.cells[d] == 0 || !(box.hi(d) > box.lo(d))))
            throw config_error("structured box needs a positive extent and at least one cell per axis");
    if (box.lattice == box_lattice::bcc)
    {
        if (!box.planes.empty())
            throw config_error("structured box: grid planes need the kuhn lattice");
        for (const auto& t : box.ticks)
            if (!t.empty())
                throw config_error("structured box: explicit grid coordinates need the kuhn lattice");
        return detail::generate_bcc_mesh(box);
    }

    std::array<std::vector<double>, 3> coord;
    std::array<std::size_t, 3> counts{};
    for (int d = 0; d < 3; d++)
    {
        if (!box.ticks[d].empty())
        {
            coord[d] = box.ticks[d];
            if (coord[d].size() < 2)
                throw config_error("structured box: an axis needs at least two grid coordinates");
            for (std::size_t i = 1; i < coord[d].size(); i++)
                if (!(coord[d][i] > coord[d][i - 1]))
                    throw config_error("structured box: grid coordinates must be strictly increasing");
        }
        else
        {
            const double h = (box.hi(d) - box.lo(d)) / box.cells[d];
            for (std::size_t i = 0; i <= box.cells[d]; i++)
                coord[d].push_back(box.lo(d) + i * h);
        }
        counts[d] = coord[d].size() - 1;
    }
    const auto [nx, ny, nz] = counts;

    auto node_id = [&](std::size_t i, std::size_t j, std::size_t k) { return i + (nx + 1) * (j + (ny + 1) * k); };
    auto cell_center = [&](std::size_t i, std::size_t j, std::size_t k) {
        return vec3(0.5 * (coord[0][i] + coord[0][i + 1]), 0.5 * (coord[1][j] + coord[1][j + 1]),
                    0.5 * (coord[2][k] + coord[2][k + 1]));
    };

    tet_mesh msh;
    msh.nodes.reserve((nx + 1) * (ny + 1) * (nz + 1));
    for (std::size_t k = 0; k <= nz; k++)
        for (std::size_t j = 0; j <= ny; j++)
            for (std::size_t i = 0; i <= nx; i++)
                msh.nodes.emplace_back(coord[0][i], coord[1][j], coord[2][k]);

    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

    msh.tets.reserve(6 * nx * ny * nz);
    msh.regions.reserve(6 * nx * ny * nz);
    for (std::size_t k = 0; k < nz; k++)
        for (std::size_t j = 0; j < ny; j++)
            for (std::size_t i = 0; i < nx; i++)
            {
                const int reg = box.region(cell_center(i, j, k));
                for (const auto& p : perms)
                {
                    std::array<std::size_t, 3> c{i, j, k};
                    std::array<std::size_t, 4> t;
                    t[0] = node_id(c[0], c[1], c[2]);
                    for (int s = 0; s < 3; s++)
                    {
                        c[p[s]]++;
                        t[s + 1] = node_id(c[0], c[1], c[2]);
                    }
                    msh.tets.push_back(t);
                    msh.regions.push_back(reg);
                }
            }

    /* Tagged square faces, keyed by (axis, plane index, cell u, cell v) to
     * keep the output order deterministic. */
    std::map<std::array<std::size_t, 4>, int> squares;
    auto tag_square = [&](int axis, std::size_t plane, std::size_t u, std::size_t v, int tag) {
        if (tag == 0)
            return;
        auto [it, inserted] = squares.try_emplace({static_cast<std::size_t>(axis), plane, u, v}, tag);
        if (!inserted && it->second != tag)
            throw config_error("structured box: face tagged twice with different tags");
    };

    const std::array<std::size_t, 3> n = counts;
    for (int axis = 0; axis < 3; axis++)
    {
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        for (std::size_t u = 0; u < n[a1]; u++)
            for (std::size_t v = 0; v < n[a2]; v++)
            {
                tag_square(axis, 0, u, v, box.wall_tags[2 * axis]);
                tag_square(axis, n[axis], u, v, box.wall_tags[2 * axis + 1]);
            }
    }

    for (const auto& pl : box.planes)
    {
        if (pl.axis < 0 || pl.axis > 2 || pl.index == 0 || pl.index >= n[pl.axis])
            throw config_error("structured box: grid plane must be strictly interior");
        const int a1 = (pl.axis + 1) % 3, a2 = (pl.axis + 2) % 3;
        for (std::size_t u = 0; u < n[a1]; u++)
            for (std::size_t v = 0; v < n[a2]; v++)
                tag_square(pl.axis, pl.index, u, v, pl.tag);
    }

    for (const auto& enc : box.enclosures)
    {
        std::vector<char> in(nx * ny * nz);
        for (std::size_t k = 0; k < nz; k++)
            for (std::size_t j = 0; j < ny; j++)
                for (std::size_t i = 0; i < nx; i++)
                    in[i + nx * (j + ny * k)] = enc.inside(cell_center(i, j, k)) ? 1 : 0;
        auto inside = [&](std::array<std::size_t, 3> c) { return in[c[0] + nx * (c[1] + ny * c[2])] != 0; };
        for (int axis = 0; axis < 3; axis++)
        {
            const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
            for (std::size_t k = 0; k < nz; k++)
                for (std::size_t j = 0; j < ny; j++)
                    for (std::size_t i = 0; i < nx; i++)
                    {
                        std::array<std::size_t, 3> c{i, j, k};
                        if (!inside(c))
                            continue;
                        for (int dir : {-1, +1})
                        {
                            const bool at_wall = dir < 0 ? c[axis] == 0 : c[axis] + 1 == n[axis];
                            if (at_wall)
                            {
                                if (!enc.open_sides[2 * axis + (dir < 0 ? 0 : 1)])
                                    throw config_error("structured box: enclosed cell set touches the box wall");
                                continue;
                            }
                            auto nb = c;
                            nb[axis] = dir < 0 ? c[axis] - 1 : c[axis] + 1;
                            if (inside(nb))
                                continue;
                            std::size_t plane = dir < 0 ? c[axis] : c[axis] + 1;
                            tag_square(axis, plane, c[a1], c[a2], enc.tag);
                        }
                    }
        }
    }

    for (const auto& [key, tag] : squares)
    {
        const int axis = static_cast<int>(key[0]);
        const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
        auto corner = [&](std::size_t du, std::size_t dv) {
            std::array<std::size_t, 3> c{};
            c[axis] = key[1];
            c[a1] = key[2] + du;
            c[a2] = key[3] + dv;
            return node_id(c[0], c[1], c[2]);
        };
        /* split along the diagonal joining the lowest and highest corner */
        msh.faces.push_back({{corner(0, 0), corner(1, 0), corner(1, 1)}, tag});
        msh.faces.push_back({{corner(0, 0), corner(0, 1), corner(1, 1)}, tag});
    }

    validate_mesh(msh);
    return msh;
}

/* Cell-center predicate of a ball, for radiating-sphere enclosures. */
inline std::function<bool(const vec3&)> ball(const vec3& center, double radius)
{
    return [=](const vec3& p) { return (p - center).norm() <= radius; };
}

} // namespace dga
