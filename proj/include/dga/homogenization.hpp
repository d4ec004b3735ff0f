/*
 * Unit-cell homogenization of an absorber wall into an equivalent surface
 * admittance.
 *
 * A plane wave enters the cell through the port plane, the wave impedance is
 * measured on an interior plane Pi between the port and the absorber, and
 * carried to the wall reference plane Pi' with the lossless air-line
 * transform. Pi' lies a distance d in front of Pi, on the side facing the
 * chamber, so translating by d1 then d2 equals translating by d1 + d2.
 *
 * Lateral cell walls close the periodic array at normal incidence: walls
 * normal to the incident E are perfect electric conductors, walls parallel
 * to it are left natural (perfect magnetic conductor).
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dga/boundary.hpp"
#include "dga/constants.hpp"
#include "dga/errors.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/meshgen.hpp"
#include "dga/parallel.hpp"
#include "dga/solver.hpp"
#include "dga/whitney.hpp"

namespace dga {

inline constexpr double degenerate_h_ratio = 1e-12;

/* Z_Pi = <E . p> / <(H x n) . p>, ratio of area-weighted averages over the
 * plane, p the incident polarization, n the propagation direction towards
 * the absorber. E is taken at the face centroids (tangential E is
 * continuous), H = -curl E / (i omega mu) averaged over the tets on both
 * sides of each face. `h_scale` is the magnitude of the incident H and only
 * serves the degeneracy check. */
inline cplx extract_wave_impedance(const tet_mesh& msh, const topology& top, const std::vector<material_value>& mats,
                                   const cvector& u, const surface_selection& plane, const vec3& polarization,
                                   const vec3& direction, double omega, double h_scale)
{
    const vec3 p = polarization.normalized();
    const vec3 n = direction.normalized();
    if (std::abs(p.dot(n)) > 1e-9)
        throw config_error("wave impedance: polarization not orthogonal to the propagation direction");
    const vec3 hdir = n.cross(p); /* (H x n) . p == H . (n x p) */

    cplx e_sum = 0.0, h_sum = 0.0;
    double area = 0.0;
    for (auto f : plane.faces)
    {
        const double a = top.face_area[f];
        const auto& fn = top.faces[f];
        const vec3 c = (msh.nodes[fn[0]] + msh.nodes[fn[1]] + msh.nodes[fn[2]]) / 3.0;

        cvec3 h = cvec3::Zero();
        int count = 0;
        cvec3 e = cvec3::Zero();
        for (auto t : top.face_tets[f])
        {
            if (t == no_tet)
                continue;
            auto el = make_tet_element(msh, t);
            auto d = tet_dofs(top, u, t);
            if (count == 0)
                e = el.field(d, c);
            h += -el.curl(d) / (I * omega * mu0 * mats[t].mu_r);
            count++;
        }
        h /= static_cast<double>(count);
        e_sum += a * tdot(e, p);
        h_sum += a * tdot(h, hdir);
        area += a;
    }
    e_sum /= area;
    h_sum /= area;
    if (!(std::abs(h_sum) > degenerate_h_ratio * h_scale))
        throw numerical_error("wave impedance: mean tangential H vanishes on the measurement plane");
    return e_sum / h_sum;
}

/* Z' = eta0 (Z + i eta0 tan kd) / (eta0 + i Z tan kd) */
inline cplx translate_impedance(cplx z, double d, double k)
{
    if (d < 0.0)
        throw domain_error("impedance translation distance must be nonnegative");
    const double t = std::tan(k * d);
    const cplx den = eta0 + I * z * t;
    if (std::abs(den) < 1e-12 * eta0)
        throw numerical_error("impedance translation is resonant at this separation");
    return eta0 * (z + I * eta0 * t) / den;
}

/* Side walls, back wall and the three planes of a normal-incidence cell. */
struct unit_cell_tags
{
    int back = 1;     /* z = 0 */
    int port = 2;     /* excitation plane, top of the cell */
    int plane = 3;    /* measurement plane Pi */
    int side_pec = 4; /* walls normal to x, the incident polarization */
};

enum class back_termination { pec, matched };

struct unit_cell_scenario
{
    tet_mesh mesh;
    material_map materials;
    unit_cell_tags tags;
    back_termination back = back_termination::pec;
    vec3 direction{0.0, 0.0, -1.0};
    vec3 polarization{1.0, 0.0, 0.0};
    cplx amplitude{1.0, 0.0};
    double separation = 0.0; /* d, Pi to Pi' */
    std::vector<double> frequencies;
};

struct unit_cell_point
{
    double frequency;
    cplx z_plane;     /* at Pi */
    cplx z_reference; /* at Pi' */
    cplx y_eq;
    double residual; /* relative solver residual */
};

inline std::vector<unit_cell_point> run_unit_cell_detailed(const unit_cell_scenario& sc, std::size_t threads = 1)
{
    if (sc.frequencies.empty())
        throw config_error("unit cell: empty frequency list");
    const auto top = build_topology(sc.mesh);
    const auto port_surface = select_surface(top, sc.tags.port, sc.mesh);
    const auto plane = select_surface(top, sc.tags.plane, sc.mesh);
    std::vector<surface_selection> pec{select_surface(top, sc.tags.side_pec, sc.mesh)};
    std::vector<admittance_spec> walls{{port_surface, 1.0 / eta0, std::nullopt}};
    auto back = select_surface(top, sc.tags.back, sc.mesh);
    if (sc.back == back_termination::pec)
        pec.push_back(back);
    else
        walls.push_back({back, 1.0 / eta0, std::nullopt});

    std::vector<unit_cell_point> out(sc.frequencies.size());
    parallel_for(sc.frequencies.size(), threads, [&](std::size_t i) {
        const double f = sc.frequencies[i];
        port_spec port;
        port.surface = port_surface;
        port.direction = sc.direction;
        port.polarization = sc.polarization;
        port.amplitude = sc.amplitude;
        port.frequency = f;
        prepare_port(port, sc.mesh, top);

        std::vector<cvector> sources{assemble_port_rhs(port, sc.mesh, top)};
        auto sys = assemble(sc.mesh, top, sc.materials, walls, pec, sources, f);
        auto u = solve(sys);
        const double res = relative_residual(sys.A, u, sys.constrain(sys.rhs));
        auto mats = resolve_materials(sc.mesh, sc.materials, f);
        cplx z = extract_wave_impedance(sc.mesh, top, mats, u, plane, port.polarization, port.direction,
                                        sys.omega, std::abs(sc.amplitude) / eta0);
        cplx zr = translate_impedance(z, sc.separation, wavenumber(f));
        out[i] = {f, z, zr, 1.0 / zr, res};
    });
    return out;
}

inline admittance_table run_unit_cell(const unit_cell_scenario& sc, std::size_t threads = 1)
{
    auto pts = run_unit_cell_detailed(sc, threads);
    std::vector<double> f;
    std::vector<cplx> y;
    for (const auto& p : pts)
    {
        f.push_back(p.frequency);
        y.push_back(p.y_eq);
    }
    return admittance_table(std::move(f), std::move(y));
}

/*
 * Geometry of a wall cell: a metal back wall at z = 0 covered by a 3x3
 * array of ferrite tiles, a solid foam base and 2x2 pyramidal foam cones,
 * then air up to the measurement plane and the port. Region tags: 1 air,
 * 2 foam, 3 ferrite. With all thicknesses zero the cell is empty air and
 * the plane sits `plane_height` above the back wall.
 */
struct absorber_cell_geometry
{
    double width = 0.6;               /* lateral period, m */
    double ferrite_thickness = 0.0065;
    double tile_gap = 0.0;            /* air gap between neighboring tiles */
    double foam_base = 0.05;
    double cone_height = 0.45;
    double plane_height = 0.8;        /* Pi above the back wall */
    double port_height = 1.2;         /* port plane above the back wall */
    std::size_t lateral_cells = 12;
    double dz_ferrite = 0.0013;
    double dz_absorber = 0.025;
    double dz_air = 0.025;
};

inline constexpr int region_air = 1;
inline constexpr int region_foam = 2;
inline constexpr int region_ferrite = 3;

namespace detail {

inline void append_layer(std::vector<double>& ticks, double top, double dz)
{
    const double bottom = ticks.back();
    if (top <= bottom + 1e-12)
        return;
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((top - bottom) / dz - 1e-9)));
    for (std::size_t i = 1; i <= n; i++)
        ticks.push_back(i == n ? top : bottom + (top - bottom) * static_cast<double>(i) / static_cast<double>(n));
}

} // namespace detail

inline tet_mesh make_absorber_cell(const absorber_cell_geometry& g, const unit_cell_tags& tags = {})
{
    const double z_ferrite = g.ferrite_thickness;
    const double z_base = z_ferrite + g.foam_base;
    const double z_tip = z_base + g.cone_height;
    if (g.width <= 0.0 || g.lateral_cells == 0)
        throw config_error("unit cell: width and lateral cell count must be positive");
    if (!(g.plane_height > z_tip) || !(g.port_height > g.plane_height))
        throw config_error("unit cell: need absorber tips < measurement plane < port plane");

    structured_box box;
    box.lattice = box_lattice::kuhn;
    for (int d = 0; d < 2; d++)
    {
        box.ticks[d].clear();
        for (std::size_t i = 0; i <= g.lateral_cells; i++)
            box.ticks[d].push_back(g.width * static_cast<double>(i) / static_cast<double>(g.lateral_cells));
    }
    auto& zt = box.ticks[2];
    zt = {0.0};
    detail::append_layer(zt, z_ferrite, g.dz_ferrite);
    detail::append_layer(zt, z_tip, g.dz_absorber);
    detail::append_layer(zt, g.plane_height, g.dz_air);
    const std::size_t plane_index = zt.size() - 1;
    detail::append_layer(zt, g.port_height, g.dz_air);

    box.region = [g, z_ferrite, z_base, z_tip](const vec3& c) {
        if (c(2) < z_ferrite)
        {
            /* 3x3 tiles separated by tile_gap */
            const double tile = g.width / 3.0;
            auto inside_tile = [&](double x) {
                double r = std::fmod(x, tile);
                return r > 0.5 * g.tile_gap && r < tile - 0.5 * g.tile_gap;
            };
            return inside_tile(c(0)) && inside_tile(c(1)) ? region_ferrite : region_air;
        }
        if (c(2) < z_base)
            return region_foam;
        if (c(2) < z_tip)
        {
            /* 2x2 pyramids with square bases of side width/2 */
            const double half = g.width / 4.0;
            const double u = std::fmod(c(0), 2.0 * half) - half;
            const double v = std::fmod(c(1), 2.0 * half) - half;
            const double reach = half * (1.0 - (c(2) - z_base) / g.cone_height);
            return std::max(std::abs(u), std::abs(v)) <= reach ? region_foam : region_air;
        }
        return region_air;
    };

    box.wall_tags = {tags.side_pec, tags.side_pec, 0, 0, tags.back, tags.port};
    box.planes.push_back({2, plane_index, tags.plane});
    return generate_box_mesh(box);
}

} // namespace dga
