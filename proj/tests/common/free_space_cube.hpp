/*
 * Radiating sphere in a matched cube: cube of side 2 lambda centered on the
 * dipole, body-centered cubic lattice with cube spacing lambda/10, Sigma the
 * boundary of the tets whose centroid lies within 0.375 lambda, every wall
 * Y = 1/eta0.
 */
#pragma once

#include <memory>
#include <vector>

#include "dga/boundary.hpp"
#include "dga/meshgen.hpp"
#include "dga/radiator.hpp"
#include "dga/solver.hpp"

namespace dga::testing {

struct free_space_cube
{
    static constexpr int wall_tag = 1;
    static constexpr int sigma_tag = 7;

    double frequency;
    double lambda;
    tet_mesh msh;
    topology top;
    tfsf_interface iface;
    std::unique_ptr<point_locator> loc;
    material_map materials{{1, material_table::vacuum()}};
    std::vector<admittance_spec> walls;

    explicit free_space_cube(double f = 3e8, double side_lambdas = 2.0, double sigma_lambdas = 0.375,
                             double h_lambdas = 0.1)
        : frequency(f), lambda(c0 / f)
    {
        structured_box b;
        b.lattice = box_lattice::bcc;
        b.lo = vec3::Constant(-0.5 * side_lambdas * lambda);
        b.hi = -b.lo;
        b.cells = structured_box::cells_for(b.lo, b.hi, h_lambdas * lambda);
        b.wall_tags = {wall_tag, wall_tag, wall_tag, wall_tag, wall_tag, wall_tag};
        b.enclosures.push_back({ball(vec3::Zero(), sigma_lambdas * lambda), sigma_tag});
        msh = generate_box_mesh(b);
        top = build_topology(msh);
        iface = build_interface(msh, top, sigma_tag);
        loc = std::make_unique<point_locator>(msh);
        walls.push_back({select_surface(top, wall_tag, msh), 1.0 / eta0, std::nullopt});
    }

    dipole_spec half_wave(cplx current = 1.0) const
    {
        dipole_spec d;
        d.frequency = frequency;
        d.length = lambda / 2.0;
        d.current = current;
        return d;
    }

    assembled_system system(std::span<const cvector> sources = {}) const
    {
        return assemble(msh, top, materials, walls, {}, sources, frequency);
    }

    cvector rhs(const tfsf_traces& tr) const
    {
        return assemble_tfsf_rhs(iface, tr, msh, top, resolve_materials(msh, materials, frequency),
                                 angular_frequency(frequency));
    }
};

} // namespace dga::testing
