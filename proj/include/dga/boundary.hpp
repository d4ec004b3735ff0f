/*
 * Admittance walls and plane-wave ports.
 *
 * The continuous condition h x n = Y (n x e) x n becomes F^b = M_Y U with
 *     M_Y(i,j) = Y int_S w_i . w_j dS
 * over the tangential traces of the edge functions, so M_Y only touches edges
 * of the selected boundary triangles. A port is the same condition plus the
 * forcing term -2 i omega F^b-, where F^b- collects the magnetomotive forces
 * of the incoming plane wave on the port edges:
 *     F^b-_i = int_S (H_inc x n) . w_i dS,   n the outward normal.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dga/constants.hpp"
#include "dga/csv.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/whitney.hpp"

namespace dga {

class admittance_table
{
    std::vector<double> freqs_;
    std::vector<cplx> values_;

public:
    admittance_table() = default;

    admittance_table(std::vector<double> freqs, std::vector<cplx> values)
        : freqs_(std::move(freqs)), values_(std::move(values))
    {
        if (freqs_.empty() || freqs_.size() != values_.size())
            throw config_error("admittance table: inconsistent table");
        for (std::size_t i = 1; i < freqs_.size(); i++)
            if (!(freqs_[i] > freqs_[i - 1]))
                throw config_error("admittance table: frequencies must be strictly increasing");
        for (auto y : values_)
            if (y.real() < 0.0)
                throw config_error("admittance table: Re(Y) < 0 is not a passive surface");
    }

    std::size_t size() const { return freqs_.size(); }
    const std::vector<double>& frequencies() const { return freqs_; }
    const std::vector<cplx>& values() const { return values_; }

    cplx interpolate(double f) const { return interpolate_knots(freqs_, values_, f, "admittance table"); }
};

inline admittance_table read_admittance_table(std::istream& is)
{
    auto tbl = read_csv(is, {"freq_hz", "re_Y", "im_Y"});
    std::vector<double> f;
    std::vector<cplx> y;
    for (const auto& row : tbl.rows)
    {
        f.push_back(csv_number(row, 0));
        y.emplace_back(csv_number(row, 1), csv_number(row, 2));
    }
    return admittance_table(std::move(f), std::move(y));
}

inline admittance_table read_admittance_table(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open admittance table '" + path + "'");
    return read_admittance_table(ifs);
}

inline void write_admittance_table(std::ostream& os, const admittance_table& tbl)
{
    os << "freq_hz, re_Y, im_Y\n";
    auto old = os.precision(12);
    for (std::size_t i = 0; i < tbl.size(); i++)
        os << tbl.frequencies()[i] << ", " << tbl.values()[i].real() << ", " << tbl.values()[i].imag() << "\n";
    os.precision(old);
}

struct admittance_spec
{
    surface_selection surface;
    cplx admittance{0.0, 0.0}; /* siemens, used when no table is given */
    std::optional<admittance_table> table;

    cplx at(double f) const
    {
        cplx y = table ? table->interpolate(f) : admittance;
        if (y.real() < 0.0)
            throw config_error("surface " + std::to_string(surface.tag) + ": Re(Y) < 0");
        return y;
    }
};

/* 3x3 tangential edge-function energy matrix of one boundary triangle. */
inline Eigen::Matrix3d surface_edge_mass(const tri_element& tri)
{
    auto mass = [&](int p, int q) { return tri.area * (p == q ? 2.0 : 1.0) / 12.0; };
    Eigen::Matrix3d M;
    for (int i = 0; i < 3; i++)
        for (int j = i; j < 3; j++)
        {
            auto [a, b] = tri_element::edge_nodes[i];
            auto [c, d] = tri_element::edge_nodes[j];
            const auto& g = tri.grad;
            double s = mass(a, c) * g[b].dot(g[d]) - mass(a, d) * g[b].dot(g[c]) -
                       mass(b, c) * g[a].dot(g[d]) + mass(b, d) * g[a].dot(g[c]);
            M(i, j) = M(j, i) = s;
        }
    return M;
}

inline sparse_matrix assemble_admittance(const admittance_spec& spec, const tet_mesh& msh, const topology& top,
                                         double f)
{
    if (!spec.surface.on_boundary)
        throw config_error("admittance surface " + std::to_string(spec.surface.tag) +
                           " is not part of the domain boundary");
    const cplx y = spec.at(f);
    std::vector<Eigen::Triplet<cplx>> tr;
    tr.reserve(9 * spec.surface.faces.size());
    for (auto fc : spec.surface.faces)
    {
        auto tri = make_tri_element(msh, top, fc);
        auto M = surface_edge_mass(tri);
        const auto& ge = top.face_edges[fc];
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++)
                tr.emplace_back(ge[i], ge[j], y * M(i, j));
    }
    sparse_matrix MY(top.num_edges(), top.num_edges());
    MY.setFromTriplets(tr.begin(), tr.end());
    return MY;
}

struct port_spec
{
    surface_selection surface;
    vec3 direction{0.0, 0.0, -1.0};    /* propagation of the incoming wave */
    vec3 polarization{1.0, 0.0, 0.0};  /* unit, tangent to the port */
    cplx amplitude{1.0, 0.0};          /* V/m at the reference point */
    double frequency = 0.0;
    vec3 reference = vec3::Zero();     /* phase reference, set by prepare_port */
};

inline constexpr double port_planarity_tol = 1e-9;

/* Normalizes the direction vectors, checks planarity and tangency and sets
 * the phase reference to the area-weighted port centroid. */
inline void prepare_port(port_spec& port, const tet_mesh& msh, const topology& top)
{
    if (port.frequency <= 0.0)
        throw config_error("port frequency must be positive");
    if (!port.surface.on_boundary)
        throw config_error("port surface " + std::to_string(port.surface.tag) + " is not on the boundary");
    port.direction.normalize();
    port.polarization.normalize();
    if (std::abs(port.direction.dot(port.polarization)) > 1e-9)
        throw config_error("port polarization is not orthogonal to the propagation direction");

    vec3 c = vec3::Zero();
    double area = 0.0;
    for (auto f : port.surface.faces)
    {
        auto tri = make_tri_element(msh, top, f);
        c += tri.area * tri.centroid();
        area += tri.area;
    }
    c /= area;
    const vec3 n = port.surface.normal(top, 0);
    for (auto f : port.surface.faces)
        for (auto v : top.faces[f])
            if (std::abs((msh.nodes[v] - c).dot(n)) > port_planarity_tol)
                throw config_error("port surface " + std::to_string(port.surface.tag) + " is not planar");
    if (std::abs(port.polarization.dot(n)) > 1e-9)
        throw config_error("port polarization is not tangential to the port surface");
    port.reference = c;
}

inline cvec3 port_incident_e(const port_spec& port, const vec3& x)
{
    const double k = wavenumber(port.frequency);
    const cplx phase = std::exp(-I * k * port.direction.dot(x - port.reference));
    return (port.amplitude * phase) * port.polarization.cast<cplx>();
}

inline cvec3 port_incident_h(const port_spec& port, const vec3& x)
{
    return tcross(port.direction.cast<cplx>(), port_incident_e(port, x)) / eta0;
}

/* Right-hand side contribution -2 i omega F^b-. */
inline cvector assemble_port_rhs(const port_spec& port, const tet_mesh& msh, const topology& top)
{
    const double omega = angular_frequency(port.frequency);
    cvector rhs = cvector::Zero(top.num_edges());
    if (port.amplitude == cplx(0.0))
        return rhs;
    for (std::size_t i = 0; i < port.surface.faces.size(); i++)
    {
        auto fc = port.surface.faces[i];
        auto tri = make_tri_element(msh, top, fc);
        const vec3 n = port.surface.normal(top, i);
        const auto& ge = top.face_edges[fc];
        for (const auto& qp : triangle_rule6())
        {
            const vec3 x = tri.point(qp.bary);
            const cvec3 hxn = tcross(port_incident_h(port, x), n.cast<cplx>());
            for (int k = 0; k < 3; k++)
                rhs(ge[k]) += -2.0 * I * omega * qp.weight * tri.area * tdot(hxn, tri.edge_basis(k, qp.bary));
        }
    }
    return rhs;
}

} // namespace dga
