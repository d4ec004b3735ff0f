/*
 * Scenario orchestration behind the command line: single runs, the setup
 * sweep, the closed-form dipole comparison and the unit-cell workflow.
 *
 * Frequencies run on a bounded worker pool; every result is stored by
 * frequency index and written by the calling thread afterwards, so output
 * files do not depend on scheduling.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dga/boundary.hpp"
#include "dga/config.hpp"
#include "dga/homogenization.hpp"
#include "dga/log.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/meshgen.hpp"
#include "dga/parallel.hpp"
#include "dga/radiator.hpp"
#include "dga/solver.hpp"
#include "dga/sources.hpp"

namespace dga {

struct run_options
{
    std::size_t threads = 1;
    bool dump_traces = false;
    std::optional<std::string> output; /* overrides the config */
};

struct mesh_advice
{
    double sphere_diameter; /* m, comparable with the wavelength */
    double edge_length;     /* m, lambda / 10 */
    bool in_range;          /* lambda within the band one mesh is meant to cover */
};

inline constexpr double guidance_lambda_min = 0.77;
inline constexpr double guidance_lambda_max = 3.3;
/* the band limits are printed to two digits */
inline constexpr double guidance_band_tol = 0.01;

inline mesh_advice mesh_guidance(double f)
{
    if (!(f > 0.0))
        throw domain_error("mesh guidance needs a positive frequency");
    const double lambda = wavelength(f);
    const bool ok = lambda >= guidance_lambda_min * (1.0 - guidance_band_tol) &&
                    lambda <= guidance_lambda_max * (1.0 + guidance_band_tol);
    return {lambda, lambda / 10.0, ok};
}

inline double max_edge_length(const topology& top)
{
    double m = 0.0;
    for (double l : top.edge_length)
        m = std::max(m, l);
    return m;
}

/* Mesh, topology and boundary data shared by every frequency of a run. */
struct model
{
    tet_mesh msh;
    topology top;
    std::unique_ptr<point_locator> locator;
    material_map materials;
    std::vector<admittance_spec> walls;
    std::vector<surface_selection> pec;
    std::optional<surface_selection> port_surface;
};

inline std::unique_ptr<model> build_model(const scenario_config& cfg)
{
    auto m = std::make_unique<model>();
    if (cfg.mesh_path)
        m->msh = load_mesh(*cfg.mesh_path);
    else if (cfg.mesh_box)
        m->msh = generate_box_mesh(*cfg.mesh_box);
    else
        throw config_error("config: no mesh given");
    m->top = build_topology(m->msh);
    m->locator = std::make_unique<point_locator>(m->msh);
    m->materials = cfg.materials;
    for (auto r : m->msh.regions)
        if (!m->materials.count(r))
            throw config_error("no material for region tag " + std::to_string(r));

    for (const auto& b : cfg.boundaries)
    {
        auto s = select_surface(m->top, b.tag, m->msh);
        if (!s.on_boundary)
            throw config_error("boundary tag " + std::to_string(b.tag) + " is not on the domain boundary");
        if (b.type == boundary_config::kind::pec)
            m->pec.push_back(std::move(s));
        else
        {
            admittance_spec w{std::move(s), b.value, std::nullopt};
            if (b.table)
                w.table = read_admittance_table(*b.table);
            m->walls.push_back(std::move(w));
        }
    }
    if (cfg.port)
    {
        m->port_surface = select_surface(m->top, cfg.port->tag, m->msh);
        /* a port absorbs like a matched wall */
        m->walls.push_back({*m->port_surface, 1.0 / eta0, std::nullopt});
    }
    return m;
}

inline void check_frequencies(const scenario_config& cfg, const model& m)
{
    if (cfg.frequencies.empty())
        throw config_error("config: empty frequency list");
    const double h = max_edge_length(m.top);
    for (double f : cfg.frequencies)
    {
        auto adv = mesh_guidance(f);
        if (!adv.in_range)
            warn("frequency " + std::to_string(f) + " Hz: wavelength outside the band [0.77 m, 3.3 m] a single "
                 "chamber mesh is meant to cover");
        if (h > 2.0 * adv.edge_length)
            warn("frequency " + std::to_string(f) + " Hz: longest mesh edge " + std::to_string(h) +
                 " m exceeds twice lambda/10");
    }
}

inline port_spec make_port(const scenario_config& cfg, const model& m, double f)
{
    port_spec p;
    p.surface = *m.port_surface;
    p.direction = cfg.port->direction;
    p.polarization = cfg.port->polarization;
    p.amplitude = cfg.port->amplitude;
    p.frequency = f;
    prepare_port(p, m.msh, m.top);
    return p;
}

/* Dipole of the radiator config at frequency f, placed and oriented as given. */
inline dipole_spec make_dipole(const radiator_config& rc, const std::optional<feed_table>& feed, double f,
                               const vec3& position, const quaternion& orientation)
{
    dipole_spec d;
    d.frequency = f;
    d.length = rc.length ? *rc.length : wavelength(f) / 2.0;
    d.center = position;
    d.orientation = orientation;
    if (rc.current)
        d.current = *rc.current;
    else
        d.current = feed_current(feed->at(f));
    return d;
}

inline std::optional<feed_table> load_feed(const scenario_config& cfg)
{
    if (cfg.radiator && cfg.radiator->feed)
        return read_feed_table(*cfg.radiator->feed);
    return std::nullopt;
}

struct probe_row
{
    double frequency;
    std::size_t probe_id;
    probe_result result;
};

inline void write_probe_header(std::ostream& os)
{
    os << "freq_hz, probe_id, x, y, z, re_ex, im_ex, re_ey, im_ey, re_ez, im_ez, mag_dbuv_m\n";
}

inline void write_probe_row(std::ostream& os, const probe_row& r)
{
    std::ostringstream ss;
    ss << std::setprecision(10);
    const auto& p = r.result.point;
    const auto& E = r.result.E;
    ss << r.frequency << ", " << r.probe_id << ", " << p(0) << ", " << p(1) << ", " << p(2);
    for (int c = 0; c < 3; c++)
        ss << ", " << E(c).real() << ", " << E(c).imag();
    ss << ", " << r.result.dbuv() << "\n";
    os << ss.str();
}

inline std::string frequency_label(double f)
{
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(0) << f;
    return ss.str();
}

inline std::filesystem::path output_dir(const scenario_config& cfg, const run_options& opt)
{
    std::filesystem::path dir = opt.output ? *opt.output : cfg.output;
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::ofstream open_output(const std::filesystem::path& p)
{
    std::ofstream os(p);
    if (!os)
        throw config_error("cannot write '" + p.string() + "'");
    return os;
}

/* Per-frequency fields of a single-source run. */
struct frequency_solution
{
    double frequency;
    std::vector<probe_row> probes;
    std::vector<cvec3> reference; /* closed-form field at the probes, radiator runs only */
    double rcond;
    double residual;
};

inline cvec3 reference_field(const dipole_spec& d, const std::optional<image_plane>& img, const vec3& p)
{
    cvec3 e = dipole_field(d, p).E;
    if (img)
    {
        /* image of a current element in a conducting plane: mirrored
         * position, axis mirrored and reversed */
        const mat3 R = mat3::Identity() - 2.0 * img->normal * img->normal.transpose();
        dipole_spec im = d;
        im.center = d.center - 2.0 * (d.center - img->point).dot(img->normal) * img->normal;
        const vec3 axis = -(R * rotate(d.orientation, vec3::UnitZ()));
        im.orientation = orientation_along(axis);
        e += dipole_field(im, p).E;
    }
    return e;
}

inline frequency_solution solve_frequency(const scenario_config& cfg, const model& m,
                                          const std::optional<tfsf_interface>& iface,
                                          const std::optional<feed_table>& feed, double f, const run_options& opt,
                                          const std::filesystem::path& dir)
{
    frequency_solution out;
    out.frequency = f;
    std::vector<cvector> sources;
    std::optional<tfsf_traces> traces;
    field_function src;
    std::optional<dipole_spec> dip;
    const double omega = angular_frequency(f);

    if (cfg.radiator)
    {
        dip = make_dipole(*cfg.radiator, feed, f, cfg.radiator->position, cfg.radiator->orientation);
        src = dipole_source(*dip);
        traces = compute_traces(*iface, m.msh, m.top, src);
        auto mats = resolve_materials(m.msh, m.materials, f);
        sources.push_back(assemble_tfsf_rhs(*iface, *traces, m.msh, m.top, mats, omega));
        if (opt.dump_traces)
        {
            auto os = open_output(dir / ("traces_" + frequency_label(f) + ".csv"));
            write_traces(os, *iface, traces->U_r);
        }
    }
    if (cfg.port)
        sources.push_back(assemble_port_rhs(make_port(cfg, m, f), m.msh, m.top));

    auto sys = assemble(m.msh, m.top, m.materials, m.walls, m.pec, sources, f);
    factorized_system fs(sys);
    cvector u = fs.solve(sys.rhs);
    out.rcond = fs.rcond();
    out.residual = relative_residual(sys.A, u, sys.rhs);

    for (std::size_t i = 0; i < cfg.probes.size(); i++)
    {
        const vec3& p = cfg.probes[i];
        probe_result r = traces ? probe_total_field(*iface, *traces, m.msh, m.top, *m.locator, u, src, p)
                                : probe_field(m.msh, m.top, *m.locator, u, p);
        out.probes.push_back({f, i, r});
        if (dip)
            out.reference.push_back(reference_field(*dip, cfg.reference_image, p));
    }
    return out;
}

inline std::string stage_message(double f, const std::string& what)
{
    return "at " + std::to_string(f) + " Hz: " + what;
}

template<typename Fn>
auto with_frequency_context(double f, Fn&& fn)
{
    try
    {
        return fn();
    }
    catch (const numerical_error& e)
    {
        throw numerical_error(stage_message(f, e.what()));
    }
    catch (const config_error& e)
    {
        throw config_error(stage_message(f, e.what()));
    }
}

inline std::vector<frequency_solution> run_frequencies(const scenario_config& cfg, const run_options& opt)
{
    if (cfg.probes.empty())
        throw config_error("config: empty probe list");
    if (!cfg.radiator && !cfg.port)
        throw config_error("config: needs a radiator or a port");
    auto m = build_model(cfg);
    check_frequencies(cfg, *m);
    std::optional<tfsf_interface> iface;
    if (cfg.radiator)
    {
        iface = build_interface(m->msh, m->top, cfg.radiator->sigma_tag);
        check_source_inside(*iface, *m->locator, cfg.radiator->position);
    }
    auto feed = load_feed(cfg);
    auto dir = output_dir(cfg, opt);

    std::vector<frequency_solution> sols(cfg.frequencies.size());
    parallel_for(cfg.frequencies.size(), opt.threads, [&](std::size_t i) {
        const double f = cfg.frequencies[i];
        sols[i] = with_frequency_context(f, [&] { return solve_frequency(cfg, *m, iface, feed, f, opt, dir); });
    });
    return sols;
}

/* `solve`: probe fields of the configured source over the frequency list. */
inline std::filesystem::path run_solve(const scenario_config& cfg, const run_options& opt)
{
    auto sols = run_frequencies(cfg, opt);
    auto path = output_dir(cfg, opt) / "probes.csv";
    auto os = open_output(path);
    write_probe_header(os);
    for (const auto& s : sols)
        for (const auto& r : s.probes)
            write_probe_row(os, r);
    return path;
}

struct dipole_comparison
{
    std::filesystem::path csv;
    double max_abs_diff_db = 0.0;
    std::size_t rows = 0;
    double max_residual = 0.0;
};

/* `validate-dipole`: simulated against closed-form levels at every probe. */
inline dipole_comparison run_validation(const scenario_config& cfg, const run_options& opt)
{
    if (!cfg.radiator)
        throw config_error("validate-dipole: config needs a radiator");
    auto sols = run_frequencies(cfg, opt);
    dipole_comparison cmp;
    cmp.csv = output_dir(cfg, opt) / "dipole_comparison.csv";
    auto os = open_output(cmp.csv);
    os << "freq_hz, probe_id, x, y, z, sim_dbuv_m, ref_dbuv_m, diff_db\n";
    os << std::setprecision(10);
    for (const auto& s : sols)
    {
        cmp.max_residual = std::max(cmp.max_residual, s.residual);
        for (std::size_t i = 0; i < s.probes.size(); i++)
        {
            const auto& r = s.probes[i];
            const double sim = r.result.dbuv();
            const double ref = to_dbuv(s.reference[i].norm());
            const bool zero = sim == dbuv_zero_sentinel || ref == dbuv_zero_sentinel;
            const double diff = zero ? 0.0 : sim - ref;
            const auto& p = r.result.point;
            os << s.frequency << ", " << r.probe_id << ", " << p(0) << ", " << p(1) << ", " << p(2) << ", " << sim
               << ", " << ref << ", " << diff << "\n";
            cmp.max_abs_diff_db = std::max(cmp.max_abs_diff_db, std::abs(diff));
            cmp.rows++;
        }
    }
    return cmp;
}

inline std::string setup_name(const transmitter_config& t, const receiver_config& r, const polarization_config& p)
{
    return "setup_" + t.name + "_" + r.name + "_" + p.name;
}

/* `sweep`: every transmitter x receiver x polarization setup at every
 * frequency. One factorization per frequency serves all transmitter and
 * polarization right-hand sides; receivers only select probes. */
struct sweep_result
{
    std::vector<std::filesystem::path> files;
    double max_residual = 0.0;
};

inline sweep_result run_sweep(const scenario_config& cfg, const run_options& opt)
{
    if (!cfg.setups)
        throw config_error("sweep: config needs a 'setups' section");
    if (!cfg.radiator)
        throw config_error("sweep: config needs a radiator (length and current or feed)");
    const auto& g = *cfg.setups;
    auto m = build_model(cfg);
    check_frequencies(cfg, *m);
    auto feed = load_feed(cfg);
    auto dir = output_dir(cfg, opt);

    std::vector<tfsf_interface> ifaces;
    for (const auto& t : g.transmitters)
    {
        ifaces.push_back(build_interface(m->msh, m->top, t.sigma_tag));
        check_source_inside(ifaces.back(), *m->locator, t.position);
    }

    const std::size_t nt = g.transmitters.size(), nr = g.receivers.size(), np = g.polarizations.size();
    /* rows[freq][setup] */
    std::vector<std::vector<std::vector<probe_row>>> rows(cfg.frequencies.size());
    std::vector<double> residuals(cfg.frequencies.size(), 0.0);

    parallel_for(cfg.frequencies.size(), opt.threads, [&](std::size_t fi) {
        const double f = cfg.frequencies[fi];
        rows[fi] = with_frequency_context(f, [&] {
            std::vector<std::vector<probe_row>> per_setup(nt * nr * np);
            auto sys = assemble(m->msh, m->top, m->materials, m->walls, m->pec, {}, f);
            factorized_system fs(sys);
            auto mats = resolve_materials(m->msh, m->materials, f);
            for (std::size_t ti = 0; ti < nt; ti++)
                for (std::size_t pi = 0; pi < np; pi++)
                {
                    auto d = make_dipole(*cfg.radiator, feed, f, g.transmitters[ti].position,
                                         g.polarizations[pi].orientation);
                    auto src = dipole_source(d);
                    auto tr = compute_traces(ifaces[ti], m->msh, m->top, src);
                    cvector rhs = assemble_tfsf_rhs(ifaces[ti], tr, m->msh, m->top, mats, sys.omega);
                    cvector u = fs.solve(rhs);
                    residuals[fi] = std::max(residuals[fi], relative_residual(sys.A, u, sys.constrain(rhs)));
                    for (std::size_t ri = 0; ri < nr; ri++)
                    {
                        auto& out = per_setup[(ti * nr + ri) * np + pi];
                        const auto& probes = g.receivers[ri].probes;
                        for (std::size_t k = 0; k < probes.size(); k++)
                            out.push_back({f, k,
                                           probe_total_field(ifaces[ti], tr, m->msh, m->top, *m->locator, u, src,
                                                             probes[k])});
                    }
                }
            return per_setup;
        });
    });

    sweep_result res;
    res.max_residual = *std::max_element(residuals.begin(), residuals.end());
    auto& files = res.files;
    for (std::size_t ti = 0; ti < nt; ti++)
        for (std::size_t ri = 0; ri < nr; ri++)
            for (std::size_t pi = 0; pi < np; pi++)
            {
                auto path = dir / (setup_name(g.transmitters[ti], g.receivers[ri], g.polarizations[pi]) + ".csv");
                auto os = open_output(path);
                write_probe_header(os);
                for (const auto& per_f : rows)
                    for (const auto& r : per_f[(ti * nr + ri) * np + pi])
                        write_probe_row(os, r);
                files.push_back(path);
            }
    return res;
}

/* Unit-cell scenario of a config's 'unit_cell' section and frequency list. */
inline unit_cell_scenario make_unit_cell_scenario(const scenario_config& cfg)
{
    if (!cfg.unit_cell)
        throw config_error("homogenize: config needs a 'unit_cell' section");
    if (cfg.frequencies.empty())
        throw config_error("homogenize: empty frequency list");
    const auto& uc = *cfg.unit_cell;
    unit_cell_scenario sc;
    sc.mesh = make_absorber_cell(uc.geometry);
    sc.back = uc.back;
    sc.separation = uc.separation;
    sc.frequencies = cfg.frequencies;
    sc.materials = cfg.materials;
    if (!sc.materials.count(region_air))
        sc.materials.emplace(region_air, material_table::vacuum());
    for (auto r : sc.mesh.regions)
        if (!sc.materials.count(r))
            throw config_error("homogenize: no material for region tag " + std::to_string(r) +
                               " (1 air, 2 foam, 3 ferrite)");
    return sc;
}

/* `homogenize`: equivalent admittance table of the configured unit cell. */
inline std::filesystem::path run_homogenize(const scenario_config& cfg, const run_options& opt)
{
    auto pts = run_unit_cell_detailed(make_unit_cell_scenario(cfg), opt.threads);
    auto dir = output_dir(cfg, opt);

    std::vector<double> f;
    std::vector<cplx> y;
    for (const auto& p : pts)
    {
        f.push_back(p.frequency);
        y.push_back(p.y_eq);
        if (p.y_eq.real() < 0.0)
            warn("unit cell at " + std::to_string(p.frequency) + " Hz: Re(Y_eq) < 0, not passive");
    }
    /* the table constructor rejects Re(Y) < 0; write the raw values anyway */
    auto path = dir / "admittance.csv";
    {
        auto os = open_output(path);
        os << "freq_hz, re_Y, im_Y\n" << std::setprecision(12);
        for (std::size_t i = 0; i < f.size(); i++)
            os << f[i] << ", " << y[i].real() << ", " << y[i].imag() << "\n";
    }
    {
        auto os = open_output(dir / "unit_cell.csv");
        os << "freq_hz, re_z_plane, im_z_plane, re_z_reference, im_z_reference\n" << std::setprecision(12);
        for (const auto& p : pts)
            os << p.frequency << ", " << p.z_plane.real() << ", " << p.z_plane.imag() << ", "
               << p.z_reference.real() << ", " << p.z_reference.imag() << "\n";
    }
    return path;
}

} // namespace dga
