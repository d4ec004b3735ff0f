/*
 * JSON scenario configuration. The schema is documented in README.md; every
 * relative path is resolved against the directory of the config file.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dga/boundary.hpp"
#include "dga/errors.hpp"
#include "dga/homogenization.hpp"
#include "dga/materials.hpp"
#include "dga/meshgen.hpp"
#include "dga/sources.hpp"

namespace dga {

using json = nlohmann::json;

struct boundary_config
{
    enum class kind { admittance, pec };
    int tag = 0;
    kind type = kind::admittance;
    cplx value{0.0, 0.0};
    std::optional<std::string> table; /* admittance CSV */
};

struct port_config
{
    int tag = 0;
    vec3 direction{0.0, 0.0, -1.0};
    vec3 polarization{1.0, 0.0, 0.0};
    cplx amplitude{1.0, 0.0};
};

struct radiator_config
{
    int sigma_tag = 0;
    std::optional<double> length; /* empty: half a wavelength at each frequency */
    vec3 position = vec3::Zero();
    quaternion orientation = quaternion::Identity();
    std::optional<cplx> current;
    std::optional<std::string> feed; /* feed characterization CSV */
};

struct transmitter_config
{
    std::string name;
    int sigma_tag = 0;
    vec3 position = vec3::Zero();
};

struct receiver_config
{
    std::string name;
    std::vector<vec3> probes;
};

struct polarization_config
{
    std::string name;
    quaternion orientation;
};

struct setup_grid
{
    std::vector<transmitter_config> transmitters;
    std::vector<receiver_config> receivers;
    std::vector<polarization_config> polarizations;

    std::size_t size() const { return transmitters.size() * receivers.size() * polarizations.size(); }
};

/* Perfectly conducting plane for the image-theory reference field. */
struct image_plane
{
    vec3 point = vec3::Zero();
    vec3 normal = vec3::UnitZ();
};

struct unit_cell_config
{
    absorber_cell_geometry geometry;
    back_termination back = back_termination::pec;
    double separation = 0.0;
};

struct scenario_config
{
    std::filesystem::path base_dir;
    std::optional<std::string> mesh_path;
    std::optional<structured_box> mesh_box;
    material_map materials;
    std::vector<boundary_config> boundaries;
    std::optional<port_config> port;
    std::optional<radiator_config> radiator;
    std::vector<double> frequencies;
    std::vector<vec3> probes;
    std::string output = "output";
    std::optional<setup_grid> setups;
    std::optional<image_plane> reference_image;
    std::optional<unit_cell_config> unit_cell;

    std::string resolve(const std::string& p) const
    {
        std::filesystem::path q(p);
        return q.is_absolute() ? q.string() : (base_dir / q).lexically_normal().string();
    }
};

/* Dipole axis along z for "vertical", along y (in the floor plane) for
 * "horizontal". */
inline quaternion polarization_orientation(const std::string& keyword)
{
    if (keyword == "vertical")
        return quaternion::Identity();
    if (keyword == "horizontal")
        return axis_angle(vec3::UnitX(), -std::numbers::pi / 2.0);
    throw config_error("unknown polarization '" + keyword + "', expected 'horizontal' or 'vertical'");
}

/* start, stop, step in Hz; stop is included when it lies on the grid. */
inline std::vector<double> frequency_grid(double start, double stop, double step)
{
    if (!(start > 0.0) || !(step > 0.0) || stop < start)
        throw config_error("frequency range needs 0 < start <= stop and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; i++)
        f[i] = start + static_cast<double>(i) * step;
    return f;
}

namespace detail {

inline const json& member(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key))
        throw config_error(where + ": missing '" + key + "'");
    return j.at(key);
}

inline double number(const json& j, const std::string& where)
{
    if (!j.is_number())
        throw config_error(where + ": expected a number");
    return j.get<double>();
}

inline int integer(const json& j, const std::string& where)
{
    if (!j.is_number_integer())
        throw config_error(where + ": expected an integer");
    return j.get<int>();
}

inline vec3 vector3(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 3)
        throw config_error(where + ": expected [x, y, z]");
    return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

/* A real number or [re, im]. */
inline cplx complex_value(const json& j, const std::string& where)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_array() && j.size() == 2)
        return {number(j[0], where), number(j[1], where)};
    throw config_error(where + ": expected a number or [re, im]");
}

inline quaternion quaternion_value(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 4)
        throw config_error(where + ": expected a quaternion [w, x, y, z]");
    quaternion q(number(j[0], where), number(j[1], where), number(j[2], where), number(j[3], where));
    return checked_unit(q);
}

inline quaternion orientation_value(const json& j, const std::string& where)
{
    if (j.contains("orientation") && j.contains("polarization"))
        throw config_error(where + ": give either 'orientation' or 'polarization', not both");
    if (j.contains("orientation"))
        return quaternion_value(j.at("orientation"), where + ".orientation");
    if (j.contains("polarization"))
        return polarization_orientation(j.at("polarization").get<std::string>());
    return quaternion::Identity();
}

inline structured_box parse_box(const json& j, const std::string& where)
{
    structured_box box;
    const std::string lat = j.value("lattice", "kuhn");
    if (lat == "kuhn")
        box.lattice = box_lattice::kuhn;
    else if (lat == "bcc")
        box.lattice = box_lattice::bcc;
    else
        throw config_error(where + ": lattice must be 'kuhn' or 'bcc'");
    box.lo = vector3(member(j, "lo", where), where + ".lo");
    box.hi = vector3(member(j, "hi", where), where + ".hi");
    const double h = number(member(j, "cell_size", where), where + ".cell_size");
    if (!(h > 0.0))
        throw config_error(where + ": cell_size must be positive");
    box.cells = structured_box::cells_for(box.lo, box.hi, h);

    static const std::array<const char*, 6> sides{"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};
    if (j.contains("walls"))
        for (std::size_t s = 0; s < 6; s++)
            if (j.at("walls").contains(sides[s]))
                box.wall_tags[s] = integer(j.at("walls").at(sides[s]), where + ".walls");
    if (j.contains("spheres"))
        for (const auto& s : j.at("spheres"))
        {
            const vec3 c = vector3(member(s, "center", where + ".spheres"), where + ".spheres.center");
            const double r = number(member(s, "radius", where + ".spheres"), where + ".spheres.radius");
            cell_set_surface enc{ball(c, r), integer(member(s, "tag", where + ".spheres"), where)};
            /* "open": sides the sphere may be cut by (symmetry planes) */
            if (s.contains("open"))
                for (const auto& side : s.at("open"))
                {
                    auto it = std::find(sides.begin(), sides.end(), side.get<std::string>());
                    if (it == sides.end())
                        throw config_error(where + ".spheres.open: unknown side '" + side.get<std::string>() + "'");
                    enc.open_sides[static_cast<std::size_t>(it - sides.begin())] = true;
                }
            box.enclosures.push_back(std::move(enc));
        }
    if (j.contains("planes"))
        for (const auto& p : j.at("planes"))
        {
            const int axis = integer(member(p, "axis", where + ".planes"), where + ".planes.axis");
            const double at = number(member(p, "at", where + ".planes"), where + ".planes.at");
            if (axis < 0 || axis > 2)
                throw config_error(where + ".planes: axis must be 0, 1 or 2");
            const double hh = (box.hi(axis) - box.lo(axis)) / box.cells[axis];
            const double idx = (at - box.lo(axis)) / hh;
            const auto rounded = std::llround(idx);
            if (std::abs(idx - rounded) > 1e-6)
                throw config_error(where + ".planes: plane does not fall on a grid plane");
            box.planes.push_back({axis, static_cast<std::size_t>(rounded),
                                  integer(member(p, "tag", where + ".planes"), where)});
        }
    return box;
}

inline std::vector<vec3> parse_probes(const json& j, const std::string& where)
{
    std::vector<vec3> out;
    if (!j.is_array())
        throw config_error(where + ": expected an array");
    for (const auto& p : j)
    {
        if (p.is_array())
        {
            out.push_back(vector3(p, where));
            continue;
        }
        /* {"ring": {center, radius, count, [phase]}} in the plane z = center.z */
        const auto& r = member(p, "ring", where);
        const vec3 c = vector3(member(r, "center", where + ".ring"), where + ".ring.center");
        const double rad = number(member(r, "radius", where + ".ring"), where + ".ring.radius");
        const int n = integer(member(r, "count", where + ".ring"), where + ".ring.count");
        const double phase = r.contains("phase") ? number(r.at("phase"), where + ".ring.phase") : 0.0;
        if (n <= 0 || !(rad > 0.0))
            throw config_error(where + ".ring: count and radius must be positive");
        for (int i = 0; i < n; i++)
        {
            const double a = phase + 2.0 * std::numbers::pi * i / n;
            out.push_back(c + rad * vec3(std::cos(a), std::sin(a), 0.0));
        }
    }
    return out;
}

} // namespace detail

inline scenario_config parse_config(const json& j, const std::filesystem::path& base_dir)
{
    scenario_config cfg;
    cfg.base_dir = base_dir;
    try
    {
        if (!j.is_object())
            throw config_error("config: top level must be an object");

        if (j.contains("mesh"))
        {
            const auto& m = j.at("mesh");
            if (m.is_string())
                cfg.mesh_path = cfg.resolve(m.get<std::string>());
            else
                cfg.mesh_box = detail::parse_box(detail::member(m, "box", "mesh"), "mesh.box");
        }

        if (j.contains("materials"))
            for (const auto& [key, v] : j.at("materials").items())
            {
                int tag = 0;
                try
                {
                    tag = std::stoi(key);
                }
                catch (const std::exception&)
                {
                    throw config_error("materials: key '" + key + "' is not a region tag");
                }
                if (v.is_string() && v.get<std::string>() == "vacuum")
                    cfg.materials.emplace(tag, material_table::vacuum());
                else if (v.is_string())
                    cfg.materials.emplace(tag, read_material_table(cfg.resolve(v.get<std::string>())));
                else
                {
                    const std::string w = "materials." + key;
                    cplx eps = v.contains("eps_r") ? detail::complex_value(v.at("eps_r"), w) : cplx(1.0);
                    cplx mu = v.contains("mu_r") ? detail::complex_value(v.at("mu_r"), w) : cplx(1.0);
                    cfg.materials.emplace(tag, material_table::constant(w, eps, mu));
                }
            }

        if (j.contains("boundaries"))
            for (const auto& b : j.at("boundaries"))
            {
                boundary_config bc;
                bc.tag = detail::integer(detail::member(b, "tag", "boundaries"), "boundaries.tag");
                const std::string type = b.value("type", "admittance");
                if (type == "pec")
                    bc.type = boundary_config::kind::pec;
                else if (type == "admittance")
                {
                    if (b.contains("table"))
                        bc.table = cfg.resolve(b.at("table").get<std::string>());
                    else
                    {
                        const auto& v = detail::member(b, "value", "boundaries");
                        if (v.is_string() && v.get<std::string>() == "free_space")
                            bc.value = 1.0 / eta0;
                        else
                            bc.value = detail::complex_value(v, "boundaries.value");
                        if (bc.value.real() < 0.0)
                            throw config_error("boundaries: Re(Y) < 0 on tag " + std::to_string(bc.tag));
                    }
                }
                else
                    throw config_error("boundaries: type must be 'admittance' or 'pec'");
                cfg.boundaries.push_back(bc);
            }

        if (j.contains("port"))
        {
            const auto& p = j.at("port");
            port_config pc;
            pc.tag = detail::integer(detail::member(p, "tag", "port"), "port.tag");
            if (p.contains("direction"))
                pc.direction = detail::vector3(p.at("direction"), "port.direction");
            if (p.contains("polarization"))
                pc.polarization = detail::vector3(p.at("polarization"), "port.polarization");
            if (p.contains("amplitude"))
                pc.amplitude = detail::complex_value(p.at("amplitude"), "port.amplitude");
            cfg.port = pc;
        }

        if (j.contains("radiator"))
        {
            const auto& r = j.at("radiator");
            radiator_config rc;
            rc.sigma_tag = detail::integer(detail::member(r, "sigma_tag", "radiator"), "radiator.sigma_tag");
            if (r.contains("length") && !(r.at("length").is_string() && r.at("length") == "half_wave"))
            {
                rc.length = detail::number(r.at("length"), "radiator.length");
                if (!(*rc.length > 0.0))
                    throw config_error("radiator: length must be positive");
            }
            if (r.contains("position"))
                rc.position = detail::vector3(r.at("position"), "radiator.position");
            rc.orientation = detail::orientation_value(r, "radiator");
            if (r.contains("current") && r.contains("feed"))
                throw config_error("radiator: give either 'current' or 'feed', not both");
            if (r.contains("current"))
                rc.current = detail::complex_value(r.at("current"), "radiator.current");
            else if (r.contains("feed"))
                rc.feed = cfg.resolve(r.at("feed").get<std::string>());
            else
                throw config_error("radiator: needs 'current' or 'feed'");
            cfg.radiator = rc;
        }

        if (j.contains("frequencies"))
        {
            const auto& f = j.at("frequencies");
            if (f.is_array())
                for (const auto& v : f)
                    cfg.frequencies.push_back(detail::number(v, "frequencies"));
            else
                cfg.frequencies =
                    frequency_grid(detail::number(detail::member(f, "start", "frequencies"), "frequencies.start"),
                                   detail::number(detail::member(f, "stop", "frequencies"), "frequencies.stop"),
                                   detail::number(detail::member(f, "step", "frequencies"), "frequencies.step"));
        }
        for (std::size_t i = 0; i < cfg.frequencies.size(); i++)
            if (!(cfg.frequencies[i] > 0.0) || (i > 0 && !(cfg.frequencies[i] > cfg.frequencies[i - 1])))
                throw config_error("frequencies must be positive and strictly ascending");

        if (j.contains("probes"))
            cfg.probes = detail::parse_probes(j.at("probes"), "probes");

        if (j.contains("output"))
            cfg.output = cfg.resolve(j.at("output").get<std::string>());
        else
            cfg.output = cfg.resolve(cfg.output);

        if (j.contains("setups"))
        {
            const auto& s = j.at("setups");
            setup_grid g;
            for (const auto& t : detail::member(s, "transmitters", "setups"))
                g.transmitters.push_back(
                    {detail::member(t, "name", "setups.transmitters").get<std::string>(),
                     detail::integer(detail::member(t, "sigma_tag", "setups.transmitters"), "sigma_tag"),
                     detail::vector3(detail::member(t, "position", "setups.transmitters"), "position")});
            for (const auto& r : detail::member(s, "receivers", "setups"))
                g.receivers.push_back({detail::member(r, "name", "setups.receivers").get<std::string>(),
                                       detail::parse_probes(detail::member(r, "probes", "setups.receivers"),
                                                            "setups.receivers.probes")});
            for (const auto& p : detail::member(s, "polarizations", "setups"))
                g.polarizations.push_back({p.get<std::string>(), polarization_orientation(p.get<std::string>())});
            if (g.size() == 0)
                throw config_error("setups: need at least one transmitter, receiver and polarization");
            for (const auto& r : g.receivers)
                if (r.probes.empty())
                    throw config_error("setups: receiver '" + r.name + "' has no probes");
            cfg.setups = g;
        }

        if (j.contains("reference_image"))
        {
            const auto& r = j.at("reference_image");
            image_plane ip;
            ip.point = detail::vector3(detail::member(r, "point", "reference_image"), "reference_image.point");
            ip.normal = detail::vector3(detail::member(r, "normal", "reference_image"), "reference_image.normal")
                            .normalized();
            cfg.reference_image = ip;
        }

        if (j.contains("unit_cell"))
        {
            const auto& u = j.at("unit_cell");
            unit_cell_config uc;
            auto& g = uc.geometry;
            auto num = [&](const char* key, double& dst) {
                if (u.contains(key))
                    dst = detail::number(u.at(key), std::string("unit_cell.") + key);
            };
            num("width", g.width);
            num("ferrite_thickness", g.ferrite_thickness);
            num("tile_gap", g.tile_gap);
            num("foam_base", g.foam_base);
            num("cone_height", g.cone_height);
            num("plane_height", g.plane_height);
            num("port_height", g.port_height);
            num("dz_ferrite", g.dz_ferrite);
            num("dz_absorber", g.dz_absorber);
            num("dz_air", g.dz_air);
            num("separation", uc.separation);
            if (u.contains("lateral_cells"))
                g.lateral_cells = static_cast<std::size_t>(detail::integer(u.at("lateral_cells"), "lateral_cells"));
            const std::string back = u.value("back", "pec");
            if (back == "pec")
                uc.back = back_termination::pec;
            else if (back == "matched")
                uc.back = back_termination::matched;
            else
                throw config_error("unit_cell.back must be 'pec' or 'matched'");
            if (uc.separation < 0.0)
                throw config_error("unit_cell.separation must be nonnegative");
            cfg.unit_cell = uc;
        }
    }
    catch (const json::exception& e)
    {
        throw config_error(std::string("config: ") + e.what());
    }
    return cfg;
}

inline scenario_config load_config(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open config '" + path + "'");
    json j;
    try
    {
        j = json::parse(ifs, nullptr, true, true);
    }
    catch (const json::exception& e)
    {
        throw config_error("config '" + path + "': " + e.what());
    }
    return parse_config(j, std::filesystem::absolute(path).parent_path());
}

} // namespace dga
