/*
 * Closed-form radiation of a center-fed thin dipole, its orientation and the
 * feed current derived from measured forward/reverse power.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "dga/constants.hpp"
#include "dga/csv.hpp"
#include "dga/errors.hpp"
#include "dga/geometry.hpp"
#include "dga/log.hpp"
#include "dga/materials.hpp"

namespace dga {

using quaternion = Eigen::Quaterniond;

inline constexpr double unit_quaternion_tol = 1e-12;
inline constexpr double renormalize_quaternion_tol = 1e-6;

/* Returns q normalized, warning when it is slightly off and throwing when it
 * is far from unit norm. */
inline quaternion checked_unit(const quaternion& q)
{
    const double dev = std::abs(q.norm() - 1.0);
    if (dev <= unit_quaternion_tol)
        return q;
    if (dev <= renormalize_quaternion_tol)
    {
        warn("quaternion norm off by " + std::to_string(dev) + ", normalized");
        return q.normalized();
    }
    throw domain_error("quaternion is not unit norm (|q| = " + std::to_string(q.norm()) + ")");
}

inline vec3 rotate(const quaternion& q, const vec3& v)
{
    return checked_unit(q) * v;
}

inline quaternion axis_angle(const vec3& axis, double angle)
{
    return quaternion(Eigen::AngleAxisd(angle, axis.normalized()));
}

/* Rotation taking the local dipole axis (z) onto the given direction. */
inline quaternion orientation_along(const vec3& axis)
{
    return quaternion::FromTwoVectors(vec3::UnitZ(), axis.normalized());
}

struct dipole_spec
{
    double length = 0.0;
    cplx current{0.0, 0.0};
    vec3 center = vec3::Zero();
    quaternion orientation = quaternion::Identity();
    double frequency = 0.0;

    double k() const { return wavenumber(frequency); }
};

inline void validate(const dipole_spec& d)
{
    if (!(d.length > 0.0))
        throw domain_error("dipole length must be positive");
    if (!(d.frequency > 0.0))
        throw domain_error("dipole frequency must be positive");
    if (std::abs(d.orientation.norm() - 1.0) > unit_quaternion_tol)
        throw domain_error("dipole orientation quaternion is not unit norm");
}

struct em_field
{
    cvec3 E;
    cvec3 H;
};

inline constexpr double axial_sin_tol = 1e-9;

/* Radiation-zone field of a center-fed dipole along its local z axis,
 *   E_theta = i eta I0 exp(-ikr) / (2 pi r) [cos(kL/2 cos th) - cos(kL/2)] / sin th,
 *   H_phi   = E_theta / eta,
 * rotated into the global frame. */
inline em_field dipole_field(const dipole_spec& d, const vec3& p)
{
    const quaternion q = checked_unit(d.orientation);
    const vec3 local = q.conjugate() * (p - d.center);
    const double r = local.norm();
    if (r < 1e-12)
        throw domain_error("dipole field evaluated at the dipole center");

    const double k = d.k();
    const double rho = std::hypot(local(0), local(1));
    const double sin_t = rho / r;
    const double cos_t = local(2) / r;
    if (sin_t < axial_sin_tol)
        return {cvec3::Zero(), cvec3::Zero()};

    const double cos_p = rho > 0 ? local(0) / rho : 1.0;
    const double sin_p = rho > 0 ? local(1) / rho : 0.0;

    const double half = 0.5 * k * d.length;
    const double pattern = (std::cos(half * cos_t) - std::cos(half)) / sin_t;
    const cplx e_theta = I * eta0 * d.current * std::exp(-I * k * r) / (2.0 * std::numbers::pi * r) * pattern;

    const vec3 theta_hat(cos_t * cos_p, cos_t * sin_p, -sin_t);
    const vec3 phi_hat(-sin_p, cos_p, 0.0);

    const vec3 th_g = q * theta_hat;
    const vec3 ph_g = q * phi_hat;
    return {e_theta * th_g.cast<cplx>(), (e_theta / eta0) * ph_g.cast<cplx>()};
}

/* Z_ant = Z0 (1 + Gamma) / (1 - Gamma) */
inline cplx gamma_to_impedance(cplx gamma, double z0)
{
    if (std::abs(1.0 - gamma) < 1e-15)
        throw domain_error("Gamma = 1 (open circuit) has no finite impedance");
    return z0 * (1.0 + gamma) / (1.0 - gamma);
}

inline cplx impedance_to_gamma(cplx z, double z0)
{
    return (z - z0) / (z + z0);
}

struct feed_characterization
{
    double frequency = 0.0;
    double p_fwd = 0.0; /* W */
    double p_rev = 0.0; /* W */
    cplx z_ant{50.0, 0.0};
    double z0 = 50.0;

    cplx gamma() const { return impedance_to_gamma(z_ant, z0); }
};

/* I0 = sqrt((P_fwd - P_rev) / R_ant), zero phase at the feed point. */
inline cplx feed_current(const feed_characterization& fc)
{
    if (fc.p_rev < 0.0 || fc.p_fwd < 0.0)
        throw domain_error("negative power in feed characterization");
    if (fc.p_rev > fc.p_fwd)
        throw domain_error("reverse power exceeds forward power");
    if (!(fc.z_ant.real() > 0.0))
        throw domain_error("antenna resistance must be positive");
    return std::sqrt((fc.p_fwd - fc.p_rev) / fc.z_ant.real());
}

class feed_table
{
    std::vector<double> freqs_;
    std::vector<double> p_fwd_, p_rev_;
    std::vector<cplx> z_;

public:
    feed_table() = default;

    void add(const feed_characterization& fc)
    {
        if (!freqs_.empty() && !(fc.frequency > freqs_.back()))
            throw config_error("feed table: frequencies must be strictly increasing");
        freqs_.push_back(fc.frequency);
        p_fwd_.push_back(fc.p_fwd);
        p_rev_.push_back(fc.p_rev);
        z_.push_back(fc.z_ant);
    }

    std::size_t size() const { return freqs_.size(); }

    feed_characterization at(double f) const
    {
        feed_characterization fc;
        fc.frequency = f;
        fc.p_fwd = interpolate_knots(freqs_, p_fwd_, f, "feed table");
        fc.p_rev = interpolate_knots(freqs_, p_rev_, f, "feed table");
        fc.z_ant = interpolate_knots(freqs_, z_, f, "feed table");
        return fc;
    }
};

inline feed_table read_feed_table(std::istream& is)
{
    auto tbl = read_csv(is, {"freq_hz", "p_fwd_w", "p_rev_w", "r_ant_ohm", "x_ant_ohm"});
    feed_table ft;
    for (const auto& row : tbl.rows)
    {
        feed_characterization fc;
        fc.frequency = csv_number(row, 0);
        fc.p_fwd = csv_number(row, 1);
        fc.p_rev = csv_number(row, 2);
        fc.z_ant = {csv_number(row, 3), csv_number(row, 4)};
        ft.add(fc);
    }
    if (ft.size() == 0)
        throw config_error("feed table has no rows");
    return ft;
}

inline feed_table read_feed_table(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open feed table '" + path + "'");
    return read_feed_table(ifs);
}

} // namespace dga
