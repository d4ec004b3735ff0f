/*
 * Small geometric vocabulary plus the quadrature rules used for trace and
 * load-vector integrals.
 */
#pragma once

#include <array>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "dga/constants.hpp"

namespace dga {

using vec3 = Eigen::Vector3d;
using cvec3 = Eigen::Vector3cd;
using mat3 = Eigen::Matrix3d;
using cmat3 = Eigen::Matrix3cd;

struct quad_point_1d
{
    double t;      /* position on [0,1] */
    double weight; /* weights sum to 1 */
};

/* Gauss-Legendre rules mapped to [0,1], 1 to 5 points. */
inline std::span<const quad_point_1d> gauss_legendre(std::size_t npts)
{
    static const std::array<quad_point_1d, 1> g1{{{0.5, 1.0}}};
    static const std::array<quad_point_1d, 2> g2{{
        {0.5 - 0.28867513459481287, 0.5},
        {0.5 + 0.28867513459481287, 0.5},
    }};
    static const std::array<quad_point_1d, 3> g3{{
        {0.5 - 0.38729833462074170, 5.0 / 18.0},
        {0.5, 8.0 / 18.0},
        {0.5 + 0.38729833462074170, 5.0 / 18.0},
    }};
    static const std::array<quad_point_1d, 4> g4{{
        {0.5 - 0.43056815579702629, 0.17392742256872693},
        {0.5 - 0.16999052179242813, 0.32607257743127307},
        {0.5 + 0.16999052179242813, 0.32607257743127307},
        {0.5 + 0.43056815579702629, 0.17392742256872693},
    }};
    static const std::array<quad_point_1d, 5> g5{{
        {0.5 - 0.45308992296933199, 0.11846344252809454},
        {0.5 - 0.26923465505284155, 0.23931433524968324},
        {0.5, 0.28444444444444444},
        {0.5 + 0.26923465505284155, 0.23931433524968324},
        {0.5 + 0.45308992296933199, 0.11846344252809454},
    }};
    switch (npts)
    {
        case 1: return g1;
        case 2: return g2;
        case 3: return g3;
        case 4: return g4;
        default: return g5;
    }
}

struct quad_point_tri
{
    std::array<double, 3> bary;
    double weight; /* weights sum to 1, multiply by the area */
};

/* 6-point degree-4 rule (Dunavant). */
inline std::span<const quad_point_tri> triangle_rule6()
{
    constexpr double a = 0.445948490915965, b = 0.108103018168070;
    constexpr double c = 0.091576213509771, d = 0.816847572980459;
    constexpr double wa = 0.223381589678011, wc = 0.109951743655322;
    static const std::array<quad_point_tri, 6> r{{
        {{a, a, b}, wa},
        {{a, b, a}, wa},
        {{b, a, a}, wa},
        {{c, c, d}, wc},
        {{c, d, c}, wc},
        {{d, c, c}, wc},
    }};
    return r;
}

/* Bilinear (unconjugated) product. Eigen's dot() conjugates its left operand,
 * which is never what the field integrals want. */
inline cplx tdot(const cvec3& a, const vec3& b)
{
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

inline cplx tdot(const cvec3& a, const cvec3& b)
{
    return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

/* Unconjugated cross product; Eigen's cross() conjugates complex results. */
inline cvec3 tcross(const cvec3& a, const cvec3& b)
{
    return {a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0)};
}

/* Line integral of f(x).dl along the straight segment a->b. */
template<typename Field>
cplx integrate_segment(const vec3& a, const vec3& b, Field&& f, std::size_t npts)
{
    const vec3 d = b - a;
    cplx acc = 0.0;
    for (const auto& qp : gauss_legendre(npts))
    {
        const cvec3 v = f(vec3(a + qp.t * d));
        acc += qp.weight * tdot(v, d);
    }
    return acc;
}

inline double signed_volume(const vec3& a, const vec3& b, const vec3& c, const vec3& d)
{
    return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

} // namespace dga
