/*
 * Global system assembly, sparse direct factorization and field probes.
 *
 *   (C~ M_nu C - omega^2 M_eps) U + i omega M_Y U = b
 *
 * The system matrix is complex symmetric (not Hermitian). Perfect electric
 * conductor faces are eliminated exactly: their edge unknowns are pinned to
 * zero by identity rows and columns, which keeps the matrix symmetric.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <suitesparse/umfpack.h>

#include "dga/boundary.hpp"
#include "dga/constants.hpp"
#include "dga/errors.hpp"
#include "dga/materials.hpp"
#include "dga/mesh.hpp"
#include "dga/whitney.hpp"

namespace dga {

using element_system_t = Eigen::Matrix<cplx, 6, 6>;

/* K^v = C^T M_nu^v C - omega^2 M_eps^v */
inline element_system_t element_system(const tet_element& el, const element_material_matrices& m, double omega)
{
    const Eigen::Matrix<double, 4, 6> C = local_curl_incidence(el);
    const Eigen::Matrix<cplx, 4, 6> Cc = C.cast<cplx>();
    return Cc.transpose() * m.M_nu * Cc - (omega * omega) * m.M_eps;
}

inline element_system_t element_system(const tet_mesh& msh, std::size_t t, const material_value& mat, double omega)
{
    auto el = make_tet_element(msh, t);
    return element_system(el, element_matrices(el, mat.eps_r, mat.mu_r), omega);
}

inline std::array<cplx, 6> tet_dofs(const topology& top, const cvector& u, std::size_t t)
{
    std::array<cplx, 6> d;
    for (int k = 0; k < 6; k++)
        d[k] = u(top.tet_edges[t][k]);
    return d;
}

/* Edge unknowns on the given surfaces, flagged for elimination. */
inline std::vector<char> pec_dofs(const topology& top, std::span<const surface_selection> pec)
{
    std::vector<char> fixed(top.num_edges(), 0);
    for (const auto& s : pec)
        for (auto e : s.edges)
            fixed[e] = 1;
    return fixed;
}

struct assembled_system
{
    sparse_matrix K;   /* C~ M_nu C - omega^2 M_eps, unconstrained */
    sparse_matrix M_Y; /* sum of admittance walls */
    sparse_matrix A;   /* K + i omega M_Y with PEC rows/columns pinned */
    cvector rhs;
    double omega = 0.0;
    std::vector<char> fixed;

    std::size_t num_dofs() const { return static_cast<std::size_t>(A.rows()); }

    /* Applies the PEC pinning to an extra right-hand side. */
    cvector constrain(cvector b) const
    {
        for (std::size_t i = 0; i < fixed.size(); i++)
            if (fixed[i])
                b(i) = 0.0;
        return b;
    }
};

inline sparse_matrix assemble_stiffness(const tet_mesh& msh, const topology& top,
                                        const std::vector<material_value>& mats, double omega)
{
    std::vector<Eigen::Triplet<cplx>> tr;
    tr.reserve(36 * msh.num_tets());
    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        auto Kv = element_system(msh, t, mats[t], omega);
        const auto& ge = top.tet_edges[t];
        for (int i = 0; i < 6; i++)
            for (int j = 0; j < 6; j++)
                tr.emplace_back(ge[i], ge[j], Kv(i, j));
    }
    sparse_matrix K(top.num_edges(), top.num_edges());
    K.setFromTriplets(tr.begin(), tr.end());
    return K;
}

inline assembled_system assemble(const tet_mesh& msh, const topology& top, const material_map& materials,
                                 std::span<const admittance_spec> walls, std::span<const surface_selection> pec,
                                 std::span<const cvector> sources, double f)
{
    assembled_system sys;
    sys.omega = angular_frequency(f);
    const auto n = top.num_edges();

    auto mats = resolve_materials(msh, materials, f);
    sys.K = assemble_stiffness(msh, top, mats, sys.omega);

    sys.M_Y.resize(n, n);
    for (const auto& w : walls)
        sys.M_Y += assemble_admittance(w, msh, top, f);

    sys.A = sys.K + (I * sys.omega) * sys.M_Y;

    sys.rhs = cvector::Zero(n);
    for (const auto& s : sources)
    {
        if (static_cast<std::size_t>(s.size()) != n)
            throw config_error("source vector has " + std::to_string(s.size()) + " entries, expected " +
                               std::to_string(n));
        sys.rhs += s;
    }

    sys.fixed = pec_dofs(top, pec);
    for (Eigen::Index c = 0; c < sys.A.outerSize(); c++)
        for (sparse_matrix::InnerIterator it(sys.A, c); it; ++it)
            if (sys.fixed[it.row()] || sys.fixed[it.col()])
                it.valueRef() = it.row() == it.col() ? cplx(1.0) : cplx(0.0);
    for (std::size_t i = 0; i < n; i++)
        if (sys.fixed[i] && sys.A.coeff(i, i) == cplx(0.0))
            sys.A.coeffRef(i, i) = 1.0;
    sys.A.prune(cplx(0.0));
    sys.A.makeCompressed();
    sys.rhs = sys.constrain(sys.rhs);
    return sys;
}

inline double max_abs(const sparse_matrix& A)
{
    double m = 0.0;
    for (Eigen::Index c = 0; c < A.outerSize(); c++)
        for (sparse_matrix::InnerIterator it(A, c); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

/* max |A - A^T| / max |A| */
inline double relative_asymmetry(const sparse_matrix& A)
{
    sparse_matrix At = A.transpose();
    sparse_matrix Dm = A - At;
    const double a = max_abs(A);
    return a > 0 ? max_abs(Dm) / a : 0.0;
}

/* RAII wrapper over UMFPACK's complex LU with 64-bit indices. */
class sparse_lu
{
    SuiteSparse_long n_ = 0;
    std::vector<SuiteSparse_long> Ap_, Ai_;
    std::vector<cplx> Ax_;
    void* numeric_ = nullptr;
    double rcond_ = std::numeric_limits<double>::quiet_NaN();
    std::array<double, UMFPACK_CONTROL> control_{};

public:
    explicit sparse_lu(const sparse_matrix& A)
    {
        if (A.rows() != A.cols())
            throw numerical_error("sparse_lu: matrix is not square");
        sparse_matrix Ac = A;
        Ac.makeCompressed();
        n_ = Ac.rows();
        Ap_.assign(Ac.outerIndexPtr(), Ac.outerIndexPtr() + n_ + 1);
        Ai_.assign(Ac.innerIndexPtr(), Ac.innerIndexPtr() + Ac.nonZeros());
        Ax_.assign(Ac.valuePtr(), Ac.valuePtr() + Ac.nonZeros());

        umfpack_zl_defaults(control_.data());
        control_[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
        control_[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;

        std::array<double, UMFPACK_INFO> info{};
        void* symbolic = nullptr;
        auto* ax = reinterpret_cast<double*>(Ax_.data());
        int st = umfpack_zl_symbolic(n_, n_, Ap_.data(), Ai_.data(), ax, nullptr, &symbolic, control_.data(),
                                     info.data());
        if (st != UMFPACK_OK)
            throw numerical_error("symbolic factorization failed, UMFPACK status " + std::to_string(st));
        st = umfpack_zl_numeric(Ap_.data(), Ai_.data(), ax, nullptr, symbolic, &numeric_, control_.data(),
                                info.data());
        umfpack_zl_free_symbolic(&symbolic);
        rcond_ = info[UMFPACK_RCOND];
        if (st == UMFPACK_WARNING_singular_matrix)
        {
            umfpack_zl_free_numeric(&numeric_);
            throw numerical_error("singular system matrix (reciprocal condition estimate " +
                                  std::to_string(rcond_) + ")");
        }
        if (st != UMFPACK_OK)
        {
            if (numeric_)
                umfpack_zl_free_numeric(&numeric_);
            throw numerical_error("numeric factorization failed, UMFPACK status " + std::to_string(st));
        }
    }

    sparse_lu(const sparse_lu&) = delete;
    sparse_lu& operator=(const sparse_lu&) = delete;

    ~sparse_lu()
    {
        if (numeric_)
            umfpack_zl_free_numeric(&numeric_);
    }

    /* Reciprocal condition estimate from the pivots. */
    double rcond() const { return rcond_; }

    cvector solve(const cvector& b) const
    {
        if (b.size() != n_)
            throw numerical_error("right-hand side size mismatch");
        cvector x(n_);
        cvector bb = b;
        std::array<double, UMFPACK_INFO> info{};
        int st = umfpack_zl_solve(UMFPACK_A, Ap_.data(), Ai_.data(), reinterpret_cast<const double*>(Ax_.data()),
                                  nullptr, reinterpret_cast<double*>(x.data()), nullptr,
                                  reinterpret_cast<const double*>(bb.data()), nullptr, numeric_, control_.data(),
                                  info.data());
        if (st != UMFPACK_OK)
            throw numerical_error("triangular solve failed, UMFPACK status " + std::to_string(st));
        return x;
    }
};

inline constexpr double residual_tolerance = 1e-8;

inline double relative_residual(const sparse_matrix& A, const cvector& x, const cvector& b)
{
    const double nb = b.norm();
    return nb > 0 ? (A * x - b).norm() / nb : (A * x).norm();
}

/* Factorization of one assembled system, reusable for many right-hand sides
 * (several source configurations at the same frequency). Concurrent solve()
 * calls are safe. */
class factorized_system
{
    const assembled_system* sys_;
    std::unique_ptr<sparse_lu> lu_;

public:
    explicit factorized_system(const assembled_system& sys)
        : sys_(&sys), lu_(std::make_unique<sparse_lu>(sys.A))
    {}

    double rcond() const { return lu_->rcond(); }

    cvector solve(const cvector& rhs) const
    {
        cvector b = sys_->constrain(rhs);
        if (b.isZero(0.0))
            return cvector::Zero(b.size());
        cvector x = lu_->solve(b);
        double res = relative_residual(sys_->A, x, b);
        if (!(res < residual_tolerance))
        {
            /* one step of refinement before giving up */
            x += lu_->solve(b - sys_->A * x);
            res = relative_residual(sys_->A, x, b);
        }
        if (!(res < residual_tolerance))
            throw numerical_error("solver residual " + std::to_string(res) + " above " +
                                  std::to_string(residual_tolerance) + " (rcond " + std::to_string(rcond()) + ")");
        return x;
    }
};

inline cvector solve(const assembled_system& sys)
{
    if (sys.rhs.isZero(0.0))
        return cvector::Zero(sys.rhs.size());
    factorized_system fs(sys);
    return fs.solve(sys.rhs);
}

/* Finds the tet containing a point. Linear scan for small meshes, uniform
 * bucket grid above 10^4 tets. */
class point_locator
{
    const tet_mesh* msh_;
    vec3 lo_, hi_;
    std::array<std::size_t, 3> dims_{1, 1, 1};
    std::vector<std::vector<std::size_t>> buckets_;
    bool indexed_ = false;

    static constexpr double inside_tol = 1e-9;

    std::size_t cell_index(const vec3& p, int d) const
    {
        double t = (p(d) - lo_(d)) / (hi_(d) - lo_(d));
        auto i = static_cast<long long>(std::floor(t * dims_[d]));
        return static_cast<std::size_t>(std::clamp<long long>(i, 0, static_cast<long long>(dims_[d]) - 1));
    }

    bool contains(std::size_t t, const vec3& p) const
    {
        auto el = make_tet_element(*msh_, t);
        auto l = el.barycentric(p);
        return std::all_of(l.begin(), l.end(), [](double v) { return v >= -inside_tol; });
    }

public:
    static constexpr std::size_t index_threshold = 10000;

    explicit point_locator(const tet_mesh& msh) : msh_(&msh)
    {
        lo_ = hi_ = msh.nodes.front();
        for (const auto& p : msh.nodes)
        {
            lo_ = lo_.cwiseMin(p);
            hi_ = hi_.cwiseMax(p);
        }
        if (msh.num_tets() <= index_threshold)
            return;

        indexed_ = true;
        const double per_axis = std::cbrt(static_cast<double>(msh.num_tets()) / 4.0);
        const vec3 ext = hi_ - lo_;
        const double h = std::cbrt(ext.prod()) / per_axis;
        for (int d = 0; d < 3; d++)
            dims_[d] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ext(d) / h)));
        buckets_.resize(dims_[0] * dims_[1] * dims_[2]);
        for (std::size_t t = 0; t < msh.num_tets(); t++)
        {
            auto pts = msh.tet_points(t);
            vec3 a = pts[0], b = pts[0];
            for (const auto& q : pts)
            {
                a = a.cwiseMin(q);
                b = b.cwiseMax(q);
            }
            for (auto i = cell_index(a, 0); i <= cell_index(b, 0); i++)
                for (auto j = cell_index(a, 1); j <= cell_index(b, 1); j++)
                    for (auto k = cell_index(a, 2); k <= cell_index(b, 2); k++)
                        buckets_[(k * dims_[1] + j) * dims_[0] + i].push_back(t);
        }
    }

    std::optional<std::size_t> locate(const vec3& p) const
    {
        if (!indexed_)
        {
            for (std::size_t t = 0; t < msh_->num_tets(); t++)
                if (contains(t, p))
                    return t;
            return std::nullopt;
        }
        for (int d = 0; d < 3; d++)
            if (p(d) < lo_(d) - inside_tol || p(d) > hi_(d) + inside_tol)
                return std::nullopt;
        const auto& b = buckets_[(cell_index(p, 2) * dims_[1] + cell_index(p, 1)) * dims_[0] + cell_index(p, 0)];
        for (auto t : b)
            if (contains(t, p))
                return t;
        return std::nullopt;
    }
};

inline constexpr double dbuv_zero_sentinel = -999.0;

/* 20 log10(|E| / 1 uV/m); zero field maps to the sentinel. */
inline double to_dbuv(double magnitude)
{
    if (!(magnitude > 0.0))
        return dbuv_zero_sentinel;
    return 20.0 * std::log10(magnitude / 1e-6);
}

struct probe_result
{
    vec3 point;
    cvec3 E;
    std::size_t tet = no_tet;

    double magnitude() const { return E.norm(); }
    double dbuv() const { return to_dbuv(magnitude()); }
};

inline probe_result probe_field(const tet_mesh& msh, const topology& top, const point_locator& loc,
                                const cvector& u, const vec3& p)
{
    auto t = loc.locate(p);
    if (!t)
        throw domain_error("probe point (" + std::to_string(p(0)) + ", " + std::to_string(p(1)) + ", " +
                           std::to_string(p(2)) + ") lies outside the mesh");
    auto el = make_tet_element(msh, *t);
    return {p, el.field(tet_dofs(top, u, *t), p), *t};
}

inline probe_result probe_field(const tet_mesh& msh, const topology& top, const cvector& u, const vec3& p)
{
    point_locator loc(msh);
    return probe_field(msh, top, loc, u, p);
}

} // namespace dga
