/*
 * Frequency tables of complex relative permittivity and permeability, and the
 * constitutive matrices M_eps (edges -> dual faces) and M_nu (faces -> dual
 * edges).
 *
 * Time dependence is exp(+i omega t), so passive media have Im(eps_r) <= 0 and
 * Im(mu_r) <= 0; the table reader rejects anything else.
 *
 * The element matrices are the Whitney energy matrices
 *     M_eps(i,j) = int_v w_i . eps w_j,   M_nu(i,j) = int_v w_f_i . nu w_f_j,
 * symmetric, positive definite for real positive materials and exact for
 * uniform fields.
 */
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "dga/constants.hpp"
#include "dga/csv.hpp"
#include "dga/errors.hpp"
#include "dga/mesh.hpp"
#include "dga/whitney.hpp"

namespace dga {

using sparse_matrix = Eigen::SparseMatrix<cplx>;
using cvector = Eigen::VectorXcd;

/* Piecewise-linear interpolation over strictly increasing knots, real and
 * imaginary parts independently. A single knot means a constant value. */
template<typename Value>
Value interpolate_knots(const std::vector<double>& freqs, const std::vector<Value>& values, double f,
                        const std::string& what)
{
    if (freqs.empty())
        throw config_error(what + ": empty table");
    if (freqs.size() == 1)
        return values.front();
    if (f < freqs.front() || f > freqs.back())
        throw domain_error(what + ": frequency " + std::to_string(f) + " Hz outside table range [" +
                           std::to_string(freqs.front()) + ", " + std::to_string(freqs.back()) + "]");
    auto it = std::lower_bound(freqs.begin(), freqs.end(), f);
    auto i = static_cast<std::size_t>(it - freqs.begin());
    if (freqs[i] == f)
        return values[i];
    double t = (f - freqs[i - 1]) / (freqs[i] - freqs[i - 1]);
    return values[i - 1] + t * (values[i] - values[i - 1]);
}

struct material_value
{
    cplx eps_r{1.0, 0.0};
    cplx mu_r{1.0, 0.0};
};

class material_table
{
    std::string name_;
    std::vector<double> freqs_;
    std::vector<cplx> eps_;
    std::vector<cplx> mu_;

public:
    material_table() = default;

    material_table(std::string name, std::vector<double> freqs, std::vector<cplx> eps, std::vector<cplx> mu)
        : name_(std::move(name)), freqs_(std::move(freqs)), eps_(std::move(eps)), mu_(std::move(mu))
    {
        check();
    }

    static material_table constant(std::string name, cplx eps_r, cplx mu_r)
    {
        return material_table(std::move(name), {0.0}, {eps_r}, {mu_r});
    }

    static material_table vacuum() { return constant("vacuum", 1.0, 1.0); }

    const std::string& name() const { return name_; }
    std::size_t size() const { return freqs_.size(); }
    const std::vector<double>& frequencies() const { return freqs_; }

    material_value interpolate(double f) const
    {
        return {interpolate_knots(freqs_, eps_, f, name_), interpolate_knots(freqs_, mu_, f, name_)};
    }

private:
    void check() const
    {
        if (freqs_.empty() || freqs_.size() != eps_.size() || freqs_.size() != mu_.size())
            throw config_error("material '" + name_ + "': inconsistent table");
        for (std::size_t i = 1; i < freqs_.size(); i++)
            if (!(freqs_[i] > freqs_[i - 1]))
                throw config_error("material '" + name_ + "': frequencies must be strictly increasing");
        for (std::size_t i = 0; i < freqs_.size(); i++)
        {
            if (eps_[i].imag() > 0.0 || mu_[i].imag() > 0.0)
                throw config_error("material '" + name_ + "': positive imaginary part at " +
                                   std::to_string(freqs_[i]) +
                                   " Hz, passive media need Im <= 0 with exp(+i omega t)");
            if (mu_[i] == cplx(0.0))
                throw config_error("material '" + name_ + "': zero permeability");
        }
    }
};

inline material_table read_material_table(std::istream& is, std::string name)
{
    auto tbl = read_csv(is, {"freq_hz", "re_eps_r", "im_eps_r", "re_mu_r", "im_mu_r"});
    std::vector<double> f;
    std::vector<cplx> eps, mu;
    for (const auto& row : tbl.rows)
    {
        f.push_back(csv_number(row, 0));
        eps.emplace_back(csv_number(row, 1), csv_number(row, 2));
        mu.emplace_back(csv_number(row, 3), csv_number(row, 4));
    }
    if (f.empty())
        throw config_error("material '" + name + "': no rows");
    return material_table(std::move(name), std::move(f), std::move(eps), std::move(mu));
}

inline material_table read_material_table(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open material table '" + path + "'");
    return read_material_table(ifs, path);
}

using edge_matrix_t = Eigen::Matrix<cplx, 6, 6>;
using face_matrix_t = Eigen::Matrix<cplx, 4, 4>;

struct element_material_matrices
{
    edge_matrix_t M_eps;
    face_matrix_t M_nu;
};

/* Full 3x3 tensors: eps in F/m, nu in m/H. */
inline element_material_matrices element_matrices(const tet_element& el, const cmat3& eps, const cmat3& nu)
{
    if (std::abs(el.volume) < degenerate_volume)
        throw domain_error("degenerate tet, volume " + std::to_string(el.volume));

    /* int_v lambda_p lambda_q = V (1 + delta_pq) / 20 */
    auto mass = [&](int p, int q) { return el.volume * (p == q ? 2.0 : 1.0) / 20.0; };

    element_material_matrices m;

    /* w_e = lambda_a g_b - lambda_b g_a */
    struct term
    {
        int node;
        vec3 vec;
    };
    std::array<std::array<term, 2>, 6> we;
    for (int k = 0; k < 6; k++)
    {
        auto [a, b] = el.edge_nodes[k];
        we[k] = {{{a, el.grad[b]}, {b, -el.grad[a]}}};
    }
    for (int i = 0; i < 6; i++)
        for (int j = i; j < 6; j++)
        {
            cplx s = 0.0;
            for (const auto& ti : we[i])
                for (const auto& tj : we[j])
                    s += mass(ti.node, tj.node) * (ti.vec.cast<cplx>().transpose() * eps * tj.vec.cast<cplx>())(0);
            m.M_eps(i, j) = m.M_eps(j, i) = s;
        }

    /* w_f = 2 (lambda_a g_b x g_c + lambda_b g_c x g_a + lambda_c g_a x g_b) */
    std::array<std::array<term, 3>, 4> wf;
    for (int k = 0; k < 4; k++)
    {
        auto [a, b, c] = el.face_nodes[k];
        const auto& g = el.grad;
        wf[k] = {{{a, 2.0 * g[b].cross(g[c])}, {b, 2.0 * g[c].cross(g[a])}, {c, 2.0 * g[a].cross(g[b])}}};
    }
    for (int i = 0; i < 4; i++)
        for (int j = i; j < 4; j++)
        {
            cplx s = 0.0;
            for (const auto& ti : wf[i])
                for (const auto& tj : wf[j])
                    s += mass(ti.node, tj.node) * (ti.vec.cast<cplx>().transpose() * nu * tj.vec.cast<cplx>())(0);
            m.M_nu(i, j) = m.M_nu(j, i) = s;
        }
    return m;
}

inline element_material_matrices element_matrices(const tet_element& el, cplx eps_r, cplx mu_r)
{
    if (mu_r == cplx(0.0))
        throw domain_error("zero permeability");
    cmat3 eps = (eps0 * eps_r) * cmat3::Identity();
    cmat3 nu = (1.0 / (mu0 * mu_r)) * cmat3::Identity();
    return element_matrices(el, eps, nu);
}

using material_map = std::map<int, material_table>;

/* Per-tet material values at frequency f; throws on a region tag without a table. */
inline std::vector<material_value> resolve_materials(const tet_mesh& msh, const material_map& tables, double f)
{
    std::map<int, material_value> at_f;
    for (const auto& [tag, tbl] : tables)
        at_f[tag] = tbl.interpolate(f);
    std::vector<material_value> out(msh.num_tets());
    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        auto it = at_f.find(msh.regions[t]);
        if (it == at_f.end())
            throw config_error("no material for region tag " + std::to_string(msh.regions[t]));
        out[t] = it->second;
    }
    return out;
}

struct global_material_matrices
{
    sparse_matrix M_eps; /* edges x edges */
    sparse_matrix M_nu;  /* faces x faces */
};

inline global_material_matrices assemble_global(const tet_mesh& msh, const topology& top,
                                                const material_map& tables, double f)
{
    auto mats = resolve_materials(msh, tables, f);
    using trip = Eigen::Triplet<cplx>;
    std::vector<trip> te, tn;
    te.reserve(36 * msh.num_tets());
    tn.reserve(16 * msh.num_tets());
    for (std::size_t t = 0; t < msh.num_tets(); t++)
    {
        auto el = make_tet_element(msh, t);
        auto m = element_matrices(el, mats[t].eps_r, mats[t].mu_r);
        const auto& ge = top.tet_edges[t];
        const auto& gf = top.tet_faces[t];
        for (int i = 0; i < 6; i++)
            for (int j = 0; j < 6; j++)
                te.emplace_back(ge[i], ge[j], m.M_eps(i, j));
        for (int i = 0; i < 4; i++)
            for (int j = 0; j < 4; j++)
                tn.emplace_back(gf[i], gf[j], m.M_nu(i, j));
    }
    global_material_matrices g;
    g.M_eps.resize(top.num_edges(), top.num_edges());
    g.M_eps.setFromTriplets(te.begin(), te.end());
    g.M_nu.resize(top.num_faces(), top.num_faces());
    g.M_nu.setFromTriplets(tn.begin(), tn.end());
    return g;
}

} // namespace dga
