/*
 * Measurement uncertainty budget: independent contributions combined by root
 * sum of squares, u_t = sqrt(sum (c_i u_i)^2), expanded with k = 2.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dga/csv.hpp"
#include "dga/errors.hpp"

namespace dga {

enum class distribution { normal_1, normal_2, rectangular, u_shape, triangular };

inline distribution parse_distribution(const std::string& s)
{
    if (s == "normal-1")
        return distribution::normal_1;
    if (s == "normal-2")
        return distribution::normal_2;
    if (s == "rectangular")
        return distribution::rectangular;
    if (s == "U-shape")
        return distribution::u_shape;
    if (s == "triangular")
        return distribution::triangular;
    throw config_error("unknown distribution '" + s + "'");
}

inline std::string to_string(distribution d)
{
    switch (d)
    {
        case distribution::normal_1: return "normal-1";
        case distribution::normal_2: return "normal-2";
        case distribution::rectangular: return "rectangular";
        case distribution::u_shape: return "U-shape";
        case distribution::triangular: return "triangular";
    }
    return "?";
}

/* Divisors as printed to two decimals (sqrt 3, sqrt 2, sqrt 6 rounded). */
inline double canonical_divisor(distribution d)
{
    switch (d)
    {
        case distribution::normal_1: return 1.00;
        case distribution::normal_2: return 2.00;
        case distribution::rectangular: return 1.73;
        case distribution::u_shape: return 1.41;
        case distribution::triangular: return 2.45;
    }
    return 1.0;
}

struct uncertainty_factor
{
    std::string symbol;
    std::string meaning;
    double uncertainty_db = 0.0;
    distribution dist = distribution::normal_1;
    double normalization = 1.0;
    double sensitivity = 1.0;
    std::optional<double> printed_u; /* u_i as tabulated, when a table is reproduced */
};

inline double factor_u(const uncertainty_factor& f)
{
    if (!(f.normalization > 0.0))
        throw config_error("factor " + f.symbol + ": normalization must be positive");
    return f.uncertainty_db / f.normalization;
}

/* True when the normalization differs from the divisor its distribution
 * implies, beyond the two-decimal rounding of the printed divisors. */
inline bool divisor_mismatch(const uncertainty_factor& f)
{
    return std::abs(f.normalization - canonical_divisor(f.dist)) > 0.005;
}

/* Which u_i enters the sum: recomputed from uncertainty / normalization,
 * or the tabulated value where a factor carries one. */
enum class u_source { computed, printed };

inline double factor_u(const uncertainty_factor& f, u_source src)
{
    return src == u_source::printed && f.printed_u ? *f.printed_u : factor_u(f);
}

struct budget_result
{
    double u_t = 0.0;
    double u_e = 0.0;
    std::vector<double> contributions; /* c_i u_i, in input order */
};

inline budget_result combine(const std::vector<uncertainty_factor>& factors, u_source src = u_source::computed)
{
    if (factors.empty())
        throw config_error("uncertainty budget needs at least one factor");
    budget_result r;
    double s = 0.0;
    for (const auto& f : factors)
    {
        const double c = f.sensitivity * factor_u(f, src);
        r.contributions.push_back(c);
        s += c * c;
    }
    r.u_t = std::sqrt(s);
    r.u_e = 2.0 * r.u_t;
    return r;
}

struct source_uncertainty_result
{
    double c_gamma;
    double c_p;
    double u_e_field; /* u(E_theta) in dB */
};

/* c_Gamma = -20 / (1 - Gamma), c_p = 1,
 * u(E_theta, dB) = sqrt((c_p u_p)^2 + (c_Gamma u_Gamma)^2). */
inline double gamma_sensitivity(double gamma)
{
    if (!(gamma < 1.0))
        throw domain_error("reflection coefficient magnitude must be below 1");
    return -20.0 / (1.0 - gamma);
}

inline source_uncertainty_result source_uncertainty(double u_p, double u_gamma, double gamma)
{
    source_uncertainty_result r;
    r.c_gamma = gamma_sensitivity(gamma);
    r.c_p = 1.0;
    r.u_e_field = std::hypot(r.c_p * u_p, r.c_gamma * u_gamma);
    return r;
}

inline std::vector<uncertainty_factor> read_budget(std::istream& is)
{
    auto tbl = read_csv(is, {"symbol", "meaning", "uncertainty_db", "distribution", "normalization", "sensitivity"},
                        {"printed_u_db"});
    std::vector<uncertainty_factor> out;
    for (const auto& row : tbl.rows)
    {
        uncertainty_factor f;
        f.symbol = row.cells[0];
        f.meaning = row.cells[1];
        f.uncertainty_db = csv_number(row, 2);
        try
        {
            f.dist = parse_distribution(row.cells[3]);
        }
        catch (const config_error& e)
        {
            throw parse_error(e.what(), row.line);
        }
        f.normalization = row.cells[4].empty() ? canonical_divisor(f.dist) : csv_number(row, 4);
        f.sensitivity = csv_number(row, 5);
        if (row.cells.size() > 6 && !row.cells[6].empty())
            f.printed_u = csv_number(row, 6);
        if (!(f.normalization > 0.0))
            throw parse_error("normalization must be positive", row.line);
        if (f.uncertainty_db < 0.0)
            throw parse_error("uncertainty must be nonnegative", row.line);
        out.push_back(std::move(f));
    }
    if (out.empty())
        throw config_error("uncertainty budget file has no factors");
    return out;
}

inline std::vector<uncertainty_factor> read_budget(const std::string& path)
{
    std::ifstream ifs(path);
    if (!ifs)
        throw config_error("cannot open budget file '" + path + "'");
    return read_budget(ifs);
}

/* Both readings of a budget: `reported` uses tabulated u_i where present
 * and is the headline result, `computed` recomputes every u_i. */
struct budget_summary
{
    budget_result reported;
    budget_result computed;
    bool has_printed = false;
};

inline budget_summary summarize(const std::vector<uncertainty_factor>& factors)
{
    budget_summary s;
    s.reported = combine(factors, u_source::printed);
    s.computed = combine(factors, u_source::computed);
    s.has_printed = std::any_of(factors.begin(), factors.end(), [](const auto& f) { return f.printed_u.has_value(); });
    return s;
}

inline void write_budget_csv(std::ostream& os, const std::vector<uncertainty_factor>& factors,
                             const budget_summary& s)
{
    os << "symbol, uncertainty_db, distribution, normalization, u_i_db, printed_u_i_db, sensitivity, "
          "contribution_db, canonical_divisor_mismatch\n";
    os << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < factors.size(); i++)
    {
        const auto& f = factors[i];
        os << f.symbol << ", " << f.uncertainty_db << ", " << to_string(f.dist) << ", " << f.normalization << ", "
           << factor_u(f) << ", ";
        if (f.printed_u)
            os << *f.printed_u;
        os << ", " << f.sensitivity << ", " << s.reported.contributions[i] << ", " << (divisor_mismatch(f) ? 1 : 0)
           << "\n";
    }
    os << "u_t, " << s.reported.u_t << ",,,,,,,\n";
    os << "u_e, " << s.reported.u_e << ",,,,,,,\n";
    os << "u_t_computed, " << s.computed.u_t << ",,,,,,,\n";
    os << "u_e_computed, " << s.computed.u_e << ",,,,,,,\n";
    os.unsetf(std::ios::floatfield);
}

inline void write_budget_report(std::ostream& os, const std::vector<uncertainty_factor>& factors,
                                const budget_summary& s)
{
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(2);
    ss << std::left << std::setw(8) << "x_i" << std::setw(44) << "meaning" << std::right << std::setw(8) << "unc."
       << std::setw(14) << "distribution" << std::setw(8) << "norm." << std::setw(8) << "u_i" << std::setw(8)
       << "tab." << std::setw(6) << "c_i" << "\n";
    for (const auto& f : factors)
    {
        ss << std::left << std::setw(8) << f.symbol << std::setw(44) << f.meaning.substr(0, 43) << std::right
           << std::setw(8) << f.uncertainty_db << std::setw(14) << to_string(f.dist) << std::setw(8)
           << f.normalization << std::setw(8) << factor_u(f) << std::setw(8);
        if (f.printed_u)
            ss << *f.printed_u;
        else
            ss << "-";
        ss << std::setw(6) << f.sensitivity;
        if (divisor_mismatch(f))
            ss << "  (normalization differs from the " << to_string(f.dist) << " divisor "
               << canonical_divisor(f.dist) << ")";
        ss << "\n";
    }
    ss << "Total uncertainty u_t          " << s.reported.u_t << " dB\n";
    ss << "Expanded uncertainty (k=2) u_e " << s.reported.u_e << " dB\n";
    if (s.has_printed)
        ss << "Recomputed from uncertainty/normalization: u_t " << s.computed.u_t << " dB, u_e " << s.computed.u_e
           << " dB\n";
    os << ss.str();
}

} // namespace dga
