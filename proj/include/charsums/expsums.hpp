#pragma once

// Classical building-block sums over Z/qZ (Gauss, Ramanujan, twisted
// Kloosterman) and the central two-variable character sum
//
//   g(chi, psi) = sum_{t,u mod q} chi(t) conj(chi)(t+1) conj(chi)(u) chi(u+1) psi(ut-1),
//
// all by direct summation, plus scan drivers that aggregate over every psi
// mod q at once.

#include <cstdint>
#include <random>
#include <vector>

#include "charsums/parallel.hpp"
#include "charsums/report.hpp"
#include "charsums/residues.hpp"

namespace charsums {

// e_c(x) = exp(2 pi i x / c) for x = 0..c-1.
inline std::vector<Complex> exp_table(std::uint64_t c) {
    std::vector<Complex> t(c);
    for (std::uint64_t x = 0; x < c; ++x) {
        const double theta = kTwoPi * static_cast<double>(x) / static_cast<double>(c);
        t[x] = Complex(std::cos(theta), std::sin(theta));
    }
    return t;
}

// tau(chi) = sum_{a mod q} chi(a) e_q(a).
inline Complex gauss_sum(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    const auto vals = chi.value_table();
    const auto e = exp_table(q);
    Complex s = 0.0;
    for (std::uint64_t a = 0; a < q; ++a) s += vals[a] * e[a % q];
    return s;
}

// R_q(n) = sum_{d | (q,n)} d mu(q/d), with (0,q) read as q.
inline long long ramanujan_sum(std::uint64_t q, std::int64_t n) {
    const std::uint64_t g = gcd_u(n, q);
    long long s = 0;
    for (std::uint64_t d : divisors_of(g)) s += static_cast<long long>(d) * mobius(q / d);
    return s;
}

// S_psi(m, n; c) = sum_{y mod c, (y,c)=1} conj(psi)(y) e_c(my + n ybar).
inline Complex kloosterman_twisted(const DirichletCharacter& psi, std::int64_t m, std::int64_t n,
                                   std::uint64_t c) {
    if (psi.modulus() != c)
        throw std::domain_error("kloosterman_twisted: psi must live mod c (induce first)");
    const auto vals = psi.conj().value_table();
    const auto e = exp_table(c);
    const std::uint64_t mm = mod_reduce(m, c), nn = mod_reduce(n, c);
    Complex s = 0.0;
    for (std::uint64_t y = 0; y < c; ++y) {
        if (std::gcd(y, c) != 1) continue;
        const std::uint64_t ybar = mod_inverse(static_cast<std::int64_t>(y), c);
        s += vals[y] * e[(mm * y + nn * ybar) % c];
    }
    return s;
}

// The row chi(t) conj(chi)(t+1), cached once per character for g-type loops.
inline std::vector<Complex> g_row(const DirichletCharacter& chi) {
    const std::uint64_t q = chi.modulus();
    const auto vals = chi.value_table();
    std::vector<Complex> row(q);
    for (std::uint64_t t = 0; t < q; ++t) row[t] = vals[t] * std::conj(vals[(t + 1) % q]);
    return row;
}

inline Complex g_sum(const DirichletCharacter& chi, const DirichletCharacter& psi) {
    if (!chi.is_primitive()) throw std::domain_error("g_sum: chi must be primitive");
    if (psi.modulus() != chi.modulus()) throw std::domain_error("g_sum: psi must share the modulus of chi");
    const std::uint64_t q = chi.modulus();
    const auto row = g_row(chi);
    const auto pv = psi.value_table();
    Complex s = 0.0;
    for (std::uint64_t t = 0; t < q; ++t) {
        if (row[t] == Complex(0.0, 0.0)) continue;
        Complex inner = 0.0;
        for (std::uint64_t u = 0; u < q; ++u) {
            // psi(ut - 1)
            inner += std::conj(row[u]) * pv[(u * t + q - 1) % q];
        }
        s += row[t] * inner;
    }
    return s;
}

// N(w) = sum_{ut-1 == w mod q} chi(t) conj(chi)(t+1) conj[chi(u) conj(chi)(u+1)],
// so that g(chi, psi) = sum_w N(w) psi(w) for every psi mod q. Lets a scan
// amortize the O(q^2) double loop across all phi(q) characters psi.
inline std::vector<Complex> g_profile(const DirichletCharacter& chi) {
    if (!chi.is_primitive()) throw std::domain_error("g_profile: chi must be primitive");
    const std::uint64_t q = chi.modulus();
    const auto row = g_row(chi);
    std::vector<Complex> prof(q, Complex(0.0, 0.0));
    for (std::uint64_t t = 0; t < q; ++t) {
        if (row[t] == Complex(0.0, 0.0)) continue;
        for (std::uint64_t u = 0; u < q; ++u) {
            if (row[u] == Complex(0.0, 0.0)) continue;
            prof[(u * t + q - 1) % q] += row[t] * std::conj(row[u]);
        }
    }
    return prof;
}

inline Complex g_from_profile(const std::vector<Complex>& profile, const std::vector<Complex>& psi_values) {
    Complex s = 0.0;
    for (std::size_t w = 0; w < profile.size(); ++w) s += profile[w] * psi_values[w];
    return s;
}

// ---------------------------------------------------------------------------
// The intermediate-conductor sum
//   S = sum_{u,y mod p^j} psi(uy) chi(1+p^{k-j} y) chi(1-p^{k-j} u)
//                          conj(chi)(1 + uy p^{2(k-j)}),
// for chi of conductor p^k and psi of conductor p^j, 1 <= j < k.
// ---------------------------------------------------------------------------

struct IntermediateShape {
    std::uint64_t p = 0;
    int k = 0;
    int j = 0;
    std::uint64_t pj = 1;        // p^j
    std::uint64_t shift = 1;     // p^{k-j}
    std::uint64_t shift2 = 1;    // p^{2(k-j)} reduced mod p^k scale handled by caller
};

inline IntermediateShape intermediate_shape(const DirichletCharacter& chi, const DirichletCharacter& psi) {
    const auto fq = factorize(chi.modulus());
    if (fq.factors.size() != 1) throw std::domain_error("intermediate_sum: chi modulus must be a prime power");
    const std::uint64_t p = fq.factors[0].first;
    const int k = fq.factors[0].second;
    if (chi.conductor() != chi.modulus())
        throw std::domain_error("intermediate_sum: chi must have conductor p^k");
    const std::uint64_t cpsi = psi.conductor();
    int j = 0;
    std::uint64_t c = cpsi;
    while (c % p == 0) { c /= p; ++j; }
    if (c != 1 || j < 1 || j >= k)
        throw std::domain_error("intermediate_sum: psi must have conductor p^j with 1 <= j < k");
    IntermediateShape sh;
    sh.p = p;
    sh.k = k;
    sh.j = j;
    sh.pj = 1;
    for (int i = 0; i < j; ++i) sh.pj *= p;
    sh.shift = 1;
    for (int i = 0; i < k - j; ++i) sh.shift *= p;
    sh.shift2 = sh.shift * sh.shift;
    return sh;
}

// M0(w) = sum_{uy == w mod p^j} chi(1 + p^{k-j} y) chi(1 - p^{k-j} u); the
// conj(chi)(1 + w p^{2(k-j)}) factor only depends on w, so S factors through
// this per-chi profile and each psi costs O(p^j).
inline std::vector<Complex> intermediate_profile(const DirichletCharacter& chi, const IntermediateShape& sh) {
    const std::uint64_t q = chi.modulus();
    const auto vals = chi.value_table();
    std::vector<Complex> plus(sh.pj), minus(sh.pj);
    for (std::uint64_t y = 0; y < sh.pj; ++y) {
        plus[y] = vals[(1 + sh.shift % q * y) % q];
        minus[y] = vals[mod_reduce(1 - static_cast<std::int64_t>(sh.shift % q * y), q)];
    }
    std::vector<Complex> prof(sh.pj, Complex(0.0, 0.0));
    for (std::uint64_t u = 0; u < sh.pj; ++u) {
        if (u % sh.p == 0) continue;  // psi(uy) vanishes
        for (std::uint64_t y = 0; y < sh.pj; ++y) prof[(u * y) % sh.pj] += plus[y] * minus[u];
    }
    return prof;
}

inline Complex intermediate_from_profile(const DirichletCharacter& chi, const IntermediateShape& sh,
                                         const std::vector<Complex>& prof,
                                         const std::vector<Complex>& psi_values_mod_pj) {
    const std::uint64_t q = chi.modulus();
    Complex s = 0.0;
    for (std::uint64_t w = 0; w < sh.pj; ++w) {
        if (prof[w] == Complex(0.0, 0.0)) continue;
        const Complex tw = std::conj(chi.eval(static_cast<std::int64_t>((1 + (sh.shift2 % q) * (w % q)) % q)));
        s += prof[w] * psi_values_mod_pj[w] * tw;
    }
    return s;
}

inline Complex intermediate_sum(const DirichletCharacter& chi, const DirichletCharacter& psi) {
    const auto sh = intermediate_shape(chi, psi);
    const std::uint64_t q = chi.modulus();
    const auto vals = chi.value_table();
    const auto psi_star = psi.primitivized();
    const auto pv = psi_star.value_table();
    Complex s = 0.0;
    for (std::uint64_t u = 0; u < sh.pj; ++u) {
        const Complex mu = vals[mod_reduce(1 - static_cast<std::int64_t>((sh.shift % q) * u), q)];
        for (std::uint64_t y = 0; y < sh.pj; ++y) {
            const Complex pw = pv[(u * y) % sh.pj];
            if (pw == Complex(0.0, 0.0)) continue;
            const Complex py = vals[(1 + (sh.shift % q) * y) % q];
            const std::uint64_t arg = (1 + ((sh.shift2 % q) * ((u * y) % q)) % q) % q;
            s += pw * py * mu * std::conj(vals[arg]);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Scan drivers
// ---------------------------------------------------------------------------

enum class GBoundMode { prime, prime_square };

struct GScanSummary {
    double max_ratio = 0.0;
    std::uint64_t argmax_q = 0;
    std::string argmax_chi;
    std::string argmax_psi;
};

inline std::vector<std::uint64_t> primes_in(std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::uint64_t> ps;
    for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n) {
        bool prime = n >= 2;
        for (std::uint64_t d = 2; d * d <= n; ++d)
            if (n % d == 0) { prime = false; break; }
        if (prime) ps.push_back(n);
    }
    return ps;
}

// |g(chi, psi)| / q over every primitive chi and every psi mod q, q = p or
// p^2 for p in the range. Grid cells (one per chi) run in parallel; reports
// are merged in canonical order regardless of the thread count. Pairs are
// checked against |g| <= ratio_threshold * q; prime-square mode defaults to
// the proved constant 2.
inline std::vector<SumReport> scan_g_bound(std::uint64_t pmin, std::uint64_t pmax, GBoundMode mode,
                                           double ratio_threshold, GScanSummary* summary = nullptr,
                                           int jobs = 1, bool per_pair_reports = true) {
    struct Cell {
        std::uint64_t q;
        DirichletCharacter chi;
    };
    std::vector<Cell> cells;
    for (std::uint64_t p : primes_in(pmin, pmax)) {
        const std::uint64_t q = (mode == GBoundMode::prime) ? p : p * p;
        for (auto& chi : primitive_characters(q)) cells.push_back({q, chi});
    }
    std::vector<std::vector<SumReport>> slot(cells.size());
    std::vector<double> cell_max(cells.size(), 0.0);
    std::vector<std::string> cell_arg(cells.size());

    parallel_for_indexed(cells.size(), jobs, [&](std::size_t i) {
        const auto& cell = cells[i];
        const std::uint64_t q = cell.q;
        const auto prof = g_profile(cell.chi);
        for (auto& psi : DirichletCharacter::enumerate_all(q)) {
            const Complex g = g_from_profile(prof, psi.value_table());
            const double ratio = std::abs(g) / static_cast<double>(q);
            if (ratio > cell_max[i]) {
                cell_max[i] = ratio;
                cell_arg[i] = psi.label();
            }
            if (per_pair_reports) {
                slot[i].push_back(make_bound_report(
                    "gbound_ratio",
                    {{"q", static_cast<std::int64_t>(q)},
                     {"chi", cell.chi.label()},
                     {"psi", psi.label()},
                     {"mode", std::string(mode == GBoundMode::prime ? "prime" : "prime-square")},
                     {"ratio", ratio}},
                    std::abs(g), ratio_threshold * static_cast<double>(q)));
            }
        }
    });

    std::vector<SumReport> out;
    GScanSummary sm;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (auto& r : slot[i]) out.push_back(std::move(r));
        if (cell_max[i] > sm.max_ratio) {
            sm.max_ratio = cell_max[i];
            sm.argmax_q = cells[i].q;
            sm.argmax_chi = cells[i].chi.label();
            sm.argmax_psi = cell_arg[i];
        }
    }
    canonical_sort(out);
    if (summary) *summary = sm;
    return out;
}

}  // namespace charsums
