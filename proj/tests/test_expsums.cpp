#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "charsums/expsums.hpp"

using namespace charsums;

namespace {

// Test-local brute-force oracle for g, evaluating characters term by term
// with no row caching.
Complex g_oracle(const DirichletCharacter& chi, const DirichletCharacter& psi) {
    const std::int64_t q = static_cast<std::int64_t>(chi.modulus());
    Complex s = 0.0;
    for (std::int64_t t = 0; t < q; ++t)
        for (std::int64_t u = 0; u < q; ++u)
            s += chi.eval(t) * std::conj(chi.eval(t + 1)) * std::conj(chi.eval(u)) * chi.eval(u + 1) *
                 psi.eval(u * t - 1);
    return s;
}

// Ramanujan sum by its definition as an exponential sum over units.
double ramanujan_oracle(std::uint64_t q, std::int64_t n) {
    double s = 0.0;
    for (std::uint64_t y = 0; y < q; ++y) {
        if (std::gcd(y, q) != 1) continue;
        s += std::cos(kTwoPi * static_cast<double>(mod_reduce(n * static_cast<std::int64_t>(y), q)) /
                      static_cast<double>(q));
    }
    return q == 1 ? 1.0 : s;
}

}  // namespace

TEST_CASE("gauss sum: frozen values and classical modulus") {
    REQUIRE(std::abs(gauss_sum(DirichletCharacter::principal(1)) - Complex(1.0, 0.0)) < 1e-14);
    // Quadratic character mod 5: tau = sqrt(5), real.
    auto quad5 = DirichletCharacter::from_exponents(5, {2});
    const Complex tau = gauss_sum(quad5);
    REQUIRE(tau.real() == Catch::Approx(std::sqrt(5.0)).margin(1e-12));
    REQUIRE(std::abs(tau.imag()) < 1e-12);
}

TEST_CASE("gauss sum: |tau(chi)|^2 = q for primitive chi up to q=500") {
    for (std::uint64_t q = 3; q <= 500; q += (q < 60 ? 1 : 13)) {
        for (auto& chi : primitive_characters(q)) {
            const double m2 = std::norm(gauss_sum(chi));
            REQUIRE(std::abs(m2 - static_cast<double>(q)) < 1e-8 * static_cast<double>(q));
        }
    }
}

TEST_CASE("gauss sum separability: induced non-principal characters vanish") {
    for (std::uint64_t q : {9u, 25u, 27u, 49u}) {
        for (auto& chi : DirichletCharacter::enumerate_all(q)) {
            if (chi.is_principal() || chi.is_primitive()) continue;
            REQUIRE(std::abs(gauss_sum(chi)) < sum_tolerance(static_cast<double>(q)));
        }
    }
}

TEST_CASE("ramanujan sum: trivial values and Moebius formula") {
    REQUIRE(ramanujan_sum(7, 0) == 6);
    REQUIRE(ramanujan_sum(12, 0) == 4);
    REQUIRE(ramanujan_sum(7, 3) == -1);
    REQUIRE(ramanujan_sum(4, 2) == -2);
    for (std::uint64_t q = 1; q <= 200; ++q)
        for (std::int64_t n = -200; n <= 200; n += 7) {
            const double direct = ramanujan_oracle(q, n);
            REQUIRE(static_cast<double>(ramanujan_sum(q, n)) == Catch::Approx(direct).margin(1e-7 * q));
        }
}

TEST_CASE("twisted kloosterman: trivial cases") {
    auto triv7 = DirichletCharacter::principal(7);
    REQUIRE(std::abs(kloosterman_twisted(triv7, 0, 0, 7) - Complex(6.0, 0.0)) < 1e-12);
    auto triv2 = DirichletCharacter::principal(2);
    REQUIRE(std::abs(kloosterman_twisted(triv2, 1, 1, 2) - Complex(1.0, 0.0)) < 1e-12);
    REQUIRE_THROWS_AS(kloosterman_twisted(triv7, 1, 1, 14), std::domain_error);
}

TEST_CASE("twisted kloosterman: Weil-type bound on a spot grid") {
    for (std::uint64_t c : {5u, 7u, 9u, 12u, 15u, 25u, 49u}) {
        for (auto& psi : DirichletCharacter::enumerate_all(c)) {
            const double condq = static_cast<double>(psi.conductor());
            for (std::int64_t m : {0, 1, 2, 5}) {
                for (std::int64_t n : {1, 3, 10}) {
                    const double lhs = std::abs(kloosterman_twisted(psi, m, n, c));
                    const double bound = std::sqrt(static_cast<double>(std::gcd(gcd_u(m, c), gcd_u(n, c)))) *
                                         static_cast<double>(divisor_count(c)) *
                                         std::sqrt(static_cast<double>(c)) * std::sqrt(condq);
                    REQUIRE(lhs <= bound + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("g_sum: frozen q=5 values from the brute-force oracle") {
    auto quad5 = DirichletCharacter::from_exponents(5, {2});
    auto chi_i = DirichletCharacter::from_exponents(5, {1});  // chi(2) = i
    auto triv5 = DirichletCharacter::principal(5);

    REQUIRE(std::abs(g_sum(quad5, triv5) - Complex(2.0, 0.0)) < 1e-10);
    REQUIRE(std::abs(g_sum(quad5, quad5) - Complex(-6.0, 0.0)) < 1e-10);
    REQUIRE(std::abs(g_sum(chi_i, chi_i) - Complex(0.0, -4.0)) < 1e-10);
    // Self-dual configuration is real.
    REQUIRE(std::abs(g_sum(quad5, quad5).imag()) < 1e-12);
}

TEST_CASE("g_sum: matches per-term oracle and respects |g| <= q^2") {
    for (std::uint64_t q : {5u, 7u, 9u, 12u}) {
        for (auto& chi : primitive_characters(q)) {
            for (auto& psi : DirichletCharacter::enumerate_all(q)) {
                const Complex a = g_sum(chi, psi);
                const Complex b = g_oracle(chi, psi);
                REQUIRE(std::abs(a - b) < sum_tolerance(static_cast<double>(q * q)));
                REQUIRE(std::abs(a) <= static_cast<double>(q * q) + 1e-9);
            }
        }
    }
}

TEST_CASE("g_sum rejects imprimitive chi") {
    auto triv9 = DirichletCharacter::principal(9);
    REQUIRE_THROWS_AS(g_sum(triv9, triv9), std::domain_error);
}

TEST_CASE("g_profile reproduces g_sum for every psi") {
    for (std::uint64_t q : {5u, 9u, 13u}) {
        for (auto& chi : primitive_characters(q)) {
            const auto prof = g_profile(chi);
            for (auto& psi : DirichletCharacter::enumerate_all(q)) {
                const Complex a = g_from_profile(prof, psi.value_table());
                const Complex b = g_sum(chi, psi);
                REQUIRE(std::abs(a - b) < sum_tolerance(static_cast<double>(q * q)));
            }
        }
    }
}

TEST_CASE("intermediate_sum: guards and the proven k=2, j=1 evaluation") {
    auto chi9 = primitive_characters(9).front();
    auto psi3_mod9 = DirichletCharacter::from_exponents(3, {1}).induced_to(9);
    // |S| = p exactly in the proven case (Gauss-sum square structure).
    const Complex s = intermediate_sum(chi9, psi3_mod9);
    REQUIRE(std::abs(s) == Catch::Approx(3.0).margin(1e-10));

    // j = k rejected.
    auto psi9 = primitive_characters(9).front();
    REQUIRE_THROWS_AS(intermediate_sum(chi9, psi9), std::domain_error);
    // Trivial psi rejected (j = 0).
    REQUIRE_THROWS_AS(intermediate_sum(chi9, DirichletCharacter::principal(9)), std::domain_error);

    for (std::uint64_t p : {3u, 5u, 7u}) {
        const std::uint64_t q = p * p;
        for (auto& chi : primitive_characters(q)) {
            for (auto& psi : characters_of_conductor(q, p)) {
                const double mag = std::abs(intermediate_sum(chi, psi));
                REQUIRE(mag == Catch::Approx(static_cast<double>(p)).margin(1e-8 * p));
            }
        }
    }
}

TEST_CASE("intermediate profile path agrees with the direct sum, k=3") {
    const std::uint64_t q = 27;
    for (auto& chi : primitive_characters(q)) {
        for (int j : {1, 2}) {
            const std::uint64_t pj = (j == 1) ? 3u : 9u;
            for (auto& psi : characters_of_conductor(q, pj)) {
                const auto sh = intermediate_shape(chi, psi);
                const auto prof = intermediate_profile(chi, sh);
                const auto psi_star = psi.primitivized();
                const Complex a = intermediate_from_profile(chi, sh, prof, psi_star.value_table());
                const Complex b = intermediate_sum(chi, psi);
                REQUIRE(std::abs(a - b) < sum_tolerance(static_cast<double>(pj * pj)));
            }
        }
    }
}

TEST_CASE("scan_g_bound: q = p^2 ratio stays below 2, q = p max recorded") {
    GScanSummary sm;
    auto reports = scan_g_bound(3, 7, GBoundMode::prime_square, 2.0, &sm);
    REQUIRE(!reports.empty());
    REQUIRE(sm.max_ratio <= 2.0 + 1e-9);
    for (const auto& r : reports) REQUIRE(r.pass);

    GScanSummary smp;
    auto rp = scan_g_bound(3, 13, GBoundMode::prime, 100.0, &smp);
    REQUIRE(smp.max_ratio > 0.0);
    REQUIRE(smp.max_ratio < 100.0);

    // Empty prime range -> empty report.
    GScanSummary sme;
    auto re = scan_g_bound(24, 28, GBoundMode::prime, 2.0, &sme);
    REQUIRE(re.empty());
    REQUIRE(sme.max_ratio == 0.0);
}

TEST_CASE("scan_g_bound is deterministic across parallelism degrees") {
    GScanSummary s1, s4;
    auto r1 = scan_g_bound(3, 11, GBoundMode::prime, 100.0, &s1, 1);
    auto r4 = scan_g_bound(3, 11, GBoundMode::prime, 100.0, &s4, 4);
    REQUIRE(r1.size() == r4.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        REQUIRE(to_json_line(r1[i]) == to_json_line(r4[i]));
    }
    REQUIRE(s1.max_ratio == s4.max_ratio);
    REQUIRE(s1.argmax_chi == s4.argmax_chi);
}
