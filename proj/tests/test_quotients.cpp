#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>

#include "gsieve/quotients.hpp"

using namespace gsieve;

TEST_CASE("classical group orders") {
  CHECK(classical_group_order(Ambient::SpecialLinear, 2, 5) == 120);
  CHECK(classical_group_order(Ambient::SpecialLinear, 2, 7) == 336);
  CHECK(classical_group_order(Ambient::SpecialLinear, 2, 11) == 1320);
  CHECK(classical_group_order(Ambient::SpecialLinear, 3, 2) == 168);
  CHECK(classical_group_order(Ambient::Symplectic, 2, 5) == 120);   // Sp_2 = SL_2
  CHECK(classical_group_order(Ambient::Symplectic, 4, 3) == 51840);
  CHECK_THROWS_AS(classical_group_order(Ambient::SpecialLinear, 2, 6), NotPrime);
}

TEST_CASE("strong approximation: lubotzky(3) quotient orders") {
  GroupSpec l3 = preset_lubotzky(3, false);
  CHECK(enumerate_quotient(l3, {3}).order() == 1);  // generators = identity mod 3
  CHECK(enumerate_quotient(l3, {5}).order() == 120);
  CHECK(enumerate_quotient(l3, {7}).order() == 336);
}

TEST_CASE("goursat: product quotients multiply orders") {
  GroupSpec l3 = preset_lubotzky(3, false);
  FiniteQuotient q57 = enumerate_quotient(l3, {5, 7});
  CHECK(q57.order() == 40320);
  CHECK(q57.q_modulus() == 35);
  FiniteQuotient q511 = enumerate_quotient(l3, {5, 11});
  CHECK(q511.order() == 120 * 1320);
}

TEST_CASE("enumerate rejects bad inputs and caps") {
  GroupSpec l3 = preset_lubotzky(3, false);
  CHECK_THROWS_AS(enumerate_quotient(l3, {5, 5}), Error);
  CHECK_THROWS_AS(enumerate_quotient(l3, {4}), NotPrime);
  CHECK_THROWS_AS(enumerate_quotient(l3, {}), Error);
  CHECK_THROWS_AS(enumerate_quotient(l3, {5, 7}, 1000), CapExceeded);
}

TEST_CASE("quotient structure: identity, codes, lookup") {
  GroupSpec l3 = preset_lubotzky(3, true);
  FiniteQuotient q = enumerate_quotient(l3, {5});
  CHECK(q.order() == 120);
  CHECK(q.identity_index() == 0);
  CHECK(q.matrix_of(0, 0) == ModMatrix::identity(2, 5));
  std::vector<uint64_t> codes = {q.code_of(17, 0)};
  CHECK(q.index_of(codes) == 17);
  std::vector<uint64_t> absent = {ModMatrix(2, 5).encode()};  // zero matrix
  CHECK_FALSE(q.index_of(absent).has_value());
}

TEST_CASE("permutation property and inverse symmetry of the action") {
  GroupSpec l3 = preset_lubotzky(3, true);
  FiniteQuotient q = enumerate_quotient(l3, {5});
  size_t ngen = q.generator_count();

  // each generator acts as a bijection
  for (size_t g = 0; g < ngen; ++g) {
    std::vector<uint32_t> image;
    for (uint32_t e = 0; e < q.order(); ++e) image.push_back(q.act(e, g));
    std::sort(image.begin(), image.end());
    for (uint32_t e = 0; e < q.order(); ++e) CHECK(image[e] == e);
  }

  // generator and its inverse act as inverse permutations
  for (size_t g = 0; g < ngen; ++g) {
    IntegerMatrix inv = l3.generators[g].inverse_unimodular();
    size_t ginv = ngen;
    for (size_t h = 0; h < ngen; ++h)
      if (l3.generators[h] == inv) ginv = h;
    REQUIRE(ginv < ngen);
    for (uint32_t e = 0; e < q.order(); ++e)
      CHECK(q.act(q.act(e, static_cast<uint32_t>(g)), static_cast<uint32_t>(ginv)) == e);
  }
}

TEST_CASE("order bound |G_p| <= p^(r^2)") {
  GroupSpec l3 = preset_lubotzky(3, false);
  for (uint64_t p : {5ull, 7ull, 11ull, 13ull}) {
    FiniteQuotient q = enumerate_quotient(l3, {p});
    double bound = std::pow(static_cast<double>(p), 4.0);
    CHECK(static_cast<double>(q.order()) <= bound);
  }
}

TEST_CASE("surjectivity report flags the exceptional prime") {
  GroupSpec l3 = preset_lubotzky(3, false);
  std::vector<uint64_t> primes = {3, 5, 7};
  auto rows = surjectivity_report(l3, primes);
  REQUIRE(rows.size() == 3);
  CHECK_FALSE(rows[0].surjective);
  CHECK(rows[0].order_found == 1);
  CHECK(rows[0].ambient_order == 24);
  CHECK(rows[1].surjective);
  CHECK(rows[2].surjective);

  // Gamma^(2) has trivial image mod 2 (kernel of reduction)
  GroupSpec l2 = preset_lubotzky(2, false);
  auto rows2 = surjectivity_report(l2, std::vector<uint64_t>{2});
  CHECK_FALSE(rows2[0].surjective);
  CHECK(rows2[0].order_found == 1);
}

TEST_CASE("independence checks (pairwise goursat)") {
  GroupSpec l3 = preset_lubotzky(3, false);
  IndependenceResult r57 = independence_check(l3, 5, 7);
  CHECK(r57.independent);
  CHECK(r57.order_pair == 40320);
  CHECK(independence_check(l3, 5, 11).independent);

  GroupSpec std2 = preset_sl2_standard(false);
  CHECK(independence_check(std2, 3, 5).independent);
  CHECK_THROWS_AS(independence_check(l3, 5, 5), Error);
}

TEST_CASE("symplectic presets: Sp_2 = SL_2 and Sp_4 mod 3 is full") {
  GroupSpec sp2 = preset_symplectic_elementary(1, false);
  CHECK(enumerate_quotient(sp2, {5}).order() == 120);

  GroupSpec std2 = preset_sl2_standard(false);
  CHECK(enumerate_quotient(std2, {5}).order() == 120);

  GroupSpec sp4 = preset_symplectic_elementary(2, false);
  FiniteQuotient q3 = enumerate_quotient(sp4, {3});
  CHECK(q3.order() == classical_group_order(Ambient::Symplectic, 4, 3));
}

TEST_CASE("integer line embeds Z with cyclic quotients") {
  GroupSpec z = preset_integer_line();
  CHECK(enumerate_quotient(z, {2}).order() == 2);
  CHECK(enumerate_quotient(z, {13}).order() == 13);
}

TEST_CASE("disk cache round-trips and invalidates on digest mismatch") {
  GroupSpec l3 = preset_lubotzky(3, true);
  FiniteQuotient q = enumerate_quotient(l3, {5, 7});
  auto path = std::filesystem::temp_directory_path() / "gsieve_quotient_cache_test.bin";
  save_quotient(q, path);

  std::vector<uint64_t> primes = {5, 7};
  auto loaded = load_quotient(l3, primes, path);
  REQUIRE(loaded.has_value());
  CHECK(loaded->order() == q.order());
  CHECK(loaded->primes() == q.primes());
  for (uint32_t e = 0; e < 100; ++e)
    for (size_t g = 0; g < q.generator_count(); ++g)
      CHECK(loaded->act(e, static_cast<uint32_t>(g)) == q.act(e, static_cast<uint32_t>(g)));
  CHECK(loaded->index_of(std::vector<uint64_t>{q.code_of(7, 0), q.code_of(7, 1)}) == 7);

  // different spec -> cache miss
  GroupSpec l5 = preset_lubotzky(5, true);
  CHECK_FALSE(load_quotient(l5, primes, path).has_value());
  // different primes -> cache miss
  std::vector<uint64_t> other = {5, 11};
  CHECK_FALSE(load_quotient(l3, other, path).has_value());
  std::filesystem::remove(path);
}
