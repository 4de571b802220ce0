#include <doctest.h>

#include <cmath>

#include "gsieve/matgroup.hpp"
#include "gsieve/rng.hpp"

using namespace gsieve;

namespace {

Word random_word(const GroupSpec& spec, uint64_t seed, uint64_t stream, int length) {
  Word w;
  for (int i = 0; i < length; ++i)
    w.letters.push_back(uniform_index(counter_rand(seed, stream, i),
                                      static_cast<uint32_t>(spec.generators.size())));
  return w;
}

}  // namespace

TEST_CASE("primality: deterministic Miller-Rabin") {
  CHECK(is_prime_u64(2));
  CHECK(is_prime_u64(3));
  CHECK(is_prime_u64(101));
  CHECK_FALSE(is_prime_u64(1));
  CHECK_FALSE(is_prime_u64(561));         // Carmichael
  CHECK_FALSE(is_prime_u64(3215031751));  // strong pseudoprime to bases 2,3,5,7
  CHECK(is_prime_u64((1ull << 61) - 1));  // Mersenne prime
  CHECK(is_prime_u64(18446744073709551557ull));  // 2^64 - 59
  CHECK_FALSE(is_prime_u64(18446744073709551553ull));
  auto ps = primes_in_range(5, 20);
  CHECK(ps == std::vector<uint64_t>{5, 7, 11, 13, 17, 19});
}

TEST_CASE("matrix product: identity, hand oracle, inverse pairing") {
  IntegerMatrix id = IntegerMatrix::identity(2);
  CHECK(id * id == id);

  IntegerMatrix a = IntegerMatrix::from_rows({{1, 3}, {0, 1}});
  IntegerMatrix b = IntegerMatrix::from_rows({{1, 0}, {3, 1}});
  CHECK(a * b == IntegerMatrix::from_rows({{10, 3}, {3, 1}}));

  GroupSpec lub = preset_lubotzky(3, false);
  for (const auto& g : lub.generators) CHECK(g * g.inverse_unimodular() == id);

  IntegerMatrix three(3);
  CHECK_THROWS_AS((void)(a * three), DimensionMismatch);
}

TEST_CASE("determinants and unimodular inverses") {
  IntegerMatrix a = IntegerMatrix::from_rows({{2, 3}, {1, 2}});
  CHECK(a.determinant() == 1);
  CHECK(a.inverse_unimodular() == IntegerMatrix::from_rows({{2, -3}, {-1, 2}}));
  IntegerMatrix j = standard_symplectic_form(4);
  CHECK(j.determinant() == 1);
  CHECK(j * j.inverse_unimodular() == IntegerMatrix::identity(4));
}

TEST_CASE("reduce_mod: paper reductions of the Lubotzky generator") {
  IntegerMatrix a = IntegerMatrix::from_rows({{1, 3}, {0, 1}});
  CHECK(reduce_mod(a, 3) == ModMatrix::identity(2, 3));
  ModMatrix m5 = reduce_mod(a, 5);
  CHECK(m5.at(0, 1) == 3);
  IntegerMatrix an = IntegerMatrix::from_rows({{1, -3}, {0, 1}});
  CHECK(reduce_mod(an, 5).at(0, 1) == 2);  // -3 = 2 mod 5
  CHECK_THROWS_AS(reduce_mod(a, 6), NotPrime);
}

TEST_CASE("mod matrix encode/decode round-trip") {
  for (uint64_t p : {2ull, 5ull, 13ull}) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
      ModMatrix m(2, p);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          m.at(i, j) = counter_rand(99, seed, static_cast<uint64_t>(2 * i + j)) % p;
      CHECK(ModMatrix::decode(m.encode(), 2, p) == m);
    }
  }
  CHECK_FALSE(ModMatrix::encodable(4, 1ull << 17));
  CHECK(ModMatrix::encodable(4, 13));
}

TEST_CASE("evaluate_word: identity start, growth bound, residue consistency") {
  GroupSpec lub = preset_lubotzky(3, false);
  CHECK(evaluate_word_exact(lub, Word{}) == IntegerMatrix::identity(2));

  double log_c = std::log(lub.growth_constant());
  for (int n : {5, 15, 40}) {
    Word w = random_word(lub, 2024, static_cast<uint64_t>(n), n);
    IntegerMatrix g = evaluate_word_exact(lub, w);
    double log_entry = std::log(g.max_abs_entry().get_d());
    CHECK(log_entry <= n * log_c + 1e-9);
  }

  std::vector<uint64_t> primes = {5, 7, 11};
  for (uint64_t stream = 0; stream < 100; ++stream) {
    int len = static_cast<int>(counter_rand(7, stream, 0) % 21);
    Word w = random_word(lub, 31, stream, len);
    IntegerMatrix exact = evaluate_word_exact(lub, w);
    auto tracks = evaluate_word_mod(lub, w, primes);
    for (size_t t = 0; t < primes.size(); ++t) CHECK(tracks[t] == reduce_mod(exact, primes[t]));
  }
}

TEST_CASE("homomorphism and determinant conservation under random products") {
  GroupSpec lub = preset_lubotzky(3, true);
  for (uint64_t stream = 0; stream < 40; ++stream) {
    Word wa = random_word(lub, 55, 2 * stream, 6);
    Word wb = random_word(lub, 55, 2 * stream + 1, 6);
    IntegerMatrix a = evaluate_word_exact(lub, wa);
    IntegerMatrix b = evaluate_word_exact(lub, wb);
    CHECK((a * b).determinant() == 1);
    for (uint64_t p : {5ull, 13ull})
      CHECK(reduce_mod(a * b, p) == reduce_mod(a, p) * reduce_mod(b, p));
  }
}

TEST_CASE("polynomials: paper examples and mod compatibility") {
  PolynomialFunction f = PolynomialFunction::diagonal_squares(2);
  IntegerMatrix id = IntegerMatrix::identity(2);
  CHECK(f.eval(id) == 2);

  PolynomialFunction prod = PolynomialFunction::product_of_entries(2);
  CHECK(prod.eval(id) == 0);

  IntegerMatrix rot = IntegerMatrix::from_rows({{0, 1}, {-1, 0}});
  CHECK(f.eval(rot) == 0);

  IntegerMatrix three = IntegerMatrix::identity(3);
  CHECK_THROWS_AS((void)f.eval(three), DimensionMismatch);

  GroupSpec lub = preset_lubotzky(3, false);
  for (uint64_t stream = 0; stream < 30; ++stream) {
    Word w = random_word(lub, 88, stream, 8);
    IntegerMatrix g = evaluate_word_exact(lub, w);
    for (uint64_t p : {5ull, 7ull, 13ull}) {
      uint64_t lhs = mpz_fdiv_ui(f.eval(g).get_mpz_t(), p);
      CHECK(lhs == f.eval(reduce_mod(g, p)));
    }
  }
}

TEST_CASE("polynomial parser") {
  PolynomialFunction f = PolynomialFunction::parse(2, "a^2+d^2");
  IntegerMatrix g = IntegerMatrix::from_rows({{3, 1}, {5, 2}});
  CHECK(f.eval(g) == 13);
  CHECK(f.diagonal_only());
  CHECK(f.max_degree() == 2);

  PolynomialFunction prod = PolynomialFunction::parse(2, "a*b*c*d");
  CHECK(prod.eval(g) == 30);
  CHECK_FALSE(prod.diagonal_only());

  PolynomialFunction twin = PolynomialFunction::parse(2, "b^2+2*b");
  CHECK(twin.eval(g) == 3);

  PolynomialFunction e = PolynomialFunction::parse(2, "e00*e11 - 2*e01");
  CHECK(e.eval(g) == 4);

  CHECK_THROWS_AS(PolynomialFunction::parse(2, "a^2 +"), Error);
  CHECK_THROWS_AS(PolynomialFunction::parse(2, "x+1"), Error);
  CHECK_THROWS_AS(PolynomialFunction::parse(2, "e23+1"), Error);

  // algebra helpers compose exactly
  PolynomialFunction composed =
      (PolynomialFunction::entry(2, 0, 1) + PolynomialFunction::constant(2, 2)) *
      PolynomialFunction::entry(2, 0, 1);
  CHECK(composed.eval(g) == twin.eval(g));
}

TEST_CASE("presets: lubotzky family") {
  GroupSpec l3 = preset_lubotzky(3, false);
  CHECK(l3.generators.size() == 4);
  CHECK(l3.exceptional_primes == std::set<uint64_t>{3});
  CHECK_FALSE(l3.includes_identity);

  GroupSpec l3i = preset_lubotzky(3, true);
  CHECK(l3i.generators.size() == 5);
  CHECK(l3i.includes_identity);

  GroupSpec l1 = preset_lubotzky(1, false);
  CHECK(l1.exceptional_primes.empty());

  GroupSpec l6 = preset_lubotzky(6, false);
  CHECK(l6.exceptional_primes == std::set<uint64_t>{2, 3});

  CHECK(l3.growth_constant() == doctest::Approx(4.0));
  CHECK_THROWS_AS(preset_lubotzky(0, false), InvalidGroupSpec);
}

TEST_CASE("presets: symplectic generators preserve the form") {
  GroupSpec sp4 = preset_symplectic_elementary(2, false);
  CHECK(sp4.rank == 4);
  CHECK(sp4.generators.size() == 8);
  IntegerMatrix form = standard_symplectic_form(4);
  for (const auto& g : sp4.generators) CHECK(g.transpose() * form * g == form);
  CHECK_THROWS_AS(preset_symplectic_elementary(3, false), InvalidGroupSpec);

  GroupSpec sp2 = preset_symplectic_elementary(1, false);
  CHECK(sp2.rank == 2);
  CHECK(sp2.ambient == Ambient::Symplectic);
}

TEST_CASE("group spec validation") {
  // asymmetric set
  std::vector<IntegerMatrix> gens = {IntegerMatrix::from_rows({{1, 3}, {0, 1}})};
  CHECK_THROWS_AS(GroupSpec::make(2, gens, false, Ambient::SpecialLinear), InvalidGroupSpec);

  // determinant != 1
  std::vector<IntegerMatrix> bad = {IntegerMatrix::from_rows({{2, 0}, {0, 1}}),
                                    IntegerMatrix::from_rows({{2, 0}, {0, 1}})};
  CHECK_THROWS_AS(GroupSpec::make(2, bad, false, Ambient::SpecialLinear), InvalidGroupSpec);

  // empty generating set
  CHECK_THROWS_AS(GroupSpec::make(2, {}, false, Ambient::SpecialLinear), InvalidGroupSpec);

  // identity handled via the flag
  GroupSpec with_id = GroupSpec::make(2,
                                      {IntegerMatrix::from_rows({{1, 1}, {0, 1}}),
                                       IntegerMatrix::from_rows({{1, -1}, {0, 1}})},
                                      true, Ambient::SpecialLinear);
  CHECK(with_id.generators.size() == 3);
  CHECK(with_id.includes_identity);

  // digest changes with the generating set
  GroupSpec l3 = preset_lubotzky(3, false);
  GroupSpec l5 = preset_lubotzky(5, false);
  CHECK(l3.digest() != l5.digest());
  CHECK(l3.digest() == preset_lubotzky(3, false).digest());
}
