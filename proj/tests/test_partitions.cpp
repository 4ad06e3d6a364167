#include <algorithm>
#include <map>
#include <set>
#include <cmath>

#include "doctest.h"
#include "pkpart/partitions.hpp"

using namespace pkpart;

namespace {

SetPartition blocks(std::vector<std::vector<int>> b) { return SetPartition::from_blocks(b); }

// Stirling numbers of the second kind summed, as an independent Bell oracle.
BigInt bell_by_stirling(int n) {
  std::vector<std::vector<BigInt>> s(n + 1, std::vector<BigInt>(n + 1, 0));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int k = 1; k <= i; ++k) s[i][k] = k * s[i - 1][k] + s[i - 1][k - 1];
  BigInt total = 0;
  for (int k = 0; k <= n; ++k) total += s[n][k];
  return total;
}

}  // namespace

TEST_CASE("enumeration counts match Bell numbers") {
  CHECK(enumerate_set_partitions(1).size() == 1);
  CHECK(enumerate_set_partitions(3).size() == 5);
  CHECK(enumerate_set_partitions(8).size() == 4140);
  for (int n = 1; n <= 10; ++n) {
    std::size_t count = 0;
    for_each_set_partition(n, [&](const SetPartition&) { ++count; });
    CHECK(BigInt(count) == bell_by_stirling(n));
    CHECK(bell_number(n) == bell_by_stirling(n));
  }
  CHECK_THROWS_AS(enumerate_set_partitions(0), BoundsError);
  CHECK_THROWS_AS(enumerate_set_partitions(13), BoundsError);
}

TEST_CASE("enumeration yields distinct canonical partitions") {
  auto all = enumerate_set_partitions(6);
  auto sorted = all;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  for (const auto& p : all) {
    auto b = p.blocks();
    CHECK(b.front().front() == 1);
    for (std::size_t j = 1; j < b.size(); ++j) CHECK(b[j].front() > b[j - 1].front());
  }
}

TEST_CASE("composition_of follows least-element order") {
  CHECK(composition_of(blocks({{1, 2, 5}, {3}, {4}})) == Composition{3, 1, 1});
  CHECK(composition_of(SetPartition::singleton()) == Composition{1});
  CHECK(composition_of(blocks({{2}, {1, 3}})) == Composition{2, 1});
}

TEST_CASE("restrict") {
  CHECK(restrict(blocks({{1, 3}, {2}}), 2) == blocks({{1}, {2}}));
  auto p = blocks({{1, 2, 5}, {3}, {4}});
  CHECK(restrict(p, p.n()) == p);
  CHECK(restrict(p, 4) == blocks({{1, 2}, {3}, {4}}));
  CHECK_THROWS_AS(restrict(p, 0), BoundsError);
  CHECK_THROWS_AS(restrict(p, 6), BoundsError);
}

TEST_CASE("restrict composes") {
  for (const auto& p : enumerate_set_partitions(7))
    for (int m = 1; m <= 7; ++m)
      for (int l = 1; l <= m; ++l) REQUIRE(restrict(restrict(p, m), l) == restrict(p, l));
}

TEST_CASE("count_shape_arrangements against brute force") {
  CHECK(count_shape_arrangements(Composition{1, 1, 1}) == 1);
  CHECK(count_shape_arrangements(Composition{2, 1}) == 3);
  CHECK(count_shape_arrangements(Composition{2, 2}) == 3);
  CHECK_THROWS_AS(count_shape_arrangements(Composition{1, 2}), DomainError);
  for (int n = 1; n <= 9; ++n) {
    std::map<Composition, long> brute;
    for_each_set_partition(n, [&](const SetPartition& p) {
      ++brute[composition_of(p).sorted_decreasing()];
    });
    BigInt total = 0;
    for_each_shape(n, [&](const Composition& s) {
      CHECK(count_shape_arrangements(s) == brute.at(s));
      total += count_shape_arrangements(s);
    });
    CHECK(total == bell_number(n));
  }
}

TEST_CASE("for_each_composition enumerates 2^(n-1) compositions") {
  for (int n = 1; n <= 8; ++n) {
    std::set<Composition> seen;
    for_each_composition(n, [&](const Composition& c) {
      CHECK(c.n() == n);
      seen.insert(c);
    });
    CHECK(seen.size() == (1u << (n - 1)));
  }
}

TEST_CASE("delete_first_k_classes") {
  CHECK(delete_first_k_classes(blocks({{1, 3}, {2}, {4}}), 1) == blocks({{1}, {2}}));
  CHECK(delete_first_k_classes(blocks({{1}, {2, 3}}), 1) == blocks({{1, 2}}));
  auto p = blocks({{1, 3}, {2}, {4}});
  CHECK(delete_first_k_classes(p, 0) == p);
  CHECK_THROWS_AS(delete_first_k_classes(p, 3), DomainError);
  CHECK_THROWS_AS(delete_first_k_classes(p, -1), DomainError);
  // Surviving block sizes equal the tail of the original composition.
  for (const auto& q : enumerate_set_partitions(7)) {
    for (int k = 1; k < q.num_blocks(); ++k) {
      auto tail = composition_of(q).parts();
      tail.erase(tail.begin(), tail.begin() + k);
      CHECK(composition_of(delete_first_k_classes(q, k)).parts() == tail);
    }
  }
}

TEST_CASE("set partition JSON round trip") {
  auto p = blocks({{1, 2, 5}, {3}, {4}});
  CHECK(to_json(p).dump() == "[[1,2,5],[3],[4]]");
  CHECK(set_partition_from_json(nlohmann::json::parse("[[3],[1,2,5],[4]]")) == p);
  CHECK_THROWS_AS(set_partition_from_json(nlohmann::json::parse("[[1],[1,2]]")), DomainError);
}

TEST_CASE("SetPartition validation") {
  CHECK_THROWS_AS(SetPartition(std::vector<int>{1, 0}), DomainError);
  CHECK_THROWS_AS(SetPartition(std::vector<int>{0, 2}), DomainError);
  CHECK_THROWS_AS(Composition(std::vector<int>{2, 0}), DomainError);
}

TEST_CASE("MassVector invariants") {
  CHECK_NOTHROW(MassVector({0.5, 0.5}, MassVector::Kind::exact));
  CHECK_THROWS_AS(MassVector({0.5, 0.4}, MassVector::Kind::exact), DomainError);
  CHECK_NOTHROW(MassVector({0.5, 0.4}, MassVector::Kind::truncated));
  CHECK_THROWS_AS(MassVector({0.7, 0.4}, MassVector::Kind::truncated), DomainError);
  CHECK_THROWS_AS(MassVector({0.0, 1.0}, MassVector::Kind::exact), DomainError);
}

TEST_CASE("size-biased permutation") {
  RandomSource r(11);
  CHECK(size_biased_permutation(MassVector({1.0}, MassVector::Kind::exact), r).masses() ==
        std::vector<double>{1.0});
  CHECK_THROWS_AS(size_biased_permutation(MassVector({}, MassVector::Kind::truncated), r),
                  DomainError);

  SUBCASE("output is a permutation of the input") {
    MassVector m({0.1, 0.2, 0.3, 0.15, 0.25}, MassVector::Kind::exact);
    for (int i = 0; i < 200; ++i) {
      auto out = size_biased_permutation(m, r).masses();
      auto a = m.masses();
      std::sort(a.begin(), a.end());
      std::sort(out.begin(), out.end());
      REQUIRE(a == out);
    }
  }
  SUBCASE("first pick frequency") {
    MassVector m({0.7, 0.3}, MassVector::Kind::exact);
    const int N = 100000;
    int hits = 0;
    for (int i = 0; i < N; ++i) hits += size_biased_permutation(m, r).masses()[0] == 0.7;
    const double sigma = std::sqrt(0.7 * 0.3 / N);
    CHECK(std::abs(hits / double(N) - 0.7) < 4 * sigma);
  }
  SUBCASE("full order probability") {
    MassVector m({0.5, 0.3, 0.2}, MassVector::Kind::exact);
    const int N = 100000;
    int hits = 0;
    for (int i = 0; i < N; ++i) {
      auto out = size_biased_permutation(m, r).masses();
      hits += out == std::vector<double>{0.3, 0.5, 0.2};
    }
    const double p = 0.3 * (0.5 / 0.7);
    CHECK(std::abs(hits / double(N) - p) < 4 * std::sqrt(p * (1 - p) / N));
  }
}

TEST_CASE("random streams are reproducible and split by key") {
  RandomSource a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
  RandomSource parent(9);
  auto c1 = parent.split(3);
  parent.uniform();
  auto c2 = parent.split(3);
  CHECK(c1.uniform() == c2.uniform());
  CHECK(parent.split(1).key() != parent.split(2).key());
}
