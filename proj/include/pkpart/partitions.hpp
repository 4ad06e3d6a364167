#pragma once

// Set partitions of {1..n}, block-size compositions, exact enumeration and
// size-biased reordering of mass vectors.
//
// C++ indices are 0-based: element i of the ground set {1..n} is stored at
// position i-1 and block j (in order of least element) has label j-1. The JSON
// form uses the 1-based elements of the ground set.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pkpart/errors.hpp"
#include "pkpart/random.hpp"

namespace pkpart {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Largest ground set the exact enumeration oracle accepts (Bell(12) = 4213597).
inline constexpr int kMaxEnumerationSize = 12;

class Composition {
 public:
  Composition() = default;
  Composition(std::vector<int> parts);  // NOLINT(google-explicit-constructor)
  Composition(std::initializer_list<int> parts);

  const std::vector<int>& parts() const { return parts_; }
  int n() const { return n_; }
  int k() const { return static_cast<int>(parts_.size()); }
  bool empty() const { return parts_.empty(); }
  int operator[](std::size_t i) const { return parts_[i]; }

  // Block sizes sorted decreasingly (the "shape").
  Composition sorted_decreasing() const;
  bool is_decreasing() const;
  Composition with_incremented(int block) const;
  Composition with_new_singleton() const;

  std::string str() const;
  bool operator==(const Composition&) const = default;
  auto operator<=>(const Composition&) const = default;

  // Empty composition (n = 0). Only prediction rules accept it.
  static Composition none() { return Composition(Tag{}); }

 private:
  struct Tag {};
  explicit Composition(Tag) {}
  std::vector<int> parts_;
  int n_ = 0;
};

class SetPartition {
 public:
  // labels[i] is the 0-based block of element i; must be a restricted growth
  // string (labels[0] == 0, each label at most one more than all before it).
  explicit SetPartition(std::vector<int> labels);
  // Blocks given as lists of 1-based elements covering {1..n}; any order.
  static SetPartition from_blocks(const std::vector<std::vector<int>>& blocks);
  static SetPartition singleton() { return SetPartition(std::vector<int>{0}); }

  int n() const { return static_cast<int>(labels_.size()); }
  int num_blocks() const { return num_blocks_; }
  int block_of(int element) const { return labels_.at(element); }
  const std::vector<int>& labels() const { return labels_; }
  // 1-based element lists, blocks in least-element order.
  std::vector<std::vector<int>> blocks() const;

  bool operator==(const SetPartition&) const = default;
  auto operator<=>(const SetPartition&) const = default;

 private:
  std::vector<int> labels_;
  int num_blocks_ = 0;
};

nlohmann::json to_json(const SetPartition& p);
SetPartition set_partition_from_json(const nlohmann::json& j);

// Calls visit(p) for every set partition of {1..n}, in lexicographic order of
// restricted growth strings. 1 <= n <= kMaxEnumerationSize.
void for_each_set_partition(int n, const std::function<void(const SetPartition&)>& visit);
std::vector<SetPartition> enumerate_set_partitions(int n);
BigInt bell_number(int n);

// Integer partitions of n as decreasing compositions, in reverse lexicographic
// order starting from (n).
void for_each_shape(int n, const std::function<void(const Composition&)>& visit);
// All compositions of n (ordered, 2^(n-1) of them).
void for_each_composition(int n, const std::function<void(const Composition&)>& visit);

Composition composition_of(const SetPartition& p);
SetPartition restrict(const SetPartition& p, int m);
// Number of set partitions of {1..n} whose ranked block sizes equal the shape:
// n! / (prod n_i! prod_s m_s!) with m_s the multiplicity of size s.
BigInt count_shape_arrangements(const Composition& sorted_parts);
SetPartition delete_first_k_classes(const SetPartition& p, int k);

class MassVector {
 public:
  enum class Kind { exact, truncated };
  MassVector(std::vector<double> masses, Kind kind);

  const std::vector<double>& masses() const { return masses_; }
  Kind kind() const { return kind_; }
  std::size_t size() const { return masses_.size(); }
  double sum() const;

  static constexpr double kTolerance = 1e-12;

 private:
  std::vector<double> masses_;
  Kind kind_;
};

nlohmann::json to_json(const MassVector& m);

MassVector size_biased_permutation(const MassVector& m, RandomSource& r);

}  // namespace pkpart
