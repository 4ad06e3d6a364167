#include "pkpart/partitions.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace pkpart {

Composition::Composition(std::vector<int> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw DomainError("composition must have at least one part");
  for (int p : parts_) {
    if (p < 1) throw DomainError("composition parts must be positive");
    n_ += p;
  }
}

Composition::Composition(std::initializer_list<int> parts)
    : Composition(std::vector<int>(parts)) {}

Composition Composition::sorted_decreasing() const {
  auto p = parts_;
  std::sort(p.begin(), p.end(), std::greater<>());
  return Composition(std::move(p));
}

bool Composition::is_decreasing() const {
  return std::is_sorted(parts_.begin(), parts_.end(), std::greater<>());
}

Composition Composition::with_incremented(int block) const {
  auto p = parts_;
  p.at(block) += 1;
  return Composition(std::move(p));
}

Composition Composition::with_new_singleton() const {
  auto p = parts_;
  p.push_back(1);
  return Composition(std::move(p));
}

std::string Composition::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < parts_.size(); ++i) os << (i ? "," : "") << parts_[i];
  os << ')';
  return os.str();
}

SetPartition::SetPartition(std::vector<int> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw DomainError("set partition of an empty ground set");
  int next = 0;
  for (int b : labels_) {
    if (b < 0 || b > next) throw DomainError("labels are not a restricted growth string");
    if (b == next) ++next;
  }
  num_blocks_ = next;
}

SetPartition SetPartition::from_blocks(const std::vector<std::vector<int>>& blocks) {
  int n = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw DomainError("empty block");
    n += static_cast<int>(b.size());
  }
  std::vector<int> raw(n, -1);
  for (std::size_t j = 0; j < blocks.size(); ++j)
    for (int e : blocks[j]) {
      if (e < 1 || e > n || raw[e - 1] != -1)
        throw DomainError("blocks do not partition {1..n}");
      raw[e - 1] = static_cast<int>(j);
    }
  std::vector<int> relabel(blocks.size(), -1);
  int next = 0;
  for (int& b : raw) {
    if (relabel[b] == -1) relabel[b] = next++;
    b = relabel[b];
  }
  return SetPartition(std::move(raw));
}

std::vector<std::vector<int>> SetPartition::blocks() const {
  std::vector<std::vector<int>> out(num_blocks_);
  for (int i = 0; i < n(); ++i) out[labels_[i]].push_back(i + 1);
  return out;
}

nlohmann::json to_json(const SetPartition& p) { return p.blocks(); }

SetPartition set_partition_from_json(const nlohmann::json& j) {
  return SetPartition::from_blocks(j.get<std::vector<std::vector<int>>>());
}

void for_each_set_partition(int n, const std::function<void(const SetPartition&)>& visit) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw BoundsError("set partition enumeration supports 1 <= n <= 12");
  // Restricted growth strings a[0..n-1] with running maxima m.
  std::vector<int> a(n, 0), m(n, 0);
  for (;;) {
    visit(SetPartition(a));
    int i = n - 1;
    while (i > 0 && a[i] == m[i - 1] + 1) --i;
    if (i == 0) return;
    ++a[i];
    m[i] = std::max(m[i - 1], a[i]);
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      m[j] = m[i];
    }
  }
}

std::vector<SetPartition> enumerate_set_partitions(int n) {
  std::vector<SetPartition> out;
  for_each_set_partition(n, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

BigInt bell_number(int n) {
  if (n < 0) throw BoundsError("bell_number: negative n");
  // Bell triangle.
  std::vector<BigInt> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<BigInt> next{row.back()};
    for (const auto& v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.front();
}

void for_each_shape(int n, const std::function<void(const Composition&)>& visit) {
  if (n < 1) throw BoundsError("for_each_shape: n must be positive");
  std::vector<int> parts;
  std::function<void(int, int)> rec = [&](int remaining, int cap) {
    if (remaining == 0) {
      visit(Composition(parts));
      return;
    }
    for (int p = std::min(remaining, cap); p >= 1; --p) {
      parts.push_back(p);
      rec(remaining - p, p);
      parts.pop_back();
    }
  };
  rec(n, n);
}

void for_each_composition(int n, const std::function<void(const Composition&)>& visit) {
  if (n < 1 || n > 30) throw BoundsError("for_each_composition: 1 <= n <= 30");
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> parts;
    int run = 1;
    for (int i = 0; i < n - 1; ++i) {
      if (mask & (1u << i)) {
        parts.push_back(run);
        run = 1;
      } else {
        ++run;
      }
    }
    parts.push_back(run);
    visit(Composition(std::move(parts)));
  }
}

Composition composition_of(const SetPartition& p) {
  std::vector<int> sizes(p.num_blocks(), 0);
  for (int b : p.labels()) ++sizes[b];
  return Composition(std::move(sizes));
}

SetPartition restrict(const SetPartition& p, int m) {
  if (m < 1 || m > p.n()) throw BoundsError("restrict: m out of range");
  // A prefix of a restricted growth string is one.
  return SetPartition(std::vector<int>(p.labels().begin(), p.labels().begin() + m));
}

BigInt count_shape_arrangements(const Composition& sorted_parts) {
  if (!sorted_parts.is_decreasing())
    throw DomainError("count_shape_arrangements: parts must be sorted decreasingly");
  auto factorial = [](int k) {
    BigInt f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  BigInt denom = 1;
  std::map<int, int> multiplicity;
  for (int s : sorted_parts.parts()) {
    denom *= factorial(s);
    ++multiplicity[s];
  }
  for (const auto& [size, count] : multiplicity) denom *= factorial(count);
  return factorial(sorted_parts.n()) / denom;
}

SetPartition delete_first_k_classes(const SetPartition& p, int k) {
  if (k < 0) throw DomainError("delete_first_k_classes: negative k");
  if (k == 0) return p;
  if (k >= p.num_blocks())
    throw DomainError("delete_first_k_classes: k must be smaller than the block count");
  std::vector<int> labels;
  std::vector<int> relabel(p.num_blocks(), -1);
  int next = 0;
  for (int b : p.labels()) {
    if (b < k) continue;
    if (relabel[b] == -1) relabel[b] = next++;
    labels.push_back(relabel[b]);
  }
  return SetPartition(std::move(labels));
}

MassVector::MassVector(std::vector<double> masses, Kind kind)
    : masses_(std::move(masses)), kind_(kind) {
  for (double m : masses_)
    if (!(m > 0.0) || m > 1.0) throw DomainError("masses must lie in (0, 1]");
  const double s = sum();
  if (s > 1.0 + kTolerance) throw DomainError("masses sum to more than 1");
  if (kind_ == Kind::exact && std::abs(s - 1.0) > kTolerance)
    throw DomainError("exact mass vector must sum to 1");
}

double MassVector::sum() const {
  // Neumaier summation; long sticks produce many tiny masses.
  double s = 0.0, c = 0.0;
  for (double m : masses_) {
    const double t = s + m;
    c += std::abs(s) >= std::abs(m) ? (s - t) + m : (m - t) + s;
    s = t;
  }
  return s + c;
}

nlohmann::json to_json(const MassVector& m) { return m.masses(); }

MassVector size_biased_permutation(const MassVector& m, RandomSource& r) {
  if (m.size() == 0) throw DomainError("size_biased_permutation: empty mass vector");
  std::vector<double> remaining = m.masses();
  std::vector<double> out;
  out.reserve(remaining.size());
  double left = m.sum();
  while (!remaining.empty()) {
    const double u = r.uniform() * left;
    double acc = 0.0;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      acc += remaining[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    out.push_back(remaining[pick]);
    left -= remaining[pick];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    if (left <= 0.0) {
      // Rounding exhausted the remainder; recompute from what is left.
      left = 0.0;
      for (double v : remaining) left += v;
    }
  }
  return MassVector(std::move(out), m.kind());
}

}  // namespace pkpart
