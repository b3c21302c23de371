#include "fepi/noncrossing.hpp"

#include <array>
#include <mutex>

#include "fepi/error.hpp"

namespace fepi {

namespace {

constexpr int kMaxOrder = 10;

bool crosses(const Partition& p) {
  // a < c < b < d with a, b in one block and c, d in another.
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (i == j) continue;
      for (int a : p[i])
        for (int b : p[i])
          for (int c : p[j])
            for (int d : p[j])
              if (a < c && c < b && b < d) return true;
    }
  }
  return false;
}

std::vector<Partition> enumerate(int n) {
  std::vector<Partition> out;
  if (n == 0) {
    out.push_back({});
    return out;
  }
  // Restricted growth strings: label[i] <= 1 + max(label[0..i-1]).
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  while (true) {
    int blocks = 0;
    for (int l : label) blocks = std::max(blocks, l + 1);
    Partition p(static_cast<std::size_t>(blocks));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].push_back(i);
    if (!crosses(p)) out.push_back(std::move(p));
    int i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = 0;
      for (int k = 0; k < i; ++k) prefix_max = std::max(prefix_max, label[static_cast<std::size_t>(k)]);
      if (label[static_cast<std::size_t>(i)] <= prefix_max) {
        ++label[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < n; ++k) label[static_cast<std::size_t>(k)] = 0;
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace

const std::vector<Partition>& noncrossing_partitions(int n) {
  require(n >= 0 && n <= kMaxOrder, ErrorKind::parameter,
          "non-crossing partitions are tabulated up to n = 10");
  static std::array<std::vector<Partition>, kMaxOrder + 1> table;
  static std::array<std::once_flag, kMaxOrder + 1> flags;
  std::call_once(flags[static_cast<std::size_t>(n)],
                 [n] { table[static_cast<std::size_t>(n)] = enumerate(n); });
  return table[static_cast<std::size_t>(n)];
}

std::vector<double> free_cumulants_from_moments(std::span<const double> moments) {
  require(!moments.empty(), ErrorKind::parameter, "need at least m_0");
  const int n = static_cast<int>(moments.size()) - 1;
  require(n <= kMaxOrder, ErrorKind::parameter, "free cumulants are supported up to order 10");
  std::vector<double> kappa(moments.size(), 0.0);
  for (int order = 1; order <= n; ++order) {
    double rest = 0.0;
    for (const Partition& p : noncrossing_partitions(order)) {
      if (p.size() == 1) continue;
      double term = 1.0;
      for (const auto& block : p) term *= kappa[block.size()];
      rest += term;
    }
    kappa[static_cast<std::size_t>(order)] = moments[static_cast<std::size_t>(order)] - rest;
  }
  return kappa;
}

std::vector<double> moments_from_free_cumulants(std::span<const double> cumulants) {
  require(!cumulants.empty(), ErrorKind::parameter, "need at least one entry");
  const int n = static_cast<int>(cumulants.size()) - 1;
  require(n <= kMaxOrder, ErrorKind::parameter, "moments are supported up to order 10");
  std::vector<double> m(cumulants.size(), 0.0);
  m[0] = 1.0;
  for (int order = 1; order <= n; ++order) {
    double sum = 0.0;
    for (const Partition& p : noncrossing_partitions(order)) {
      double term = 1.0;
      for (const auto& block : p) term *= cumulants[block.size()];
      sum += term;
    }
    m[static_cast<std::size_t>(order)] = sum;
  }
  return m;
}

double free_word_moment(std::span<const int> word, const std::vector<std::vector<double>>& cumulants) {
  const int m = static_cast<int>(word.size());
  if (m == 0) return 1.0;
  double sum = 0.0;
  for (const Partition& p : noncrossing_partitions(m)) {
    double term = 1.0;
    for (const auto& block : p) {
      const int v = word[static_cast<std::size_t>(block.front())];
      for (int idx : block) {
        if (word[static_cast<std::size_t>(idx)] != v) {
          term = 0.0;
          break;
        }
      }
      if (term == 0.0) break;
      const auto& k = cumulants.at(static_cast<std::size_t>(v));
      require(block.size() < k.size(), ErrorKind::parameter, "not enough free cumulants for word");
      term *= k[block.size()];
    }
    sum += term;
  }
  return sum;
}

}  // namespace fepi
