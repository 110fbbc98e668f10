#ifndef CHERRYWINE_VERTEX_SET_HPP
#define CHERRYWINE_VERTEX_SET_HPP

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <string>
#include <vector>

namespace cherrywine {

// Variables are labelled 1..d throughout the library; column c of a data
// matrix holds variable c + 1.
using Vertex = int;

// A sorted, duplicate-free set of vertices. Clusters, separators and
// conditioning sets are all VertexSets.
class VertexSet {
 public:
  using const_iterator = std::vector<Vertex>::const_iterator;

  VertexSet() = default;
  VertexSet(std::initializer_list<Vertex> vertices) : items_(vertices) {
    normalize();
  }
  explicit VertexSet(std::vector<Vertex> vertices) : items_(std::move(vertices)) {
    normalize();
  }

  // {1, ..., d}
  static VertexSet range(int d) {
    std::vector<Vertex> v(static_cast<std::size_t>(std::max(d, 0)));
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return VertexSet(std::move(v), sorted_tag{});
  }

  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  const_iterator begin() const noexcept { return items_.begin(); }
  const_iterator end() const noexcept { return items_.end(); }
  Vertex operator[](std::size_t i) const { return items_[i]; }
  Vertex front() const { return items_.front(); }
  Vertex back() const { return items_.back(); }
  const std::vector<Vertex>& items() const noexcept { return items_; }

  bool contains(Vertex v) const {
    return std::binary_search(items_.begin(), items_.end(), v);
  }

  bool is_subset_of(const VertexSet& other) const {
    return std::includes(other.items_.begin(), other.items_.end(),
                         items_.begin(), items_.end());
  }

  VertexSet with(Vertex v) const {
    VertexSet out = *this;
    auto pos = std::lower_bound(out.items_.begin(), out.items_.end(), v);
    if (pos == out.items_.end() || *pos != v) out.items_.insert(pos, v);
    return out;
  }

  VertexSet without(Vertex v) const {
    VertexSet out = *this;
    auto pos = std::lower_bound(out.items_.begin(), out.items_.end(), v);
    if (pos != out.items_.end() && *pos == v) out.items_.erase(pos);
    return out;
  }

  friend VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return VertexSet(std::move(out), sorted_tag{});
  }

  friend VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return VertexSet(std::move(out), sorted_tag{});
  }

  friend VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
    std::vector<Vertex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
    return VertexSet(std::move(out), sorted_tag{});
  }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;
  friend auto operator<=>(const VertexSet& a, const VertexSet& b) {
    return a.items_ <=> b.items_;
  }

  // "1,2,3"
  std::string joined(char sep = ',') const {
    std::string out;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (i) out += sep;
      out += std::to_string(items_[i]);
    }
    return out;
  }

  // "{1,2,3}"
  std::string str() const { return "{" + joined() + "}"; }

 private:
  struct sorted_tag {};
  VertexSet(std::vector<Vertex> sorted, sorted_tag) : items_(std::move(sorted)) {}

  void normalize() {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
  }

  std::vector<Vertex> items_;
};

struct VertexSetHash {
  std::size_t operator()(const VertexSet& s) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (Vertex v : s) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Calls fn(subset) for every size-r subset of `items`, in lexicographic order.
template <class Fn>
void for_each_combination(const VertexSet& items, std::size_t r, Fn&& fn) {
  const std::size_t n = items.size();
  if (r > n) return;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  std::vector<Vertex> buf(r);
  while (true) {
    for (std::size_t i = 0; i < r; ++i) buf[i] = items[idx[i]];
    fn(VertexSet(buf));
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace cherrywine

#endif  // CHERRYWINE_VERTEX_SET_HPP
