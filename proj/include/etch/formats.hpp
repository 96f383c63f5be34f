#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "etch/stream.hpp"

namespace etch {

// ---------------------------------------------------------------------------
// Compressed storage: every level keeps the sorted coordinates that actually
// occur (within their parent's segment) plus the positions of their child
// segments. Stored entries are exactly what the builder was given, explicit
// zeros included.

template <typename R>
struct CompressedTensor {
  struct Level {
    std::vector<int> pos;    // size = parent positions + 1; segment p is [pos[p], pos[p+1])
    std::vector<Index> crd;  // one coordinate per position, strictly increasing per segment
  };

  std::vector<Index> dims;
  std::vector<Level> levels;  // one per axis
  std::vector<R> vals;        // one per position at the deepest level

  int rank() const { return static_cast<int>(dims.size()); }
  size_t stored() const { return vals.size(); }

  void validate() const {
    if (dims.empty() || levels.size() != dims.size())
      fail(ErrorKind::MalformedFormat, "level count disagrees with rank");
    size_t parents = 1;
    for (size_t l = 0; l < levels.size(); ++l) {
      const Level& lv = levels[l];
      if (lv.pos.size() != parents + 1) fail(ErrorKind::MalformedFormat, "pos size mismatch");
      if (lv.pos.front() != 0) fail(ErrorKind::MalformedFormat, "pos must start at 0");
      if (lv.pos.back() != static_cast<int>(lv.crd.size()))
        fail(ErrorKind::MalformedFormat, "pos must end at crd size");
      for (size_t p = 0; p + 1 < lv.pos.size(); ++p) {
        if (lv.pos[p] > lv.pos[p + 1]) fail(ErrorKind::MalformedFormat, "pos must be monotone");
        for (int k = lv.pos[p]; k + 1 < lv.pos[p + 1]; ++k)
          if (lv.crd[k] >= lv.crd[k + 1])
            fail(ErrorKind::MalformedFormat, "crd must increase within a segment");
      }
      for (Index c : lv.crd)
        if (c < 0 || c >= dims[l]) fail(ErrorKind::MalformedFormat, "coordinate out of range");
      parents = lv.crd.size();
    }
    if (vals.size() != parents) fail(ErrorKind::MalformedFormat, "vals size mismatch");
  }
};

template <typename R>
using EntryList = std::vector<std::pair<Coord, R>>;

/// Sorts entries lexicographically, sums duplicate coordinates with the
/// semiring's add (keeping any resulting zeros), and assembles the levels.
template <class S>
CompressedTensor<typename S::value_type> build_compressed(EntryList<typename S::value_type> entries,
                                                          std::vector<Index> dims) {
  using R = typename S::value_type;
  for (auto& [c, v] : entries) {
    if (c.size() != dims.size()) fail(ErrorKind::MalformedFormat, "entry rank mismatch");
    for (size_t l = 0; l < c.size(); ++l)
      if (c[l] < 0 || c[l] >= dims[l]) fail(ErrorKind::Bounds, "entry coordinate out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  EntryList<R> unique;
  for (auto& e : entries) {
    if (!unique.empty() && unique.back().first == e.first)
      unique.back().second = S::add(unique.back().second, e.second);
    else
      unique.push_back(std::move(e));
  }

  CompressedTensor<R> t;
  t.dims = std::move(dims);
  t.levels.resize(t.dims.size());
  std::vector<std::pair<size_t, size_t>> segs{{0, unique.size()}};
  for (size_t l = 0; l < t.dims.size(); ++l) {
    auto& lv = t.levels[l];
    lv.pos.push_back(0);
    std::vector<std::pair<size_t, size_t>> next;
    for (auto [b, e] : segs) {
      for (size_t i = b; i < e;) {
        size_t j = i;
        while (j < e && unique[j].first[l] == unique[i].first[l]) ++j;
        lv.crd.push_back(unique[i].first[l]);
        next.emplace_back(i, j);
        i = j;
      }
      lv.pos.push_back(static_cast<int>(lv.crd.size()));
    }
    segs = std::move(next);
  }
  t.vals.reserve(unique.size());
  for (auto& e : unique) t.vals.push_back(std::move(e.second));
  t.validate();
  return t;
}

/// Cursor over one segment of one compressed level. Skip is a binary search
/// over the remaining coordinates of the segment.
template <typename R>
class CompressedLevelStream final : public Stream<R> {
 public:
  CompressedLevelStream(std::shared_ptr<const CompressedTensor<R>> t, size_t level, int begin,
                        int end)
      : t_(std::move(t)), level_(level), p_(begin), end_(end) {}

  bool valid() const override { return p_ < end_; }
  bool ready() const override { return valid(); }
  Index index() const override { return t_->levels[level_].crd[static_cast<size_t>(p_)]; }

  Value<R> value() const override {
    if (level_ + 1 == t_->levels.size()) return Value<R>(t_->vals[static_cast<size_t>(p_)]);
    const auto& child = t_->levels[level_ + 1];
    return Value<R>(std::make_unique<CompressedLevelStream>(
        t_, level_ + 1, child.pos[static_cast<size_t>(p_)],
        child.pos[static_cast<size_t>(p_) + 1]));
  }

  void advance() override {
    ++op_counts().advances;
    if (valid()) ++p_;
  }

  bool searchable() const override { return true; }

  void skip(Index target) override {
    ++op_counts().skips;
    const auto& crd = t_->levels[level_].crd;
    int lo = p_, hi = end_;
    while (lo < hi) {
      ++op_counts().comparisons;
      int mid = lo + (hi - lo) / 2;
      if (crd[static_cast<size_t>(mid)] < target)
        lo = mid + 1;
      else
        hi = mid;
    }
    p_ = lo;
  }

  StreamPtr<R> clone() const override {
    return std::make_unique<CompressedLevelStream>(t_, level_, p_, end_);
  }

 private:
  std::shared_ptr<const CompressedTensor<R>> t_;
  size_t level_;
  int p_, end_;
};

template <typename R>
StreamPtr<R> stream_of_compressed(std::shared_ptr<const CompressedTensor<R>> t) {
  int begin = t->levels[0].pos[0];
  int end = t->levels[0].pos[1];
  return std::make_unique<CompressedLevelStream<R>>(std::move(t), 0, begin, end);
}

// ---------------------------------------------------------------------------
// Dense storage: row-major values over the full coordinate box.

template <typename R>
struct DenseTensor {
  std::vector<Index> dims;
  std::vector<R> vals;  // row-major, size = product of dims

  int rank() const { return static_cast<int>(dims.size()); }

  void validate() const {
    if (dims.empty()) fail(ErrorKind::MalformedFormat, "dense tensor needs rank >= 1");
    size_t n = 1;
    for (Index d : dims) {
      if (d < 0) fail(ErrorKind::MalformedFormat, "negative dimension");
      n *= static_cast<size_t>(d);
    }
    if (vals.size() != n) fail(ErrorKind::MalformedFormat, "vals size mismatch");
  }
};

template <class S>
DenseTensor<typename S::value_type> build_dense(const EntryList<typename S::value_type>& entries,
                                                std::vector<Index> dims) {
  using R = typename S::value_type;
  DenseTensor<R> t;
  t.dims = std::move(dims);
  size_t n = 1;
  for (Index d : t.dims) n *= static_cast<size_t>(d);
  t.vals.assign(n, S::zero());
  for (const auto& [c, v] : entries) {
    if (c.size() != t.dims.size()) fail(ErrorKind::MalformedFormat, "entry rank mismatch");
    size_t off = 0;
    for (size_t l = 0; l < c.size(); ++l) {
      if (c[l] < 0 || c[l] >= t.dims[l]) fail(ErrorKind::Bounds, "entry coordinate out of range");
      off = off * static_cast<size_t>(t.dims[l]) + static_cast<size_t>(c[l]);
    }
    t.vals[off] = S::add(t.vals[off], v);
  }
  return t;
}

/// Cursor over one axis of a dense tensor; always ready, constant-time skip.
template <typename R>
class DenseLevelStream final : public Stream<R> {
 public:
  DenseLevelStream(std::shared_ptr<const DenseTensor<R>> t, size_t level, size_t base,
                   Index at = 0)
      : t_(std::move(t)), level_(level), base_(base), i_(at) {}

  bool valid() const override { return i_ < t_->dims[level_]; }
  bool ready() const override { return valid(); }
  Index index() const override { return i_; }

  Value<R> value() const override {
    size_t off = base_ * static_cast<size_t>(t_->dims[level_]) + static_cast<size_t>(i_);
    if (level_ + 1 == t_->dims.size()) return Value<R>(t_->vals[off]);
    return Value<R>(std::make_unique<DenseLevelStream>(t_, level_ + 1, off));
  }

  void advance() override {
    ++op_counts().advances;
    if (valid()) ++i_;
  }

  bool searchable() const override { return true; }

  void skip(Index target) override {
    ++op_counts().skips;
    if (target > i_) i_ = target;
  }

  StreamPtr<R> clone() const override {
    return std::make_unique<DenseLevelStream>(t_, level_, base_, i_);
  }

 private:
  std::shared_ptr<const DenseTensor<R>> t_;
  size_t level_;
  size_t base_;
  Index i_;
};

template <typename R>
StreamPtr<R> stream_of_dense(std::shared_ptr<const DenseTensor<R>> t) {
  return std::make_unique<DenseLevelStream<R>>(std::move(t), 0, 0);
}

}  // namespace etch
