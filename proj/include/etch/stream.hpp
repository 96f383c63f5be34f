#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "etch/error.hpp"
#include "etch/index.hpp"
#include "etch/semiring.hpp"
#include "etch/variable.hpp"

namespace etch {

// ---------------------------------------------------------------------------
// Instrumentation. Primitive cursors (the ones that touch stored data) bump
// these counters on every advance/skip they receive; composite streams do not.
// Binary searches additionally count their comparisons.

struct OpCounts {
  std::uint64_t advances = 0;
  std::uint64_t skips = 0;
  std::uint64_t comparisons = 0;
};

inline OpCounts& op_counts() {
  thread_local OpCounts counts;
  return counts;
}

inline void reset_op_counts() { op_counts() = OpCounts{}; }

// ---------------------------------------------------------------------------
// Evaluation budget: a shared countdown over state transitions, at every
// nesting level. Walkers tick it; exhaustion raises ErrorKind::Budget.

struct Budget {
  std::uint64_t remaining;

  explicit Budget(std::uint64_t limit = kDefaultLimit) : remaining(limit) {}
  static constexpr std::uint64_t kDefaultLimit = 10'000'000;

  void tick() {
    if (remaining == 0) fail(ErrorKind::Budget, "state budget exhausted");
    --remaining;
  }
};

// ---------------------------------------------------------------------------
// Streams.

template <typename R>
class Stream;

template <typename R>
using StreamPtr = std::unique_ptr<Stream<R>>;

/// What a ready state yields: either a semiring scalar or a nested stream.
/// Nested values are fresh single-owner cursors; reading a value never
/// disturbs the stream it came from.
template <typename R>
class Value {
 public:
  Value() : v_(R{}) {}
  explicit Value(R scalar) : v_(std::move(scalar)) {}
  explicit Value(StreamPtr<R> s) : v_(std::move(s)) {}

  bool is_scalar() const { return std::holds_alternative<R>(v_); }
  const R& scalar() const { return std::get<R>(v_); }
  Stream<R>& stream() { return *std::get<StreamPtr<R>>(v_); }
  const Stream<R>& stream() const { return *std::get<StreamPtr<R>>(v_); }
  StreamPtr<R> take_stream() { return std::move(std::get<StreamPtr<R>>(v_)); }

  Value clone() const;

 private:
  std::variant<R, StreamPtr<R>> v_;
};

/// A stateful cursor over an indexed stream.
///
/// States are either valid or terminal (valid() == false); terminal is
/// absorbing and advance() on it is a no-op. While valid, index() is always
/// defined; on a not-yet-ready state it is a lower bound on the indices of
/// any later ready state, which is what merges rely on. value() may be
/// called only on valid, ready states.
///
/// skip(x) moves to the earliest state whose index is >= x without passing
/// any state that could be ready at an index >= x. Every stream supports it;
/// the base implementation degrades to repeated advance(). searchable()
/// reports whether skip is better than that.
template <typename R>
class Stream {
 public:
  virtual ~Stream() = default;

  virtual bool valid() const = 0;
  virtual bool ready() const = 0;
  virtual Index index() const = 0;
  virtual Value<R> value() const = 0;
  virtual void advance() = 0;

  virtual bool searchable() const { return false; }
  virtual void skip(Index target) {
    while (valid() && index() < target) advance();
  }

  virtual StreamPtr<R> clone() const = 0;
};

template <typename R>
Value<R> Value<R>::clone() const {
  if (is_scalar()) return Value(scalar());
  return Value(stream().clone());
}

// ---------------------------------------------------------------------------
// The canonical primitive stream: a sorted entry list, every state ready.
// Doubles as the bridge from test fixtures and in-memory vectors.

template <typename R>
class EntryListStream final : public Stream<R> {
 public:
  using Entries = std::vector<std::pair<Index, Value<R>>>;

  explicit EntryListStream(std::shared_ptr<const Entries> entries, size_t pos = 0)
      : entries_(std::move(entries)), pos_(pos) {}

  static StreamPtr<R> of_scalars(std::vector<std::pair<Index, R>> scalars) {
    auto entries = std::make_shared<Entries>();
    for (auto& [i, v] : scalars) entries->emplace_back(i, Value<R>(std::move(v)));
    return std::make_unique<EntryListStream>(std::move(entries));
  }

  bool valid() const override { return pos_ < entries_->size(); }
  bool ready() const override { return valid(); }
  Index index() const override { return (*entries_)[pos_].first; }
  Value<R> value() const override { return (*entries_)[pos_].second.clone(); }

  void advance() override {
    ++op_counts().advances;
    if (valid()) ++pos_;
  }

  bool searchable() const override { return true; }

  void skip(Index target) override {
    ++op_counts().skips;
    size_t lo = pos_, hi = entries_->size();
    while (lo < hi) {
      ++op_counts().comparisons;
      size_t mid = lo + (hi - lo) / 2;
      if ((*entries_)[mid].first < target)
        lo = mid + 1;
      else
        hi = mid;
    }
    pos_ = lo;
  }

  StreamPtr<R> clone() const override {
    return std::make_unique<EntryListStream>(entries_, pos_);
  }

 private:
  std::shared_ptr<const Entries> entries_;
  size_t pos_;
};

// ---------------------------------------------------------------------------
// Walkers. Each one clones its input, so callers keep their cursor.

/// Single-level meaning: applies `f` to the value at every ready state and
/// adds results per index. The result is a rank-1 variable over `index_id`.
template <class S, class F>
SparseVariable<typename S::value_type> eval_stream(const Stream<typename S::value_type>& q,
                                                   F&& f, Budget& budget, int index_id = 0) {
  using R = typename S::value_type;
  SparseVariable<R> out;
  out.shape = {index_id};
  auto cur = q.clone();
  while (cur->valid()) {
    budget.tick();
    if (cur->ready()) out.template accumulate<S>(Coord{cur->index()}, f(cur->value()));
    cur->advance();
  }
  return out.template normalized<S>();
}

namespace detail {

template <class S>
void eval_walk(Stream<typename S::value_type>& cur, Coord& prefix,
               SparseVariable<typename S::value_type>& out, Budget& budget, int& rank) {
  while (cur.valid()) {
    budget.tick();
    if (cur.ready()) {
      prefix.push_back(cur.index());
      Value<typename S::value_type> v = cur.value();
      if (v.is_scalar()) {
        if (rank < 0)
          rank = static_cast<int>(prefix.size());
        else if (rank != static_cast<int>(prefix.size()))
          fail(ErrorKind::RuntimeFault, "stream has ragged nesting depth");
        out.template accumulate<S>(prefix, v.scalar());
      } else {
        auto sub = v.take_stream();
        eval_walk<S>(*sub, prefix, out, budget, rank);
      }
      prefix.pop_back();
    }
    cur.advance();
  }
}

}  // namespace detail

/// Full nested meaning: one coordinate per level, duplicate coordinates
/// summed. `shape` names the axes; when empty it is filled with 0..rank-1.
template <class S>
SparseVariable<typename S::value_type> eval_nested(const Stream<typename S::value_type>& q,
                                                   Budget& budget,
                                                   std::vector<int> shape = {}) {
  using R = typename S::value_type;
  SparseVariable<R> out;
  Coord prefix;
  int rank = -1;
  auto cur = q.clone();
  detail::eval_walk<S>(*cur, prefix, out, budget, rank);
  if (rank < 0) rank = shape.empty() ? 1 : static_cast<int>(shape.size());
  if (shape.empty())
    for (int i = 0; i < rank; ++i) shape.push_back(i);
  if (static_cast<int>(shape.size()) != rank)
    fail(ErrorKind::ShapeMismatch, "eval_nested: shape rank disagrees with stream depth");
  out.shape = std::move(shape);
  return out.template normalized<S>();
}

/// Evaluate a scalar-valued (rank-0 after contraction) value.
template <class S>
typename S::value_type eval_value(const Value<typename S::value_type>& v, Budget& budget) {
  using R = typename S::value_type;
  if (v.is_scalar()) return v.scalar();
  R acc = S::zero();
  auto cur = v.stream().clone();
  while (cur->valid()) {
    budget.tick();
    if (cur->ready()) acc = S::add(acc, eval_value<S>(cur->value(), budget));
    cur->advance();
  }
  return acc;
}

struct SimplicityReport {
  bool finite = true;
  bool monotonic = true;
  bool reduced = true;
  std::uint64_t steps_used = 0;

  bool all() const { return finite && monotonic && reduced; }
};

namespace detail {

template <typename R>
void check_walk(Stream<R>& cur, SimplicityReport& rep, std::uint64_t limit) {
  bool have_prev = false;
  Index prev = 0;
  std::set<Index> ready_seen;
  while (cur.valid()) {
    if (rep.steps_used >= limit) {
      rep.finite = false;
      return;
    }
    ++rep.steps_used;
    Index i = cur.index();
    if (have_prev && i < prev) rep.monotonic = false;
    have_prev = true;
    prev = i;
    if (cur.ready()) {
      if (!ready_seen.insert(i).second) rep.reduced = false;
      Value<R> v = cur.value();
      if (!v.is_scalar()) {
        auto sub = v.take_stream();
        check_walk(*sub, rep, limit);
        if (!rep.finite) return;
      }
    }
    cur.advance();
  }
}

}  // namespace detail

/// Verifies the simple-stream obligations by exhaustive walk, at every
/// nesting level: termination within `limit` steps, non-decreasing indices,
/// and no two ready states sharing an index. Non-termination is reported,
/// never thrown.
template <typename R>
SimplicityReport check_simple(const Stream<R>& q, std::uint64_t limit = Budget::kDefaultLimit) {
  SimplicityReport rep;
  auto cur = q.clone();
  detail::check_walk(*cur, rep, limit);
  return rep;
}

struct SizeMetrics {
  std::uint64_t size0 = 0;     // reachable states of the top level, terminal included
  std::uint64_t size = 0;      // recursive: sum over ready states of size(value); scalars count 1
  std::uint64_t advances = 0;  // primitive advances incurred while measuring
  std::uint64_t skips = 0;     // primitive skips incurred while measuring
};

namespace detail {

template <typename R>
std::uint64_t size_walk(Stream<R>& cur, Budget& budget) {
  std::uint64_t total = 0;
  while (cur.valid()) {
    budget.tick();
    if (cur.ready()) {
      Value<R> v = cur.value();
      if (v.is_scalar()) {
        total += 1;
      } else {
        auto sub = v.take_stream();
        total += size_walk(*sub, budget);
      }
    }
    cur.advance();
  }
  return total;
}

}  // namespace detail

template <typename R>
SizeMetrics measure(const Stream<R>& q, Budget& budget) {
  SizeMetrics m;
  OpCounts before = op_counts();
  {
    auto cur = q.clone();
    m.size0 = 1;
    while (cur->valid()) {
      budget.tick();
      cur->advance();
      ++m.size0;
    }
  }
  {
    auto cur = q.clone();
    m.size = detail::size_walk(*cur, budget);
  }
  OpCounts after = op_counts();
  m.advances = after.advances - before.advances;
  m.skips = after.skips - before.skips;
  return m;
}

}  // namespace etch
