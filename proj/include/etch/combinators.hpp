#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "etch/stream.hpp"

namespace etch {

// ---------------------------------------------------------------------------
// Empty stream: the zero of stream-valued addition.

template <typename R>
class EmptyStream final : public Stream<R> {
 public:
  bool valid() const override { return false; }
  bool ready() const override { return false; }
  Index index() const override { fail(ErrorKind::RuntimeFault, "index() on invalid stream"); }
  Value<R> value() const override { fail(ErrorKind::RuntimeFault, "value() on invalid stream"); }
  void advance() override {}
  bool searchable() const override { return true; }
  void skip(Index) override {}
  StreamPtr<R> clone() const override { return std::make_unique<EmptyStream>(); }
};

template <typename R>
StreamPtr<R> make_empty() {
  return std::make_unique<EmptyStream<R>>();
}

// ---------------------------------------------------------------------------
// Replication: the constant stream over a dense domain {0, .., dim-1}.
// Every state is ready and yields (a fresh cursor over) the same value, so
// skip is a constant-time assignment. The prototype is shared immutably
// between clones; each read re-enumerates its own cursor.

template <typename R>
class ReplicateStream final : public Stream<R> {
 public:
  ReplicateStream(Index dim, std::shared_ptr<const Value<R>> proto, Index at = 0)
      : dim_(dim), proto_(std::move(proto)), i_(at) {}

  bool valid() const override { return i_ < dim_; }
  bool ready() const override { return valid(); }
  Index index() const override { return i_; }
  Value<R> value() const override { return proto_->clone(); }

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
    return std::make_unique<ReplicateStream>(dim_, proto_, i_);
  }

 private:
  Index dim_;
  std::shared_ptr<const Value<R>> proto_;
  Index i_;
};

template <typename R>
StreamPtr<R> replicate(Index dim, Value<R> proto) {
  return std::make_unique<ReplicateStream<R>>(
      dim, std::make_shared<const Value<R>>(std::move(proto)));
}

// ---------------------------------------------------------------------------
// Product.

template <class S>
Value<typename S::value_type> value_mul(Value<typename S::value_type> a,
                                        Value<typename S::value_type> b, bool skipping);

/// Intersection-shaped merge of two streams over one index domain.
///
/// index is max(ia, ib); the state is ready only when both operands are ready
/// at the same index; advance steps the operand that is behind, where "behind"
/// means ia < ib, or indices tie and a is not ready; ties with both operands
/// ready step b. The skipping variant follows each such step with a skip to
/// the other operand's index, which is what turns mismatched supports into
/// logarithmic work. At least one operand must be reduced or duplicate
/// indices on the other side will pair up more than once.
template <class S>
class MulStream final : public Stream<typename S::value_type> {
  using R = typename S::value_type;

 public:
  MulStream(StreamPtr<R> a, StreamPtr<R> b, bool skipping)
      : a_(std::move(a)), b_(std::move(b)), skipping_(skipping) {}

  bool valid() const override { return a_->valid() && b_->valid(); }
  bool ready() const override {
    return valid() && a_->ready() && b_->ready() && a_->index() == b_->index();
  }
  Index index() const override { return std::max(a_->index(), b_->index()); }
  Value<R> value() const override { return value_mul<S>(a_->value(), b_->value(), skipping_); }

  void advance() override {
    if (!valid()) return;
    Index ia = a_->index(), ib = b_->index();
    bool step_a = ia < ib || (ia == ib && !a_->ready());
    if (step_a) {
      a_->advance();
      if (skipping_ && a_->valid() && a_->index() < ib) a_->skip(ib);
    } else {
      b_->advance();
      if (skipping_ && b_->valid() && b_->index() < ia) b_->skip(ia);
    }
  }

  bool searchable() const override { return a_->searchable() && b_->searchable(); }

  void skip(Index target) override {
    a_->skip(target);
    if (a_->valid()) b_->skip(std::max(target, a_->index()));
  }

  StreamPtr<R> clone() const override {
    return std::make_unique<MulStream>(a_->clone(), b_->clone(), skipping_);
  }

 private:
  StreamPtr<R> a_, b_;
  bool skipping_;
};

template <class S>
StreamPtr<typename S::value_type> mul(StreamPtr<typename S::value_type> a,
                                      StreamPtr<typename S::value_type> b) {
  return std::make_unique<MulStream<S>>(std::move(a), std::move(b), false);
}

template <class S>
StreamPtr<typename S::value_type> mul_skipping(StreamPtr<typename S::value_type> a,
                                               StreamPtr<typename S::value_type> b) {
  return std::make_unique<MulStream<S>>(std::move(a), std::move(b), true);
}

template <class S>
Value<typename S::value_type> value_mul(Value<typename S::value_type> a,
                                        Value<typename S::value_type> b, bool skipping) {
  using R = typename S::value_type;
  if (a.is_scalar() != b.is_scalar())
    fail(ErrorKind::ShapeMismatch, "product of values at different depths");
  if (a.is_scalar()) return Value<R>(S::mul(a.scalar(), b.scalar()));
  return Value<R>(std::make_unique<MulStream<S>>(a.take_stream(), b.take_stream(), skipping));
}

// ---------------------------------------------------------------------------
// Sum.

template <class S>
Value<typename S::value_type> value_add(Value<typename S::value_type> a,
                                        Value<typename S::value_type> b);

/// Union-shaped merge. index is the least index among the valid operands.
/// A state is ready when some operand is ready at that least index and no
/// operand is sitting at it unresolved: emitting early would either count a
/// ready operand twice or surface a duplicate index once the laggard
/// resolves. The value sums the operands that are ready at the least index.
/// advance steps the strictly smaller operand, both on a tie, where a is
/// strictly smaller iff ia < ib, or indices tie with a pending and b ready.
template <class S>
class SumStream final : public Stream<typename S::value_type> {
  using R = typename S::value_type;

 public:
  SumStream(StreamPtr<R> a, StreamPtr<R> b) : a_(std::move(a)), b_(std::move(b)) {}

  bool valid() const override { return a_->valid() || b_->valid(); }

  Index index() const override {
    if (!a_->valid()) return b_->index();
    if (!b_->valid()) return a_->index();
    return std::min(a_->index(), b_->index());
  }

  bool ready() const override {
    if (!valid()) return false;
    Index m = index();
    // One ready() probe per operand per call: nested sums are walked per
    // state, and re-probing would go exponential in the merge tree's depth.
    bool a_at = a_->valid() && a_->index() == m;
    bool b_at = b_->valid() && b_->index() == m;
    bool a_rdy = a_at && a_->ready();
    bool b_rdy = b_at && b_->ready();
    return (a_rdy || b_rdy) && !(a_at && !a_rdy) && !(b_at && !b_rdy);
  }

  Value<R> value() const override {
    Index m = index();
    bool ca = a_->valid() && a_->index() == m && a_->ready();
    bool cb = b_->valid() && b_->index() == m && b_->ready();
    if (ca && cb) return value_add<S>(a_->value(), b_->value());
    if (ca) return a_->value();
    return b_->value();
  }

  void advance() override {
    if (!a_->valid()) {
      b_->advance();
      return;
    }
    if (!b_->valid()) {
      a_->advance();
      return;
    }
    Index ia = a_->index(), ib = b_->index();
    bool a_lt = ia < ib;
    bool b_lt = ib < ia;
    if (ia == ib) {
      bool a_rdy = a_->ready(), b_rdy = b_->ready();
      a_lt = !a_rdy && b_rdy;
      b_lt = !b_rdy && a_rdy;
    }
    if (a_lt) {
      a_->advance();
    } else if (b_lt) {
      b_->advance();
    } else {
      a_->advance();
      b_->advance();
    }
  }

  bool searchable() const override { return a_->searchable() && b_->searchable(); }

  void skip(Index target) override {
    if (a_->valid()) a_->skip(target);
    if (b_->valid()) b_->skip(target);
  }

  StreamPtr<R> clone() const override {
    return std::make_unique<SumStream>(a_->clone(), b_->clone());
  }

 private:
  StreamPtr<R> a_, b_;
};

template <class S>
StreamPtr<typename S::value_type> add(StreamPtr<typename S::value_type> a,
                                      StreamPtr<typename S::value_type> b) {
  return std::make_unique<SumStream<S>>(std::move(a), std::move(b));
}

template <class S>
Value<typename S::value_type> value_add(Value<typename S::value_type> a,
                                        Value<typename S::value_type> b) {
  using R = typename S::value_type;
  if (a.is_scalar() != b.is_scalar())
    fail(ErrorKind::ShapeMismatch, "sum of values at different depths");
  if (a.is_scalar()) return Value<R>(S::add(a.scalar(), b.scalar()));
  return Value<R>(std::make_unique<SumStream<S>>(a.take_stream(), b.take_stream()));
}

// ---------------------------------------------------------------------------
// Contraction: collapse a stream's top level by adding all its ready values.
// Scalar values fold into one semiring element; stream values fold into one
// merged stream (a left fold with the sum combinator). The walk is eager and
// counts against `budget`. `scalar_values` disambiguates the empty stream,
// whose value kind cannot be observed.

template <class S>
Value<typename S::value_type> contract(StreamPtr<typename S::value_type> q, bool scalar_values,
                                       std::shared_ptr<Budget> budget) {
  using R = typename S::value_type;
  if (!budget) budget = std::make_shared<Budget>();
  if (scalar_values) {
    R acc = S::zero();
    while (q->valid()) {
      budget->tick();
      if (q->ready()) {
        Value<R> v = q->value();
        if (!v.is_scalar()) fail(ErrorKind::PrefixMismatch, "contract: expected scalar values");
        acc = S::add(acc, v.scalar());
      }
      q->advance();
    }
    return Value<R>(acc);
  }
  StreamPtr<R> acc;
  while (q->valid()) {
    budget->tick();
    if (q->ready()) {
      Value<R> v = q->value();
      if (v.is_scalar()) fail(ErrorKind::PrefixMismatch, "contract: expected stream values");
      acc = acc ? add<S>(std::move(acc), v.take_stream()) : v.take_stream();
    }
    q->advance();
  }
  if (!acc) acc = make_empty<R>();
  return Value<R>(std::move(acc));
}

// ---------------------------------------------------------------------------
// Depth-targeted value rewriting: apply `f` to every value reached at a fixed
// depth below the top level, leaving the levels above untouched. Depth 0
// applies f to the stream itself.

template <typename R>
using ValueMap = std::function<Value<R>(Value<R>)>;

template <typename R>
class MapAtStream final : public Stream<R> {
 public:
  MapAtStream(StreamPtr<R> inner, int depth, std::shared_ptr<const ValueMap<R>> f)
      : inner_(std::move(inner)), depth_(depth), f_(std::move(f)) {}

  bool valid() const override { return inner_->valid(); }
  bool ready() const override { return inner_->ready(); }
  Index index() const override { return inner_->index(); }

  Value<R> value() const override {
    Value<R> v = inner_->value();
    if (depth_ == 1) return (*f_)(std::move(v));
    if (v.is_scalar())
      fail(ErrorKind::PrefixMismatch, "map depth exceeds stream nesting");
    return Value<R>(
        std::make_unique<MapAtStream>(v.take_stream(), depth_ - 1, f_));
  }

  void advance() override { inner_->advance(); }
  bool searchable() const override { return inner_->searchable(); }
  void skip(Index target) override { inner_->skip(target); }

  StreamPtr<R> clone() const override {
    return std::make_unique<MapAtStream>(inner_->clone(), depth_, f_);
  }

 private:
  StreamPtr<R> inner_;
  int depth_;
  std::shared_ptr<const ValueMap<R>> f_;
};

template <typename R>
Value<R> map_at(StreamPtr<R> q, int depth, ValueMap<R> f) {
  if (depth < 0) fail(ErrorKind::PrefixMismatch, "negative map depth");
  if (depth == 0) return f(Value<R>(std::move(q)));
  return Value<R>(std::make_unique<MapAtStream<R>>(
      std::move(q), depth, std::make_shared<const ValueMap<R>>(std::move(f))));
}

/// Name-level form: `prefix` must be an exact prefix of `alpha`, the stream's
/// index sequence; f is applied below it.
template <typename R>
Value<R> map_at(StreamPtr<R> q, const std::vector<int>& alpha, const std::vector<int>& prefix,
                ValueMap<R> f) {
  if (prefix.size() > alpha.size() ||
      !std::equal(prefix.begin(), prefix.end(), alpha.begin()))
    fail(ErrorKind::PrefixMismatch, "map prefix is not a prefix of the index sequence");
  return map_at(std::move(q), static_cast<int>(prefix.size()), std::move(f));
}

}  // namespace etch
