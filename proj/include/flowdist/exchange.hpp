#pragma once

#include "flowdist/types.hpp"

namespace flowdist {

/// Normalized weighted graph: a nonnegative symmetric matrix summing to one,
/// together with its vertex weights f_i = sum_j e_ij (all strictly positive).
///
/// The constructor validates every invariant and stores an exactly symmetric
/// copy of the input; instances are immutable afterwards.
class ExchangeMatrix {
  public:
    static constexpr double kTolerance = 1e-12;

    explicit ExchangeMatrix(Matrix e, Labels labels = {});

    const Matrix &e() const { return e_; }
    const Vector &f() const { return f_; }
    const Labels &labels() const { return labels_; }
    Index size() const { return e_.rows(); }

    double operator()(Index i, Index j) const { return e_(i, j); }

    bool has_zero_diagonal() const;

  private:
    Matrix e_;
    Vector f_;
    Labels labels_;
};

} // namespace flowdist
