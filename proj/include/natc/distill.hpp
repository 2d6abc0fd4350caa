#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "natc/assignment.hpp"
#include "natc/ctc.hpp"
#include "natc/errors.hpp"
#include "natc/mat.hpp"

namespace natc {

struct EdConfig {
  bool enabled = true;
  int teacher_layer = -1;       // negative counts from the last hidden state
  long long ed_start_step = 0;  // schedule switches lambda 0 -> 1 here
};

// Q[i][j] = log-probability of target token y_i at lattice position j.
template <class Real>
Mat<Real> build_q_matrix(const LogProbLattice<Real>& lattice, std::span<const TokenId> y) {
  if (y.size() > lattice.frames())
    throw DataError("target longer than lattice: " + std::to_string(y.size()) + " > " +
                    std::to_string(lattice.frames()));
  Mat<Real> q(y.size(), lattice.frames());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= static_cast<TokenId>(lattice.vocab()))
      throw DataError("target id out of lattice range");
    for (std::size_t j = 0; j < lattice.frames(); ++j)
      q(i, j) = lattice.lp(j, static_cast<std::size_t>(y[i]));
  }
  return q;
}

// Injective map from target positions to lattice positions maximizing the
// total Q mass; solved as a min-cost assignment on -Q.
template <class Real>
Assignment align_targets(const Mat<Real>& q) {
  Mat<double> cost(q.rows, q.cols);
  for (std::size_t i = 0; i < q.a.size(); ++i) cost.a[i] = -static_cast<double>(q.a[i]);
  Assignment a = hungarian(cost);
  a.total_cost = -a.total_cost;  // report the maximized sum of Q
  return a;
}

template <class Real>
struct EdLossResult {
  Real loss = 0;
  Mat<Real> grad_student;  // T x d, nonzero only in matched rows
};

// Mean cosine distillation loss over matched (student, teacher) state pairs.
// Teacher states are constants; gradient flows only into the matched student
// vectors.
template <class Real>
EdLossResult<Real> ed_loss(const Mat<Real>& student, const Mat<Real>& teacher,
                           const Assignment& matching) {
  if (student.cols != teacher.cols) throw DataError("student/teacher dimension mismatch");
  if (matching.column_of_row.size() != teacher.rows)
    throw DataError("matching size does not cover the teacher states");
  EdLossResult<Real> result;
  result.grad_student = Mat<Real>(student.rows, student.cols, Real(0));
  const auto n = static_cast<Real>(teacher.rows);
  for (std::size_t i = 0; i < teacher.rows; ++i) {
    const auto j = static_cast<std::size_t>(matching.column_of_row[i]);
    if (j >= student.rows) throw DataError("matching refers past the student states");
    Real ss = 0, tt = 0, st = 0;
    for (std::size_t k = 0; k < student.cols; ++k) {
      ss += student(j, k) * student(j, k);
      tt += teacher(i, k) * teacher(i, k);
      st += student(j, k) * teacher(i, k);
    }
    const Real s_norm = std::sqrt(ss), t_norm = std::sqrt(tt);
    if (s_norm <= Real(1e-12)) throw NumericError("zero-norm matched student vector");
    if (t_norm <= Real(1e-12)) throw NumericError("zero-norm teacher vector");
    const Real cos = st / (s_norm * t_norm);
    result.loss += (Real(1) - cos) / n;
    // d(1 - cos)/d s = cos * s/|s|^2 - t/(|s||t|)
    for (std::size_t k = 0; k < student.cols; ++k)
      result.grad_student(j, k) +=
          (cos * student(j, k) / ss - teacher(i, k) / (s_norm * t_norm)) / n;
  }
  return result;
}

inline int lambda_schedule(long long step, long long ed_start_step) {
  return step < ed_start_step ? 0 : 1;
}

template <class Real>
Real combined_loss(Real l_ctc, Real l_ed, int lambda) {
  if (lambda != 0 && lambda != 1) throw UsageError("lambda must be 0 or 1");
  return l_ctc + static_cast<Real>(lambda) * l_ed;
}

}  // namespace natc
