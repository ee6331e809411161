/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace pdm2 {

// Nonlinear least-squares problem posed in local coordinates around a base
// point. Evaluate(delta) returns residuals at the base moved by delta, and the
// Jacobian with respect to delta at delta = 0 when jacobian is non-null.
class LmProblem {
 public:
  virtual ~LmProblem() = default;
  virtual Eigen::Index NumParams() const = 0;
  virtual Eigen::Index NumResiduals() const = 0;
  virtual void Evaluate(const Eigen::VectorXd& delta, Eigen::VectorXd* residuals,
                        Eigen::MatrixXd* jacobian) const = 0;
  // Moves the base point by delta.
  virtual void Accept(const Eigen::VectorXd& delta) = 0;
};

struct LmOptions {
  int max_iterations = 200;
  double relative_cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-14;
  double initial_damping = 1e-3;  // times the largest diagonal of J^T J
};

enum class LmStatus { kConverged, kNonConvergence, kSingularNormalEquations };

struct LmReport {
  LmStatus status = LmStatus::kConverged;
  int iterations = 0;
  double initial_cost = 0.0;  // 0.5 |r|^2
  double final_cost = 0.0;
  std::vector<double> cost_history;  // initial cost, then one entry per accepted step
  std::string stop_reason;
};

// Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen's damping
// update. The problem is left at the best iterate found.
LmReport SolveLm(LmProblem& problem, const LmOptions& options = {});

}  // namespace pdm2
