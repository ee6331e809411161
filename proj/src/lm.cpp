/*
 *  Copyright (C) 2026 The pdm2 Authors
 *
 *  SPDX-License-Identifier: Apache-2.0
 */

#include "pdm2/lm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace pdm2 {

LmReport SolveLm(LmProblem& problem, const LmOptions& options) {
  const Eigen::Index n = problem.NumParams();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem.Evaluate(zero, &r, &jac);

  LmReport report;
  double cost = 0.5 * r.squaredNorm();
  report.initial_cost = cost;
  report.cost_history.push_back(cost);

  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * r;
  double lambda = options.initial_damping * std::max(jtj.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;
  int singular_retries = 0;

  for (int iter = 0;; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      report.stop_reason = "gradient";
      break;
    }
    if (cost <= 1e-30) {
      report.stop_reason = "zero cost";
      break;
    }
    if (iter >= options.max_iterations) {
      report.status = LmStatus::kNonConvergence;
      report.stop_reason = "iteration limit";
      break;
    }
    report.iterations = iter + 1;

    Eigen::VectorXd scale = jtj.diagonal();
    const double floor = 1e-12 * std::max(scale.maxCoeff(), 1e-300);
    scale = scale.cwiseMax(floor);
    Eigen::MatrixXd a = jtj;
    a.diagonal() += lambda * scale;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    Eigen::VectorXd step = -ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || !ldlt.isPositive()) {
      if (++singular_retries > 30) {
        report.status = LmStatus::kSingularNormalEquations;
        report.stop_reason = "singular normal equations";
        break;
      }
      lambda *= 10.0;
      continue;
    }

    if (step.norm() < options.step_tolerance * (1.0 + std::sqrt(static_cast<double>(n)))) {
      report.stop_reason = "step";
      break;
    }

    Eigen::VectorXd r_new;
    problem.Evaluate(step, &r_new, nullptr);
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = -(step.dot(g) + 0.5 * step.dot(jtj * step));
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;

    if (std::isfinite(cost_new) && cost_new < cost && rho > 0.0) {
      problem.Accept(step);
      const double decrease = (cost - cost_new) / cost;
      cost = cost_new;
      report.cost_history.push_back(cost);
      problem.Evaluate(zero, &r, &jac);
      jtj = jac.transpose() * jac;
      g = jac.transpose() * r;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (decrease < options.relative_cost_tolerance) {
        report.stop_reason = "relative cost";
        break;
      }
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (!std::isfinite(lambda) || lambda > 1e300) {
        report.stop_reason = "damping limit";
        break;
      }
    }
  }
  report.final_cost = cost;
  return report;
}

}  // namespace pdm2
