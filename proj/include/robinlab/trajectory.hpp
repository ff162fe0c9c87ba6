#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "robinlab/assembly.hpp"

namespace robinlab {

// Discrete solution on the full time grid of one theta-scheme run.
struct Trajectory {
  std::shared_ptr<const AssembledSystem> system;
  std::vector<double> times;            // t_0 = 0 < ... < t_M = T
  std::vector<Eigen::VectorXd> states;  // one DOF vector per time
  double theta = 1.0;
  double dt = 0.0;  // effective uniform step
};

double l2_norm(const AssembledSystem& sys, const Eigen::VectorXd& u);      // sqrt(u^T M u)
double h1_seminorm(const AssembledSystem& sys, const Eigen::VectorXd& u);  // sqrt(u^T Kgrad u)
double total_mass(const AssembledSystem& sys, const Eigen::VectorXd& u);   // 1^T M u

// Full states: header "t, dof_0, ..., dof_{n-1}".
void save_trajectory(const Trajectory& traj, const std::string& path);
// Header "t, l2_norm, h1_seminorm, mass, min, max".
void save_trajectory_summary(const Trajectory& traj, const std::string& path);

}  // namespace robinlab
