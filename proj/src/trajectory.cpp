#include "robinlab/trajectory.hpp"

#include <cmath>

#include "robinlab/csv.hpp"

namespace robinlab {

double l2_norm(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  return std::sqrt(std::max(0.0, u.dot(sys.M * u)));
}

double h1_seminorm(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  return std::sqrt(std::max(0.0, u.dot(sys.Kgrad * u)));
}

double total_mass(const AssembledSystem& sys, const Eigen::VectorXd& u) {
  return (sys.M * u).sum();
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  CsvWriter csv(path);
  std::vector<std::string> names = {"t"};
  int n = traj.system->ndof;
  for (int i = 0; i < n; ++i) names.push_back("dof_" + std::to_string(i));
  csv.header(names);
  std::vector<double> row(n + 1);
  for (size_t k = 0; k < traj.times.size(); ++k) {
    row[0] = traj.times[k];
    for (int i = 0; i < n; ++i) row[i + 1] = traj.states[k][i];
    csv.row(row);
  }
}

void save_trajectory_summary(const Trajectory& traj, const std::string& path) {
  CsvWriter csv(path);
  csv.header({"t", "l2_norm", "h1_seminorm", "mass", "min", "max"});
  for (size_t k = 0; k < traj.times.size(); ++k) {
    const auto& u = traj.states[k];
    csv.row({traj.times[k], l2_norm(*traj.system, u), h1_seminorm(*traj.system, u),
             total_mass(*traj.system, u), u.minCoeff(), u.maxCoeff()});
  }
}

}  // namespace robinlab
