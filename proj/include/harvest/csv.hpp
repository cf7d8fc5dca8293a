#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harvest/calibrate.hpp"
#include "harvest/policy.hpp"
#include "harvest/solver.hpp"

namespace harvest::io {

// Shortest decimal form that parses back to the same double ("inf" for
// infinities).
std::string format_double(double v);

// Write-to-temporary then rename; partial files never appear at the target.
void atomic_write_text(const std::filesystem::path& path, std::string_view content);

// i,j,t,n,phi over the whole grid.
void write_value_field_csv(const std::filesystem::path& path, const solver::ValueField& field);

// i,j,t,n,z,c_star over the whole grid.
void write_policy_field_csv(const std::filesystem::path& path, const solver::ValueField& field);

// t,n,c,z,xbar_distorted along a path.
void write_trajectory_csv(const std::filesystem::path& path, const policy::Trajectory& traj);

// u,p plus one distorted column per label.
struct DensityTable {
    std::vector<double> u;
    std::vector<double> p;
    std::vector<std::pair<std::string, std::vector<double>>> distorted;
};
void write_density_csv(const std::filesystem::path& path, const DensityTable& table);

// key: value lines; deterministic for identical inputs.
void write_fit_report(const std::filesystem::path& path, const calibrate::FitResult& result);

// CSV with a "t,w" header row.
calibrate::ObservationSet read_observations_csv(const std::filesystem::path& path);

}  // namespace harvest::io
