#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rsm/dynamics.hpp"
#include "rsm/noise.hpp"

namespace rsm::cli {

/// Output files of one command. Nothing touches the target directory until
/// commit(); each file is written to a temporary name and renamed into place.
class OutputSet
{
  public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    /// Creates the directory and checks that it accepts files.
    void prepare() const;
    void add(std::string name, std::string contents);
    void commit() const;

    std::vector<std::string> names() const;
    std::filesystem::path const& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

/// `t,x,y,z,J,I`
std::string full_trajectory_csv(Trajectory<2> const& traj);
/// `t,x,z,I`
std::string reduced_trajectory_csv(Trajectory<1> const& traj);
/// `t,dW`
std::string path_csv(NoisePath const& path);

}  // namespace rsm::cli
