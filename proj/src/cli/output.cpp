#include "rsm/cli/output.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rsm/report.hpp"

namespace rsm::cli {

namespace fs = std::filesystem;

void OutputSet::prepare() const
{
    fs::create_directories(dir_);
    auto const probe = dir_ / ".rsm-write-probe";
    {
        std::ofstream out(probe);
        if (!out)
            throw fs::filesystem_error("output directory is not writable", dir_,
                                       std::make_error_code(std::errc::permission_denied));
    }
    fs::remove(probe);
}

void OutputSet::add(std::string name, std::string contents)
{
    files_.emplace_back(std::move(name), std::move(contents));
}

void OutputSet::commit() const
{
    prepare();
    for (auto const& [name, contents] : files_)
    {
        auto const target = dir_ / name;
        auto tmp = target;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << contents;
            out.close();
            if (!out)
                throw fs::filesystem_error("failed to write output file", tmp,
                                           std::make_error_code(std::errc::io_error));
        }
        fs::rename(tmp, target);
    }
}

std::vector<std::string> OutputSet::names() const
{
    std::vector<std::string> out;
    for (auto const& f : files_)
        out.push_back(f.first);
    return out;
}

std::string full_trajectory_csv(Trajectory<2> const& traj)
{
    std::ostringstream out;
    out << "t,x,y,z,J,I\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
        auto const& s = traj.states[k];
        auto const& d = traj.driving[k];
        out << format_number(traj.times[k]) << ',' << format_number(s[0]) << ','
            << format_number(s[1]) << ',' << format_number(d.z) << ',' << format_number(d.J)
            << ',' << format_number(d.I) << '\n';
    }
    return out.str();
}

std::string reduced_trajectory_csv(Trajectory<1> const& traj)
{
    std::ostringstream out;
    out << "t,x,z,I\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
    {
        auto const& d = traj.driving[k];
        out << format_number(traj.times[k]) << ',' << format_number(traj.states[k][0]) << ','
            << format_number(d.z) << ',' << format_number(d.I) << '\n';
    }
    return out.str();
}

std::string path_csv(NoisePath const& path)
{
    std::ostringstream out;
    out << "t,dW\n";
    std::vector<double> block(4096);
    for (std::size_t k = 0; k < path.size(); k += block.size())
    {
        std::span<double> view(block.data(), std::min(block.size(), path.size() - k));
        path.fill(k, view);
        for (std::size_t j = 0; j < view.size(); ++j)
            out << format_number(path.time(k + j)) << ',' << format_number(view[j]) << '\n';
    }
    return out.str();
}

}  // namespace rsm::cli
