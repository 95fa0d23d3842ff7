#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "seglab/seglab.hpp"

namespace testing_support {

using namespace seglab;

inline constexpr double pi = std::numbers::pi;

/// Two antipodal half-circle arcs of equal amplitude, centred at angles 0 and pi.
inline std::vector<BoundarySegment> antipodal_arcs(double amplitude = 1.0) {
    return {{-0.5 * pi, 0.5 * pi, amplitude, 0}, {0.5 * pi, 1.5 * pi, amplitude, 1}};
}

/// Boundary data equal to `fn` on boundary nodes and 0 elsewhere.
template <class Fn>
ScalarField boundary_field(const DomainMask& mask, Fn&& fn) {
    ScalarField f(mask.grid());
    for (std::size_t k : mask.boundary_nodes()) f[k] = fn(mask.grid().position(mask.grid().node(k)));
    return f;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("seglab_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Exit status of a shell command.
inline int shell(const std::string& cmd) {
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

} // namespace testing_support
