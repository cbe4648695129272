#pragma once

#include "hypwave/fem.hpp"
#include "hypwave/mesh.hpp"
#include "hypwave/quotient.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>

#include <unistd.h>

namespace fixtures {

struct Problem {
  hypwave::Mesh mesh;
  hypwave::DofMap dofs;
  hypwave::AssembledSystem sys;
};

// Meshes are deterministic, so one per target_h is shared by all tests.
inline const Problem &problem(double h) {
  static std::map<double, std::unique_ptr<Problem>> cache;
  auto &slot = cache[h];
  if (!slot) {
    slot = std::make_unique<Problem>();
    slot->mesh = hypwave::generate_mesh(h);
    slot->dofs = hypwave::build_dof_map(slot->mesh);
    slot->sys = hypwave::assemble(slot->mesh, slot->dofs);
  }
  return *slot;
}

inline std::complex<double> random_disc_point(std::mt19937_64 &rng,
                                              double max_radius = 0.95) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = max_radius * std::sqrt(u(rng));
  const double phi = 2.0 * M_PI * u(rng);
  return std::polar(r, phi);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("hypwave_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

private:
  std::filesystem::path path_;
};

} // namespace fixtures
