#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hypwave {

/// Runs the `hypwave` command line. Returns the process exit code:
/// 0 success, 1 usage, 2 validation, 3 numerical failure.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// 64-bit FNV-1a of a file's bytes.
std::uint64_t fnv1a_file(const std::filesystem::path &path);

/// Name of the Fourier field file written by `run` for omega.
std::string fourier_file_name(double omega);

} // namespace hypwave
