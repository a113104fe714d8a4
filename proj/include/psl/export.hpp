#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "psl/controller.hpp"
#include "psl/walker.hpp"

namespace psl {

/// CSV rendering of a trace: header
/// t,zeta,mode,x,xd,y,yd,z,sigma,omega,tau_y,event and one row per record.
/// Numbers use 17 significant digits; several events on one row are joined
/// with ';'. Throws ParameterError for an empty trace.
std::string trajectory_csv(const HybridTrace& trace);
void export_trajectory(const HybridTrace& trace, const std::filesystem::path& path);

/// Text grid format: a "# psl-grid v1" line, "key value" header lines and one
/// row-major line per cell. Values use the shortest round-trip rendering, so
/// import followed by export reproduces the file byte for byte.
std::string policy_grid(const PolicyTable& table);
std::string mask_grid(const RecoverabilityMask& mask);
void export_policy(const PolicyTable& table, const std::filesystem::path& path);
void export_policy(const RecoverabilityMask& mask, const std::filesystem::path& path);

PolicyTable parse_policy_grid(std::string_view text);
RecoverabilityMask parse_mask_grid(std::string_view text);
PolicyTable import_policy(const std::filesystem::path& path);
RecoverabilityMask import_mask(const std::filesystem::path& path);

/// Writes text to a file, throwing IoError on failure.
void write_file(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

}  // namespace psl
