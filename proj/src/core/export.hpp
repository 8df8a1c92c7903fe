#pragma once

#include "core/capacity.hpp"
#include "core/config.hpp"
#include "core/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rrnum {

/// Stamped on every emitted file.
struct OutputMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

inline constexpr const char* kRegionSchema = "rrnum.region/1";
inline constexpr const char* kRunSchema = "rrnum.run/1";
inline constexpr const char* kFramesSchema = "rrnum.frames/1";

std::string hash_hex(std::uint64_t hash);

/// Rows: mask, phi, eta_1..eta_N.
void write_region_vertices(std::ostream& os, const InnerRegion& region, OutputFormat format, const OutputMeta& meta);

struct BoundarySample {
    std::vector<double> direction;
    std::vector<double> point;
};

/// Fan of probe directions: quarter circle for N = 2, otherwise unit axes,
/// the all-ones ray and seeded random rays.
std::vector<BoundarySample> boundary_fan(const InnerRegion& region, std::size_t rays, std::uint64_t seed);

void write_boundary(std::ostream& os, const std::vector<BoundarySample>& samples, OutputFormat format,
                    const OutputMeta& meta);

/// Region summary: vertex count, RR(1) round moments, B, named points.
nlohmann::json region_summary(std::span<const ChannelModel> models, const InnerRegion& region, const OutputMeta& meta);

/// Per-frame log: k, t_k, T_k, phi mask, r vector, Q vector, g(ybar).
void write_frames(std::ostream& os, const RunMetrics& metrics, OutputFormat format, const OutputMeta& meta);

/// Per-run summary (ybar, rbar, g(ybar), backlog, slope, B, V_g, B/V_g).
nlohmann::json run_summary(const RunMetrics& metrics, const StabilityReport& stability, double b, const OutputMeta& meta);

std::string format_double(double v);

}  // namespace rrnum
