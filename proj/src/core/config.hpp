#pragma once

#include "core/channel.hpp"
#include "core/controller.hpp"
#include "core/sim.hpp"
#include "core/utility.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rrnum {

enum class Command { Region, Verify, Simulate, Sweep };
enum class OutputFormat { Csv, Json };

std::string_view to_string(Command c);
std::optional<Command> parse_command(std::string_view text);
std::string_view to_string(OutputFormat f);
std::optional<OutputFormat> parse_output_format(std::string_view text);

/// Either a symmetric shorthand (p01, p10, count) or an explicit per-channel list.
struct ChannelSpec {
    bool symmetric = true;
    double p01 = 0.2;
    double p10 = 0.2;
    std::size_t count = 2;
    std::vector<std::pair<double, double>> list;

    std::size_t size() const noexcept { return symmetric ? count : list.size(); }
    ChannelSet models() const;

    friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

/// kind: log1p | linear | power (w * r^exponent, solved by the generic path).
struct UtilitySpec {
    std::string kind = "log1p";
    std::vector<double> weights;  ///< empty = all ones
    double exponent = 0.5;

    UtilityFunction build(std::size_t users) const;

    friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

/// Contents of an experiment file. Every field has a documented default here;
/// the lower-level RunConfig has none.
struct ExperimentConfig {
    int schema_version = 1;
    std::optional<Command> command;

    ChannelSpec channels;
    UtilitySpec utility;

    double vg = 50.0;
    SelectionMode mode = SelectionMode::Exhaustive;
    std::size_t enumeration_cap = 16;

    std::uint64_t horizon = 2'000'000;
    std::optional<std::uint64_t> warmup;  ///< default horizon / 10
    std::uint64_t seed = 1;
    std::uint64_t age_cap = kDefaultAgeCap;
    double stability_threshold = 1e-3;
    bool record_frames = true;

    std::vector<double> sweep_vg{10.0, 50.0, 250.0};
    std::vector<std::uint64_t> sweep_seeds{1, 2, 3};
    std::size_t workers = 0;  ///< 0 = hardware concurrency

    std::size_t rays = 181;
    double boundary_tolerance = 1e-9;

    std::uint64_t verify_slots = 1'000'000;
    std::uint64_t verify_warmup = 100'000;
    std::size_t verify_random_subsets = 5;
    double verify_tolerance = 0.005;
    std::uint64_t verify_rounds = 100'000;

    std::string out_dir = "out";
    OutputFormat format = OutputFormat::Csv;
    bool verbose = false;

    std::uint64_t effective_warmup() const { return warmup.value_or(horizon / 10); }
    /// Fully specified RunConfig for one (V_g, seed) pair.
    RunConfig run_config(double run_vg, std::uint64_t run_seed) const;
    /// Throws Error(Config) on any semantic violation.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(std::string_view yaml_text);
ExperimentConfig load_config(const std::string& path);
/// Canonical YAML echo; parse_config(emit_config(c)) == c.
std::string emit_config(const ExperimentConfig& config);
/// Override one field by dotted key ("run.seed", "sweep.vg") with a YAML
/// value; the whole config is re-validated. Throws Error(Config).
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view yaml_value);
/// Field by dotted key: scalars as plain text, collections in YAML flow style.
std::string get_config_value(const ExperimentConfig& config, std::string_view key);
/// FNV-1a 64 of the canonical echo.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace rrnum
