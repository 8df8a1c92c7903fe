#include "core/export.hpp"

#include "core/rng.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

namespace rrnum {
namespace {

void csv_banner(std::ostream& os, const char* schema, const OutputMeta& meta)
{
    os << "# schema=" << schema << " config_hash=" << hash_hex(meta.config_hash) << " seed=" << meta.seed << '\n';
}

nlohmann::json envelope(const char* schema, const OutputMeta& meta)
{
    return {{"schema", schema}, {"config_hash", hash_hex(meta.config_hash)}, {"seed", meta.seed}};
}

}  // namespace

std::string hash_hex(std::uint64_t hash)
{
    char buf[17];
    const auto [p, ec] = std::to_chars(buf, buf + 16, hash, 16);
    std::string s(buf, p);
    return std::string(16 - s.size(), '0') + s;
}

std::string format_double(double v)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void write_region_vertices(std::ostream& os, const InnerRegion& region, OutputFormat format, const OutputMeta& meta)
{
    const std::size_t n = region.dimension();
    if (format == OutputFormat::Json) {
        auto doc = envelope(kRegionSchema, meta);
        doc["rows"] = nlohmann::json::array();
        for (const auto& v : region.vertices())
            doc["rows"].push_back({{"mask", v.phi.mask()}, {"phi", v.phi.to_string()}, {"eta", v.eta}});
        os << doc.dump(2) << '\n';
        return;
    }
    csv_banner(os, kRegionSchema, meta);
    os << "mask,phi";
    for (std::size_t i = 0; i < n; ++i) os << ",eta_" << i + 1;
    os << '\n';
    for (const auto& v : region.vertices()) {
        os << v.phi.mask() << ",\"" << v.phi.to_string() << '"';
        for (double e : v.eta) os << ',' << format_double(e);
        os << '\n';
    }
}

std::vector<BoundarySample> boundary_fan(const InnerRegion& region, std::size_t rays, std::uint64_t seed)
{
    const std::size_t n = region.dimension();
    std::vector<std::vector<double>> dirs;
    if (n == 1) {
        dirs.push_back({1.0});
    } else if (n == 2) {
        for (std::size_t k = 0; k < rays; ++k) {
            const double theta = 0.5 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(rays - 1);
            dirs.push_back({std::max(0.0, std::cos(theta)), std::max(0.0, std::sin(theta))});
        }
    } else {
        for (std::size_t i = 0; i < n && dirs.size() < rays; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = 1.0;
            dirs.push_back(std::move(e));
        }
        if (dirs.size() < rays) dirs.emplace_back(n, 1.0);
        Rng rng = make_stream(seed, Stream::Mixture);
        while (dirs.size() < rays) {
            std::vector<double> d(n);
            for (double& e : d) e = uniform01(rng);
            dirs.push_back(std::move(d));
        }
    }
    std::vector<BoundarySample> out;
    out.reserve(dirs.size());
    for (auto& d : dirs) {
        auto p = boundary_probe(region, d);
        out.push_back({std::move(d), std::move(p)});
    }
    return out;
}

void write_boundary(std::ostream& os, const std::vector<BoundarySample>& samples, OutputFormat format,
                    const OutputMeta& meta)
{
    if (format == OutputFormat::Json) {
        auto doc = envelope(kRegionSchema, meta);
        doc["rows"] = nlohmann::json::array();
        for (const auto& s : samples) doc["rows"].push_back({{"direction", s.direction}, {"point", s.point}});
        os << doc.dump(2) << '\n';
        return;
    }
    csv_banner(os, kRegionSchema, meta);
    const std::size_t n = samples.empty() ? 0 : samples.front().point.size();
    os << "ray";
    for (std::size_t i = 0; i < n; ++i) os << ",v_" << i + 1;
    for (std::size_t i = 0; i < n; ++i) os << ",lambda_" << i + 1;
    os << '\n';
    for (std::size_t k = 0; k < samples.size(); ++k) {
        os << k;
        for (double d : samples[k].direction) os << ',' << format_double(d);
        for (double p : samples[k].point) os << ',' << format_double(p);
        os << '\n';
    }
}

nlohmann::json region_summary(std::span<const ChannelModel> models, const InnerRegion& region, const OutputMeta& meta)
{
    const std::size_t n = models.size();
    const auto law = round_length_law(models, ActivationVector::all(n));
    auto doc = envelope(kRegionSchema, meta);
    doc["channels"] = n;
    doc["kind"] = region.kind() == RegionKind::Pairs ? "pairs" : "full";
    doc["vertex_count"] = region.vertices().size();
    doc["round_mean"] = law.mean();
    doc["round_second_moment"] = law.second_moment();
    doc["B"] = b_constant(models);
    nlohmann::json named = nlohmann::json::object();
    for (const auto& v : region.vertices()) {
        if (v.phi.count() == 1) named["single_" + std::to_string(v.phi.channels().front() + 1)] = v.eta;
        if (v.phi.count() == n) named["all_active"] = v.eta;
    }
    doc["named_points"] = named;
    return doc;
}

void write_frames(std::ostream& os, const RunMetrics& m, OutputFormat format, const OutputMeta& meta)
{
    const std::size_t n = m.channels;
    if (format == OutputFormat::Json) {
        auto doc = envelope(kFramesSchema, meta);
        doc["rows"] = nlohmann::json::array();
        for (const auto& f : m.frame_log)
            doc["rows"].push_back({{"k", f.index},
                                   {"t_k", f.start},
                                   {"T_k", f.length},
                                   {"phi_mask", f.mask},
                                   {"r", f.rates},
                                   {"Q", f.backlog},
                                   {"g_ybar", f.utility_of_average}});
        os << doc.dump() << '\n';
        return;
    }
    csv_banner(os, kFramesSchema, meta);
    os << "k,t_k,T_k,phi_mask";
    for (std::size_t i = 0; i < n; ++i) os << ",r_" << i + 1;
    for (std::size_t i = 0; i < n; ++i) os << ",Q_" << i + 1;
    os << ",g_ybar\n";
    for (const auto& f : m.frame_log) {
        os << f.index << ',' << f.start << ',' << f.length << ',' << f.mask;
        for (double r : f.rates) os << ',' << format_double(r);
        for (double q : f.backlog) os << ',' << format_double(q);
        os << ',' << format_double(f.utility_of_average) << '\n';
    }
}

nlohmann::json run_summary(const RunMetrics& m, const StabilityReport& stability, double b, const OutputMeta& meta)
{
    auto doc = envelope(kRunSchema, meta);
    doc["channels"] = m.channels;
    doc["horizon"] = m.horizon;
    doc["warmup"] = m.warmup;
    doc["frames"] = m.frames;
    doc["idle_frames"] = m.idle_frames;
    doc["mean_frame_length"] = m.mean_frame_length();
    doc["ybar"] = m.delivered_avg;
    doc["rbar"] = m.admitted_avg;
    doc["g_ybar"] = m.utility_of_delivered;
    doc["backlog_per_user"] = m.backlog_avg;
    doc["mean_backlog"] = m.mean_total_backlog();
    doc["slope"] = stability.slope;
    doc["stability"] = stability.verdict == Stability::Stable     ? "stable"
                       : stability.verdict == Stability::Unstable ? "unstable"
                                                                  : "inconclusive";
    doc["B"] = b;
    if (m.vg) {
        doc["vg"] = *m.vg;
        doc["B_over_vg"] = *m.vg > 0 ? nlohmann::json(b / *m.vg) : nlohmann::json(nullptr);
    } else {
        doc["vg"] = nullptr;
        doc["B_over_vg"] = nullptr;
    }
    doc["max_ledger_error"] = m.max_ledger_error;
    return doc;
}

}  // namespace rrnum
