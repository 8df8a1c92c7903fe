#include "rrnum/rrnum.h"

#include "core/capacity.hpp"
#include "core/config.hpp"
#include "core/controller.hpp"
#include "core/diagnostics.hpp"
#include "core/error.hpp"
#include "core/export.hpp"
#include "core/sim.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

struct rrnum_channels {
    rrnum::ChannelSet models;
};

struct rrnum_region {
    rrnum::InnerRegion region;
};

struct rrnum_utility {
    rrnum::UtilityFunction utility;
};

struct rrnum_config {
    rrnum::ExperimentConfig config;
};

struct rrnum_run {
    rrnum::RunMetrics metrics;
    rrnum::ChannelSet models;
};

namespace {

thread_local std::string g_last_error;

rrnum_status record(rrnum_status status, const char* what)
{
    g_last_error = what;
    return status;
}

/// Run `body`, translating exceptions into status codes and the thread's
/// last-error message.
template <class F>
rrnum_status guarded(F&& body) noexcept
{
    try {
        g_last_error.clear();
        body();
        return RRNUM_OK;
    } catch (const rrnum::Error& e) {
        return record(static_cast<rrnum_status>(e.code()), e.what());
    } catch (const YAML::Exception& e) {
        return record(RRNUM_E_CONFIG, e.what());
    } catch (const std::bad_alloc&) {
        return record(RRNUM_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return record(RRNUM_E_INTERNAL, e.what());
    } catch (...) {
        return record(RRNUM_E_INTERNAL, "unknown failure");
    }
}

void need(const void* p, const char* name)
{
    if (!p) rrnum::fail(rrnum::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

rrnum::ActivationVector subset(std::size_t n, std::uint64_t mask)
{
    if (n < 64 && (mask >> n) != 0) rrnum::fail(rrnum::ErrorCode::InvalidArgument, "mask has bits beyond the channel count");
    return rrnum::ActivationVector(n, mask);
}

rrnum::OutputFormat to_format(rrnum_format f)
{
    if (f == RRNUM_FORMAT_CSV) return rrnum::OutputFormat::Csv;
    if (f == RRNUM_FORMAT_JSON) return rrnum::OutputFormat::Json;
    rrnum::fail(rrnum::ErrorCode::InvalidArgument, "unknown output format");
}

rrnum::SelectionMode to_mode(rrnum_mode m)
{
    switch (m) {
    case RRNUM_MODE_EXHAUSTIVE:
        return rrnum::SelectionMode::Exhaustive;
    case RRNUM_MODE_SYMMETRIC_FAST:
        return rrnum::SelectionMode::SymmetricFast;
    case RRNUM_MODE_PAIRS_ONLY:
        return rrnum::SelectionMode::PairsOnly;
    }
    rrnum::fail(rrnum::ErrorCode::InvalidArgument, "unknown selection mode");
}

std::ofstream open_output(const char* path)
{
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) rrnum::fail(rrnum::ErrorCode::Io, std::string("cannot open '") + path + "' for writing");
    return out;
}

void finish(std::ofstream& out, const char* path)
{
    out.flush();
    if (!out) rrnum::fail(rrnum::ErrorCode::Io, std::string("write to '") + path + "' failed");
}

void copy_string(const std::string& s, char* buf, std::size_t capacity, std::size_t* needed)
{
    if (needed) *needed = s.size() + 1;
    if (!buf) return;
    if (capacity < s.size() + 1) rrnum::fail(rrnum::ErrorCode::InvalidArgument, "buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

void copy_vector(const std::vector<double>& v, double* out) { std::copy(v.begin(), v.end(), out); }

std::vector<double> weights_or_ones(std::size_t n, const double* weights)
{
    return weights ? std::vector<double>(weights, weights + n) : std::vector<double>(n, 1.0);
}

rrnum::InnerRegion config_region(const rrnum::ExperimentConfig& c)
{
    const auto models = c.channels.models();
    const auto kind = c.mode == rrnum::SelectionMode::PairsOnly ? rrnum::RegionKind::Pairs : rrnum::RegionKind::Full;
    return rrnum::InnerRegion::build(models, kind, c.enumeration_cap);
}

}  // namespace

extern "C" {

const char* rrnum_version(void) { return "1.0.0"; }

const char* rrnum_status_string(rrnum_status status)
{
    switch (status) {
    case RRNUM_OK:
        return "ok";
    case RRNUM_E_INVALID_ARGUMENT:
        return "invalid argument";
    case RRNUM_E_CONFIG:
        return "configuration error";
    case RRNUM_E_CAP_EXCEEDED:
        return "enumeration cap exceeded";
    case RRNUM_E_FEASIBILITY:
        return "round robin feasibility violated";
    case RRNUM_E_NONCONCAVE:
        return "utility is not concave";
    case RRNUM_E_IO:
        return "i/o error";
    case RRNUM_E_NUMERIC:
        return "numerical failure";
    case RRNUM_E_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* rrnum_last_error(void) { return g_last_error.c_str(); }

/* ---- channels ---- */

rrnum_status rrnum_channels_create(const double* p01, const double* p10, size_t n, rrnum_channels** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(p01, "p01");
        need(p10, "p10");
        if (n == 0 || n > rrnum::ActivationVector::kMaxChannels)
            rrnum::fail(rrnum::ErrorCode::InvalidArgument, "channel count must be between 1 and 64");
        auto h = std::make_unique<rrnum_channels>();
        for (std::size_t i = 0; i < n; ++i) h->models.emplace_back(p01[i], p10[i]);
        *out = h.release();
    });
}

rrnum_status rrnum_channels_create_symmetric(double p01, double p10, size_t n, rrnum_channels** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (n == 0 || n > rrnum::ActivationVector::kMaxChannels)
            rrnum::fail(rrnum::ErrorCode::InvalidArgument, "channel count must be between 1 and 64");
        auto h = std::make_unique<rrnum_channels>();
        h->models.assign(n, rrnum::ChannelModel(p01, p10));
        *out = h.release();
    });
}

void rrnum_channels_destroy(rrnum_channels* channels) { delete channels; }

size_t rrnum_channels_count(const rrnum_channels* channels) { return channels ? channels->models.size() : 0; }

rrnum_status rrnum_k_step_prob(double p01, double p10, int from_on, uint64_t k, double* out)
{
    return guarded([&] {
        need(out, "out");
        const rrnum::ChannelModel model(p01, p10);
        *out = rrnum::k_step_prob(model, from_on ? rrnum::ChannelState::On : rrnum::ChannelState::Off, k);
    });
}

/* ---- capacity ---- */

rrnum_status rrnum_eta_vector(const rrnum_channels* channels, uint64_t mask, double* eta)
{
    return guarded([&] {
        need(channels, "channels");
        need(eta, "eta");
        copy_vector(rrnum::eta_vector(channels->models, subset(channels->models.size(), mask)), eta);
    });
}

rrnum_status rrnum_c_coefficient(double p01, double p10, uint32_t m, double* out)
{
    return guarded([&] {
        need(out, "out");
        *out = rrnum::c_coefficient(rrnum::ChannelModel(p01, p10), m);
    });
}

rrnum_status rrnum_round_moments(const rrnum_channels* channels, uint64_t mask, double* mean, double* second_moment)
{
    return guarded([&] {
        need(channels, "channels");
        const auto law = rrnum::round_length_law(channels->models, subset(channels->models.size(), mask));
        if (mean) *mean = law.mean();
        if (second_moment) *second_moment = law.second_moment();
    });
}

rrnum_status rrnum_b_constant(const rrnum_channels* channels, double* out)
{
    return guarded([&] {
        need(channels, "channels");
        need(out, "out");
        *out = rrnum::b_constant(channels->models);
    });
}

rrnum_status rrnum_region_create(const rrnum_channels* channels, rrnum_region_kind kind, size_t enumeration_cap,
                                 rrnum_region** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(channels, "channels");
        if (kind != RRNUM_REGION_FULL && kind != RRNUM_REGION_PAIRS)
            rrnum::fail(rrnum::ErrorCode::InvalidArgument, "unknown region kind");
        const auto k = kind == RRNUM_REGION_PAIRS ? rrnum::RegionKind::Pairs : rrnum::RegionKind::Full;
        *out = new rrnum_region{rrnum::InnerRegion::build(channels->models, k, enumeration_cap)};
    });
}

void rrnum_region_destroy(rrnum_region* region) { delete region; }

size_t rrnum_region_dimension(const rrnum_region* region) { return region ? region->region.dimension() : 0; }

size_t rrnum_region_vertex_count(const rrnum_region* region)
{
    return region ? region->region.vertices().size() : 0;
}

rrnum_status rrnum_region_vertex(const rrnum_region* region, size_t index, uint64_t* mask, double* eta)
{
    return guarded([&] {
        need(region, "region");
        const auto& vs = region->region.vertices();
        if (index >= vs.size()) rrnum::fail(rrnum::ErrorCode::InvalidArgument, "vertex index out of range");
        if (mask) *mask = vs[index].phi.mask();
        if (eta) copy_vector(vs[index].eta, eta);
    });
}

rrnum_status rrnum_region_membership(const rrnum_region* region, const double* lambda, double tolerance,
                                     rrnum_membership* verdict, double* slack, double* direction)
{
    return guarded([&] {
        need(region, "region");
        need(lambda, "lambda");
        need(verdict, "verdict");
        const std::size_t n = region->region.dimension();
        const auto r = rrnum::region_membership(region->region, std::span<const double>(lambda, n), tolerance);
        *verdict = r.verdict == rrnum::Membership::Inside     ? RRNUM_INSIDE
                   : r.verdict == rrnum::Membership::Boundary ? RRNUM_BOUNDARY
                                                              : RRNUM_OUTSIDE;
        if (slack) *slack = r.slack;
        if (direction) {
            std::fill(direction, direction + n, 0.0);
            if (!r.direction.empty()) copy_vector(r.direction, direction);
        }
    });
}

rrnum_status rrnum_region_probe(const rrnum_region* region, const double* direction, double* point)
{
    return guarded([&] {
        need(region, "region");
        need(direction, "direction");
        need(point, "point");
        const std::size_t n = region->region.dimension();
        copy_vector(rrnum::boundary_probe(region->region, std::span<const double>(direction, n)), point);
    });
}

rrnum_status rrnum_offline_optimum(const rrnum_region* region, const rrnum_utility* utility, double* point,
                                   double* value, double* gap)
{
    return guarded([&] {
        need(region, "region");
        need(utility, "utility");
        if (utility->utility.size() != region->region.dimension())
            rrnum::fail(rrnum::ErrorCode::InvalidArgument, "utility and region dimensions differ");
        const auto r = rrnum::solve_offline_optimum(region->region, utility->utility);
        if (point) copy_vector(r.point, point);
        if (value) *value = r.value;
        if (gap) *gap = r.gap;
    });
}

/* ---- utility ---- */

rrnum_status rrnum_utility_create_log1p(size_t n, const double* weights, rrnum_utility** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        std::vector<rrnum::UtilityTerm> terms;
        for (double w : weights_or_ones(n, weights)) terms.push_back(rrnum::UtilityTerm::log1p(w));
        *out = new rrnum_utility{rrnum::UtilityFunction(std::move(terms))};
    });
}

rrnum_status rrnum_utility_create_linear(size_t n, const double* weights, rrnum_utility** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        const auto w = weights_or_ones(n, weights);
        *out = new rrnum_utility{rrnum::UtilityFunction::linear(w)};
    });
}

rrnum_status rrnum_utility_create_generic(size_t n, const double* weights, rrnum_scalar_fn fn, void* user_data,
                                          rrnum_utility** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        if (!fn) rrnum::fail(rrnum::ErrorCode::InvalidArgument, "fn must not be NULL");
        std::vector<rrnum::UtilityTerm> terms;
        for (double w : weights_or_ones(n, weights))
            terms.push_back(rrnum::UtilityTerm::generic([fn, user_data](double r) { return fn(r, user_data); }, w, "callback"));
        *out = new rrnum_utility{rrnum::UtilityFunction(std::move(terms))};
    });
}

void rrnum_utility_destroy(rrnum_utility* utility) { delete utility; }

rrnum_status rrnum_utility_value(const rrnum_utility* utility, const double* rates, double* out)
{
    return guarded([&] {
        need(utility, "utility");
        need(rates, "rates");
        need(out, "out");
        *out = utility->utility.value(std::span<const double>(rates, utility->utility.size()));
    });
}

/* ---- controller ---- */

rrnum_status rrnum_solve_admission(const rrnum_utility* utility, const double* backlog, double vg, double* rates,
                                   double* h_star)
{
    return guarded([&] {
        need(utility, "utility");
        need(backlog, "backlog");
        need(rates, "rates");
        const auto d = rrnum::solve_admission(std::span<const double>(backlog, utility->utility.size()),
                                              utility->utility, vg);
        copy_vector(d.rates, rates);
        if (h_star) *h_star = d.h_star;
    });
}

rrnum_status rrnum_ratio_metric(const rrnum_channels* channels, const double* backlog, uint64_t mask, double* out)
{
    return guarded([&] {
        need(channels, "channels");
        need(backlog, "backlog");
        need(out, "out");
        const std::size_t n = channels->models.size();
        *out = rrnum::ratio_metric(std::span<const double>(backlog, n), channels->models, subset(n, mask));
    });
}

rrnum_status rrnum_select_phi(const rrnum_channels* channels, const double* backlog, rrnum_mode mode,
                              size_t enumeration_cap, uint64_t* mask, double* value)
{
    return guarded([&] {
        need(channels, "channels");
        need(backlog, "backlog");
        need(mask, "mask");
        const std::size_t n = channels->models.size();
        const auto d = rrnum::select_phi(std::span<const double>(backlog, n), channels->models, to_mode(mode),
                                         enumeration_cap);
        *mask = d.phi.mask();
        if (value) *value = d.value;
    });
}

/* ---- configuration ---- */

rrnum_status rrnum_config_load(const char* path, rrnum_config** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(path, "path");
        *out = new rrnum_config{rrnum::load_config(path)};
    });
}

rrnum_status rrnum_config_parse(const char* yaml_text, rrnum_config** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(yaml_text, "yaml_text");
        *out = new rrnum_config{rrnum::parse_config(yaml_text)};
    });
}

void rrnum_config_destroy(rrnum_config* config) { delete config; }

rrnum_status rrnum_config_set(rrnum_config* config, const char* key, const char* yaml_value)
{
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(yaml_value, "yaml_value");
        auto copy = config->config;
        rrnum::set_config_value(copy, key, yaml_value);
        config->config = std::move(copy);
    });
}

rrnum_status rrnum_config_get(const rrnum_config* config, const char* key, char* buf, size_t capacity, size_t* needed)
{
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        copy_string(rrnum::get_config_value(config->config, key), buf, capacity, needed);
    });
}

rrnum_status rrnum_config_get_double(const rrnum_config* config, const char* key, double* out)
{
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(out, "out");
        *out = YAML::Load(rrnum::get_config_value(config->config, key)).as<double>();
    });
}

rrnum_status rrnum_config_get_u64(const rrnum_config* config, const char* key, uint64_t* out)
{
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(out, "out");
        *out = YAML::Load(rrnum::get_config_value(config->config, key)).as<std::uint64_t>();
    });
}

rrnum_status rrnum_config_get_doubles(const rrnum_config* config, const char* key, double* out, size_t capacity,
                                      size_t* count)
{
    return guarded([&] {
        need(config, "config");
        need(key, "key");
        need(count, "count");
        const auto values = YAML::Load(rrnum::get_config_value(config->config, key)).as<std::vector<double>>();
        *count = values.size();
        if (out) std::copy_n(values.begin(), std::min(capacity, values.size()), out);
    });
}

rrnum_status rrnum_config_echo(const rrnum_config* config, char* buf, size_t capacity, size_t* needed)
{
    return guarded([&] {
        need(config, "config");
        copy_string(rrnum::emit_config(config->config), buf, capacity, needed);
    });
}

uint64_t rrnum_config_hash(const rrnum_config* config) { return config ? rrnum::config_hash(config->config) : 0; }

rrnum_status rrnum_config_channels(const rrnum_config* config, rrnum_channels** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config, "config");
        *out = new rrnum_channels{config->config.channels.models()};
    });
}

rrnum_status rrnum_config_utility(const rrnum_config* config, rrnum_utility** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config, "config");
        const auto& c = config->config;
        *out = new rrnum_utility{c.utility.build(c.channels.size())};
    });
}

rrnum_status rrnum_config_region(const rrnum_config* config, rrnum_region** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config, "config");
        *out = new rrnum_region{config_region(config->config)};
    });
}

/* ---- region export ---- */

rrnum_status rrnum_write_region_vertices(const rrnum_region* region, const char* path, rrnum_format format,
                                         uint64_t config_hash, uint64_t seed)
{
    return guarded([&] {
        need(region, "region");
        auto out = open_output(path);
        rrnum::write_region_vertices(out, region->region, to_format(format), {config_hash, seed});
        finish(out, path);
    });
}

rrnum_status rrnum_write_region_boundary(const rrnum_region* region, const char* path, size_t rays, rrnum_format format,
                                         uint64_t config_hash, uint64_t seed)
{
    return guarded([&] {
        need(region, "region");
        if (rays < 2) rrnum::fail(rrnum::ErrorCode::InvalidArgument, "need at least 2 rays");
        const auto samples = rrnum::boundary_fan(region->region, rays, seed);
        auto out = open_output(path);
        rrnum::write_boundary(out, samples, to_format(format), {config_hash, seed});
        finish(out, path);
    });
}

rrnum_status rrnum_write_region_summary(const rrnum_channels* channels, const rrnum_region* region, const char* path,
                                        uint64_t config_hash, uint64_t seed)
{
    return guarded([&] {
        need(channels, "channels");
        need(region, "region");
        if (channels->models.size() != region->region.dimension())
            rrnum::fail(rrnum::ErrorCode::InvalidArgument, "channels and region dimensions differ");
        const auto doc = rrnum::region_summary(channels->models, region->region, {config_hash, seed});
        auto out = open_output(path);
        out << doc.dump(2) << '\n';
        finish(out, path);
    });
}

/* ---- simulation ---- */

rrnum_status rrnum_run_qrrnum(const rrnum_config* config, double vg, uint64_t seed, rrnum_run** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config, "config");
        const auto rc = config->config.run_config(vg, seed);
        auto h = std::make_unique<rrnum_run>();
        h->models = rc.models;
        h->metrics = rrnum::run_qrrnum(rc);
        *out = h.release();
    });
}

rrnum_status rrnum_run_fixed(const rrnum_config* config, size_t k, const uint64_t* masks, const double* weights,
                             const double* rates, uint64_t seed, rrnum_run** out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(config, "config");
        need(masks, "masks");
        need(weights, "weights");
        need(rates, "rates");
        auto rc = config->config.run_config(0.0, seed);
        rc.vg.reset();
        const std::size_t n = rc.models.size();
        std::vector<rrnum::MixtureComponent> components;
        for (std::size_t i = 0; i < k; ++i) components.push_back({subset(n, masks[i]), weights[i]});
        const rrnum::PolicyRandRR policy(n, std::move(components));
        auto h = std::make_unique<rrnum_run>();
        h->models = rc.models;
        h->metrics = rrnum::run_fixed_policy(rc, policy, std::span<const double>(rates, n));
        *out = h.release();
    });
}

void rrnum_run_destroy(rrnum_run* run) { delete run; }

size_t rrnum_run_channels(const rrnum_run* run) { return run ? run->metrics.channels : 0; }

uint64_t rrnum_run_frames(const rrnum_run* run) { return run ? run->metrics.frames : 0; }

rrnum_status rrnum_run_delivered(const rrnum_run* run, double* out)
{
    return guarded([&] {
        need(run, "run");
        need(out, "out");
        copy_vector(run->metrics.delivered_avg, out);
    });
}

rrnum_status rrnum_run_admitted(const rrnum_run* run, double* out)
{
    return guarded([&] {
        need(run, "run");
        need(out, "out");
        copy_vector(run->metrics.admitted_avg, out);
    });
}

rrnum_status rrnum_run_backlog(const rrnum_run* run, double* out)
{
    return guarded([&] {
        need(run, "run");
        need(out, "out");
        copy_vector(run->metrics.backlog_avg, out);
    });
}

double rrnum_run_utility(const rrnum_run* run) { return run ? run->metrics.utility_of_delivered : 0.0; }

double rrnum_run_mean_backlog(const rrnum_run* run) { return run ? run->metrics.mean_total_backlog() : 0.0; }

double rrnum_run_max_ledger_error(const rrnum_run* run) { return run ? run->metrics.max_ledger_error : 0.0; }

rrnum_status rrnum_run_stability(const rrnum_run* run, double threshold, rrnum_stability* verdict, double* slope)
{
    return guarded([&] {
        need(run, "run");
        need(verdict, "verdict");
        const auto r = rrnum::stability_diagnostic(run->metrics, threshold);
        *verdict = r.verdict == rrnum::Stability::Stable     ? RRNUM_STABLE
                   : r.verdict == rrnum::Stability::Unstable ? RRNUM_UNSTABLE
                                                             : RRNUM_INCONCLUSIVE;
        if (slope) *slope = r.slope;
    });
}

rrnum_status rrnum_run_write_frames(const rrnum_run* run, const char* path, rrnum_format format, uint64_t config_hash)
{
    return guarded([&] {
        need(run, "run");
        auto out = open_output(path);
        rrnum::write_frames(out, run->metrics, to_format(format), {config_hash, run->metrics.seed});
        finish(out, path);
    });
}

rrnum_status rrnum_run_write_summary(const rrnum_run* run, const char* path, double threshold, uint64_t config_hash)
{
    return guarded([&] {
        need(run, "run");
        const auto stability = rrnum::stability_diagnostic(run->metrics, threshold);
        const auto doc = rrnum::run_summary(run->metrics, stability, rrnum::b_constant(run->models),
                                            {config_hash, run->metrics.seed});
        auto out = open_output(path);
        out << doc.dump(2) << '\n';
        finish(out, path);
    });
}

/* ---- verification helpers ---- */

rrnum_status rrnum_verify_throughput(const rrnum_channels* channels, uint64_t mask, uint64_t slots, uint64_t warmup,
                                     uint64_t seed, double* empirical, double* analytic)
{
    return guarded([&] {
        need(channels, "channels");
        need(empirical, "empirical");
        need(analytic, "analytic");
        const std::size_t n = channels->models.size();
        const auto phi = subset(n, mask);
        const rrnum::RunConfig rc{.models = channels->models,
                                  .utility = rrnum::UtilityFunction::log1p(n),
                                  .vg = std::nullopt,
                                  .mode = std::nullopt,
                                  .enumeration_cap = std::nullopt,
                                  .horizon = warmup + slots,
                                  .warmup = warmup,
                                  .seed = seed,
                                  .age_cap = rrnum::kDefaultAgeCap,
                                  .record_frames = false};
        const std::vector<double> saturated(n, 1.0);
        const auto m = rrnum::run_fixed_policy(rc, rrnum::PolicyRandRR::single(phi), saturated);
        copy_vector(m.delivered_avg, empirical);
        copy_vector(rrnum::eta_vector(channels->models, phi), analytic);
    });
}

rrnum_status rrnum_verify_round_law(const rrnum_channels* channels, uint64_t mask, uint64_t rounds, uint64_t seed,
                                    double* min_p_value, double* mean_empirical, double* mean_analytic)
{
    return guarded([&] {
        need(channels, "channels");
        const auto phi = subset(channels->models.size(), mask);
        const auto sample = rrnum::sample_rounds(channels->models, phi, rounds, seed);
        const auto law = rrnum::round_length_law(channels->models, phi);
        double p_min = 1.0;
        for (std::size_t i = 0; i < law.stays.size(); ++i)
            p_min = std::min(p_min, rrnum::chi_square_stay_law(sample.stays[i], law.stays[i]).p_value);
        if (min_p_value) *min_p_value = p_min;
        if (mean_empirical) *mean_empirical = sample.mean_length;
        if (mean_analytic) *mean_analytic = law.mean();
    });
}

}  // extern "C"
