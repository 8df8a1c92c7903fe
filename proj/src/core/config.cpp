#include "core/config.hpp"

#include "core/capacity.hpp"
#include "core/error.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace rrnum {
namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) { fail(ErrorCode::Config, path + ": " + what); }

void allow_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> keys)
{
    if (!node.IsMap()) bad(path, "expected a mapping");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) bad(path.empty() ? key : path + "." + key, "unknown key");
    }
}

std::string scalar(const YAML::Node& n, const std::string& path)
{
    if (!n.IsScalar()) bad(path, "expected a scalar");
    return n.Scalar();
}

double get_double(const YAML::Node& n, const std::string& path)
{
    const std::string s = scalar(n, path);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) bad(path, "expected a finite number, got '" + s + "'");
    return v;
}

std::uint64_t get_u64(const YAML::Node& n, const std::string& path)
{
    const std::string s = scalar(n, path);
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) bad(path, "expected a nonnegative integer, got '" + s + "'");
    return v;
}

bool get_bool(const YAML::Node& n, const std::string& path)
{
    const std::string s = scalar(n, path);
    if (s == "true") return true;
    if (s == "false") return false;
    bad(path, "expected true or false, got '" + s + "'");
}

template <class T, class F>
std::vector<T> get_list(const YAML::Node& n, const std::string& path, F&& item)
{
    if (!n.IsSequence()) bad(path, "expected a list");
    std::vector<T> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(item(n[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::string fmt(double v)
{
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void parse_channels(const YAML::Node& node, ChannelSpec& spec)
{
    allow_keys(node, "channels", {"symmetric", "list"});
    const bool has_sym = static_cast<bool>(node["symmetric"]);
    const bool has_list = static_cast<bool>(node["list"]);
    if (has_sym == has_list) bad("channels", "give exactly one of 'symmetric' or 'list'");
    if (has_sym) {
        const auto s = node["symmetric"];
        allow_keys(s, "channels.symmetric", {"p01", "p10", "count"});
        for (const char* k : {"p01", "p10", "count"})
            if (!s[k]) bad(std::string("channels.symmetric.") + k, "missing");
        spec.symmetric = true;
        spec.p01 = get_double(s["p01"], "channels.symmetric.p01");
        spec.p10 = get_double(s["p10"], "channels.symmetric.p10");
        spec.count = static_cast<std::size_t>(get_u64(s["count"], "channels.symmetric.count"));
        spec.list.clear();
    } else {
        spec.symmetric = false;
        spec.list = get_list<std::pair<double, double>>(node["list"], "channels.list", [](const YAML::Node& e, const std::string& p) {
            if (!e.IsSequence() || e.size() != 2) bad(p, "expected [p01, p10]");
            return std::pair{get_double(e[0], p + "[0]"), get_double(e[1], p + "[1]")};
        });
        spec.p01 = spec.p10 = 0.2;
        spec.count = 2;
    }
}

}  // namespace

std::string_view to_string(Command c)
{
    switch (c) {
    case Command::Region:
        return "region";
    case Command::Verify:
        return "verify";
    case Command::Simulate:
        return "simulate";
    case Command::Sweep:
        return "sweep";
    }
    return "simulate";
}

std::optional<Command> parse_command(std::string_view t)
{
    if (t == "region") return Command::Region;
    if (t == "verify") return Command::Verify;
    if (t == "simulate") return Command::Simulate;
    if (t == "sweep") return Command::Sweep;
    return std::nullopt;
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::Json ? "json" : "csv"; }

std::optional<OutputFormat> parse_output_format(std::string_view t)
{
    if (t == "csv") return OutputFormat::Csv;
    if (t == "json") return OutputFormat::Json;
    return std::nullopt;
}

ChannelSet ChannelSpec::models() const
{
    ChannelSet out;
    if (symmetric) {
        out.assign(count, ChannelModel(p01, p10));
    } else {
        for (const auto& [a, b] : list) out.emplace_back(a, b);
    }
    return out;
}

UtilityFunction UtilitySpec::build(std::size_t users) const
{
    require(weights.empty() || weights.size() == users, "utility weights must have one entry per user");
    std::vector<UtilityTerm> terms;
    for (std::size_t n = 0; n < users; ++n) {
        const double w = weights.empty() ? 1.0 : weights[n];
        if (kind == "log1p")
            terms.push_back(UtilityTerm::log1p(w));
        else if (kind == "linear")
            terms.push_back(UtilityTerm::linear(w));
        else if (kind == "power") {
            const double a = exponent;
            terms.push_back(UtilityTerm::generic([a](double r) { return std::pow(r, a); }, w, "power:" + fmt(a)));
        } else
            fail(ErrorCode::Config, "utility.kind: unknown kind '" + kind + "'");
    }
    return UtilityFunction(std::move(terms));
}

RunConfig ExperimentConfig::run_config(double run_vg, std::uint64_t run_seed) const
{
    return RunConfig{.models = channels.models(),
                     .utility = utility.build(channels.size()),
                     .vg = run_vg,
                     .mode = mode,
                     .enumeration_cap = enumeration_cap,
                     .horizon = horizon,
                     .warmup = effective_warmup(),
                     .seed = run_seed,
                     .age_cap = age_cap,
                     .record_frames = record_frames};
}

void ExperimentConfig::validate() const
{
    if (schema_version != 1) bad("schema_version", "only version 1 is supported");
    const std::size_t n = channels.size();
    if (n < 1 || n > ActivationVector::kMaxChannels) bad("channels", "need between 1 and 64 channels");
    ChannelSet models;
    try {
        models = channels.models();
    } catch (const Error& e) {
        bad("channels", e.what());
    }
    if (utility.kind != "log1p" && utility.kind != "linear" && utility.kind != "power")
        bad("utility.kind", "expected log1p, linear or power");
    if (!utility.weights.empty() && utility.weights.size() != n) bad("utility.weights", "need one weight per channel");
    for (double w : utility.weights)
        if (!(w >= 0.0)) bad("utility.weights", "weights must be nonnegative");
    if (!(utility.exponent > 0.0 && utility.exponent <= 1.0)) bad("utility.exponent", "must lie in (0, 1]");
    if (!(vg >= 0.0)) bad("controller.vg", "must be nonnegative");
    if (enumeration_cap > kMaxEnumerationCap) bad("controller.enumeration_cap", "may not exceed " + std::to_string(kMaxEnumerationCap));
    if (mode == SelectionMode::SymmetricFast && !is_symmetric(models))
        bad("controller.mode", "symmetric_fast needs identical channels");
    if (mode == SelectionMode::PairsOnly && n < 2) bad("controller.mode", "pairs_only needs at least two channels");
    if (effective_warmup() > horizon) bad("run.warmup", "may not exceed run.horizon");
    if (age_cap < 1) bad("run.age_cap", "must be at least 1");
    if (!(stability_threshold > 0.0)) bad("run.stability_threshold", "must be positive");
    if (sweep_vg.empty()) bad("sweep.vg", "must not be empty");
    for (double v : sweep_vg)
        if (!(v >= 0.0)) bad("sweep.vg", "entries must be nonnegative");
    if (sweep_seeds.empty()) bad("sweep.seeds", "must not be empty");
    if (rays < 2) bad("region.rays", "need at least two rays");
    if (!(boundary_tolerance >= 0.0)) bad("region.boundary_tolerance", "must be nonnegative");
    if (verify_slots == 0) bad("verify.slots", "must be positive");
    if (!(verify_tolerance > 0.0)) bad("verify.tolerance", "must be positive");
    if (verify_rounds == 0) bad("verify.rounds", "must be positive");
    if (out_dir.empty()) bad("output.dir", "must not be empty");
}

ExperimentConfig parse_config(std::string_view text)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config, std::string("config is not valid YAML: ") + e.what());
    }
    ExperimentConfig c;
    if (!root || root.IsNull()) bad("config", "empty document");
    allow_keys(root, "", {"schema_version", "experiment", "channels", "utility", "controller", "run", "sweep", "region",
                          "verify", "output"});
    try {
        if (root["schema_version"]) c.schema_version = static_cast<int>(get_u64(root["schema_version"], "schema_version"));
        if (auto e = root["experiment"]) {
            allow_keys(e, "experiment", {"command"});
            if (e["command"]) {
                const auto s = scalar(e["command"], "experiment.command");
                c.command = parse_command(s);
                if (!c.command) bad("experiment.command", "unknown command '" + s + "'");
            }
        }
        if (!root["channels"]) bad("channels", "missing");
        parse_channels(root["channels"], c.channels);
        if (auto u = root["utility"]) {
            allow_keys(u, "utility", {"kind", "weights", "exponent"});
            if (u["kind"]) c.utility.kind = scalar(u["kind"], "utility.kind");
            if (u["weights"]) c.utility.weights = get_list<double>(u["weights"], "utility.weights", get_double);
            if (u["exponent"]) c.utility.exponent = get_double(u["exponent"], "utility.exponent");
        }
        if (auto k = root["controller"]) {
            allow_keys(k, "controller", {"vg", "mode", "enumeration_cap"});
            if (k["vg"]) c.vg = get_double(k["vg"], "controller.vg");
            if (k["mode"]) {
                const auto s = scalar(k["mode"], "controller.mode");
                const auto m = parse_selection_mode(s);
                if (!m) bad("controller.mode", "expected exhaustive, symmetric_fast or pairs_only");
                c.mode = *m;
            }
            if (k["enumeration_cap"]) c.enumeration_cap = get_u64(k["enumeration_cap"], "controller.enumeration_cap");
        }
        if (auto r = root["run"]) {
            allow_keys(r, "run", {"horizon", "warmup", "seed", "age_cap", "stability_threshold", "record_frames"});
            if (r["horizon"]) c.horizon = get_u64(r["horizon"], "run.horizon");
            if (r["warmup"]) c.warmup = get_u64(r["warmup"], "run.warmup");
            if (r["seed"]) c.seed = get_u64(r["seed"], "run.seed");
            if (r["age_cap"]) c.age_cap = get_u64(r["age_cap"], "run.age_cap");
            if (r["stability_threshold"]) c.stability_threshold = get_double(r["stability_threshold"], "run.stability_threshold");
            if (r["record_frames"]) c.record_frames = get_bool(r["record_frames"], "run.record_frames");
        }
        if (auto s = root["sweep"]) {
            allow_keys(s, "sweep", {"vg", "seeds", "workers"});
            if (s["vg"]) c.sweep_vg = get_list<double>(s["vg"], "sweep.vg", get_double);
            if (s["seeds"]) c.sweep_seeds = get_list<std::uint64_t>(s["seeds"], "sweep.seeds", get_u64);
            if (s["workers"]) c.workers = get_u64(s["workers"], "sweep.workers");
        }
        if (auto g = root["region"]) {
            allow_keys(g, "region", {"rays", "boundary_tolerance"});
            if (g["rays"]) c.rays = get_u64(g["rays"], "region.rays");
            if (g["boundary_tolerance"]) c.boundary_tolerance = get_double(g["boundary_tolerance"], "region.boundary_tolerance");
        }
        if (auto v = root["verify"]) {
            allow_keys(v, "verify", {"slots", "warmup", "random_subsets", "tolerance", "rounds"});
            if (v["slots"]) c.verify_slots = get_u64(v["slots"], "verify.slots");
            if (v["warmup"]) c.verify_warmup = get_u64(v["warmup"], "verify.warmup");
            if (v["random_subsets"]) c.verify_random_subsets = get_u64(v["random_subsets"], "verify.random_subsets");
            if (v["tolerance"]) c.verify_tolerance = get_double(v["tolerance"], "verify.tolerance");
            if (v["rounds"]) c.verify_rounds = get_u64(v["rounds"], "verify.rounds");
        }
        if (auto o = root["output"]) {
            allow_keys(o, "output", {"dir", "format", "verbose"});
            if (o["dir"]) c.out_dir = scalar(o["dir"], "output.dir");
            if (o["format"]) {
                const auto s = scalar(o["format"], "output.format");
                const auto f = parse_output_format(s);
                if (!f) bad("output.format", "expected csv or json");
                c.format = *f;
            }
            if (o["verbose"]) c.verbose = get_bool(o["verbose"], "output.verbose");
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::Config, std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c)
{
    YAML::Emitter out;
    auto num = [&](double v) { out << fmt(v); };
    auto nums = [&](const std::vector<double>& v) {
        out << YAML::Flow << YAML::BeginSeq;
        for (double e : v) num(e);
        out << YAML::EndSeq;
    };
    out << YAML::BeginMap;
    out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
    if (c.command) {
        out << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "command" << YAML::Value << std::string(to_string(*c.command));
        out << YAML::EndMap;
    }
    out << YAML::Key << "channels" << YAML::Value << YAML::BeginMap;
    if (c.channels.symmetric) {
        out << YAML::Key << "symmetric" << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "p01" << YAML::Value;
        num(c.channels.p01);
        out << YAML::Key << "p10" << YAML::Value;
        num(c.channels.p10);
        out << YAML::Key << "count" << YAML::Value << c.channels.count << YAML::EndMap;
    } else {
        out << YAML::Key << "list" << YAML::Value << YAML::BeginSeq;
        for (const auto& [a, b] : c.channels.list) nums({a, b});
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;

    out << YAML::Key << "utility" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << c.utility.kind;
    if (!c.utility.weights.empty()) {
        out << YAML::Key << "weights" << YAML::Value;
        nums(c.utility.weights);
    }
    out << YAML::Key << "exponent" << YAML::Value;
    num(c.utility.exponent);
    out << YAML::EndMap;

    out << YAML::Key << "controller" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "vg" << YAML::Value;
    num(c.vg);
    out << YAML::Key << "mode" << YAML::Value << std::string(to_string(c.mode));
    out << YAML::Key << "enumeration_cap" << YAML::Value << c.enumeration_cap;
    out << YAML::EndMap;

    out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "horizon" << YAML::Value << c.horizon;
    if (c.warmup) out << YAML::Key << "warmup" << YAML::Value << *c.warmup;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "age_cap" << YAML::Value << c.age_cap;
    out << YAML::Key << "stability_threshold" << YAML::Value;
    num(c.stability_threshold);
    out << YAML::Key << "record_frames" << YAML::Value << (c.record_frames ? "true" : "false");
    out << YAML::EndMap;

    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "vg" << YAML::Value;
    nums(c.sweep_vg);
    out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto s : c.sweep_seeds) out << s;
    out << YAML::EndSeq;
    out << YAML::Key << "workers" << YAML::Value << c.workers;
    out << YAML::EndMap;

    out << YAML::Key << "region" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rays" << YAML::Value << c.rays;
    out << YAML::Key << "boundary_tolerance" << YAML::Value;
    num(c.boundary_tolerance);
    out << YAML::EndMap;

    out << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "slots" << YAML::Value << c.verify_slots;
    out << YAML::Key << "warmup" << YAML::Value << c.verify_warmup;
    out << YAML::Key << "random_subsets" << YAML::Value << c.verify_random_subsets;
    out << YAML::Key << "tolerance" << YAML::Value;
    num(c.verify_tolerance);
    out << YAML::Key << "rounds" << YAML::Value << c.verify_rounds;
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << c.out_dir;
    out << YAML::Key << "format" << YAML::Value << std::string(to_string(c.format));
    out << YAML::Key << "verbose" << YAML::Value << (c.verbose ? "true" : "false");
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

namespace {

std::vector<std::string> split_key(std::string_view key)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= key.size()) {
        const auto dot = key.find('.', start);
        const auto end = dot == std::string_view::npos ? key.size() : dot;
        if (end == start) bad(std::string(key), "malformed key");
        parts.emplace_back(key.substr(start, end - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

void assign_path(YAML::Node node, const std::vector<std::string>& parts, std::size_t i, const YAML::Node& value)
{
    if (i + 1 == parts.size()) {
        node[parts[i]] = value;
        return;
    }
    if (!node[parts[i]] || !node[parts[i]].IsMap()) node[parts[i]] = YAML::Node(YAML::NodeType::Map);
    assign_path(node[parts[i]], parts, i + 1, value);
}

}  // namespace

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view yaml_value)
{
    const auto parts = split_key(key);
    YAML::Node value;
    try {
        value = YAML::Load(std::string(yaml_value));
    } catch (const YAML::Exception& e) {
        bad(std::string(key), std::string("value is not valid YAML: ") + e.what());
    }
    YAML::Node root = YAML::Load(emit_config(config));
    assign_path(root, parts, 0, value);
    YAML::Emitter out;
    out << root;
    config = parse_config(out.c_str());
}

std::string get_config_value(const ExperimentConfig& config, std::string_view key)
{
    const auto parts = split_key(key);
    const YAML::Node root = YAML::Load(emit_config(config));
    std::vector<YAML::Node> chain{root};
    for (const auto& part : parts) {
        const YAML::Node& cur = chain.back();
        if (!cur.IsMap() || !cur[part]) fail(ErrorCode::Config, std::string(key) + ": no such key");
        chain.push_back(cur[part]);
    }
    const YAML::Node& leaf = chain.back();
    if (leaf.IsScalar()) return leaf.Scalar();
    YAML::Emitter out;
    out << YAML::Flow << leaf;
    return out.c_str();
}

std::uint64_t config_hash(const ExperimentConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace rrnum
