// rrnum command-line front end: region, verify, simulate and sweep
// experiments driven by a YAML config, through the public C API only.

#include "rrnum/rrnum.h"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum Exit : int { kSuccess = 0, kValidation = 1, kRuntime = 2, kVerifyFailed = 3 };

/// Carries a C API failure up to main() with its exit code.
struct Failure {
    int exit_code;
    std::string message;
};

int exit_code_for(rrnum_status s)
{
    switch (s) {
    case RRNUM_E_INVALID_ARGUMENT:
    case RRNUM_E_CONFIG:
    case RRNUM_E_CAP_EXCEEDED:
        return kValidation;
    default:
        return kRuntime;
    }
}

void check(rrnum_status s, const std::string& context)
{
    if (s == RRNUM_OK) return;
    throw Failure{exit_code_for(s), context + ": " + rrnum_status_string(s) + ": " + rrnum_last_error()};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
    void operator()(T* p) const { Destroy(p); }
};
using Config = std::unique_ptr<rrnum_config, Deleter<rrnum_config, rrnum_config_destroy>>;
using Channels = std::unique_ptr<rrnum_channels, Deleter<rrnum_channels, rrnum_channels_destroy>>;
using Region = std::unique_ptr<rrnum_region, Deleter<rrnum_region, rrnum_region_destroy>>;
using Utility = std::unique_ptr<rrnum_utility, Deleter<rrnum_utility, rrnum_utility_destroy>>;
using Run = std::unique_ptr<rrnum_run, Deleter<rrnum_run, rrnum_run_destroy>>;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::vector<double> vg;
    std::optional<std::string> mode;
    std::optional<std::string> out;
    std::optional<std::string> format;
    bool verbose = false;
};

std::string get_string(const rrnum_config* c, const char* key)
{
    std::size_t needed = 0;
    check(rrnum_config_get(c, key, nullptr, 0, &needed), key);
    std::string s(needed, '\0');
    check(rrnum_config_get(c, key, s.data(), s.size(), &needed), key);
    s.resize(needed - 1);
    return s;
}

std::uint64_t get_u64(const rrnum_config* c, const char* key)
{
    std::uint64_t v = 0;
    check(rrnum_config_get_u64(c, key, &v), key);
    return v;
}

double get_double(const rrnum_config* c, const char* key)
{
    double v = 0.0;
    check(rrnum_config_get_double(c, key, &v), key);
    return v;
}

std::vector<double> get_doubles(const rrnum_config* c, const char* key)
{
    std::size_t count = 0;
    check(rrnum_config_get_doubles(c, key, nullptr, 0, &count), key);
    std::vector<double> v(count);
    check(rrnum_config_get_doubles(c, key, v.data(), v.size(), &count), key);
    return v;
}

std::string num(double v)
{
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::string hex(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string mask_string(std::uint64_t mask, std::size_t n)
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) s += ',';
        s += ((mask >> i) & 1u) ? '1' : '0';
    }
    return s;
}

/// Shared context for every command.
struct Context {
    Config config;
    std::uint64_t hash = 0;
    std::uint64_t seed = 0;
    fs::path out_dir;
    rrnum_format format = RRNUM_FORMAT_CSV;
    std::string ext = "csv";
    bool verbose = false;

    void log(const std::string& line) const
    {
        if (verbose) std::cerr << "[rrnum] " << line << '\n';
    }
    std::string file(const std::string& stem) const { return (out_dir / (stem + "." + ext)).string(); }
    std::string json(const std::string& stem) const { return (out_dir / (stem + ".json")).string(); }
};

Context prepare(const Options& opt, const std::string& command)
{
    rrnum_config* raw = nullptr;
    check(rrnum_config_load(opt.config_path.c_str(), &raw), "config");
    Context ctx;
    ctx.config.reset(raw);
    auto* c = ctx.config.get();

    check(rrnum_config_set(c, "experiment.command", command.c_str()), "experiment.command");
    if (opt.seed) check(rrnum_config_set(c, "run.seed", std::to_string(*opt.seed).c_str()), "--seed");
    if (opt.horizon) check(rrnum_config_set(c, "run.horizon", std::to_string(*opt.horizon).c_str()), "--horizon");
    if (!opt.vg.empty()) {
        std::string list = "[";
        for (std::size_t i = 0; i < opt.vg.size(); ++i) list += (i ? ", " : "") + num(opt.vg[i]);
        list += "]";
        check(rrnum_config_set(c, "sweep.vg", list.c_str()), "--vg");
        check(rrnum_config_set(c, "controller.vg", num(opt.vg.front()).c_str()), "--vg");
    }
    if (opt.mode) check(rrnum_config_set(c, "controller.mode", opt.mode->c_str()), "--mode");
    if (opt.out) {
        std::string quoted = "\"";
        for (char ch : *opt.out) {
            if (ch == '"' || ch == '\\') quoted += '\\';
            quoted += ch;
        }
        quoted += '"';
        check(rrnum_config_set(c, "output.dir", quoted.c_str()), "--out");
    }
    if (opt.format) check(rrnum_config_set(c, "output.format", opt.format->c_str()), "--format");
    if (opt.verbose) check(rrnum_config_set(c, "output.verbose", "true"), "--verbose");

    ctx.hash = rrnum_config_hash(c);
    ctx.seed = get_u64(c, "run.seed");
    ctx.out_dir = get_string(c, "output.dir");
    ctx.verbose = get_string(c, "output.verbose") == "true";
    if (get_string(c, "output.format") == "json") {
        ctx.format = RRNUM_FORMAT_JSON;
        ctx.ext = "json";
    }

    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw Failure{kRuntime, "cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message()};
    std::size_t needed = 0;
    check(rrnum_config_echo(c, nullptr, 0, &needed), "echo");
    std::string echo(needed, '\0');
    check(rrnum_config_echo(c, echo.data(), echo.size(), &needed), "echo");
    echo.resize(needed - 1);
    std::ofstream(ctx.out_dir / "config.yaml") << echo;
    ctx.log("config hash " + hex(ctx.hash) + ", output in " + ctx.out_dir.string());
    return ctx;
}

int cmd_region(Context& ctx)
{
    auto* c = ctx.config.get();
    rrnum_channels* ch = nullptr;
    check(rrnum_config_channels(c, &ch), "channels");
    Channels channels(ch);
    rrnum_region* rg = nullptr;
    const auto status = rrnum_config_region(c, &rg);
    if (status == RRNUM_E_CAP_EXCEEDED)
        throw Failure{kValidation, std::string(rrnum_last_error()) + " (try --mode pairs_only)"};
    check(status, "region");
    Region region(rg);

    const std::size_t rays = get_u64(c, "region.rays");
    check(rrnum_write_region_vertices(region.get(), ctx.file("vertices").c_str(), ctx.format, ctx.hash, ctx.seed),
          "vertices");
    check(rrnum_write_region_boundary(region.get(), ctx.file("boundary").c_str(), rays, ctx.format, ctx.hash, ctx.seed),
          "boundary");
    check(rrnum_write_region_summary(channels.get(), region.get(), ctx.json("region_summary").c_str(), ctx.hash,
                                     ctx.seed),
          "summary");

    const std::size_t n = rrnum_region_dimension(region.get());
    const std::size_t count = rrnum_region_vertex_count(region.get());
    std::cout << "region: N=" << n << " vertices=" << count << '\n';
    std::vector<double> eta(n);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t mask = 0;
        check(rrnum_region_vertex(region.get(), i, &mask, eta.data()), "vertex");
        const bool named = std::popcount(mask) == 1 || std::popcount(mask) == static_cast<int>(n);
        if (!named && count > 8) continue;
        std::cout << "  phi=(" << mask_string(mask, n) << ") eta=(";
        for (std::size_t j = 0; j < n; ++j) std::cout << (j ? ", " : "") << num(eta[j]);
        std::cout << ")\n";
    }
    return kSuccess;
}

std::vector<std::uint64_t> verify_subsets(std::size_t n, std::size_t random_count, std::uint64_t seed)
{
    std::vector<std::uint64_t> masks;
    for (std::size_t i = 0; i < n; ++i) masks.push_back(std::uint64_t{1} << i);
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    if (n > 1) masks.push_back(all);
    // Distinct random subsets of size >= 2 that are not already listed; the
    // candidate pool is finite, so stop when it is exhausted.
    const std::uint64_t pool = n >= 63 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1 - n - (n > 1 ? 1 : 0);
    const std::size_t target = masks.size() + static_cast<std::size_t>(std::min<std::uint64_t>(random_count, pool));
    std::mt19937_64 rng(seed);
    while (masks.size() < target) {
        const std::uint64_t m = rng() & all;
        if (std::popcount(m) < 2 || std::find(masks.begin(), masks.end(), m) != masks.end()) continue;
        masks.push_back(m);
    }
    return masks;
}

int cmd_verify(Context& ctx)
{
    auto* c = ctx.config.get();
    rrnum_channels* ch = nullptr;
    check(rrnum_config_channels(c, &ch), "channels");
    Channels channels(ch);
    const std::size_t n = rrnum_channels_count(channels.get());
    const std::uint64_t slots = get_u64(c, "verify.slots");
    const std::uint64_t warmup = get_u64(c, "verify.warmup");
    const std::uint64_t rounds = get_u64(c, "verify.rounds");
    const double tol = get_double(c, "verify.tolerance");
    const auto masks = verify_subsets(n, get_u64(c, "verify.random_subsets"), ctx.seed);

    std::ofstream report(ctx.file("verify"));
    const bool json = ctx.format == RRNUM_FORMAT_JSON;
    if (json)
        report << "{\"schema\":\"rrnum.verify/1\",\"config_hash\":\"" << hex(ctx.hash) << "\",\"seed\":" << ctx.seed
               << ",\"rows\":[";
    else
        report << "# schema=rrnum.verify/1 config_hash=" << hex(ctx.hash) << " seed=" << ctx.seed
               << "\ncheck,mask,channel,empirical,analytic,abs_error,tolerance,pass\n";
    bool first_row = true;
    auto row = [&](const std::string& kind, std::uint64_t mask, std::size_t channel, double emp, double ana,
                   double band, bool pass) {
        if (json) {
            report << (first_row ? "" : ",") << "{\"check\":\"" << kind << "\",\"mask\":" << mask
                   << ",\"channel\":" << channel << ",\"empirical\":" << num(emp) << ",\"analytic\":" << num(ana)
                   << ",\"abs_error\":" << num(std::abs(emp - ana)) << ",\"tolerance\":" << num(band)
                   << ",\"pass\":" << (pass ? "true" : "false") << "}";
        } else {
            report << kind << ',' << mask << ',' << channel << ',' << num(emp) << ',' << num(ana) << ','
                   << num(std::abs(emp - ana)) << ',' << num(band) << ',' << (pass ? "true" : "false") << '\n';
        }
        first_row = false;
    };

    bool all_pass = true;
    std::vector<double> emp(n), ana(n);
    for (const auto mask : masks) {
        ctx.log("throughput check phi=(" + mask_string(mask, n) + ")");
        check(rrnum_verify_throughput(channels.get(), mask, slots, warmup, ctx.seed, emp.data(), ana.data()),
              "verify throughput");
        bool pass = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!((mask >> i) & 1u)) continue;
            const bool ok = std::abs(emp[i] - ana[i]) <= tol;
            row("throughput", mask, i + 1, emp[i], ana[i], tol, ok);
            pass = pass && ok;
        }
        std::cout << (pass ? "PASS" : "FAIL") << " throughput phi=(" << mask_string(mask, n) << ")\n";
        all_pass = all_pass && pass;
    }

    // Stay-length law and mean round length of the all-active round. The mean
    // is judged against a 4-sigma band from the analytic round variance.
    const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    double p_min = 0.0, mean_emp = 0.0, mean_ana = 0.0, second = 0.0;
    check(rrnum_verify_round_law(channels.get(), all, rounds, ctx.seed, &p_min, &mean_emp, &mean_ana), "round law");
    check(rrnum_round_moments(channels.get(), all, nullptr, &second), "round moments");
    const double band = 4.0 * std::sqrt((second - mean_ana * mean_ana) / static_cast<double>(rounds));
    const bool law_ok = p_min >= 0.01;
    const bool mean_ok = std::abs(mean_emp - mean_ana) <= band;
    row("stay_law_min_p", all, 0, p_min, 0.01, 0.0, law_ok);
    row("round_mean", all, 0, mean_emp, mean_ana, band, mean_ok);
    std::cout << (law_ok ? "PASS" : "FAIL") << " stay-length law chi-square min p=" << num(p_min) << '\n';
    std::cout << (mean_ok ? "PASS" : "FAIL") << " mean round length " << num(mean_emp) << " vs " << num(mean_ana)
              << " (band " << num(band) << ")\n";
    all_pass = all_pass && law_ok && mean_ok;
    if (json) report << "]}\n";
    report.close();
    return all_pass ? kSuccess : kVerifyFailed;
}

int cmd_simulate(Context& ctx)
{
    auto* c = ctx.config.get();
    const double vg = get_double(c, "controller.vg");
    const double threshold = get_double(c, "run.stability_threshold");
    ctx.log("simulate vg=" + num(vg) + " seed=" + std::to_string(ctx.seed));
    rrnum_run* raw = nullptr;
    check(rrnum_run_qrrnum(c, vg, ctx.seed, &raw), "simulate");
    Run run(raw);
    if (get_string(c, "run.record_frames") == "true")
        check(rrnum_run_write_frames(run.get(), ctx.file("frames").c_str(), ctx.format, ctx.hash), "frames");
    check(rrnum_run_write_summary(run.get(), ctx.json("summary").c_str(), threshold, ctx.hash), "summary");

    const std::size_t n = rrnum_run_channels(run.get());
    std::vector<double> y(n);
    check(rrnum_run_delivered(run.get(), y.data()), "delivered");
    rrnum_stability verdict{};
    double slope = 0.0;
    check(rrnum_run_stability(run.get(), threshold, &verdict, &slope), "stability");
    std::cout << "simulate: vg=" << num(vg) << " frames=" << rrnum_run_frames(run.get()) << " ybar=(";
    for (std::size_t i = 0; i < n; ++i) std::cout << (i ? ", " : "") << num(y[i]);
    std::cout << ") g(ybar)=" << num(rrnum_run_utility(run.get()))
              << " mean_backlog=" << num(rrnum_run_mean_backlog(run.get())) << " slope=" << num(slope) << " "
              << (verdict == RRNUM_STABLE ? "stable" : verdict == RRNUM_UNSTABLE ? "unstable" : "inconclusive") << '\n';
    return kSuccess;
}

struct SweepRow {
    double vg = 0.0;
    std::uint64_t seed = 0;
    double utility = 0.0;
    double mean_backlog = 0.0;
    double slope = 0.0;
    rrnum_stability verdict = RRNUM_INCONCLUSIVE;
};

/// Serialized, order-preserving sink: rows arrive from workers in any order
/// and are written strictly in grid order.
class OrderedSink {
public:
    OrderedSink(std::size_t total, std::function<void(const SweepRow&)> write)
        : rows_(total), write_(std::move(write))
    {
    }

    void put(std::size_t index, SweepRow row)
    {
        std::lock_guard lock(mutex_);
        rows_[index] = std::move(row);
        while (next_ < rows_.size() && rows_[next_]) write_(*rows_[next_++]);
    }

    const std::vector<std::optional<SweepRow>>& rows() const { return rows_; }

private:
    std::mutex mutex_;
    std::vector<std::optional<SweepRow>> rows_;
    std::size_t next_ = 0;
    std::function<void(const SweepRow&)> write_;
};

int cmd_sweep(Context& ctx)
{
    auto* c = ctx.config.get();
    check(rrnum_config_set(c, "run.record_frames", "false"), "sweep");
    const auto vgs = get_doubles(c, "sweep.vg");
    const auto seeds_d = get_doubles(c, "sweep.seeds");
    const double threshold = get_double(c, "run.stability_threshold");
    std::size_t workers = get_u64(c, "sweep.workers");
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (vgs.empty()) throw Failure{kValidation, "sweep.vg must not be empty"};
    std::vector<std::uint64_t> seeds;
    for (double s : seeds_d) seeds.push_back(static_cast<std::uint64_t>(s));

    // Offline optimum and the gap constant.
    rrnum_channels* ch = nullptr;
    check(rrnum_config_channels(c, &ch), "channels");
    Channels channels(ch);
    rrnum_utility* ut = nullptr;
    check(rrnum_config_utility(c, &ut), "utility");
    Utility utility(ut);
    rrnum_region* rg = nullptr;
    check(rrnum_config_region(c, &rg), "region");
    Region region(rg);
    const std::size_t n = rrnum_channels_count(channels.get());
    std::vector<double> opt_point(n);
    double g_opt = 0.0, b = 0.0;
    check(rrnum_offline_optimum(region.get(), utility.get(), opt_point.data(), &g_opt, nullptr), "offline optimum");
    check(rrnum_b_constant(channels.get(), &b), "B");

    std::ofstream table(ctx.file("sweep"));
    const bool json = ctx.format == RRNUM_FORMAT_JSON;
    if (json)
        table << "{\"schema\":\"rrnum.sweep/1\",\"config_hash\":\"" << hex(ctx.hash) << "\",\"seed\":" << ctx.seed
              << ",\"g_opt\":" << num(g_opt) << ",\"B\":" << num(b) << ",\"rows\":[";
    else
        table << "# schema=rrnum.sweep/1 config_hash=" << hex(ctx.hash) << " seed=" << ctx.seed
              << "\nvg,seed,g_ybar,g_opt,g_opt_minus_B_over_vg,mean_backlog,slope,stable\n";
    bool first = true;
    OrderedSink sink(vgs.size() * seeds.size(), [&](const SweepRow& r) {
        const double floor = g_opt - b / r.vg;
        if (json) {
            table << (first ? "" : ",") << "{\"vg\":" << num(r.vg) << ",\"seed\":" << r.seed
                  << ",\"g_ybar\":" << num(r.utility) << ",\"g_opt\":" << num(g_opt)
                  << ",\"g_opt_minus_B_over_vg\":" << num(floor) << ",\"mean_backlog\":" << num(r.mean_backlog)
                  << ",\"slope\":" << num(r.slope) << ",\"stable\":" << (r.verdict == RRNUM_STABLE ? "true" : "false")
                  << "}";
        } else {
            table << num(r.vg) << ',' << r.seed << ',' << num(r.utility) << ',' << num(g_opt) << ',' << num(floor)
                  << ',' << num(r.mean_backlog) << ',' << num(r.slope) << ','
                  << (r.verdict == RRNUM_STABLE ? "true" : "false") << '\n';
        }
        first = false;
        std::cout << "sweep: vg=" << num(r.vg) << " seed=" << r.seed << " g(ybar)=" << num(r.utility)
                  << " floor=" << num(floor) << " mean_backlog=" << num(r.mean_backlog) << '\n';
    });

    // Bounded worker pool over the (vg, seed) grid.
    const std::size_t total = vgs.size() * seeds.size();
    std::atomic<std::size_t> next{0};
    std::mutex fail_mutex;
    std::optional<Failure> failure;
    auto worker = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            {
                std::lock_guard lock(fail_mutex);
                if (failure) return;
            }
            SweepRow row;
            row.vg = vgs[i / seeds.size()];
            row.seed = seeds[i % seeds.size()];
            try {
                ctx.log("run vg=" + num(row.vg) + " seed=" + std::to_string(row.seed));
                rrnum_run* raw = nullptr;
                check(rrnum_run_qrrnum(c, row.vg, row.seed, &raw), "sweep run");
                Run run(raw);
                row.utility = rrnum_run_utility(run.get());
                row.mean_backlog = rrnum_run_mean_backlog(run.get());
                check(rrnum_run_stability(run.get(), threshold, &row.verdict, &row.slope), "stability");
            } catch (const Failure& f) {
                std::lock_guard lock(fail_mutex);
                if (!failure) failure = f;
                return;
            }
            sink.put(i, row);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, total); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) throw *failure;
    if (json) table << "]}\n";
    return kSuccess;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rrnum: utility-optimal round robin scheduling over Markov ON/OFF channels"};
    app.set_version_flag("--version", std::string(rrnum_version()));
    Options opt;
    std::uint64_t seed = 0, horizon = 0;
    std::string mode, out, format;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "Experiment config (YAML)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "Override run.seed");
        sub->add_option("--horizon", horizon, "Override run.horizon (slots)");
        sub->add_option("--vg", opt.vg, "Override V_g list (comma separated); simulate uses the first")
            ->delimiter(',');
        sub->add_option("--mode", mode, "Subset selection mode")
            ->check(CLI::IsMember({"exhaustive", "symmetric_fast", "pairs_only"}));
        sub->add_option("--out", out, "Output directory");
        sub->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--verbose", opt.verbose, "Progress on stderr");
    };
    auto* region = app.add_subcommand("region", "Inner region vertices, boundary fan and summary");
    auto* verify = app.add_subcommand("verify", "Monte Carlo check of the throughput vertices and round law");
    auto* simulate = app.add_subcommand("simulate", "One QRRNUM run");
    auto* sweep = app.add_subcommand("sweep", "QRRNUM over the V_g x seed grid against the utility bound");
    for (auto* sub : {region, verify, simulate, sweep}) add_common(sub);
    app.require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kValidation;
    }

    auto* chosen = app.get_subcommands().front();
    if (chosen->count("--seed")) opt.seed = seed;
    if (chosen->count("--horizon")) opt.horizon = horizon;
    if (chosen->count("--mode")) opt.mode = mode;
    if (chosen->count("--out")) opt.out = out;
    if (chosen->count("--format")) opt.format = format;

    try {
        Context ctx = prepare(opt, chosen->get_name());
        if (chosen == region) return cmd_region(ctx);
        if (chosen == verify) return cmd_verify(ctx);
        if (chosen == simulate) return cmd_simulate(ctx);
        return cmd_sweep(ctx);
    } catch (const Failure& f) {
        std::cerr << "rrnum: " << f.message << '\n';
        return f.exit_code;
    }
}
