// Command-line front end: train systems, evaluate them and classical
// baselines over stochastic channels, sweep seeds, and export CSV/JSON
// artifacts. See README.md for the config file keys and output formats.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "vicomm/vicomm.hpp"

namespace fs = std::filesystem;
using namespace vicomm;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;

std::vector<double> parse_snr_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw config_error("bad SNR value '" + item + "'");
        }
    }
    if (out.empty()) throw config_error("empty SNR list");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw config_error("cannot create output directory '" + dir + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open '" + path.string() + "' for writing");
    return os;
}

std::uint64_t fnv_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string constellation_hash(const Constellation& c) {
    std::ostringstream os;
    write_constellation_csv(os, c);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv_hash(os.str())));
    return std::string(buf);
}

void write_trained_outputs(const fs::path& dir, const TrainedSystem& sys) {
    save_checkpoint((dir / "checkpoint.json").string(), sys);
    const std::string prov = provenance_line(sys.config);
    auto loss_os = open_out(dir / "loss_history.csv");
    write_loss_history_csv(loss_os, sys.loss_history, prov);
    write_constellation_csv((dir / "constellation.csv").string(), sys.constellation, prov);
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    const SystemConfig config = system_config_from_kv(parse_config_file(config_path));
    ensure_dir(out_dir);
    const TrainedSystem sys = train(config);
    write_trained_outputs(out_dir, sys);
    std::cout << "trained M=" << config.M << " m=" << config.m << " ("
              << to_string(config.channel.family) << ", " << config.epochs << " epochs), final loss "
              << (sys.loss_history.empty() ? 0.0 : sys.loss_history.back().total) << "\n";
    std::cout << "wrote " << out_dir << "/checkpoint.json, loss_history.csv, constellation.csv\n";
    return exit_ok;
}

struct EvalOptions {
    std::string checkpoint;
    std::string constellation;
    std::string channel = "awgn";
    std::string snrs = "0,2,4,6,8";
    std::uint64_t seed = 1;
    std::uint64_t target_errors = 500;
    std::uint64_t max_blocks = 20'000'000;
    std::uint64_t mi_samples = 20'000;
    std::string out_dir;
};

int cmd_eval(const EvalOptions& opt) {
    if (opt.checkpoint.empty() == opt.constellation.empty())
        throw config_error("eval needs exactly one of --checkpoint or --constellation");
    const ChannelFamily family = channel_family_from_string(opt.channel);
    const std::vector<double> snr_grid = parse_snr_list(opt.snrs);
    const StopRule stop{opt.target_errors, opt.max_blocks};
    ensure_dir(opt.out_dir);

    EvalReport report;
    report.seed = opt.seed;
    Rng rng(derive_seed(opt.seed, 0xe7a1));

    const Constellation* points = nullptr;
    TrainedSystem sys;
    Constellation imported;
    if (!opt.checkpoint.empty()) {
        sys = load_checkpoint(opt.checkpoint);
        points = &sys.constellation;
        report.config_hash = config_hash(sys.config);
    } else {
        imported = import_constellation(opt.constellation);
        points = &imported;
        report.config_hash = constellation_hash(imported);
    }

    for (double snr_db : snr_grid) {
        const SnrRecord rec = !opt.checkpoint.empty()
                                  ? bler_system(sys, family, snr_db, stop, rng)
                                  : bler_baseline(*points, family, snr_db, stop, rng);
        report.records.push_back(rec);
    }
    report.e_n = packing_density(*points);
    report.hamming_nn_fraction = gray_fraction(*points);
    if (!opt.checkpoint.empty() &&
        (family == ChannelFamily::awgn || family == ChannelFamily::rbf)) {
        // MI bracket evaluated at the first SNR of the grid
        const ChannelSpec ch = channel_for_snr(family, snr_grid.front(),
                                               points->average_power_per_component());
        const MiBounds mi = mi_bounds(sys, ch, opt.mi_samples, rng);
        report.mi_lower = mi.lower;
        report.mi_upper = mi.upper;
    }

    const std::string prov =
        "config_hash=" + report.config_hash + " seed=" + std::to_string(opt.seed);
    auto bler_os = open_out(fs::path(opt.out_dir) / "bler.csv");
    write_bler_csv(bler_os, report.records, prov);
    auto report_os = open_out(fs::path(opt.out_dir) / "report.json");
    report_os << report_to_json(report).dump(1) << "\n";
    std::cout << "evaluated " << report.records.size() << " SNR points over "
              << to_string(family) << "; wrote " << opt.out_dir << "/bler.csv, report.json\n";
    return exit_ok;
}

struct SweepOptions {
    std::string config_path;
    std::uint64_t n_seeds = 20;
    std::string out_dir;
    double probe_snr_db = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t probe_every = 50;
    std::uint64_t probe_errors = 200;
    unsigned jobs = 0;
};

struct RunResult {
    std::uint64_t seed = 0;
    double e_n = std::numeric_limits<double>::quiet_NaN();
    double final_loss = 0.0;
    std::vector<std::pair<std::size_t, double>> probe_bler;  // (epoch, bler)
};

int cmd_sweep(const SweepOptions& opt) {
    const SystemConfig base = system_config_from_kv(parse_config_file(opt.config_path));
    if (opt.n_seeds == 0) throw config_error("sweep needs --seeds >= 1");
    ensure_dir(opt.out_dir);

    double probe_snr = opt.probe_snr_db;
    if (!std::isfinite(probe_snr))
        probe_snr = base.channel.family == ChannelFamily::rbf ? 16.0 : 6.0;

    std::vector<RunResult> results(opt.n_seeds);
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t r = next.fetch_add(1);
            if (r >= opt.n_seeds) return;
            SystemConfig config = base;
            config.seed = base.seed + r;

            RunResult& res = results[r];
            res.seed = config.seed;
            const StopRule probe_stop{opt.probe_errors, 200'000};
            EpochCallback probe = [&](std::size_t epoch, const System& sys) {
                if (opt.probe_every == 0) return;
                if ((epoch + 1) % opt.probe_every != 0 && epoch + 1 != config.epochs) return;
                Rng probe_rng(derive_seed(config.seed, 0xb1e5 + epoch));
                const SnrRecord rec =
                    bler_system_snapshot(sys, config.channel.family, probe_snr, probe_stop, probe_rng);
                res.probe_bler.emplace_back(epoch + 1, rec.bler);
            };

            const TrainedSystem sys = train(config, probe);
            res.final_loss = sys.loss_history.empty() ? 0.0 : sys.loss_history.back().total;
            try {
                res.e_n = packing_density(sys.constellation);
            } catch (const numeric_error&) {
                res.e_n = std::numeric_limits<double>::infinity();  // collapsed constellation
            }

            char run_name[16];
            std::snprintf(run_name, sizeof run_name, "run_%03zu", r);
            const fs::path run_dir = fs::path(opt.out_dir) / run_name;
            {
                std::lock_guard<std::mutex> lock(io_mutex);
                ensure_dir(run_dir.string());
            }
            write_trained_outputs(run_dir, sys);
        }
    };

    unsigned jobs = opt.jobs ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(opt.n_seeds));
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    const std::string prov = provenance_line(base) + " seeds=" + std::to_string(opt.n_seeds);

    // per-run E_n plus quantiles recomputable from the rows
    std::vector<double> en_sorted;
    for (const auto& r : results) en_sorted.push_back(r.e_n);
    std::sort(en_sorted.begin(), en_sorted.end());
    auto quantile = [&en_sorted](double q) {
        const double pos = q * static_cast<double>(en_sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, en_sorted.size() - 1);
        return en_sorted[lo] + (pos - static_cast<double>(lo)) * (en_sorted[hi] - en_sorted[lo]);
    };
    {
        auto os = open_out(fs::path(opt.out_dir) / "aggregate_en.csv");
        os << "# " << prov << "\n";
        os.precision(12);
        os << "# en_q10=" << quantile(0.10) << " en_q50=" << quantile(0.50)
           << " en_q90=" << quantile(0.90) << "\n";
        os << "run,seed,e_n,final_loss\n";
        for (std::size_t r = 0; r < results.size(); ++r)
            os << r << "," << results[r].seed << "," << results[r].e_n << ","
               << results[r].final_loss << "\n";
    }
    {
        auto os = open_out(fs::path(opt.out_dir) / "bler_evolution.csv");
        os << "# " << prov << " probe_snr_db=" << probe_snr << "\n";
        os << "run,epoch,bler\n";
        os.precision(12);
        for (std::size_t r = 0; r < results.size(); ++r)
            for (const auto& [epoch, bler] : results[r].probe_bler)
                os << r << "," << epoch << "," << bler << "\n";
    }
    std::cout << "swept " << opt.n_seeds << " seeds; wrote " << opt.out_dir
              << "/run_*/, aggregate_en.csv, bler_evolution.csv\n";
    return exit_ok;
}

int cmd_baseline(const std::string& kind, std::size_t M, std::size_t m, const std::string& out_dir) {
    if (kind != "qam") throw config_error("unknown baseline kind '" + kind + "' (supported: qam)");
    if (m % 2 != 0 || m == 0) throw config_error("baseline: m must be even and >= 2");
    const std::size_t uses = m / 2;
    const std::size_t d = bits_per_symbol(M);
    if ((std::size_t{1} << d) != M) throw config_error("baseline: M must be a power of 2");
    if (d % uses != 0)
        throw config_error("baseline: bits per symbol must divide evenly across channel uses");
    const std::size_t bits_per_use = d / uses;

    const Constellation c = qam_constellation(bits_per_use, uses);
    ensure_dir(out_dir);
    const std::string prov = "kind=qam M=" + std::to_string(M) + " m=" + std::to_string(m) +
                             " config_hash=" + constellation_hash(c) + " seed=0";
    write_constellation_csv((fs::path(out_dir) / "constellation.csv").string(), c, prov);
    std::cout << "wrote " << out_dir << "/constellation.csv (" << c.size() << " points, dim "
              << c.dim << ")\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"End-to-end communication system training and evaluation"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* train_cmd = app.add_subcommand("train", "Train one system from a config file");
    train_cmd->add_option("--config", config_path, "key = value config file")->required();
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    EvalOptions eval_opt;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or constellation over a channel");
    eval_cmd->add_option("--checkpoint", eval_opt.checkpoint, "trained checkpoint.json");
    eval_cmd->add_option("--constellation", eval_opt.constellation, "constellation CSV (ML detection)");
    eval_cmd->add_option("--channel", eval_opt.channel, "awgn | rbf | laplace | cauchy");
    eval_cmd->add_option("--snrs", eval_opt.snrs, "comma-separated SNR grid in dB");
    eval_cmd->add_option("--seed", eval_opt.seed, "simulation seed");
    eval_cmd->add_option("--target-errors", eval_opt.target_errors, "stop after this many block errors");
    eval_cmd->add_option("--max-blocks", eval_opt.max_blocks, "hard cap on simulated blocks");
    eval_cmd->add_option("--mi-samples", eval_opt.mi_samples, "samples for the MI lower bound");
    eval_cmd->add_option("--out", eval_opt.out_dir, "output directory")->required();

    SweepOptions sweep_opt;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train many seeds and aggregate metrics");
    sweep_cmd->add_option("--config", sweep_opt.config_path, "key = value config file")->required();
    sweep_cmd->add_option("--seeds", sweep_opt.n_seeds, "number of seeded runs")->required();
    sweep_cmd->add_option("--out", sweep_opt.out_dir, "output directory")->required();
    sweep_cmd->add_option("--probe-snr", sweep_opt.probe_snr_db,
                          "BLER-evolution probe SNR in dB (default 6 awgn, 16 rbf)");
    sweep_cmd->add_option("--probe-every", sweep_opt.probe_every, "probe period in epochs (0 = off)");
    sweep_cmd->add_option("--probe-errors", sweep_opt.probe_errors, "target errors per probe");
    sweep_cmd->add_option("--jobs", sweep_opt.jobs, "parallel runs (default: hardware threads)");

    std::string baseline_kind = "qam";
    std::size_t baseline_M = 4, baseline_m = 2;
    auto* baseline_cmd = app.add_subcommand("baseline", "Emit a classical baseline constellation");
    baseline_cmd->add_option("--kind", baseline_kind, "baseline kind (qam)");
    baseline_cmd->add_option("--M", baseline_M, "symbol count")->required();
    baseline_cmd->add_option("--m", baseline_m, "channel dimension (even)")->required();
    baseline_cmd->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(eval_opt);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt);
        if (baseline_cmd->parsed()) return cmd_baseline(baseline_kind, baseline_M, baseline_m, out_dir);
        return exit_config;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const contract_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    }
}
