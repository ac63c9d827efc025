#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "vicomm/vicomm.hpp"

using namespace vicomm;
namespace fs = std::filesystem;

namespace {

ConfigKv parse_text(const std::string& text) {
    std::istringstream is(text);
    return parse_config_text(is, "inline");
}

const std::string base_config =
    "family = awgn\n"
    "M = 4\n"
    "m = 2\n"
    "epochs = 5\n"
    "seed = 9\n";

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("vicomm_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    REQUIRE(is);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

#ifdef VICOMM_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(VICOMM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}
#endif

} // namespace

TEST_CASE("config parsing applies documented defaults") {
    const SystemConfig config = system_config_from_kv(parse_text(base_config));
    CHECK(config.M == 4);
    CHECK(config.m == 2);
    CHECK(config.channel.family == ChannelFamily::awgn);
    CHECK(config.objective.kl_family == KlFamily::awgn);
    CHECK(config.adam.lr == 0.01);
    CHECK(config.adam.beta1 == 0.99);
    CHECK(config.adam.beta2 == 0.999);
    CHECK(config.objective.sigma_0 == 1.0);         // sigma0_2 = 1.0
    CHECK(config.objective.sigma_n2 == 0.1);
    CHECK(config.encoder_hidden == std::vector<std::size_t>{64, 32, 16});
    CHECK(config.decoder_hidden == std::vector<std::size_t>{16, 32, 64});
}

TEST_CASE("binary representation defaults to the small network") {
    const SystemConfig config = system_config_from_kv(parse_text(
        "family = awgn\nM = 16\nm = 2\nepochs = 5\nseed = 1\nrepresentation = binary\n"));
    CHECK(config.encoder_hidden == std::vector<std::size_t>{32, 16});
    CHECK(config.decoder_hidden == std::vector<std::size_t>{16, 32});
}

TEST_CASE("laplace channel defaults to the smooth upper-bound objective") {
    const SystemConfig config = system_config_from_kv(parse_text(
        "family = laplace\nM = 16\nm = 4\nepochs = 5\nseed = 1\nsigma_n = 0.3\n"));
    CHECK(config.objective.kl_family == KlFamily::laplace_ub);
    CHECK(config.channel.sigma_n == 0.3);
    // the wider impulsive-prior default
    CHECK(config.objective.sigma_0 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
}

TEST_CASE("missing required keys are reported by name") {
    for (const std::string key : {"family", "M", "m", "epochs", "seed"}) {
        std::string text;
        std::istringstream base(base_config);
        std::string line;
        while (std::getline(base, line))
            if (line.rfind(key + " ", 0) != 0) text += line + "\n";
        try {
            system_config_from_kv(parse_text(text));
            FAIL("expected config_error for missing key " << key);
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("'" + key + "'") != std::string::npos);
        }
    }
}

TEST_CASE("unknown and malformed config keys are rejected") {
    CHECK_THROWS_AS(system_config_from_kv(parse_text(base_config + "blah = 2\n")), config_error);
    CHECK_THROWS_AS(system_config_from_kv(parse_text(base_config + "lr = fast\n")), config_error);
    CHECK_THROWS_AS(parse_text("family awgn\n"), config_error);
    CHECK_THROWS_AS(parse_text("M = 4\nM = 8\n"), config_error);
}

TEST_CASE("config hash is stable and sensitive") {
    const SystemConfig a = system_config_from_kv(parse_text(base_config));
    const SystemConfig b = system_config_from_kv(parse_text(base_config));
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    SystemConfig c = a;
    c.seed = 10;
    CHECK(config_hash(c) != config_hash(a));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    SystemConfig config = system_config_from_kv(parse_text(base_config));
    config.epochs = 30;
    const TrainedSystem trained = train(config);

    const fs::path dir = fresh_dir("ckpt");
    const std::string path = (dir / "checkpoint.json").string();
    save_checkpoint(path, trained);
    const TrainedSystem loaded = load_checkpoint(path);

    REQUIRE(loaded.encoder.layers.size() == trained.encoder.layers.size());
    for (std::size_t k = 0; k < trained.encoder.layers.size(); ++k) {
        CHECK(loaded.encoder.layers[k].weights.data == trained.encoder.layers[k].weights.data);
        CHECK(loaded.encoder.layers[k].bias == trained.encoder.layers[k].bias);
    }
    for (std::size_t k = 0; k < trained.decoder.layers.size(); ++k)
        CHECK(loaded.decoder.layers[k].weights.data == trained.decoder.layers[k].weights.data);
    CHECK(config_hash(loaded.config) == config_hash(trained.config));
    // reconstructed constellation matches bit-for-bit
    for (std::size_t i = 0; i < trained.constellation.size(); ++i)
        CHECK(loaded.constellation.points[i] == trained.constellation.points[i]);

    // saving the loaded system reproduces the identical file
    const std::string path2 = (dir / "checkpoint2.json").string();
    save_checkpoint(path2, loaded);
    CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("corrupt checkpoints are rejected") {
    const fs::path dir = fresh_dir("ckpt_bad");
    {
        std::ofstream os(dir / "bad.json");
        os << "{\"format\": \"other\"}\n";
    }
    CHECK_THROWS_AS(load_checkpoint((dir / "bad.json").string()), config_error);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.json").string()), config_error);
}

TEST_CASE("loss history CSV embeds provenance") {
    std::vector<LossBreakdown> history{{1.0, 0.5, 1.5}, {0.8, 0.4, 1.2}};
    std::ostringstream os;
    write_loss_history_csv(os, history, "config_hash=abc seed=9");
    const std::string text = os.str();
    CHECK(text.find("# config_hash=abc seed=9") == 0);
    CHECK(text.find("epoch,recon,kl,total") != std::string::npos);
    CHECK(text.find("1,0.8,0.4,1.2") != std::string::npos);
}

TEST_CASE("eval report JSON carries records and provenance") {
    EvalReport report;
    report.records.push_back({6.0, 1000, 50, 0.05, 0.02, 0.003});
    report.seed = 7;
    report.config_hash = "deadbeef00000000";
    report.e_n = 0.5;
    const auto j = report_to_json(report);
    CHECK(j["records"].size() == 1);
    CHECK(j["records"][0]["snr_db"] == 6.0);
    CHECK(j["seed"] == 7);
    CHECK(j["config_hash"] == "deadbeef00000000");
    CHECK(j["e_n"] == 0.5);
    CHECK(j["mi_lower"].is_null());
}

#ifdef VICOMM_CLI_PATH

TEST_CASE("cli: train is deterministic and writes its artifacts") {
    const fs::path dir = fresh_dir("cli_train");
    {
        std::ofstream os(dir / "config.txt");
        os << "family = awgn\nM = 4\nm = 2\nepochs = 20\nseed = 4\n";
    }
    const std::string cfg = (dir / "config.txt").string();
    REQUIRE(run_cli("train --config " + cfg + " --out " + (dir / "a").string()) == 0);
    REQUIRE(run_cli("train --config " + cfg + " --out " + (dir / "b").string()) == 0);

    for (const char* name : {"checkpoint.json", "loss_history.csv", "constellation.csv"}) {
        CAPTURE(name);
        CHECK(fs::exists(dir / "a" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
}

TEST_CASE("cli: missing config key exits with code 2") {
    const fs::path dir = fresh_dir("cli_badcfg");
    {
        std::ofstream os(dir / "config.txt");
        os << "family = awgn\nM = 4\nm = 2\nepochs = 20\n";  // no seed
    }
    CHECK(run_cli("train --config " + (dir / "config.txt").string() + " --out " +
                  (dir / "out").string()) == 2);
}

TEST_CASE("cli: eval on a QPSK fixture emits one row per SNR") {
    const fs::path dir = fresh_dir("cli_eval");
    REQUIRE(run_cli("baseline --kind qam --M 4 --m 2 --out " + dir.string()) == 0);
    REQUIRE(run_cli("eval --constellation " + (dir / "constellation.csv").string() +
                    " --channel awgn --snrs 0,4,8 --seed 3 --target-errors 100 --out " +
                    (dir / "ev").string()) == 0);
    const std::string csv = slurp(dir / "ev" / "bler.csv");
    std::size_t rows = 0;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#' && line.rfind("snr_db", 0) != 0) ++rows;
    CHECK(rows == 3);
    CHECK(fs::exists(dir / "ev" / "report.json"));

    // rerun with the same seed reproduces the CSV byte-for-byte
    REQUIRE(run_cli("eval --constellation " + (dir / "constellation.csv").string() +
                    " --channel awgn --snrs 0,4,8 --seed 3 --target-errors 100 --out " +
                    (dir / "ev2").string()) == 0);
    CHECK(slurp(dir / "ev" / "bler.csv") == slurp(dir / "ev2" / "bler.csv"));
}

TEST_CASE("cli: unknown channel tag exits with code 2") {
    const fs::path dir = fresh_dir("cli_badchan");
    REQUIRE(run_cli("baseline --kind qam --M 4 --m 2 --out " + dir.string()) == 0);
    CHECK(run_cli("eval --constellation " + (dir / "constellation.csv").string() +
                  " --channel fancy --snrs 0 --out " + (dir / "ev").string()) == 2);
}

TEST_CASE("cli: sweep produces run dirs and recomputable aggregates") {
    const fs::path dir = fresh_dir("cli_sweep");
    {
        std::ofstream os(dir / "config.txt");
        os << "family = awgn\nM = 4\nm = 2\nepochs = 30\nseed = 100\n";
    }
    REQUIRE(run_cli("sweep --config " + (dir / "config.txt").string() +
                    " --seeds 2 --probe-every 15 --probe-errors 50 --out " +
                    (dir / "sw").string()) == 0);
    CHECK(fs::exists(dir / "sw" / "run_000" / "checkpoint.json"));
    CHECK(fs::exists(dir / "sw" / "run_001" / "checkpoint.json"));
    CHECK(fs::exists(dir / "sw" / "bler_evolution.csv"));

    // embedded quantiles must be recomputable from the per-run rows
    const std::string agg = slurp(dir / "sw" / "aggregate_en.csv");
    std::istringstream is(agg);
    std::string line, quantile_line;
    std::vector<double> en_values;
    while (std::getline(is, line)) {
        if (line.rfind("# en_q10=", 0) == 0) quantile_line = line;
        if (line.empty() || line[0] == '#' || line.rfind("run,", 0) == 0) continue;
        const auto last_comma = line.rfind(',');
        const auto second_last = line.rfind(',', last_comma - 1);
        en_values.push_back(std::stod(line.substr(second_last + 1, last_comma - second_last - 1)));
    }
    REQUIRE(en_values.size() == 2);
    REQUIRE(!quantile_line.empty());
    const double q50 = std::stod(quantile_line.substr(quantile_line.find("en_q50=") + 7));
    std::sort(en_values.begin(), en_values.end());
    CHECK(q50 == doctest::Approx((en_values[0] + en_values[1]) / 2.0).epsilon(1e-9));
}

#endif  // VICOMM_CLI_PATH
