#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vicomm/eval.hpp"
#include "vicomm/system.hpp"

namespace vicomm {

// ---------------------------------------------------------------------------
// Flat key=value config files
//
// Required keys: family, M, m, epochs, seed. Everything else has a default
// documented in default_config_kv(). '#' starts a comment.
// ---------------------------------------------------------------------------

using ConfigKv = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline ConfigKv parse_config_text(std::istream& is, const std::string& source_name = "<config>") {
    ConfigKv kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(source_name + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error(source_name + ":" + std::to_string(line_no) + ": empty key or value");
        if (kv.count(key))
            throw config_error(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

inline ConfigKv parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file '" + path + "'");
    return parse_config_text(is, path);
}

namespace detail {

inline double kv_double(const ConfigKv& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': bad number '" + s + "'");
    }
}

inline std::uint64_t kv_u64(const ConfigKv& kv, const std::string& key) {
    const std::string& s = kv.at(key);
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': bad integer '" + s + "'");
    }
}

inline std::vector<std::size_t> kv_size_list(const ConfigKv& kv, const std::string& key) {
    std::vector<std::size_t> out;
    std::stringstream ss(kv.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error("config key '" + key + "': empty list entry");
        ConfigKv one{{key, item}};
        out.push_back(static_cast<std::size_t>(kv_u64(one, key)));
    }
    if (out.empty()) throw config_error("config key '" + key + "': empty list");
    return out;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace detail

/// Defaults applied on top of a parsed config. kl_family defaults to the
/// family matching the channel (Laplace uses the smooth upper bound);
/// sigma0_2 is the squared prior scale for all families with a scale prior.
inline ConfigKv default_config_kv(const ConfigKv& given) {
    ConfigKv kv = given;
    auto put = [&kv](const std::string& k, const std::string& v) {
        if (!kv.count(k)) kv[k] = v;
    };
    put("representation", "one_hot");
    if (!kv.count("kl_family") && kv.count("family")) {
        const std::string& fam = kv.at("family");
        if (fam == "laplace")
            kv["kl_family"] = "laplace_ub";
        else
            kv["kl_family"] = fam;
    }
    // impulsive-noise priors need more dispersion or the power penalty
    // collapses the constellation; mirrors the gamma0 = 5 guidance
    if (!kv.count("sigma0_2") && kv.count("family") && kv.at("family") == "laplace")
        kv["sigma0_2"] = "5.0";
    put("sigma0_2", "1.0");
    put("sigma_n2", "0.1");
    if (!kv.count("sigma_n")) {
        // Laplace scale matched to sigma_n2 by variance: 2 sigma_n^2 = sigma_n2
        kv["sigma_n"] = detail::format_double(std::sqrt(detail::kv_double(kv, "sigma_n2") / 2.0));
    }
    put("gamma_n", "0.1");
    put("gamma0", "5.0");
    put("lr", "0.01");
    put("lr_final", "0.001");
    put("beta1", "0.99");
    put("beta2", "0.999");
    put("epsilon", "1e-8");
    put("noise_draws", "32");
    const bool binary = kv.count("representation") && kv.at("representation") == "binary";
    put("encoder_hidden", binary ? "32,16" : "64,32,16");
    put("decoder_hidden", binary ? "16,32" : "16,32,64");
    return kv;
}

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "family", "M", "m", "epochs", "seed", "representation", "kl_family",
        "sigma0_2", "sigma_n2", "sigma_n", "gamma_n", "gamma0",
        "lr", "lr_final", "beta1", "beta2", "epsilon", "noise_draws",
        "encoder_hidden", "decoder_hidden"};
    return keys;
}

inline SystemConfig system_config_from_kv(const ConfigKv& given) {
    for (const auto& [key, value] : given) {
        (void)value;
        bool known = false;
        for (const auto& k : known_config_keys())
            if (k == key) known = true;
        if (!known) throw config_error("unknown config key '" + key + "'");
    }
    for (const char* req : {"family", "M", "m", "epochs", "seed"})
        if (!given.count(req)) throw config_error(std::string("missing required config key '") + req + "'");

    const ConfigKv kv = default_config_kv(given);
    SystemConfig config;
    config.M = static_cast<std::size_t>(detail::kv_u64(kv, "M"));
    config.m = static_cast<std::size_t>(detail::kv_u64(kv, "m"));
    config.epochs = static_cast<std::size_t>(detail::kv_u64(kv, "epochs"));
    config.seed = detail::kv_u64(kv, "seed");
    config.representation = representation_from_string(kv.at("representation"));
    config.encoder_hidden = detail::kv_size_list(kv, "encoder_hidden");
    config.decoder_hidden = detail::kv_size_list(kv, "decoder_hidden");

    config.adam.lr = detail::kv_double(kv, "lr");
    config.adam.beta1 = detail::kv_double(kv, "beta1");
    config.adam.beta2 = detail::kv_double(kv, "beta2");
    config.adam.epsilon = detail::kv_double(kv, "epsilon");
    config.lr_final = detail::kv_double(kv, "lr_final");
    config.noise_draws = static_cast<std::size_t>(detail::kv_u64(kv, "noise_draws"));

    const ChannelFamily fam = channel_family_from_string(kv.at("family"));
    config.channel.family = fam;
    config.channel.sigma_n2 = detail::kv_double(kv, "sigma_n2");
    config.channel.sigma_n = detail::kv_double(kv, "sigma_n");
    config.channel.gamma_n = detail::kv_double(kv, "gamma_n");

    ObjectiveSpec& obj = config.objective;
    obj.representation = config.representation;
    obj.kl_family = kl_family_from_string(kv.at("kl_family"));
    const double sigma0_2 = detail::kv_double(kv, "sigma0_2");
    if (sigma0_2 <= 0.0) throw config_error("config key 'sigma0_2' must be > 0");
    obj.sigma_0 = std::sqrt(sigma0_2);
    obj.gamma_0 = detail::kv_double(kv, "gamma0");
    obj.sigma_n2 = config.channel.sigma_n2;
    obj.sigma_n = config.channel.sigma_n;
    obj.gamma_n = config.channel.gamma_n;

    config.validate();
    return config;
}

inline std::string size_list_string(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

/// Fully resolved, canonical key set; the basis of the config hash.
inline ConfigKv to_kv(const SystemConfig& config) {
    ConfigKv kv;
    kv["family"] = to_string(config.channel.family);
    kv["M"] = std::to_string(config.M);
    kv["m"] = std::to_string(config.m);
    kv["epochs"] = std::to_string(config.epochs);
    kv["seed"] = std::to_string(config.seed);
    kv["representation"] = to_string(config.representation);
    kv["kl_family"] = to_string(config.objective.kl_family);
    kv["sigma0_2"] = detail::format_double(config.objective.sigma_0 * config.objective.sigma_0);
    kv["sigma_n2"] = detail::format_double(config.channel.sigma_n2);
    kv["sigma_n"] = detail::format_double(config.channel.sigma_n);
    kv["gamma_n"] = detail::format_double(config.channel.gamma_n);
    kv["gamma0"] = detail::format_double(config.objective.gamma_0);
    kv["lr"] = detail::format_double(config.adam.lr);
    kv["lr_final"] = detail::format_double(config.lr_final);
    kv["beta1"] = detail::format_double(config.adam.beta1);
    kv["beta2"] = detail::format_double(config.adam.beta2);
    kv["epsilon"] = detail::format_double(config.adam.epsilon);
    kv["noise_draws"] = std::to_string(config.noise_draws);
    kv["encoder_hidden"] = size_list_string(config.encoder_hidden);
    kv["decoder_hidden"] = size_list_string(config.decoder_hidden);
    return kv;
}

/// FNV-1a over the sorted canonical key=value lines, as a 16-hex-digit string.
inline std::string config_hash(const SystemConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [k, v] : to_kv(config)) {  // std::map iterates sorted
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string provenance_line(const SystemConfig& config) {
    return "config_hash=" + config_hash(config) + " seed=" + std::to_string(config.seed);
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned JSON dump of config + all layer matrices.
// nlohmann emits shortest round-trip doubles, so save/load is bit-exact.
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json model_to_json(const MLPModel& model) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : model.layers) {
        layers.push_back({{"activation", to_string(layer.activation)},
                          {"rows", layer.weights.rows},
                          {"cols", layer.weights.cols},
                          {"weights", layer.weights.data},
                          {"bias", layer.bias}});
    }
    return {{"layers", layers}};
}

inline MLPModel model_from_json(const nlohmann::json& j) {
    MLPModel model;
    for (const auto& lj : j.at("layers")) {
        DenseLayer layer;
        layer.activation = activation_from_string(lj.at("activation").get<std::string>());
        layer.weights.rows = lj.at("rows").get<std::size_t>();
        layer.weights.cols = lj.at("cols").get<std::size_t>();
        layer.weights.data = lj.at("weights").get<std::vector<double>>();
        layer.bias = lj.at("bias").get<std::vector<double>>();
        if (layer.weights.data.size() != layer.weights.rows * layer.weights.cols)
            throw config_error("checkpoint: weight matrix size mismatch");
        for (double v : layer.weights.data)
            if (!std::isfinite(v)) throw config_error("checkpoint: non-finite weight");
        for (double v : layer.bias)
            if (!std::isfinite(v)) throw config_error("checkpoint: non-finite bias");
        model.layers.push_back(std::move(layer));
    }
    validate_model(model);
    return model;
}

} // namespace detail

inline constexpr int checkpoint_version = 1;

inline nlohmann::json checkpoint_to_json(const TrainedSystem& sys) {
    nlohmann::json j;
    j["format"] = "vicomm-checkpoint";
    j["version"] = checkpoint_version;
    j["config"] = to_kv(sys.config);
    j["config_hash"] = config_hash(sys.config);
    j["encoder"] = detail::model_to_json(sys.encoder);
    j["decoder"] = detail::model_to_json(sys.decoder);
    return j;
}

inline TrainedSystem checkpoint_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "vicomm-checkpoint")
        throw config_error("checkpoint: unrecognized format tag");
    if (j.value("version", 0) != checkpoint_version)
        throw config_error("checkpoint: unsupported version");
    TrainedSystem sys;
    ConfigKv kv = j.at("config").get<ConfigKv>();
    sys.config = system_config_from_kv(kv);
    sys.encoder = detail::model_from_json(j.at("encoder"));
    sys.decoder = detail::model_from_json(j.at("decoder"));
    sys.constellation = encode_all(sys.encoder, sys.config);
    return sys;
}

inline void save_checkpoint(const std::string& path, const TrainedSystem& sys) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot open '" + path + "' for writing");
    os << checkpoint_to_json(sys).dump(1) << "\n";
}

inline TrainedSystem load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("checkpoint '" + path + "': " + e.what());
    }
    return checkpoint_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV / JSON outputs
// ---------------------------------------------------------------------------

inline void write_loss_history_csv(std::ostream& os, const std::vector<LossBreakdown>& history,
                                   const std::string& provenance) {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "epoch,recon,kl,total\n";
    os.precision(12);
    for (std::size_t e = 0; e < history.size(); ++e)
        os << e << "," << history[e].recon << "," << history[e].kl << "," << history[e].total << "\n";
}

inline nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : report.records)
        recs.push_back({{"snr_db", r.snr_db},
                        {"blocks", r.blocks},
                        {"errors", r.errors},
                        {"bler", r.bler},
                        {"ber", r.ber},
                        {"stderr", r.std_err}});
    nlohmann::json j;
    j["records"] = recs;
    auto put_optional = [&j](const char* key, double v) {
        if (std::isfinite(v))
            j[key] = v;
        else
            j[key] = nullptr;
    };
    put_optional("e_n", report.e_n);
    put_optional("hamming_nn_fraction", report.hamming_nn_fraction);
    put_optional("mi_lower", report.mi_lower);
    put_optional("mi_upper", report.mi_upper);
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    return j;
}

} // namespace vicomm
