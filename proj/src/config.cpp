#include "nearfield/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace nearfield {

using nlohmann::json;

namespace {

template <typename V>
void read(const json& j, const char* key, V& field)
{
    if (j.contains(key)) {
        try {
            j.at(key).get_to(field);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config key '") + key + "': " + e.what());
        }
    }
}

// Every key of `given` must also appear in `reference`; recurse into objects.
void check_keys(const json& given, const json& reference, const std::string& prefix)
{
    if (!given.is_object()) {
        throw ConfigError("config section '" + prefix + "' must be an object");
    }
    for (const auto& [key, value] : given.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!reference.contains(key)) {
            throw ConfigError("unknown config key: " + path);
        }
        if (reference.at(key).is_object()) {
            check_keys(value, reference.at(key), path);
        }
    }
}

const json& section(const json& j, const char* key)
{
    static const json empty = json::object();
    return j.contains(key) ? j.at(key) : empty;
}

}  // namespace

json system_to_json(const SystemConfig& s)
{
    return json{{"n_bs", s.n_bs},
                {"k_sub", s.k_sub},
                {"f_c", s.f_c},
                {"f_b", s.f_b},
                {"spacing_wavelengths", s.d / s.wavelength()},
                {"r_min", s.r_min},
                {"r_max", s.r_max},
                {"phi_max", s.phi_max},
                {"path_mean", s.path_mean}};
}

SystemConfig system_from_json(const json& j, const SystemConfig& base)
{
    check_keys(j, system_to_json(base), "system");
    SystemConfig s = base;
    double spacing = base.d / base.wavelength();
    read(j, "n_bs", s.n_bs);
    read(j, "k_sub", s.k_sub);
    read(j, "f_c", s.f_c);
    read(j, "f_b", s.f_b);
    read(j, "spacing_wavelengths", spacing);
    read(j, "r_min", s.r_min);
    read(j, "r_max", s.r_max);
    read(j, "phi_max", s.phi_max);
    read(j, "path_mean", s.path_mean);
    s.d = spacing * s.wavelength();
    return s;
}

void AppConfig::validate() const
{
    try {
        system.validate();
        model.validate_for(system.n_bs);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    auto require = [](bool ok, const std::string& what) {
        if (!ok) {
            throw ConfigError(what);
        }
    };
    require(threads >= 0, "threads must be non-negative");
    require(precision == "single" || precision == "double", "precision must be single or double");
    require(n_rf >= 1 && t_slots >= 0, "measurement.n_rf must be positive, t_slots non-negative");
    require(effective_t_slots() * n_rf >= system.n_bs, "measurement: T·n_rf must be at least n_bs for LS");
    require(dataset.count >= 1 && !dataset.snr_db.empty(), "dataset.count must be positive and dataset.snr_db non-empty");
    require(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0, "dataset.train_fraction must lie in (0, 1)");
    require(train.epochs >= 1 && train.batch_size >= 1, "train.epochs and train.batch_size must be positive");
    require(train.lr0 > 0.0 && train.weight_decay >= 0.0, "train.lr0 must be positive, weight_decay non-negative");
    require(network == "jssanet" || network == "jsanet", "train.network must be jssanet or jsanet");
    static const std::set<std::string> known{"ls", "lmmse", "somp", "jssanet", "jsanet"};
    for (const auto& e : eval.estimators) {
        require(known.count(e) > 0, "unknown estimator: " + e);
    }
    require(!eval.snr_db.empty(), "eval.snr_db must not be empty");
    require(eval.repetitions >= 1 && eval.stat_samples >= 1, "eval.repetitions and eval.stat_samples must be positive");
    require(eval.distance_edges.empty() || eval.distance_edges.size() >= 2, "eval.distance_edges needs two or more edges");
    for (std::size_t i = 1; i < eval.distance_edges.size(); ++i) {
        require(eval.distance_edges[i] > eval.distance_edges[i - 1], "eval.distance_edges must increase");
    }
    require(eval.somp_angle_oversampling >= 1 && eval.somp_rings >= 1 && eval.somp_max_atoms >= 1,
            "eval.somp_* must be positive");
    for (int n : theory.n_bs_list) {
        require(n >= 2 && n % 2 == 0, "theory.n_bs_list entries must be even");
    }
}

AppConfig preset_config(const std::string& name)
{
    AppConfig c;
    c.preset = name;
    if (name == "desk") {
        return c;
    }
    if (name == "full") {
        c.system = make_system_config(256, 32);
        c.dataset.count = 20000;
        c.model = jssanet::ModelConfig::full();
        c.train.epochs = 100;
        c.train.batch_size = 32;
        c.train.lr0 = 1e-3;
        return c;
    }
    throw ConfigError("unknown preset: " + name + " (expected desk or full)");
}

json config_to_json(const AppConfig& c)
{
    json model;
    jssanet::to_json(model, c.model);
    return json{
        {"preset", c.preset},
        {"seed", c.seed},
        {"threads", c.threads},
        {"precision", c.precision},
        {"system", system_to_json(c.system)},
        {"measurement", {{"n_rf", c.n_rf}, {"t_slots", c.t_slots}}},
        {"dataset",
         {{"count", c.dataset.count}, {"snr_db", c.dataset.snr_db}, {"train_fraction", c.dataset.train_fraction}}},
        {"model", model},
        {"train",
         {{"network", c.network},
          {"data_dir", c.data_dir},
          {"snr_db", c.train_snr_db},
          {"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"lr0", c.train.lr0},
          {"weight_decay", c.train.weight_decay},
          {"beta1", c.train.beta1},
          {"beta2", c.train.beta2},
          {"eps", c.train.eps}}},
        {"theory",
         {{"n_bs_list", c.theory.n_bs_list},
          {"m_list", c.theory.m_list},
          {"similarity_theta", c.theory.similarity_theta},
          {"similarity_r", c.theory.similarity_r},
          {"beam_n_bs", c.theory.beam_n_bs},
          {"beam_phi_deg", c.theory.beam_phi_deg},
          {"beam_r", c.theory.beam_r},
          {"beam_m_list", c.theory.beam_m_list}}},
        {"eval",
         {{"estimators", c.eval.estimators},
          {"snr_db", c.eval.snr_db},
          {"distance_edges", c.eval.distance_edges},
          {"repetitions", c.eval.repetitions},
          {"stat_samples", c.eval.stat_samples},
          {"somp_angle_oversampling", c.eval.somp_angle_oversampling},
          {"somp_rings", c.eval.somp_rings},
          {"somp_max_atoms", c.eval.somp_max_atoms},
          {"jssanet_checkpoint", c.eval.jssanet_checkpoint},
          {"jsanet_checkpoint", c.eval.jsanet_checkpoint},
          {"timing", c.eval.timing}}},
    };
}

AppConfig config_from_json(const json& j, const AppConfig& base)
{
    check_keys(j, config_to_json(base), "");
    AppConfig c = base;
    read(j, "preset", c.preset);
    read(j, "seed", c.seed);
    read(j, "threads", c.threads);
    read(j, "precision", c.precision);
    if (j.contains("system")) {
        c.system = system_from_json(j.at("system"), base.system);
    }
    const json& m = section(j, "measurement");
    read(m, "n_rf", c.n_rf);
    read(m, "t_slots", c.t_slots);
    const json& d = section(j, "dataset");
    read(d, "count", c.dataset.count);
    read(d, "snr_db", c.dataset.snr_db);
    read(d, "train_fraction", c.dataset.train_fraction);
    if (j.contains("model")) {
        try {
            jssanet::from_json(j.at("model"), c.model);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
    }
    const json& t = section(j, "train");
    read(t, "network", c.network);
    read(t, "data_dir", c.data_dir);
    read(t, "snr_db", c.train_snr_db);
    read(t, "epochs", c.train.epochs);
    read(t, "batch_size", c.train.batch_size);
    read(t, "lr0", c.train.lr0);
    read(t, "weight_decay", c.train.weight_decay);
    read(t, "beta1", c.train.beta1);
    read(t, "beta2", c.train.beta2);
    read(t, "eps", c.train.eps);
    const json& th = section(j, "theory");
    read(th, "n_bs_list", c.theory.n_bs_list);
    read(th, "m_list", c.theory.m_list);
    read(th, "similarity_theta", c.theory.similarity_theta);
    read(th, "similarity_r", c.theory.similarity_r);
    read(th, "beam_n_bs", c.theory.beam_n_bs);
    read(th, "beam_phi_deg", c.theory.beam_phi_deg);
    read(th, "beam_r", c.theory.beam_r);
    read(th, "beam_m_list", c.theory.beam_m_list);
    const json& e = section(j, "eval");
    read(e, "estimators", c.eval.estimators);
    read(e, "snr_db", c.eval.snr_db);
    read(e, "distance_edges", c.eval.distance_edges);
    read(e, "repetitions", c.eval.repetitions);
    read(e, "stat_samples", c.eval.stat_samples);
    read(e, "somp_angle_oversampling", c.eval.somp_angle_oversampling);
    read(e, "somp_rings", c.eval.somp_rings);
    read(e, "somp_max_atoms", c.eval.somp_max_atoms);
    read(e, "jssanet_checkpoint", c.eval.jssanet_checkpoint);
    read(e, "jsanet_checkpoint", c.eval.jsanet_checkpoint);
    read(e, "timing", c.eval.timing);
    return c;
}

json parse_override(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        value = text;
    }
    json root = json::object();
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ConfigError("override has an empty key segment: " + assignment);
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
    return root;
}

AppConfig resolve_config(const json& file, const std::vector<std::string>& overrides)
{
    if (!file.is_null() && !file.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    json patch = file.is_null() ? json::object() : file;
    for (const auto& o : overrides) {
        patch.merge_patch(parse_override(o));
    }
    std::string preset = "desk";
    if (patch.contains("preset")) {
        if (!patch.at("preset").is_string()) {
            throw ConfigError("preset must be a string");
        }
        preset = patch.at("preset").get<std::string>();
    }
    AppConfig c = config_from_json(patch, preset_config(preset));
    c.validate();
    return c;
}

std::string config_hash(const json& j)
{
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nearfield
