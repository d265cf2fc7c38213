#include "nearfield/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <memory>

#include <CLI11.hpp>

#include "nearfield/binary_io.hpp"
#include "nearfield/config.hpp"
#include "nearfield/dataset.hpp"
#include "nearfield/eval_harness.hpp"
#include "nearfield/jssanet/checkpoint.hpp"
#include "nearfield/parallel.hpp"
#include "nearfield/partition_theory.hpp"

namespace nearfield {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamModelInit = 6;
constexpr std::uint64_t kStreamShuffle = 7;

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Invocation {
    AppConfig config;
    fs::path out_dir;
};

Invocation prepare(const std::string& config_path, const std::vector<std::string>& overrides, const fs::path& out_dir,
                   std::ostream& out)
{
    json file;
    if (!config_path.empty()) {
        try {
            file = json::parse(read_text_file(config_path));
        } catch (const json::exception& e) {
            throw ConfigError("config file " + config_path + ": " + e.what());
        }
    }
    Invocation inv{resolve_config(file, overrides), out_dir};
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    }
    const std::string echo = config_to_json(inv.config).dump(2) + "\n";
    out << echo;
    write_text_file(out_dir / "config.json", echo);
    set_default_thread_count(inv.config.threads);
    return inv;
}

GeneratorParams generator_params(const AppConfig& c, double snr_db)
{
    GeneratorParams p;
    p.system = c.system;
    p.t_slots = c.effective_t_slots();
    p.n_rf = c.n_rf;
    p.snr_db = snr_db;
    p.seed = c.seed;
    return p;
}

std::size_t train_count(const AppConfig& c)
{
    const auto n = static_cast<std::size_t>(std::floor(c.dataset.count * c.dataset.train_fraction + 1e-9));
    return std::min<std::size_t>(n, static_cast<std::size_t>(c.dataset.count));
}

void cmd_gen_data(const Invocation& inv, std::ostream& out)
{
    const auto& c = inv.config;
    const std::size_t n_train = train_count(c);
    const std::size_t n_test = static_cast<std::size_t>(c.dataset.count) - n_train;
    for (double snr : c.dataset.snr_db) {
        const auto params = generator_params(c, snr);
        write_dataset(inv.out_dir / dataset_file_name("train", snr), generate_dataset(params, 0, n_train));
        write_dataset(inv.out_dir / dataset_file_name("test", snr), generate_dataset(params, n_train, n_test));
        out << "wrote " << n_train << " train / " << n_test << " test records at " << num(snr) << " dB\n";
    }
}

void cmd_theory(const Invocation& inv, std::ostream& out)
{
    const auto& c = inv.config;
    const auto& t = c.theory;
    const double theta_sec = std::sin(c.system.phi_max);

    std::string bounds = "n_bs,min_m_bound,min_m,max_m_bound,max_m,feasible\n";
    for (int n : t.n_bs_list) {
        SystemConfig s = c.system;
        const double spacing = s.d / s.wavelength();
        s.n_bs = n;
        s.d = spacing * s.wavelength();
        const int lo = theorem1_min_m(s);
        const int hi = theorem2_max_m(s, theta_sec);
        bounds += std::to_string(n) + "," + num(theorem1_bound(s)) + "," + std::to_string(lo) + "," +
                  num(theorem2_bound(s, theta_sec)) + "," + std::to_string(hi) + "," + (lo <= hi ? "1" : "0") + "\n";
    }
    write_text_file(inv.out_dir / "bounds.csv", bounds);
    out << bounds;

    std::string sim = "n_bs,M,abs_direct,abs_fresnel\n";
    for (int n : t.n_bs_list) {
        SystemConfig s = c.system;
        s.n_bs = n;
        for (int m : t.m_list) {
            if (m < 1 || n % m != 0) {
                continue;
            }
            const double direct = std::abs(similarity(t.similarity_theta, t.similarity_r, m, s, SimilarityMode::direct));
            const double fres = std::abs(similarity(t.similarity_theta, t.similarity_r, m, s, SimilarityMode::fresnel));
            sim += std::to_string(n) + "," + std::to_string(m) + "," + num(direct) + "," + num(fres) + "\n";
        }
    }
    write_text_file(inv.out_dir / "similarity.csv", sim);

    std::string beams = "M,subchannel,theta_tilde,argmax,peak_power\n";
    SystemConfig s = c.system;
    s.n_bs = t.beam_n_bs;
    const double theta0 = std::sin(t.beam_phi_deg * kPi / 180.0);
    for (int m : t.beam_m_list) {
        const auto plan = make_partition(s.n_bs, m);
        const auto params = piecewise_params(theta0, t.beam_r, plan, s);
        for (int i = 0; i < m; ++i) {
            const auto bp = beam_pattern(params.theta_tilde[i], plan.N);
            beams += std::to_string(m) + "," + std::to_string(i + 1) + "," + num(params.theta_tilde[i]) + "," +
                     std::to_string(bp.argmax) + "," + num(bp.power[bp.argmax]) + "\n";
        }
    }
    write_text_file(inv.out_dir / "beam_pattern.csv", beams);
    out << "wrote bounds.csv, similarity.csv, beam_pattern.csv\n";
}

std::string loss_csv(const std::vector<jssanet::EpochRecord>& history)
{
    std::string s = "epoch,lr,train_loss,test_loss\n";
    for (const auto& r : history) {
        s += std::to_string(r.epoch) + "," + num(r.lr) + "," + num(r.train_loss) + "," + num(r.test_loss) + "\n";
    }
    return s;
}

template <typename T>
void train_with(const Invocation& inv, std::ostream& out)
{
    const auto& c = inv.config;
    const fs::path data_dir = c.data_dir.empty() ? inv.out_dir : fs::path(c.data_dir);
    const Dataset train_data = read_dataset(data_dir / dataset_file_name("train", c.train_snr_db));
    const Dataset test_data = read_dataset(data_dir / dataset_file_name("test", c.train_snr_db));
    if (train_data.n_bs != c.system.n_bs || train_data.k_sub != c.system.k_sub) {
        throw ConfigError("dataset dimensions differ from system.n_bs / system.k_sub");
    }
    jssanet::ModelConfig mc = c.model;
    mc.use_dft = c.network == "jssanet";
    jssanet::Model<T> model(mc, derive_seed(c.seed, kStreamModelInit));
    jssanet::TrainSettings ts = c.train;
    ts.seed = derive_seed(c.seed, kStreamShuffle);
    ts.threads = c.threads;

    const fs::path loss_path = inv.out_dir / ("loss_" + c.network + ".csv");
    std::vector<jssanet::EpochRecord> seen;
    auto on_epoch = [&](const jssanet::EpochRecord& r) {
        seen.push_back(r);
        write_text_file(loss_path, loss_csv(seen));
        out << "epoch " << r.epoch << " lr " << num(r.lr) << " train " << num(r.train_loss) << " test "
            << num(r.test_loss) << "\n";
    };
    try {
        const auto history = jssanet::train(model, to_samples<T>(train_data), to_samples<T>(test_data), ts, on_epoch);
        jssanet::save_checkpoint(inv.out_dir / (c.network + ".json"), model,
                                 {c.seed, static_cast<int>(history.size())});
    } catch (const jssanet::DivergenceError& e) {
        write_text_file(loss_path, loss_csv(e.history()));
        throw;
    }
    out << "wrote " << c.network << ".json and " << loss_path.filename().string() << "\n";
}

template <typename T>
Estimator network_estimator(const std::string& id, const fs::path& manifest)
{
    auto model = std::make_shared<jssanet::Model<T>>(jssanet::load_checkpoint<T>(manifest));
    return make_network_estimator<T>(id, model);
}

void cmd_eval(const Invocation& inv, std::ostream& out)
{
    const auto& c = inv.config;
    const auto wall0 = std::chrono::steady_clock::now();
    std::vector<Estimator> estimators;
    for (const auto& id : c.eval.estimators) {
        if (id == "ls") {
            estimators.push_back(make_ls_estimator());
        } else if (id == "lmmse") {
            estimators.push_back(make_lmmse_estimator(c.eval.stat_samples));
        } else if (id == "somp") {
            auto dict = std::make_shared<const PolarDictionary>(
                build_polar_dictionary(c.system, c.eval.somp_angle_oversampling, c.eval.somp_rings));
            estimators.push_back(make_somp_estimator(dict, c.eval.somp_max_atoms));
        } else {
            const std::string& configured = id == "jssanet" ? c.eval.jssanet_checkpoint : c.eval.jsanet_checkpoint;
            const fs::path manifest = configured.empty() ? inv.out_dir / (id + ".json") : fs::path(configured);
            if (!fs::exists(manifest)) {
                throw IoError("missing checkpoint for " + id + ": " + manifest.string());
            }
            estimators.push_back(c.precision == "double" ? network_estimator<double>(id, manifest)
                                                         : network_estimator<float>(id, manifest));
        }
    }
    ExperimentSpec spec;
    spec.system = c.system;
    spec.t_slots = c.effective_t_slots();
    spec.n_rf = c.n_rf;
    spec.snr_db = c.eval.snr_db;
    for (std::size_t i = 1; i < c.eval.distance_edges.size(); ++i) {
        spec.distance_bins.emplace_back(c.eval.distance_edges[i - 1], c.eval.distance_edges[i]);
    }
    spec.repetitions = c.eval.repetitions;
    spec.seed = c.seed;
    spec.timing = c.eval.timing;
    spec.threads = c.threads;
    spec.config = config_to_json(c);
    // Thread count never changes results, so it stays out of the report's config hash.
    spec.config.erase("threads");
    const Report report = run_sweep(spec, estimators);

    write_text_file(inv.out_dir / "report.csv", report_csv(report));
    write_text_file(inv.out_dir / "report.json", report_json(report).dump(2) + "\n");

    json info{{"timestamp_utc", ""},
              {"wall_ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall0).count()}};
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    info["timestamp_utc"] = stamp;
    if (c.eval.timing) {
        json runtimes = json::array();
        for (const auto& r : report.rows) {
            runtimes.push_back({{"estimator", r.estimator},
                                {"snr_db", r.snr_db},
                                {"distance_bin", {r.r_lo, r.r_hi}},
                                {"runtime_ms", r.runtime_ms}});
        }
        info["runtimes"] = runtimes;
    }
    write_text_file(inv.out_dir / "run_info.json", info.dump(2) + "\n");
    out << report_csv(report);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Near-field XL-MIMO channel estimation toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> precision;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--set", overrides, "Override key=value (dotted keys, repeatable)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Root seed");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_option("--precision", precision, "Network arithmetic")->check(CLI::IsMember({"single", "double"}));
    auto* gen = app.add_subcommand("gen-data", "Generate (LS estimate, channel) datasets")->fallthrough();
    auto* theory = app.add_subcommand("theory", "Partition bounds, similarity and beam-pattern tables")->fallthrough();
    auto* train = app.add_subcommand("train", "Train JSSAnet or the JSAnet ablation")->fallthrough();
    auto* eval = app.add_subcommand("eval", "Run the estimator sweep")->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitConfig;
    }

    if (seed) {
        overrides.push_back("seed=" + std::to_string(*seed));
    }
    if (threads) {
        overrides.push_back("threads=" + std::to_string(*threads));
    }
    if (precision) {
        overrides.push_back("precision=\"" + *precision + "\"");
    }

    try {
        const Invocation inv = prepare(config_path, overrides, out_dir, out);
        if (*gen) {
            cmd_gen_data(inv, out);
        } else if (*theory) {
            cmd_theory(inv, out);
        } else if (*train) {
            if (inv.config.precision == "double") {
                train_with<double>(inv, out);
            } else {
                train_with<float>(inv, out);
            }
        } else if (*eval) {
            cmd_eval(inv, out);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const jssanet::CheckpointError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const jssanet::DivergenceError& e) {
        err << "training diverged: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace nearfield
