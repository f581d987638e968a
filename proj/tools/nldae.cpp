// nldae: experiment driver for DAE / nlDAE denoising benchmarks.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure (any CSV
// produced so far is still written).

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nldae/nldae.hpp"
#include "nldae/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunOptions {
    std::string config_path;
    std::string out;
    std::string seeds;
    bool paper_scale = false;
    unsigned workers = 0;
};

struct ToyOptions {
    int example = 1;
    std::string sigma_grid = "0.1,0.25,0.5,0.75,1,1.5,2";
    std::string out;
    std::string seeds;
    std::size_t M = 0;
    std::size_t L = 0;
    bool paper_scale = false;
    unsigned workers = 0;
};

struct SaveOptions {
    std::string config_path;
    int example = 0;
    double sigma = 0.5;
    std::string mode = "nlDAE";
    std::uint64_t seed = 1;
    std::string out;
};

struct LoadOptions {
    std::string model;
    std::string input;
};

int emit(const nldae::ExperimentConfig& cfg, const std::string& out_override) {
    std::vector<nldae::ResultRow> rows;
    int code = kExitOk;
    try {
        rows = nldae::run_experiment(cfg);
    } catch (const nldae::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        code = kExitRuntime;
    }
    for (const auto& r : rows) {
        if (r.failed() && r.failure.rfind("partial:", 0) != 0) code = kExitRuntime;
    }
    const std::string path = out_override.empty() ? cfg.out_path : out_override;
    try {
        if (path.empty() || path == "-") {
            nldae::write_csv(std::cout, rows);
        } else {
            nldae::write_csv(rows, path);
            std::cerr << "wrote " << rows.size() << " rows to " << path << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
    if (code == kExitRuntime) std::cerr << "some grid points failed; see the failure column\n";
    return code;
}

int cmd_run(const RunOptions& o) {
    nldae::ExperimentConfig cfg;
    try {
        cfg = nldae::load_config(o.config_path);
        if (o.paper_scale) cfg.use_paper_scale();
        if (!o.seeds.empty()) cfg.seeds = nldae::parse_seed_list("--seeds", o.seeds);
        if (o.workers) cfg.workers = o.workers;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return emit(cfg, o.out);
}

int cmd_toy(const ToyOptions& o) {
    nldae::ExperimentConfig cfg;
    try {
        if (o.example != 1 && o.example != 2) throw nldae::ConfigError("--example must be 1 or 2");
        cfg.experiment = o.example == 1 ? nldae::Case::Toy1 : nldae::Case::Toy2;
        cfg.sweep = nldae::Sweep::NoiseParam;
        cfg.grid = nldae::parse_number_list("--sigma-grid", o.sigma_grid);
        if (o.paper_scale) cfg.use_paper_scale();
        if (o.M) cfg.M = o.M;
        if (o.L) cfg.L = o.L;
        if (!o.seeds.empty()) cfg.seeds = nldae::parse_seed_list("--seeds", o.seeds);
        if (o.workers) cfg.workers = o.workers;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    return emit(cfg, o.out);
}

int cmd_save(const SaveOptions& o) {
    nldae::ExperimentConfig point;
    nldae::Mode mode{};
    try {
        mode = nldae::parse_mode(o.mode);
        if (!o.config_path.empty()) {
            const nldae::ExperimentConfig cfg = nldae::load_config(o.config_path);
            cfg.validate();
            point = cfg.at(cfg.grid.front());
        } else {
            if (o.example != 1 && o.example != 2) throw nldae::ConfigError("give --config or --example 1|2");
            point.experiment = o.example == 1 ? nldae::Case::Toy1 : nldae::Case::Toy2;
            point.grid = {o.sigma};
            point = point.at(o.sigma);
        }
        if (o.out.empty()) throw nldae::ConfigError("--out is required");
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        const auto models = nldae::train_job_models(point, o.seed, mode);
        nldae::save_model(models[0], o.out);
        std::cerr << "saved " << o.out << '\n';
        if (models.size() > 1) {
            nldae::save_model(models[1], o.out + ".imag");
            std::cerr << "saved " << o.out << ".imag (imaginary-part network)\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_load(const LoadOptions& o) {
    try {
        const nldae::DenoiserModel m = nldae::load_model(o.model);
        std::cout << "mode " << nldae::to_string(m.mode) << "\ndims";
        for (int d : m.mlp.dims) std::cout << ' ' << d;
        std::cout << "\nscaler_in [" << m.scaler_in.lo << ", " << m.scaler_in.hi << "]\nscaler_out [" << m.scaler_out.lo
                  << ", " << m.scaler_out.hi << "]\n";
        if (!o.input.empty()) {
            const std::vector<double> v = nldae::parse_number_list("--input", o.input);
            nldae::Vec y(static_cast<Eigen::Index>(v.size()));
            for (std::size_t i = 0; i < v.size(); ++i) y[static_cast<Eigen::Index>(i)] = v[i];
            const nldae::Vec x = nldae::denoise(m, y);
            std::cout << "denoised";
            for (Eigen::Index i = 0; i < x.size(); ++i) std::cout << ' ' << nldae::format_double(x[i]);
            std::cout << '\n';
        }
    } catch (const nldae::LoadError& e) {
        std::cerr << "load error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

int cmd_selftest() {
    bool ok = true;
    for (const auto& c : nldae::run_selftest()) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ')';
        std::cout << '\n';
        ok &= c.passed;
    }
    return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DAE / nlDAE denoising benchmarks"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "run an experiment described by a config file");
    run->add_option("--config", run_opts.config_path, "key = value config file")->required();
    run->add_option("--out", run_opts.out, "CSV output path (default: config out_path, else stdout)");
    run->add_option("--seeds", run_opts.seeds, "comma-separated root seeds, e.g. 1,2,3,4,5");
    run->add_flag("--paper-scale", run_opts.paper_scale, "use M = 10000, L = 5000");
    run->add_option("--workers", run_opts.workers, "worker threads (default: hardware concurrency)");

    ToyOptions toy_opts;
    auto* toy = app.add_subcommand("toy", "toy examples: U(0, 2 sqrt 3) or Exp(1) data with Gaussian noise");
    toy->add_option("--example", toy_opts.example, "1 (uniform) or 2 (exponential)")->required();
    toy->add_option("--sigma-grid", toy_opts.sigma_grid, "comma-separated noise standard deviations");
    toy->add_option("--out", toy_opts.out, "CSV output path (default stdout)");
    toy->add_option("--seeds", toy_opts.seeds, "comma-separated root seeds");
    toy->add_option("--M", toy_opts.M, "training set size");
    toy->add_option("--L", toy_opts.L, "test set size");
    toy->add_flag("--paper-scale", toy_opts.paper_scale, "use M = 10000, L = 5000");
    toy->add_option("--workers", toy_opts.workers, "worker threads");

    SaveOptions save_opts;
    auto* save = app.add_subcommand("save-model", "train one model (first grid point) and write it to a file");
    save->add_option("--config", save_opts.config_path, "experiment config; the first grid value is used");
    save->add_option("--example", save_opts.example, "toy example 1|2 instead of a config");
    save->add_option("--sigma", save_opts.sigma, "toy noise standard deviation");
    save->add_option("--mode", save_opts.mode, "DAE or nlDAE");
    save->add_option("--seed", save_opts.seed, "root seed");
    save->add_option("--out", save_opts.out, "model path (OFDM also writes <out>.imag)")->required();

    LoadOptions load_opts;
    auto* load = app.add_subcommand("load-model", "load a model, print its shape, optionally denoise one vector");
    load->add_option("--model", load_opts.model, "model path")->required();
    load->add_option("--input", load_opts.input, "comma-separated input vector");

    auto* selftest = app.add_subcommand("selftest", "run the invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (*run) return cmd_run(run_opts);
    if (*toy) return cmd_toy(toy_opts);
    if (*save) return cmd_save(save_opts);
    if (*load) return cmd_load(load_opts);
    if (*selftest) return cmd_selftest();
    return kExitConfig;
}
