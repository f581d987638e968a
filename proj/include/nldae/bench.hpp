#pragma once

// Experiment driver. Each (grid value, seed) pair is an independent job with
// its own split RngStream; jobs may run on a worker pool, and rows are
// assembled afterwards in (grid, seed) order so output is independent of
// scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "nldae/config.hpp"
#include "nldae/denoiser.hpp"
#include "nldae/errors.hpp"
#include "nldae/results.hpp"
#include "nldae/rng.hpp"
#include "nldae/sim_locate.hpp"
#include "nldae/sim_ofdm.hpp"
#include "nldae/sim_signal.hpp"

namespace nldae {

/// Differential entropy (nats) of N(0, sigma^2): log(sigma * sqrt(2 pi e)).
inline double gaussian_entropy(double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("gaussian_entropy: sigma must be > 0");
    return std::log(sigma * std::sqrt(2.0 * std::numbers::pi * std::numbers::e));
}

struct SampleStats {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n = 0;
};

inline SampleStats summarize(const std::vector<double>& v) {
    SampleStats s;
    s.n = v.size();
    if (v.empty()) return s;
    double acc = 0.0;
    for (double x : v) acc += x;
    s.mean = acc / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std_err = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return s;
}

/// One method's result for one (grid value, seed) job.
struct MethodOutcome {
    std::string method;
    std::string metric;
    SampleStats stats;
    std::string failure;
};

struct JobOutcome {
    std::vector<MethodOutcome> methods;      // nlDAE, DAE, baseline
    std::vector<MethodOutcome> diagnostics;  // e.g. clamp counts
};

namespace detail {

inline std::uint64_t case_label(Case c) { return static_cast<std::uint64_t>(c) + 1; }

// Sub-stream labels of a job stream.
inline constexpr std::uint64_t kTrainData = 1;
inline constexpr std::uint64_t kTestData = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kInitImag = 4;

inline std::vector<double> per_sample_mse(const std::vector<Vec>& est, const std::vector<Vec>& truth) {
    std::vector<double> out;
    out.reserve(est.size());
    for (std::size_t j = 0; j < est.size(); ++j) out.push_back((est[j] - truth[j]).squaredNorm() / static_cast<double>(truth[j].size()));
    return out;
}

template <class F>
MethodOutcome guarded(const std::string& method, const std::string& metric, F&& body) {
    MethodOutcome m{method, metric, {}, {}};
    try {
        m.stats = body();
    } catch (const std::exception& e) {
        m.failure = e.what();
    }
    return m;
}

/// Training data for one network: inputs with DAE (clean) and nlDAE (noise)
/// targets. `additive` marks data satisfying inputs = clean + noise.
struct TrainingSet {
    std::vector<Vec> inputs;
    std::vector<Vec> clean;
    std::vector<Vec> noise;
    bool additive = true;
};

inline DenoiserModel train_on(const TrainingSet& t, Mode mode, const ExperimentConfig& c, RngStream init) {
    if (t.additive) return train_denoiser(mode, t.inputs, t.clean, t.noise, c.P_prime, c.depth, c.train, std::move(init));
    return fit_denoiser(mode, t.inputs, mode == Mode::DAE ? t.clean : t.noise, c.P_prime, c.depth, c.train, std::move(init));
}

inline signal::Triples toy_draw(const ExperimentConfig& c, std::size_t count, RngStream r) {
    signal::Triples t;
    for (std::size_t i = 0; i < count; ++i) {
        Vec x(c.P), n(c.P);
        for (int k = 0; k < c.P; ++k) {
            x[k] = c.experiment == Case::Toy1 ? sample_uniform(r, 0.0, 2.0 * std::sqrt(3.0)) : sample_exponential(r, 1.0);
            n[k] = sample_normal(r, 0.0, c.toy_sigma);
        }
        t.noisy.push_back(x + n);
        t.clean.push_back(std::move(x));
        t.noise.push_back(std::move(n));
    }
    return t;
}

inline signal::Triples signal_draw(const ExperimentConfig& c, std::size_t count, RngStream r) {
    signal::SinusoidSampler sampler;
    sampler.k = c.sig_k;
    sampler.gamma_max = c.sig_gamma_max;
    sampler.f_max = c.sig_f_max;
    sampler.dt = c.sig_dt;
    sampler.P = c.P;
    return signal::make_case1_dataset(count, sampler, {c.sig_p_cor, c.sig_C}, r);
}

inline std::vector<ofdm::Frame> ofdm_draw(const ExperimentConfig& c, std::size_t count, RngStream r) {
    return ofdm::make_case2_frames(count, c.ofdm_scenario(), r);
}

inline locate::LocDataset locate_draw(const ExperimentConfig& c, std::size_t count, RngStream r) {
    return locate::make_case3_dataset(count, c.P, c.loc_side, c.range_noise(), r, c.loc_quantizer);
}

inline TrainingSet from_triples(signal::Triples t) {
    return {std::move(t.noisy), std::move(t.clean), std::move(t.noise), true};
}

/// Training sets for the job stream: one per network (two for OFDM: real
/// and imaginary parts).
inline std::vector<TrainingSet> training_sets(const ExperimentConfig& c, const RngStream& job) {
    const RngStream r = job.split(kTrainData);
    switch (c.experiment) {
        case Case::Toy1:
        case Case::Toy2: return {from_triples(toy_draw(c, c.M, r))};
        case Case::Signal: return {from_triples(signal_draw(c, c.M, r))};
        case Case::Ofdm: {
            std::vector<TrainingSet> sets(2);
            for (const auto& f : ofdm_draw(c, c.M, r)) {
                sets[0].inputs.push_back(f.y.real());
                sets[0].clean.push_back(f.x.real());
                sets[0].noise.push_back(f.noise.real());
                sets[1].inputs.push_back(f.y.imag());
                sets[1].clean.push_back(f.x.imag());
                sets[1].noise.push_back(f.noise.imag());
            }
            return sets;
        }
        case Case::Locate: {
            const auto ds = locate_draw(c, c.M, r);
            return {TrainingSet{ds.inputs(), ds.clean(), ds.noise_q(), false}};
        }
    }
    throw ParameterError("training_sets: unknown case");
}

inline RngStream init_stream(const RngStream& job, std::size_t network) {
    return job.split(network == 0 ? kInit : kInitImag);
}

inline JobOutcome run_additive_job(const ExperimentConfig& c, const RngStream& job) {
    const TrainingSet train = training_sets(c, job).front();
    const signal::Triples test =
        is_toy(c.experiment) ? toy_draw(c, c.L, job.split(kTestData)) : signal_draw(c, c.L, job.split(kTestData));

    JobOutcome out;
    for (Mode mode : {Mode::nlDAE, Mode::DAE}) {
        out.methods.push_back(guarded(std::string(to_string(mode)), "mse", [&] {
            const DenoiserModel m = train_on(train, mode, c, init_stream(job, 0));
            return summarize(per_sample_mse(denoise_all(m, test.noisy), test.clean));
        }));
    }
    out.methods.push_back(guarded(is_toy(c.experiment) ? "noisy" : "nonML", "mse",
                                  [&] { return summarize(per_sample_mse(test.noisy, test.clean)); }));
    return out;
}

inline JobOutcome run_ofdm_job(const ExperimentConfig& c, const RngStream& job) {
    const ofdm::OfdmScenario sc = c.ofdm_scenario();
    const std::vector<TrainingSet> train = training_sets(c, job);
    const auto test = ofdm_draw(c, c.L, job.split(kTestData));

    const std::vector<bool> is_pilot = sc.pilot_mask();
    auto frame_ser = [&](const std::vector<int>& detected, const std::vector<int>& sent) {
        std::size_t err = 0, total = 0;
        for (std::size_t n = 0; n < sent.size(); ++n) {
            if (is_pilot[n]) continue;
            ++total;
            err += detected[n] != sent[n];
        }
        return static_cast<double>(err) / static_cast<double>(total);
    };

    JobOutcome out;
    for (Mode mode : {Mode::nlDAE, Mode::DAE}) {
        out.methods.push_back(guarded(std::string(to_string(mode)), "ser", [&] {
            const DenoiserModel m_re = train_on(train[0], mode, c, init_stream(job, 0));
            const DenoiserModel m_im = train_on(train[1], mode, c, init_stream(job, 1));
            std::vector<double> per_frame;
            per_frame.reserve(test.size());
            for (const auto& f : test) {
                const CVec x_tilde = denoise_complex(m_re, m_im, f.y);
                per_frame.push_back(frame_ser(ofdm::receive(x_tilde, sc), f.symbols.index));
            }
            return summarize(per_frame);
        }));
    }
    out.methods.push_back(guarded("nonML", "ser", [&] {
        std::vector<double> per_frame;
        for (const auto& f : test) per_frame.push_back(frame_ser(ofdm::receive(f.y, sc), f.symbols.index));
        return summarize(per_frame);
    }));
    return out;
}

inline JobOutcome run_locate_job(const ExperimentConfig& c, const RngStream& job) {
    const TrainingSet train = training_sets(c, job).front();
    const auto test = locate_draw(c, c.L, job.split(kTestData));
    const std::vector<Vec> test_inputs = test.inputs();

    auto localize = [&](const std::vector<Vec>& dists, std::size_t& clamps) {
        std::vector<double> errs;
        clamps = 0;
        for (std::size_t j = 0; j < test.samples.size(); ++j) {
            Vec d = dists[j];
            for (Eigen::Index k = 0; k < d.size(); ++k) {
                if (d[k] < 0.0) {
                    d[k] = 0.0;
                    ++clamps;
                }
            }
            try {
                const auto est = locate::mds_locate(test.samples[j].scene.refs, d);
                errs.push_back(locate::loc_error(est, test.samples[j].scene.target));
            } catch (const RankDeficiencyError&) {
                // failed trial: excluded from the mean, visible through n_trials
            }
        }
        if (errs.empty()) throw RankDeficiencyError("locate: every test trial was rank-deficient");
        return summarize(errs);
    };

    JobOutcome out;
    for (Mode mode : {Mode::nlDAE, Mode::DAE}) {
        std::size_t clamps = 0;
        out.methods.push_back(guarded(std::string(to_string(mode)), "loc_error", [&] {
            const DenoiserModel m = train_on(train, mode, c, init_stream(job, 0));
            return localize(denoise_all(m, test_inputs), clamps);
        }));
        if (out.methods.back().failure.empty()) {
            out.diagnostics.push_back({std::string(to_string(mode)), "clamp_count", {static_cast<double>(clamps), 0.0, 1}, {}});
        }
    }
    out.methods.push_back(guarded("nonML", "loc_error", [&] {
        std::size_t clamps = 0;
        return localize(test_inputs, clamps);
    }));
    return out;
}

inline RngStream job_stream(const ExperimentConfig& point, std::uint64_t seed) {
    return rng_new(seed).split(case_label(point.experiment));
}

}  // namespace detail

/// Run one (grid value, seed) job for any case.
inline JobOutcome run_job(const ExperimentConfig& point, std::uint64_t seed) {
    const RngStream job = detail::job_stream(point, seed);
    switch (point.experiment) {
        case Case::Toy1:
        case Case::Toy2:
        case Case::Signal: return detail::run_additive_job(point, job);
        case Case::Ofdm: return detail::run_ofdm_job(point, job);
        case Case::Locate: return detail::run_locate_job(point, job);
    }
    throw ParameterError("run_job: unknown case");
}

/// The networks a job trains for `mode` (two for OFDM: real, imaginary),
/// exactly as run_job trains them.
inline std::vector<DenoiserModel> train_job_models(const ExperimentConfig& point, std::uint64_t seed, Mode mode) {
    point.validate();
    const RngStream job = detail::job_stream(point, seed);
    const auto sets = detail::training_sets(point, job);
    std::vector<DenoiserModel> models;
    for (std::size_t i = 0; i < sets.size(); ++i) models.push_back(detail::train_on(sets[i], mode, point, detail::init_stream(job, i)));
    return models;
}

/// Run every (grid value, seed) job of `cfg` and return rows: per-seed rows
/// for each method, then rows aggregated across seeds (seed = all).
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::string hash = cfg.hash();
    const std::size_t n_seeds = cfg.seeds.size();
    const std::size_t n_jobs = cfg.grid.size() * n_seeds;

    std::vector<JobOutcome> outcomes(n_jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < n_jobs;) {
            const ExperimentConfig point = cfg.at(cfg.grid[j / n_seeds]);
            try {
                outcomes[j] = run_job(point, cfg.seeds[j % n_seeds]);
            } catch (const std::exception& e) {
                outcomes[j].methods.push_back({"*", "*", {}, e.what()});
            }
        }
    };
    unsigned n_workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, n_jobs));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<ResultRow> rows;
    auto make_row = [&](double value, const MethodOutcome& m, std::optional<std::uint64_t> seed) {
        ResultRow r;
        r.experiment = std::string(to_string(cfg.experiment));
        r.sweep = std::string(to_string(cfg.sweep));
        r.sweep_value = value;
        r.method = m.method;
        r.metric = m.metric;
        r.mean = m.failure.empty() ? m.stats.mean : std::nan("");
        r.std_err = m.failure.empty() ? m.stats.std_err : std::nan("");
        r.n_trials = m.failure.empty() ? m.stats.n : 0;
        r.seed = seed;
        r.config_hash = hash;
        r.failure = m.failure;
        return r;
    };

    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
        const double value = cfg.grid[g];
        for (std::size_t s = 0; s < n_seeds; ++s) {
            const JobOutcome& o = outcomes[g * n_seeds + s];
            for (const auto& m : o.methods) rows.push_back(make_row(value, m, cfg.seeds[s]));
            for (const auto& m : o.diagnostics) rows.push_back(make_row(value, m, cfg.seeds[s]));
        }

        // aggregate per (method, metric) in first-seen order
        std::vector<std::pair<std::string, std::string>> keys;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            for (const auto& m : outcomes[g * n_seeds + s].methods) {
                const auto key = std::make_pair(m.method, m.metric);
                if (m.method != "*" && std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
            }
        }
        for (const auto& [method, metric] : keys) {
            std::vector<double> means;
            std::string first_failure;
            std::size_t failed = 0;
            for (std::size_t s = 0; s < n_seeds; ++s) {
                bool seen = false;
                for (const auto& m : outcomes[g * n_seeds + s].methods) {
                    if (m.method != method || m.metric != metric) continue;
                    seen = true;
                    if (m.failure.empty()) {
                        means.push_back(m.stats.mean);
                    } else {
                        ++failed;
                        if (first_failure.empty()) first_failure = m.failure;
                    }
                }
                if (!seen) ++failed;
            }
            MethodOutcome agg{method, metric, summarize(means), {}};
            if (means.empty()) {
                agg.failure = "all seeds failed: " + first_failure;
            } else if (failed > 0) {
                agg.failure = "partial: " + std::to_string(failed) + " of " + std::to_string(n_seeds) + " seeds failed";
            }
            ResultRow r = make_row(value, agg, std::nullopt);
            if (!means.empty()) {
                r.mean = agg.stats.mean;
                r.std_err = agg.stats.std_err;
                r.n_trials = agg.stats.n;
            }
            rows.push_back(std::move(r));
        }
        if (is_toy(cfg.experiment)) {
            const double sigma = cfg.at(value).toy_sigma;
            MethodOutcome h{"noisy", "noise_entropy", {}, {}};
            if (sigma > 0.0) {
                h.stats = {gaussian_entropy(sigma), 0.0, 1};
            } else {
                h.failure = "entropy undefined for sigma = 0";
            }
            rows.push_back(make_row(value, h, std::nullopt));
        }
    }
    return rows;
}

/// Toy examples: both denoisers plus the raw-noisy baseline, swept over the
/// configured grid (normally sigma_N).
inline std::vector<ResultRow> run_toy(const ExperimentConfig& cfg) {
    if (!is_toy(cfg.experiment)) throw ParameterError("run_toy: case must be toy1 or toy2");
    return run_experiment(cfg);
}

/// Case studies: signal restoration, OFDM demodulation, localization.
inline std::vector<ResultRow> run_case(const ExperimentConfig& cfg) {
    if (is_toy(cfg.experiment)) throw ParameterError("run_case: case must be signal, ofdm or locate");
    return run_experiment(cfg);
}

/// Per-seed rows for one grid value and method, in seed order.
inline std::vector<ResultRow> select_rows(const std::vector<ResultRow>& rows, double sweep_value, const std::string& method,
                                          bool per_seed = true) {
    std::vector<ResultRow> out;
    for (const auto& r : rows) {
        if (r.sweep_value == sweep_value && r.method == method && r.seed.has_value() == per_seed &&
            r.metric != "clamp_count" && r.metric != "noise_entropy") {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace nldae
