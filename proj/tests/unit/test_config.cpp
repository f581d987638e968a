#include <gtest/gtest.h>

#include <sstream>

#include "nldae/config.hpp"

using namespace nldae;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "test.cfg");
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndWhitespace) {
    const ExperimentConfig c = parse(
        "# comment\n"
        "case = ofdm   # trailing comment\n"
        "sweep=noise_param\n"
        "grid = 0, 5, 10\n"
        "\n"
        "M = 300\n"
        "seeds = 7, 8\n"
        "spline = not_a_knot\n"
        "max_iters = 20\n");
    EXPECT_EQ(c.experiment, Case::Ofdm);
    EXPECT_EQ(c.sweep, Sweep::NoiseParam);
    EXPECT_EQ(c.grid, (std::vector<double>{0, 5, 10}));
    EXPECT_EQ(c.M, 300u);
    EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7, 8}));
    EXPECT_EQ(c.ofdm_spline, ofdm::SplineKind::NotAKnot);
    EXPECT_EQ(c.train.max_iters, 20u);
    EXPECT_EQ(c.at(10).ofdm_snr_db, 10.0);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, SweepMapping) {
    ExperimentConfig c;
    c.experiment = Case::Signal;
    c.sweep = Sweep::NoiseParam;
    EXPECT_EQ(c.at(0.3).sig_p_cor, 0.3);
    c.experiment = Case::Locate;
    EXPECT_EQ(c.at(0.3).loc_p_nlos, 0.3);
    c.experiment = Case::Toy2;
    EXPECT_EQ(c.at(0.3).toy_sigma, 0.3);
    c.sweep = Sweep::Latent;
    EXPECT_EQ(c.at(6).P_prime, 6);
    c.sweep = Sweep::Depth;
    EXPECT_EQ(c.at(3).depth, 3);
    c.sweep = Sweep::TrainSize;
    EXPECT_EQ(c.at(100).M, 100u);
}

TEST(Config, Errors) {
    EXPECT_THROW(parse("case = toy1\nsweep = noise_param\n"), ConfigError);
    EXPECT_THROW(parse("case = toy3\nsweep = noise_param\ngrid = 1\n"), ConfigError);
    EXPECT_THROW(parse("case = toy1\nsweep = noise_param\ngrid = 1\nbogus = 2\n"), ConfigError);
    EXPECT_THROW(parse("case = toy1\nsweep = noise_param\ngrid = 1, x\n"), ConfigError);
    EXPECT_THROW(parse("case = toy1\nsweep = noise_param\ngrid = 1\nM = 2.5\n"), ConfigError);
    EXPECT_THROW(parse("case toy1\n"), ConfigError);
    try {
        parse("case = toy1\nsweep = noise_param\nM = -3\ngrid = 1\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("test.cfg:3"), std::string::npos) << e.what();
    }
    ExperimentConfig c = parse("case = signal\nsweep = latent\ngrid = 3, 12\n");
    EXPECT_THROW(c.validate(), ConfigError);
    c = parse("case = signal\nsweep = noise_param\ngrid = 1.5\n");
    EXPECT_THROW(c.validate(), ConfigError);
    c = parse("case = toy1\nsweep = noise_param\ngrid = 1\nmax_iters = 0\n");
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/nldae.cfg"), ConfigError);
}

TEST(Config, HashTracksResultAffectingSettingsOnly) {
    ExperimentConfig a = parse("case = toy1\nsweep = noise_param\ngrid = 0.5\n");
    ExperimentConfig b = a;
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_EQ(a.hash().size(), 16u);
    b.workers = 7;
    b.out_path = "x.csv";
    EXPECT_EQ(a.hash(), b.hash());
    b.M = 2001;
    EXPECT_NE(a.hash(), b.hash());
    b = a;
    b.seeds = {1, 2};
    EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, ScalePresets) {
    ExperimentConfig c;
    EXPECT_EQ(c.M, 2000u);
    EXPECT_EQ(c.L, 1000u);
    c.use_paper_scale();
    EXPECT_EQ(c.M, 10000u);
    EXPECT_EQ(c.L, 5000u);
}

TEST(Config, RangeSigmaConvention) {
    ExperimentConfig c;
    c.loc_sigma_n = 100.0;
    EXPECT_EQ(c.range_noise().sigma_n, 100.0);
    c.loc_sigma_n_is_variance = true;
    EXPECT_EQ(c.range_noise().sigma_n, 10.0);
}
