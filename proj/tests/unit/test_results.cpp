#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "nldae/results.hpp"

using namespace nldae;

namespace {

std::vector<ResultRow> sample_rows() {
    std::vector<ResultRow> rows(3);
    rows[0] = {"toy1", "noise_param", 0.25, "nlDAE", "mse", 0.1 / 3.0, 1e-17, 5, 3, "00ff", ""};
    rows[1] = {"ofdm", "noise_param", 5.0, "nonML", "ser", 0.3125, 0.004, 1, std::nullopt, "00ff", ""};
    rows[2] = {"toy1", "noise_param", 0.0, "nlDAE", "mse", std::nan(""), std::nan(""), 0, 1, "00ff",
               "degenerate: \"constant\", line\nbreak"};
    return rows;
}

}  // namespace

TEST(Csv, HeaderIsExact) {
    std::ostringstream os;
    write_csv(os, {});
    EXPECT_EQ(os.str(), "case,sweep,sweep_value,method,metric,mean,std_err,n_trials,seed,config_hash,failure\n");
}

TEST(Csv, RoundTripIsExact) {
    const auto rows = sample_rows();
    std::stringstream ss;
    write_csv(ss, rows);
    const auto back = read_csv(ss);
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_TRUE(back[i] == rows[i]) << "row " << i;
    EXPECT_EQ(back[0].mean, 0.1 / 3.0);
}

TEST(Csv, AggregateSeedIsAll) {
    std::ostringstream os;
    write_csv(os, {sample_rows()[1]});
    EXPECT_NE(os.str().find(",all,00ff,"), std::string::npos);
}

TEST(Csv, NonFailureMeansAreFiniteDecimals) {
    std::stringstream ss;
    write_csv(ss, sample_rows());
    for (const auto& r : read_csv(ss)) {
        if (!r.failed()) EXPECT_TRUE(std::isfinite(r.mean));
    }
}

TEST(Csv, FileRoundTripAndErrors) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "nldae_results_test.csv").string();
    write_csv(sample_rows(), path);
    EXPECT_EQ(read_csv(path).size(), 3u);
    std::filesystem::remove(path);

    const std::string missing = (dir / "no_such_dir_nldae" / "x.csv").string();
    try {
        write_csv(sample_rows(), missing);
        FAIL() << "expected LoadError";
    } catch (const LoadError& e) {
        EXPECT_NE(std::string(e.what()).find(missing), std::string::npos);
    }
    EXPECT_THROW(read_csv(missing), LoadError);
}

TEST(Csv, RejectsBadInput) {
    std::istringstream bad_header("case,sweep\n");
    EXPECT_THROW(read_csv(bad_header), LoadError);
    std::istringstream short_row(std::string(kCsvHeader) + "\ntoy1,noise_param,1\n");
    EXPECT_THROW(read_csv(short_row), LoadError);
    std::istringstream bad_number(std::string(kCsvHeader) + "\ntoy1,noise_param,x,nlDAE,mse,1,0,1,1,h,\n");
    EXPECT_THROW(read_csv(bad_number), LoadError);
}
