#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("semnav_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(const std::string& args) const {
        const fs::path err = dir_ / "stderr.txt";
        const std::string cmd = "cd " + dir_.string() + " && " + SEMNAV_CLI_PATH + " " + args + " >/dev/null 2>" + err.string();
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(err);
        std::stringstream ss;
        ss << in.rdbuf();
        r.err = ss.str();
        return r;
    }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, MissingSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(Cli, MisspelledConfigKeyNamesFileAndLine) {
    write("bad.cfg", "[train]\nlearning_rate = 1\n");
    const Result r = run("train --config bad.cfg --out o");
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("semnav: error: ", 0), 0U);
    EXPECT_NE(r.err.find("bad.cfg:2"), std::string::npos);
    EXPECT_NE(r.err.find("train.learning_rate"), std::string::npos);
}

TEST_F(Cli, ErrorKindsMapToExitCodes) {
    EXPECT_EQ(run("gen-scenes --width 3 --out s").code, 1);
    ASSERT_EQ(run("gen-scenes --count-per-type 1 --width 8 --height 8 --out s").code, 0);
    EXPECT_EQ(run("eval --scenes s --checkpoint missing.bin --out e").code, 3);
    EXPECT_EQ(run("plot --log missing.csv --out x.svg").code, 3);
    EXPECT_EQ(run("train --scenes s --lr -1 --out t").code, 2);
    const Result ssn = run("train --scenes s --variant ssn --frames 100 --out t");
    EXPECT_EQ(ssn.code, 2);
    EXPECT_NE(ssn.err.find("encoder"), std::string::npos);
}

TEST_F(Cli, CheckpointDimensionMismatchNamesBothDims) {
    ASSERT_EQ(run("gen-scenes --count-per-type 1 --width 8 --height 8 --out s").code, 0);
    ASSERT_EQ(run("train --scenes s --frames 200 --out t").code, 0);
    write("f16.cfg", "[features]\ndim = 16\n");
    const Result r = run("eval --config f16.cfg --scenes s --checkpoint t/params.bin --out e");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("128"), std::string::npos);
    EXPECT_NE(r.err.find("16"), std::string::npos);
}

TEST_F(Cli, TrainWritesAllArtifacts) {
    ASSERT_EQ(run("gen-scenes --count-per-type 1 --width 8 --height 8 --out s").code, 0);
    ASSERT_EQ(run("train --scenes s --frames 300 --out t").code, 0);
    for (const char* f : {"run.cfg", "targets.tsv", "rewards.csv", "params.bin"}) EXPECT_TRUE(fs::exists(dir_ / "t" / f)) << f;
    std::ifstream log(dir_ / "t" / "rewards.csv");
    std::string header;
    std::getline(log, header);
    EXPECT_EQ(header, "frames,scene_id,target_idx,episode_return,episode_len,success");
}
