// Copyright 2026-present the saqvq authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "test_util.h"

namespace saq {
namespace {

struct RunResult {
    int status = -1;
    std::string output;
};

RunResult
run_cli(const std::string& args) {
    std::string command = std::string(SAQVQ_CLI_PATH) + " --threads 1 " + args + " 2>&1";
    RunResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) {
        return result;
    }
    std::array<char, 4096> buf{};
    size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    int raw = pclose(pipe);
    result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return result;
}

void
write_text(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

class CliTest : public ::testing::Test {
protected:
    void
    SetUp() override {
        base_ = dir_.file("base.fvecs");
        queries_ = dir_.file("queries.fvecs");
        auto r = run_cli("gen --kind skewed --n 2020 --dim 32 --seed 3 --out " + base_ +
                         " --queries 20 --query-out " + queries_);
        ASSERT_EQ(r.status, 0) << r.output;
    }

    testing::TempDir dir_;
    std::string base_;
    std::string queries_;
};

}  // namespace

TEST_F(CliTest, EndToEndWorkflow) {
    auto gt = run_cli("gt --base " + base_ + " --queries " + queries_ + " --k 10 --out " +
                      dir_.file("truth"));
    ASSERT_EQ(gt.status, 0) << gt.output;
    EXPECT_TRUE(std::filesystem::exists(dir_.file("truth.gt.ivecs")));

    auto train = run_cli("train --input " + base_ + " --kind pca --out " + dir_.file("pca.vqtm") +
                         " --plan-out " + dir_.file("plan.txt") + " --bits 4 --granularity 16");
    ASSERT_EQ(train.status, 0) << train.output;
    EXPECT_TRUE(std::filesystem::exists(dir_.file("plan.txt")));

    auto quantize = run_cli("quantize --input " + base_ + " --method saq --bits 4 --out " +
                            dir_.file("codes"));
    ASSERT_EQ(quantize.status, 0) << quantize.output;

    auto build = run_cli("build-ivf --base " + base_ + " --out " + dir_.file("index") +
                         " --nlist 8 --method saq --bits 4");
    ASSERT_EQ(build.status, 0) << build.output;
    EXPECT_TRUE(std::filesystem::exists(dir_.file("index/meta.json")));

    auto search = run_cli("search --index " + dir_.file("index") + " --queries " + queries_ +
                          " --k 10 --nprobe 8 --gt " + dir_.file("truth.gt.ivecs") + " --out " +
                          dir_.file("ids.ivecs"));
    ASSERT_EQ(search.status, 0) << search.output;
    EXPECT_NE(search.output.find("recall@10"), std::string::npos);

    auto eval = run_cli("eval-error --base " + base_ + " --queries " + queries_ +
                        " --k 10 --nlist 4 --nprobe 4 --method caq --bits 4 --gt " + dir_.file("truth"));
    ASSERT_EQ(eval.status, 0) << eval.output;
    EXPECT_NE(eval.output.find("method,B_avg,avg_rel_err"), std::string::npos);

    auto bench = run_cli("bench-qps --index " + dir_.file("index") + " --base " + base_ +
                         " --queries " + queries_ + " --k 10 --nprobe 1,2,4 --runs 1 --gt " +
                         dir_.file("truth"));
    ASSERT_EQ(bench.status, 0) << bench.output;
    EXPECT_NE(bench.output.find("nprobe=4"), std::string::npos);
}

TEST_F(CliTest, PipelineWritesCsv) {
    auto cfg = dir_.file("run.cfg");
    write_text(cfg, "output = " + dir_.file("out") + "\n[dataset]\nsource = file\npath = " + base_ +
                        "\nquery_path = " + queries_ +
                        "\n[eval]\nk = 10\nnlist = 4\n[method]\nkind = caq\nbits = 2,4\n");
    auto r = run_cli("pipeline " + cfg);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(dir_.file("out/results.csv")));
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
    auto cfg = dir_.file("bad.cfg");
    write_text(cfg, "[dataset]\nsource = file\n[method]\nkind = caq\n");
    auto r = run_cli("pipeline " + cfg);
    EXPECT_EQ(r.status, 2) << r.output;
    EXPECT_NE(r.output.find("path"), std::string::npos);

    write_text(cfg, "unknown_key = 1\n");
    EXPECT_EQ(run_cli("pipeline " + cfg).status, 2);
    EXPECT_EQ(run_cli("build-ivf --base " + base_ + " --out x --method opq").status, 2);
    EXPECT_EQ(run_cli("no-such-command").status, 2);
    EXPECT_EQ(run_cli("gen --n 10").status, 2);
}

TEST_F(CliTest, DataErrorsExitThree) {
    auto bad = dir_.file("bad.fvecs");
    write_text(bad, "abc");
    EXPECT_EQ(run_cli("gt --base " + bad + " --queries " + queries_ + " --out " + dir_.file("t")).status,
              3);
    EXPECT_EQ(run_cli("search --index " + dir_.file("missing") + " --queries " + queries_).status, 3);
    auto wide = dir_.file("wide.fvecs");
    auto r = run_cli("gen --n 5 --dim 7 --out " + wide);
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(run_cli("gt --base " + base_ + " --queries " + wide + " --out " + dir_.file("t")).status,
              3);
}

TEST(CliHelpTest, HelpExitsZero) {
    EXPECT_EQ(run_cli("--help").status, 0);
}

}  // namespace saq
