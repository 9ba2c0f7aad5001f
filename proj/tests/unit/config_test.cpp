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

#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "saq/config.h"
#include "saq/error.h"

namespace saq {
namespace {

PipelineConfig
parse(const std::string& text) {
    std::istringstream in(text);
    return parse_pipeline_config(in, "test.cfg");
}

std::string
config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kConfig);
        return e.what();
    }
    ADD_FAILURE() << "expected a config error";
    return {};
}

const char* const kMinimal = R"(
[dataset]
n = 1000
dim = 64
[method]
kind = caq
)";

}  // namespace

TEST(ConfigTest, ParsesFullExample) {
    auto cfg = parse(R"(
# global settings
seed = 42
output = out/dir
threads = 2
kmeans_iters = 5

[dataset]
source = synthetic
kind = skewed
n = 5000
dim = 128
alpha = 1.5
queries = 50

[eval]
mode = qps
k = 10
nlist = 32
nprobe = 1,2,4
rerank = 20
prune = false
runs = 5

[method]
name = saq-grid
kind = saq
bits = 2..4
confidence = 2,4
use_pca = true
granularity = 32

[method]
kind = caq
bits = 8
prefix_bits = 4..6
rounds = 0,6
)");
    EXPECT_EQ(cfg.seed, 42U);
    EXPECT_EQ(cfg.output, "out/dir");
    EXPECT_EQ(cfg.threads, 2U);
    EXPECT_EQ(cfg.kmeans_iters, 5U);
    EXPECT_EQ(cfg.dataset.synthetic.kind, SyntheticKind::kSkewed);
    EXPECT_EQ(cfg.dataset.synthetic.n, 5000U);
    EXPECT_DOUBLE_EQ(cfg.dataset.synthetic.alpha, 1.5);
    EXPECT_EQ(cfg.dataset.queries, 50U);
    EXPECT_EQ(cfg.eval.mode, "qps");
    EXPECT_EQ(cfg.eval.nprobe, (std::vector<size_t>{1, 2, 4}));
    EXPECT_EQ(cfg.eval.rerank, 20U);
    EXPECT_FALSE(cfg.eval.prune);
    ASSERT_EQ(cfg.methods.size(), 2U);
    EXPECT_EQ(cfg.methods[0].name, "saq-grid");
    EXPECT_EQ(cfg.methods[0].base.kind, QuantizerKind::kSaq);
    EXPECT_EQ(cfg.methods[0].bits, (std::vector<double>{2, 3, 4}));
    EXPECT_EQ(cfg.methods[0].confidence, (std::vector<float>{2, 4}));
    EXPECT_EQ(cfg.methods[0].base.granularity, 32U);
    EXPECT_EQ(cfg.methods[1].prefix_bits, (std::vector<unsigned>{4, 5, 6}));
    EXPECT_EQ(cfg.methods[1].rounds, (std::vector<unsigned>{0, 6}));
}

TEST(ConfigTest, DefaultsApply) {
    auto cfg = parse(kMinimal);
    EXPECT_EQ(cfg.eval.k, 100U);
    EXPECT_EQ(cfg.eval.nprobe, (std::vector<size_t>{1}));
    EXPECT_EQ(cfg.methods[0].bits, (std::vector<double>{4.0}));
    EXPECT_EQ(cfg.methods[0].rounds, (std::vector<unsigned>{6}));
}

TEST(ConfigTest, UnknownKeyNamesKeyAndLine) {
    auto msg = config_error("seed = 1\nbogus = 3\n");
    EXPECT_NE(msg.find("bogus"), std::string::npos);
    EXPECT_NE(msg.find("test.cfg:2"), std::string::npos);
    msg = config_error(std::string(kMinimal) + "colour = red\n");
    EXPECT_NE(msg.find("colour"), std::string::npos);
}

TEST(ConfigTest, MissingDatasetPathNamesKey) {
    auto msg = config_error("[dataset]\nsource = file\n[method]\nkind = caq\n");
    EXPECT_NE(msg.find("path"), std::string::npos);
    EXPECT_NE(msg.find("[dataset]"), std::string::npos);
}

TEST(ConfigTest, MalformedValuesRejected) {
    EXPECT_NE(config_error("seed = abc\n").find("seed"), std::string::npos);
    EXPECT_NE(config_error("[dataset]\nn = -5\n").find("n"), std::string::npos);
    EXPECT_NE(config_error(std::string(kMinimal) + "bits = 4..2\n").find("bits"), std::string::npos);
    EXPECT_NE(config_error(std::string(kMinimal) + "kind = opq\n").find("kind"), std::string::npos);
    EXPECT_NE(config_error("[eval]\nprune = maybe\n").find("prune"), std::string::npos);
    config_error("no equals sign here\n");
    config_error("[nonsense]\n");
}

TEST(ConfigTest, StructuralRules) {
    config_error("[dataset]\nn = 10\ndim = 4\n");  // no method
    config_error("[dataset]\ndim = 4\n[method]\nkind = caq\n");  // synthetic without n
    config_error(std::string(kMinimal) + "[dataset]\nn = 5\n");  // duplicate section
    config_error("seed = 1\nseed = 2\n");
}

TEST(ConfigTest, CommentsAndBlankLinesIgnored) {
    auto cfg = parse("# comment\n\nseed = 9  # trailing\n" + std::string(kMinimal));
    EXPECT_EQ(cfg.seed, 9U);
}

TEST(ConfigTest, MissingFileIsConfigError) {
    try {
        load_pipeline_config("/nonexistent/pipeline.cfg");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kConfig);
    }
}

}  // namespace saq
