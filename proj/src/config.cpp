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

#include "saq/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "saq/error.h"

namespace saq {

namespace {

std::string
trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct Context {
    const std::string& origin;
    size_t line;
    std::string section;
    std::string key;

    [[noreturn]] void
    fail(const std::string& message) const {
        throw_error(ErrorCode::kConfig,
                    fmt::format("{}:{}: [{}] {}: {}", origin, line, section, key, message));
    }
};

template <typename T>
T
parse_number(const Context& ctx, std::string_view text) {
    T value{};
    auto s = trim(text);
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, value);
    if (s.empty() || res.ec != std::errc{} || res.ptr != end) {
        ctx.fail(fmt::format("invalid number '{}'", s));
    }
    return value;
}

bool
parse_bool(const Context& ctx, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    ctx.fail(fmt::format("invalid boolean '{}'", v));
}

// "a,b,c" with integer ranges "lo..hi" allowed for integral types.
template <typename T>
std::vector<T>
parse_list(const Context& ctx, const std::string& v) {
    std::vector<T> out;
    size_t pos = 0;
    while (pos <= v.size()) {
        auto comma = v.find(',', pos);
        auto item = trim(std::string_view(v).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        auto dots = item.find("..");
        if (dots != std::string::npos) {
            if constexpr (std::is_integral_v<T>) {
                auto lo = parse_number<T>(ctx, item.substr(0, dots));
                auto hi = parse_number<T>(ctx, item.substr(dots + 2));
                if (hi < lo) {
                    ctx.fail(fmt::format("empty range '{}'", item));
                }
                for (T x = lo; x <= hi; ++x) {
                    out.push_back(x);
                }
            } else {
                auto lo = parse_number<long>(ctx, item.substr(0, dots));
                auto hi = parse_number<long>(ctx, item.substr(dots + 2));
                if (hi < lo) {
                    ctx.fail(fmt::format("empty range '{}'", item));
                }
                for (long x = lo; x <= hi; ++x) {
                    out.push_back(static_cast<T>(x));
                }
            }
        } else {
            out.push_back(parse_number<T>(ctx, item));
        }
        if (comma == std::string::npos) {
            break;
        }
        pos = comma + 1;
    }
    if (out.empty()) {
        ctx.fail("empty list");
    }
    return out;
}

using Handler = std::function<void(const Context&, const std::string&)>;

}  // namespace

PipelineConfig
parse_pipeline_config(std::istream& in, const std::string& origin) {
    PipelineConfig cfg;
    std::map<std::string, Handler> global{
        {"seed", [&](const Context& c, const std::string& v) { cfg.seed = parse_number<uint64_t>(c, v); }},
        {"output", [&](const Context&, const std::string& v) { cfg.output = v; }},
        {"threads", [&](const Context& c, const std::string& v) { cfg.threads = parse_number<size_t>(c, v); }},
        {"kmeans_iters",
         [&](const Context& c, const std::string& v) { cfg.kmeans_iters = parse_number<size_t>(c, v); }},
    };
    auto& ds = cfg.dataset;
    std::map<std::string, Handler> dataset{
        {"source",
         [&](const Context& c, const std::string& v) {
             if (v != "synthetic" && v != "file") {
                 c.fail(fmt::format("expected 'synthetic' or 'file', got '{}'", v));
             }
             ds.source = v;
         }},
        {"kind",
         [&](const Context& c, const std::string& v) {
             try {
                 ds.synthetic.kind = parse_synthetic_kind(v);
             } catch (const Error& e) {
                 c.fail(e.what());
             }
         }},
        {"n", [&](const Context& c, const std::string& v) { ds.synthetic.n = parse_number<size_t>(c, v); }},
        {"dim", [&](const Context& c, const std::string& v) { ds.synthetic.dim = parse_number<size_t>(c, v); }},
        {"alpha",
         [&](const Context& c, const std::string& v) { ds.synthetic.alpha = parse_number<double>(c, v); }},
        {"clusters",
         [&](const Context& c, const std::string& v) { ds.synthetic.clusters = parse_number<size_t>(c, v); }},
        {"center_scale",
         [&](const Context& c, const std::string& v) { ds.synthetic.center_scale = parse_number<double>(c, v); }},
        {"path", [&](const Context&, const std::string& v) { ds.path = v; }},
        {"format", [&](const Context&, const std::string& v) { ds.format = v; }},
        {"raw_dim", [&](const Context& c, const std::string& v) { ds.raw_dim = parse_number<size_t>(c, v); }},
        {"query_path", [&](const Context&, const std::string& v) { ds.query_path = v; }},
        {"queries", [&](const Context& c, const std::string& v) { ds.queries = parse_number<size_t>(c, v); }},
    };
    auto& ev = cfg.eval;
    std::map<std::string, Handler> eval{
        {"mode",
         [&](const Context& c, const std::string& v) {
             if (v != "error" && v != "qps") {
                 c.fail(fmt::format("expected 'error' or 'qps', got '{}'", v));
             }
             ev.mode = v;
         }},
        {"k", [&](const Context& c, const std::string& v) { ev.k = parse_number<size_t>(c, v); }},
        {"nlist", [&](const Context& c, const std::string& v) { ev.nlist = parse_number<size_t>(c, v); }},
        {"nprobe", [&](const Context& c, const std::string& v) { ev.nprobe = parse_list<size_t>(c, v); }},
        {"rerank", [&](const Context& c, const std::string& v) { ev.rerank = parse_number<size_t>(c, v); }},
        {"prune", [&](const Context& c, const std::string& v) { ev.prune = parse_bool(c, v); }},
        {"runs", [&](const Context& c, const std::string& v) { ev.runs = parse_number<size_t>(c, v); }},
    };
    MethodConfig* method = nullptr;
    std::map<std::string, Handler> method_keys{
        {"name", [&](const Context&, const std::string& v) { method->name = v; }},
        {"kind",
         [&](const Context& c, const std::string& v) {
             try {
                 method->base.kind = parse_quantizer_kind(v);
             } catch (const Error& e) {
                 c.fail(e.what());
             }
         }},
        {"bits", [&](const Context& c, const std::string& v) { method->bits = parse_list<double>(c, v); }},
        {"rounds", [&](const Context& c, const std::string& v) { method->rounds = parse_list<unsigned>(c, v); }},
        {"prefix_bits",
         [&](const Context& c, const std::string& v) { method->prefix_bits = parse_list<unsigned>(c, v); }},
        {"confidence",
         [&](const Context& c, const std::string& v) { method->confidence = parse_list<float>(c, v); }},
        {"use_pca", [&](const Context& c, const std::string& v) { method->base.use_pca = parse_bool(c, v); }},
        {"granularity",
         [&](const Context& c, const std::string& v) { method->base.granularity = parse_number<size_t>(c, v); }},
        {"pq_m", [&](const Context& c, const std::string& v) { method->base.pq_m = parse_number<size_t>(c, v); }},
        {"pq_k", [&](const Context& c, const std::string& v) { method->base.pq_k = parse_number<size_t>(c, v); }},
        {"train_iters",
         [&](const Context& c, const std::string& v) { method->base.train_iters = parse_number<size_t>(c, v); }},
        {"max_train",
         [&](const Context& c, const std::string& v) { method->base.max_train = parse_number<size_t>(c, v); }},
    };

    std::map<std::string, Handler>* current = &global;
    std::string section = "global";
    bool seen_dataset = false;
    bool seen_eval = false;
    bool dataset_has_path_key = false;
    std::string raw;
    size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto hash = raw.find('#');
        auto line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        Context ctx{origin, line_no, section, ""};
        if (line.front() == '[') {
            if (line.back() != ']') {
                ctx.fail(fmt::format("malformed section header '{}'", line));
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            ctx.section = section;
            if (section == "dataset") {
                if (seen_dataset) {
                    ctx.fail("section may appear only once");
                }
                seen_dataset = true;
                current = &dataset;
            } else if (section == "eval") {
                if (seen_eval) {
                    ctx.fail("section may appear only once");
                }
                seen_eval = true;
                current = &eval;
            } else if (section == "method") {
                cfg.methods.emplace_back();
                method = &cfg.methods.back();
                current = &method_keys;
            } else {
                ctx.fail(fmt::format("unknown section '{}'", section));
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            ctx.fail(fmt::format("expected key = value, got '{}'", line));
        }
        ctx.key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        auto it = current->find(ctx.key);
        if (it == current->end()) {
            ctx.fail("unknown key");
        }
        if (section == "dataset" && ctx.key == "path") {
            dataset_has_path_key = true;
        }
        it->second(ctx, value);
    }
    Context end{origin, line_no, "dataset", "path"};
    if (ds.source == "file") {
        if (!dataset_has_path_key || ds.path.empty()) {
            end.fail("required for source = file but missing");
        }
    } else {
        end.key = "n";
        if (ds.synthetic.n == 0) {
            end.fail("synthetic dataset needs n >= 1");
        }
        end.key = "dim";
        if (ds.synthetic.dim == 0) {
            end.fail("synthetic dataset needs dim >= 1");
        }
    }
    if (cfg.methods.empty()) {
        throw_error(ErrorCode::kConfig, fmt::format("{}: at least one [method] section is required", origin));
    }
    return cfg;
}

PipelineConfig
load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw_error(ErrorCode::kConfig, fmt::format("{}: cannot open config file", path));
    }
    return parse_pipeline_config(in, path);
}

}  // namespace saq
