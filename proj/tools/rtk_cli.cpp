// Command-line harness: dataset generation, single/batch selection with
// machine-readable run reports, and benchmark/ablation sweeps.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtk/batch.hpp"
#include "rtk/datagen.hpp"
#include "rtk/engine.hpp"
#include "rtk/io.hpp"
#include "rtk/oracle.hpp"
#include "rtk/scaling.hpp"

using json = nlohmann::json;
using namespace rtk;

namespace {

// ---- shared option plumbing ----------------------------------------------

struct EngineFlags {
    unsigned d = 12;
    std::size_t block = 1024;
    unsigned grid = 4;
    std::size_t pack = 16;
    std::string buffer = "efficient";
    std::string reschedule = "on";
    std::string pad = "on";
    std::string scale = "off";
    double tau = 0.5;
    std::uint64_t seed = 0;
    std::string order = "largest";
    std::string format = "json";
    bool verify = false;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& f) {
    cmd->add_option("--d", f.d, "digit width in bits");
    cmd->add_option("--block", f.block, "elements per partition");
    cmd->add_option("--grid", f.grid, "worker count (RTK_WORKERS overrides)");
    cmd->add_option("--pack", f.pack, "modeled pack size in bytes");
    cmd->add_option("--buffer", f.buffer, "write buffer policy")
        ->check(CLI::IsMember({"naive", "efficient"}));
    cmd->add_option("--reschedule", f.reschedule, "batch task rescheduling")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--pad", f.pad, "offset padding for the transaction model")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--scale", f.scale, "adversarial-input scaling")
        ->check(CLI::IsMember({"off", "always", "adaptive"}));
    cmd->add_option("--tau", f.tau, "adaptive scaling trigger fraction");
    cmd->add_option("--seed", f.seed, "seed for scaling draws and generators");
    cmd->add_flag("--verify", f.verify, "check results against the sort oracle");
    cmd->add_option("--order", f.order, "selection order")
        ->check(CLI::IsMember({"largest", "smallest"}));
    cmd->add_option("--format", f.format, "report format")
        ->check(CLI::IsMember({"json", "csv"}));
}

EngineConfig to_config(const EngineFlags& f) {
    EngineConfig cfg;
    cfg.d = f.d;
    cfg.block_size = f.block;
    cfg.grid_size = f.grid;
    if (const char* env = std::getenv("RTK_WORKERS")) {
        int workers = std::atoi(env);
        if (workers < 1) throw std::invalid_argument("RTK_WORKERS must be a positive integer");
        cfg.grid_size = static_cast<unsigned>(workers);
    }
    cfg.pack_size = f.pack;
    cfg.buffer_policy =
        f.buffer == "naive" ? BufferPolicy::Naive : BufferPolicy::FlushEfficient;
    cfg.validate();
    return cfg;
}

SelectionOrder to_order(const EngineFlags& f) {
    return f.order == "largest" ? SelectionOrder::Largest : SelectionOrder::Smallest;
}

ScalePolicy to_scale_policy(const EngineFlags& f) {
    ScalePolicy policy;
    policy.mode = f.scale == "always"     ? ScaleMode::Always
                  : f.scale == "adaptive" ? ScaleMode::Adaptive
                                          : ScaleMode::Off;
    policy.trigger_fraction = f.tau;
    policy.seed = f.seed;
    return policy;
}

// FNV-1a over the normalized (value bits, index) stream.
template <typename T>
std::uint64_t result_checksum(const TopKResult<T>& result) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](const void* data, std::size_t size) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
    };
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        mix(&result.values[i], sizeof(T));
        mix(&result.indices[i], sizeof(std::uint64_t));
    }
    return h;
}

json instrumentation_json(const Instrumentation& instr) {
    return {{"passes", instr.passes},
            {"flushes", instr.total_flushes()},
            {"partitions", instr.total_partitions()},
            {"global_merges", instr.global_merges},
            {"elements_scanned", instr.elements_scanned},
            {"modeled_transactions", instr.modeled_transactions}};
}

json config_json(const EngineFlags& f, const EngineConfig& cfg) {
    return {{"d", cfg.d},
            {"block_size", cfg.block_size},
            {"grid_size", cfg.grid_size},
            {"pack_size", cfg.pack_size},
            {"buffer", f.buffer},
            {"reschedule", f.reschedule},
            {"pad", f.pad},
            {"scale", f.scale},
            {"tau", f.tau},
            {"order", f.order},
            {"seed", f.seed}};
}

void emit_report(const json& report, const std::string& format) {
    if (format == "json") {
        std::cout << report.dump(2) << "\n";
        return;
    }
    // CSV: one row per task, config flattened into leading columns
    const json& cfg = report.at("config");
    const json& instr = report.at("instrumentation");
    std::cout << "task,k,n,pivot,checksum,verified,passes,flushes,global_merges,"
                 "elements_scanned,modeled_transactions,wall_ms,d,block_size,grid_size,"
                 "pack_size,buffer,order,seed\n";
    for (const json& task : report.at("tasks")) {
        std::cout << task.at("task") << ',' << task.at("k") << ',' << task.at("n") << ','
                  << task.at("pivot") << ',' << task.at("checksum") << ','
                  << (report.value("verified", false) ? 1 : 0) << ',' << instr.at("passes")
                  << ',' << instr.at("flushes") << ',' << instr.at("global_merges") << ','
                  << instr.at("elements_scanned") << ',' << instr.at("modeled_transactions")
                  << ',' << report.at("wall_ms") << ',' << cfg.at("d") << ','
                  << cfg.at("block_size") << ',' << cfg.at("grid_size") << ','
                  << cfg.at("pack_size") << ',' << cfg.at("buffer").get<std::string>() << ','
                  << cfg.at("order").get<std::string>() << ',' << cfg.at("seed") << "\n";
    }
}

// ---- gen ------------------------------------------------------------------

struct GenArgs {
    std::string dist;
    std::vector<double> params;
    std::size_t n = 0;
    double s = 1.1;
    double mass = 0.8;
    unsigned modes = 1;
    std::uint64_t seed = 0;
    std::string dtype = "f32";
    std::string out;
};

int cmd_gen(const GenArgs& args) {
    DistributionSpec spec;
    spec.n = args.n;
    spec.seed = args.seed;
    spec.s = args.s;
    spec.mass = args.mass;
    spec.modes = args.modes;
    if (args.dist == "uniform") {
        spec.kind = DistKind::Uniform;
        if (args.params.size() >= 2) {
            spec.a = args.params[0];
            spec.b = args.params[1];
        }
    } else if (args.dist == "normal") {
        spec.kind = DistKind::Normal;
        spec.a = args.params.size() >= 1 ? args.params[0] : 0.0;
        spec.b = args.params.size() >= 2 ? args.params[1] : 1.0;
    } else if (args.dist == "zipf") {
        spec.kind = DistKind::Zipf;
    } else if (args.dist == "peaked") {
        spec.kind = DistKind::Peaked;
    } else {
        std::cerr << "unknown distribution: " << args.dist << "\n";
        return 1;
    }
    spec.validate();

    if (args.dtype == "f32") {
        auto data = generate<float>(spec);
        write_dataset(args.out, std::span<const float>(data));
    } else if (args.dtype == "u32") {
        auto data = generate<std::uint32_t>(spec);
        write_dataset(args.out, std::span<const std::uint32_t>(data));
    } else {
        std::cerr << "unsupported dtype: " << args.dtype << " (f16 is not built)\n";
        return 1;
    }
    std::cerr << "wrote " << spec.n << " " << args.dtype << " elements to " << args.out << "\n";
    return 0;
}

// ---- topk -----------------------------------------------------------------

struct TopkArgs {
    std::vector<std::string> inputs;
    std::vector<std::uint64_t> ks;
    std::string out;
    EngineFlags flags;
};

template <typename T>
void write_result_file(const std::string& prefix, std::size_t task, std::size_t task_count,
                       const TopKResult<T>& result) {
    if (prefix.empty()) return;
    std::string path = task_count == 1 ? prefix : prefix + ".task" + std::to_string(task);
    write_dataset(path, std::span<const T>(result.values));
}

template <typename T>
int run_topk(const std::vector<std::vector<T>>& payloads, const TopkArgs& args) {
    EngineConfig cfg = to_config(args.flags);
    SelectionOrder order = to_order(args.flags);
    BatchOptions opts{args.flags.reschedule == "on", args.flags.pad == "on"};
    ScalePolicy scale = to_scale_policy(args.flags);

    Instrumentation instr;
    instr.reset(cfg.grid_size);
    std::vector<TopKResult<T>> results;
    auto start = std::chrono::steady_clock::now();

    if (payloads.size() == 1) {
        std::span<const T> input(payloads[0]);
        std::uint64_t k = args.ks[0];
        if constexpr (std::is_same_v<T, float>) {
            results.push_back(scaled_topk(input, k, order, cfg, scale, instr));
        } else {
            if (scale.mode != ScaleMode::Off)
                throw std::invalid_argument("--scale applies to f32 inputs only");
            results.push_back(topk(input, k, order, cfg, instr));
        }
        instr.modeled_transactions +=
            task_transactions(0, input.size(), sizeof(T), cfg.pack_size, opts.padding);
    } else {
        if (scale.mode != ScaleMode::Off)
            throw std::invalid_argument("--scale is a single-input option");
        std::vector<std::uint64_t> ks = args.ks;
        if (ks.size() == 1) ks.assign(payloads.size(), ks[0]);
        if (ks.size() != payloads.size())
            throw std::invalid_argument("need one k per input (or a single shared k)");
        auto batch = BatchInput<T>::concatenate(payloads, std::move(ks));
        results = batch_topk(batch, order, cfg, opts, instr);
    }
    double wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    bool verified = true;
    json tasks = json::array();
    for (std::size_t t = 0; t < results.size(); ++t) {
        if (args.flags.verify && args.flags.scale == "off") {
            auto expected =
                oracle_topk(std::span<const T>(payloads[t]), args.ks.size() == 1
                                                                 ? args.ks[0]
                                                                 : args.ks[t],
                            order);
            verified &= results[t].values == expected.values &&
                        results[t].indices == expected.indices;
        }
        tasks.push_back({{"task", t},
                         {"k", results[t].values.size()},
                         {"n", payloads[t].size()},
                         {"pivot", results[t].pivot},
                         {"checksum", result_checksum(results[t])}});
        write_result_file(args.out, t, results.size(), results[t]);
    }

    json report = {{"config", config_json(args.flags, cfg)},
                   {"tasks", tasks},
                   {"instrumentation", instrumentation_json(instr)},
                   {"wall_ms", wall_ms}};
    if (args.flags.verify) report["verified"] = verified;
    emit_report(report, args.flags.format);
    return args.flags.verify && !verified ? 1 : 0;
}

int cmd_topk(const TopkArgs& args) {
    if (args.ks.empty()) throw std::invalid_argument("--k is required");

    // every input is an RTK1 dataset; multiple inputs form a batch in order
    std::vector<Dataset> datasets;
    for (const auto& path : args.inputs) datasets.push_back(read_dataset(path));
    DType dtype = datasets.front().dtype;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        if (datasets[i].dtype != dtype)
            throw std::invalid_argument(args.inputs[i] + ": mixed dtypes in one batch");
        if (datasets[i].dtype == DType::F32) {
            std::int64_t at = find_nan(datasets[i].f32);
            if (at >= 0)
                throw std::invalid_argument(args.inputs[i] + ": contains NaN at index " +
                                            std::to_string(at) + "; reject or clean the input");
        }
    }

    if (dtype == DType::F32) {
        std::vector<std::vector<float>> payloads;
        for (auto& ds : datasets) payloads.push_back(std::move(ds.f32));
        return run_topk(payloads, args);
    }
    std::vector<std::vector<std::uint32_t>> payloads;
    for (auto& ds : datasets) payloads.push_back(std::move(ds.u32));
    return run_topk(payloads, args);
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
    std::vector<std::size_t> ns{1 << 21};
    std::vector<std::uint64_t> ks{16, 64, 256, 1024, 4096};
    std::string dist = "uniform";
    std::size_t batch = 1;
    unsigned repeats = 3;
    bool ablate = false;
    bool quantile = false;
    EngineFlags flags;
};

struct Variant {
    std::string name;
    bool hier, efficient, reschedule, pad;
};

std::vector<Variant> ablation_variants() {
    // baseline = everything on; each optimization isolated and excluded
    std::vector<Variant> v;
    v.push_back({"all-on", true, true, true, true});
    const char* names[4] = {"hier-atomics", "flush-buffer", "reschedule", "pad"};
    for (int i = 0; i < 4; ++i) {
        Variant only{std::string("only-") + names[i], i == 0, i == 1, i == 2, i == 3};
        Variant except{std::string("no-") + names[i], i != 0, i != 1, i != 2, i != 3};
        v.push_back(only);
        v.push_back(except);
    }
    return v;
}

DistKind bench_dist(const std::string& name) {
    if (name == "uniform") return DistKind::Uniform;
    if (name == "normal") return DistKind::Normal;
    if (name == "zipf") return DistKind::Zipf;
    throw std::invalid_argument("bench supports uniform|normal|zipf");
}

json bench_cell(std::size_t n, std::uint64_t k, std::size_t batch_size, const Variant& variant,
                const BenchArgs& args, const EngineConfig& base_cfg, SelectionOrder order) {
    EngineConfig cfg = base_cfg;
    cfg.hierarchical_atomics = variant.hier;
    cfg.buffer_policy = variant.efficient ? BufferPolicy::FlushEfficient : BufferPolicy::Naive;
    BatchOptions opts{variant.reschedule, variant.pad};

    std::vector<std::vector<float>> payloads;
    std::vector<std::uint64_t> ks;
    for (std::size_t t = 0; t < batch_size; ++t) {
        DistributionSpec spec;
        spec.kind = bench_dist(args.dist);
        spec.s = 1.1;
        spec.n = (t == 0 && batch_size > 1) ? n - 1 : n;  // keep batches misaligned
        spec.seed = args.flags.seed + 100 * t + n + k;
        payloads.push_back(generate<float>(spec));
        ks.push_back(k);
    }
    auto batch = BatchInput<float>::concatenate(payloads, std::move(ks));

    std::vector<double> times;
    Instrumentation instr;
    bool verified = true;
    std::uint64_t checksum = 0;
    for (unsigned r = 0; r < args.repeats; ++r) {
        instr.reset(cfg.grid_size);
        auto start = std::chrono::steady_clock::now();
        auto results = batch_topk(batch, order, cfg, opts, instr);
        times.push_back(std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count());
        checksum = 0;
        for (std::size_t t = 0; t < results.size(); ++t) {
            checksum ^= result_checksum(results[t]);
            if (r == 0 && args.flags.verify)
                verified &= results[t].values ==
                            oracle_topk(batch.task_view(t), batch.ks[t], order).values;
        }
    }
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];

    json cell = {{"variant", variant.name}, {"n", n},        {"k", k},
                 {"batch", batch_size},     {"median_ms", median}, {"checksum", checksum},
                 {"instrumentation", instrumentation_json(instr)}};
    if (args.flags.verify) cell["verified"] = verified;
    return cell;
}

int cmd_bench(const BenchArgs& args) {
    EngineConfig base_cfg = to_config(args.flags);
    SelectionOrder order = to_order(args.flags);

    std::vector<Variant> variants;
    if (args.ablate) {
        variants = ablation_variants();
    } else {
        variants.push_back({"configured", true,
                            args.flags.buffer == "efficient",
                            args.flags.reschedule == "on", args.flags.pad == "on"});
    }

    json cells = json::array();
    for (std::size_t n : args.ns) {
        std::vector<std::uint64_t> ks = args.ks;
        if (args.quantile) ks = {n / 100, n / 4, n / 2};
        for (std::uint64_t k : ks) {
            if (k == 0 || k > n) continue;
            for (const Variant& variant : variants) {
                try {
                    cells.push_back(
                        bench_cell(n, k, args.batch, variant, args, base_cfg, order));
                } catch (const std::exception& e) {
                    // report the failure in its cell and keep sweeping
                    cells.push_back({{"variant", variant.name},
                                     {"n", n},
                                     {"k", k},
                                     {"batch", args.batch},
                                     {"error", e.what()}});
                }
            }
        }
    }

    if (args.flags.format == "json") {
        std::cout << json{{"config", config_json(args.flags, base_cfg)}, {"cells", cells}}.dump(2)
                  << "\n";
    } else {
        std::cout << "variant,n,k,batch,median_ms,checksum,verified,passes,flushes,"
                     "global_merges,elements_scanned,modeled_transactions,error\n";
        for (const json& cell : cells) {
            std::cout << cell.at("variant").get<std::string>() << ',' << cell.at("n") << ','
                      << cell.at("k") << ',' << cell.at("batch") << ',';
            if (cell.contains("error")) {
                std::cout << ",,,,,,,," << '"' << cell.at("error").get<std::string>() << '"'
                          << "\n";
                continue;
            }
            const json& instr = cell.at("instrumentation");
            std::cout << cell.at("median_ms") << ',' << cell.at("checksum") << ','
                      << (cell.value("verified", true) ? 1 : 0) << ',' << instr.at("passes")
                      << ',' << instr.at("flushes") << ',' << instr.at("global_merges") << ','
                      << instr.at("elements_scanned") << ','
                      << instr.at("modeled_transactions") << ",\n";
        }
    }

    for (const json& cell : cells)
        if (cell.value("verified", true) == false) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batched radix top-k selection harness"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a dataset file");
    gen_cmd->add_option("dist", gen.dist, "uniform|normal|zipf|peaked")->required();
    gen_cmd->add_option("params", gen.params, "uniform: lo hi; normal: mean sigma");
    gen_cmd->add_option("--n", gen.n, "element count")->required();
    gen_cmd->add_option("--s", gen.s, "zipf skewness");
    gen_cmd->add_option("--mass", gen.mass, "peaked: mode mass");
    gen_cmd->add_option("--modes", gen.modes, "peaked: mode count");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--dtype", gen.dtype, "f32|u32")
        ->check(CLI::IsMember({"f32", "u32"}));
    gen_cmd->add_option("-o,--out", gen.out, "output path")->required();

    TopkArgs topk_args;
    auto* topk_cmd = app.add_subcommand("topk", "select top-k from dataset file(s)");
    topk_cmd->add_option("inputs", topk_args.inputs, "dataset files; several form a batch")
        ->required();
    topk_cmd->add_option("--k", topk_args.ks, "rank(s); one per input or a shared value")
        ->required();
    topk_cmd->add_option("-o,--out", topk_args.out, "result file (prefix for batches)");
    add_engine_flags(topk_cmd, topk_args.flags);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "sweep sizes, ranks, and toggles");
    bench_cmd->add_option("--n-list", bench.ns, "input sizes");
    bench_cmd->add_option("--k-list", bench.ks, "ranks");
    bench_cmd->add_option("--dist", bench.dist, "uniform|normal|zipf");
    bench_cmd->add_option("--batch", bench.batch, "tasks per cell");
    bench_cmd->add_option("--repeats", bench.repeats, "runs per cell (median reported)");
    bench_cmd->add_flag("--ablate", bench.ablate, "run the 9-variant optimization matrix");
    bench_cmd->add_flag("--quantile", bench.quantile, "use k in {n/100, n/4, n/2}");
    add_engine_flags(bench_cmd, bench.flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (topk_cmd->parsed()) return cmd_topk(topk_args);
        return cmd_bench(bench);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
