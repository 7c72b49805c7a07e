// Copyright 2026-present the trinity project
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

// trinity: command-line entry point for training, retrieval, simulation and
// evaluation. Every command writes its artifacts under --out-dir together
// with manifest.json.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>

#include "trinity/histogram.h"
#include "trinity/pipeline.h"
#include "trinity/text_io.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace trinity {
namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

const std::vector<std::pair<const char*, const char*>> kModuleVersions = {
    {"codebook", "1"},    {"trainer", "1"},      {"histogram", "1"},
    {"retriever_m", "1"}, {"retriever_lt", "1"}, {"retriever_l", "1"},
    {"rerank", "1"},      {"simharness", "1"},   {"cli", "1"},
};

struct Globals {
    std::optional<uint64_t> seed;
    std::string config_path;
    std::string out_dir = ".";
};

struct Session {
    PipelineConfig cfg;
    std::string canonical;  // canonical config text, hashed into the manifest
    Globals globals;

    std::string
    path(const std::string& name) const {
        return (fs::path(globals.out_dir) / name).string();
    }
};

Session
open_session(const Globals& g) {
    Session s;
    s.globals = g;
    if (!g.config_path.empty()) {
        auto kv = KeyValueConfig::load(g.config_path);
        s.cfg.apply(kv);
        s.canonical = kv.canonical();
    } else {
        s.cfg.validate();
    }
    if (g.seed) {
        s.cfg.seed = *g.seed;
    }
    s.canonical += "seed=" + std::to_string(s.cfg.seed) + "\n";
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) {
        throw_error(ErrorCode::IO, "cannot create output directory " + g.out_dir + ": " +
                                       ec.message());
    }
    return s;
}

std::string
hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Merges this command's entry into manifest.json; other commands' entries
// are preserved.
void
write_manifest(const Session& s,
               const std::string& command,
               const std::vector<std::string>& inputs,
               const std::vector<std::string>& outputs) {
    json manifest = json::object();
    const auto path = s.path("manifest.json");
    if (fs::exists(path)) {
        std::ifstream in(path);
        manifest = json::parse(in, nullptr, false);
        if (manifest.is_discarded() || !manifest.is_object()) {
            manifest = json::object();
        }
    }
    json entry;
    entry["config_path"] = s.globals.config_path;
    entry["config_hash"] = hex64(text::fnv1a64(s.canonical));
    entry["seed"] = s.cfg.seed;
    json seeds = json::object();
    for (const auto& [stage, seed] : s.cfg.stage_seeds()) {
        seeds[stage] = seed;
    }
    entry["stage_seeds"] = seeds;
    entry["inputs"] = inputs;
    entry["outputs"] = outputs;
    json versions = json::object();
    for (const auto& [module, version] : kModuleVersions) {
        versions[module] = version;
    }
    entry["module_versions"] = versions;
    manifest["commands"][command] = entry;
    text::write_file_atomic(path, manifest.dump(2) + "\n");
}

sim::World
make_world(const Session& s) {
    sim::WorldConfig wc = s.cfg.world;
    wc.seed = s.cfg.stage_seeds()["world"];
    return sim::generate_world(wc);
}

void
write_items(const std::string& path, const sim::World& world) {
    std::string out = "#item\ttopic\n";
    for (size_t i = 0; i < world.item_topic.size(); ++i) {
        out += std::to_string(i) + "\t" + std::to_string(world.item_topic[i]) + "\n";
    }
    text::write_file_atomic(path, out);
}

void
save_models(const Session& s, const TrainedModels& m, std::vector<std::string>& outputs) {
    m.embeddings.save(s.path("embeddings.tsv"));
    m.codebook.save(s.path("codebook.tsv"));
    m.store.save(s.path("assignments.tsv"));
    m.prerank.save(s.path("prerank.tsv"));
    m.stay_time.save(s.path("rerank.tsv"));
    for (const char* name :
         {"embeddings.tsv", "codebook.tsv", "assignments.tsv", "prerank.tsv", "rerank.tsv"}) {
        outputs.push_back(s.path(name));
    }
}

TrainedModels
load_models(const Session& s) {
    TrainedModels m;
    m.embeddings = ItemEmbeddingTable::load(s.path("embeddings.tsv"));
    m.codebook = ClusterCodebook::load(s.path("codebook.tsv"));
    m.store = AssignmentStore::load(s.path("assignments.tsv"));
    m.prerank = ItemEmbeddingTable::load(s.path("prerank.tsv"));
    m.stay_time = ItemEmbeddingTable::load(s.path("rerank.tsv"));
    m.trained = true;
    return m;
}

std::string
events_path(const Session& s, const std::string& override_path) {
    return override_path.empty() ? s.path("events.jsonl") : override_path;
}

BehaviorSequence
user_sequence(const std::vector<BehaviorEvent>& events, UserId user, size_t window) {
    auto sequences = build_sequences(events, window);
    auto it = sequences.find(user);
    return it == sequences.end() ? BehaviorSequence(user, window) : it->second;
}

uint64_t
user_seed(const Session& s, const char* stage, UserId user) {
    return derive_seed(s.cfg.stage_seeds()[stage], static_cast<uint64_t>(user));
}

std::vector<ClusterId>
multi_interest_for(const Session& s,
                   const BehaviorSequence& seq,
                   const AssignmentStore& store,
                   const ClusterCodebook& codebook,
                   UserId user) {
    auto hist = build_histogram(seq, store, codebook.num_primary(), codebook.num_secondary());
    TrinityMConfig mc = s.cfg.m;
    mc.rng_seed = user_seed(s, "trinity_m", user);
    return select_multi_interest(hist.tree, mc);
}

void
print_clusters(const std::vector<ClusterId>& clusters) {
    for (ClusterId c : clusters) {
        std::cout << c << "\n";
    }
}

// ---- commands ----

void
cmd_simulate(const Session& s) {
    auto world = make_world(s);
    auto events = sim::simulate_stream(world, world.config.horizon);
    write_items(s.path("items.tsv"), world);
    write_event_log(s.path("events.jsonl"), events);
    write_manifest(s, "simulate", {}, {s.path("items.tsv"), s.path("events.jsonl")});
    std::cout << "simulated " << events.size() << " events for " << world.users.size()
              << " users\n";
}

void
cmd_train(const Session& s, const std::string& events_in) {
    auto world = make_world(s);
    std::vector<BehaviorEvent> events;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    if (events_in.empty()) {
        events = sim::simulate_stream(world, world.config.horizon);
        write_items(s.path("items.tsv"), world);
        write_event_log(s.path("events.jsonl"), events);
        outputs = {s.path("items.tsv"), s.path("events.jsonl")};
    } else {
        events = read_event_log(events_in);
        inputs.push_back(events_in);
    }
    auto models = run_stage("train", [&] { return train_models(events, world.all_items(), s.cfg); });
    save_models(s, models, outputs);
    auto sketch = build_sketch(events, models.store, s.cfg);
    sketch.save(s.path("sketch.tsv"));
    outputs.push_back(s.path("sketch.tsv"));
    write_manifest(s, "train", inputs, outputs);
    for (size_t e = 0; e < models.epochs.size(); ++e) {
        const auto& losses = models.epochs[e].batch_losses;
        double mean = 0.0;
        for (double l : losses) {
            mean += l / static_cast<double>(losses.size());
        }
        std::cout << "epoch " << e << " mean_loss " << text::format_double(mean) << "\n";
    }
}

void
cmd_assign(const Session& s) {
    auto table = ItemEmbeddingTable::load(s.path("embeddings.tsv"));
    auto codebook = ClusterCodebook::load(s.path("codebook.tsv"));
    AssignmentStore store;
    for (size_t i = 0; i < table.size(); ++i) {
        store.set(table.items()[i], assign_item(table.row_at(i), codebook));
    }
    store.save(s.path("assignments.tsv"));
    write_manifest(s, "assign", {s.path("embeddings.tsv"), s.path("codebook.tsv")},
                   {s.path("assignments.tsv")});
    std::cout << "assigned " << store.size() << " items\n";
}

void
cmd_retrieve_m(const Session& s, UserId user, const std::string& events_in) {
    auto events = read_event_log(events_path(s, events_in));
    auto store = AssignmentStore::load(s.path("assignments.tsv"));
    auto codebook = ClusterCodebook::load(s.path("codebook.tsv"));
    auto seq = user_sequence(events, user, s.cfg.trainer.window);
    print_clusters(multi_interest_for(s, seq, store, codebook, user));
}

void
cmd_retrieve_lt(const Session& s, UserId user, const std::string& events_in) {
    auto events = read_event_log(events_path(s, events_in));
    auto store = AssignmentStore::load(s.path("assignments.tsv"));
    auto codebook = ClusterCodebook::load(s.path("codebook.tsv"));
    auto sketch = IntervalSketch::load(s.path("sketch.tsv"));
    auto seq = user_sequence(events, user, s.cfg.trainer.window);
    auto m = multi_interest_for(s, seq, store, codebook, user);
    auto hist = build_histogram(seq, store, codebook.num_primary(), codebook.num_secondary());
    LongTailConfig lc = s.cfg.lt;
    lc.rng_seed = user_seed(s, "trinity_lt", user);
    auto longtail = longtail_set(sketch, store.secondary_sizes(), lc);
    print_clusters(
        select_longtail(hist.h2, longtail, std::set<ClusterId>(m.begin(), m.end()), lc));
}

void
cmd_retrieve_l(const Session& s, UserId user, const std::string& events_in) {
    auto events = read_event_log(events_path(s, events_in));
    auto store = AssignmentStore::load(s.path("assignments.tsv"));
    auto prerank = ItemEmbeddingTable::load(s.path("prerank.tsv"));
    auto embeddings = ItemEmbeddingTable::load(s.path("embeddings.tsv"));
    auto seq = user_sequence(events, user, s.cfg.trainer.window);
    TrinityLConfig l = s.cfg.l;
    l.rng_seed = user_seed(s, "trinity_l", user);
    auto selection = disperse_and_sample(prerank_seeds(seq, prerank), store, l);
    std::vector<ItemId> seeds;
    std::set<ItemId> consumed;
    for (const auto& e : seq.entries()) {
        consumed.insert(e.item_id);
    }
    for (const auto& sd : selection.seeds) {
        seeds.push_back(sd.item);
    }
    auto result = i2i_search(seeds, embeddings, embeddings.items(), l.neighbors, consumed);
    for (const auto& c : result.candidates) {
        std::cout << c.item << "\t" << text::format_double(c.score) << "\n";
    }
}

void
cmd_rerank(const Session& s,
           UserId user,
           const std::string& candidates_path,
           size_t budget,
           const std::string& events_in) {
    auto events = read_event_log(events_path(s, events_in));
    auto table = ItemEmbeddingTable::load(s.path("rerank.tsv"));
    auto seq = user_sequence(events, user, s.cfg.trainer.window);
    std::vector<ItemId> candidates;
    std::vector<std::string> lines;
    if (candidates_path == "-") {
        for (std::string line; std::getline(std::cin, line);) {
            lines.push_back(line);
        }
    } else {
        lines = text::read_lines(candidates_path);
    }
    for (size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') {
            continue;
        }
        candidates.push_back(
            text::parse_int(lines[i], candidates_path + ":" + std::to_string(i + 1)));
    }
    auto user_vec = user_vector(table, seq);
    if (user_vec.empty()) {
        return;
    }
    for (const auto& sc : rerank(user_vec, candidates, table, budget)) {
        std::cout << sc.item << "\t" << text::format_double(sc.score) << "\n";
    }
}

void
cmd_eval(const Session& s, const std::string& events_in) {
    auto world = make_world(s);
    auto ev_path = events_path(s, events_in);
    auto events = read_event_log(ev_path);
    auto models = load_models(s);
    auto sketch = IntervalSketch::load(s.path("sketch.tsv"));
    std::vector<UserId> users;
    for (const auto& u : world.users) {
        users.push_back(u.id);
    }
    auto outputs = run_stage("retrieve",
                             [&] { return retrieve_all(users, events, models, sketch, s.cfg); });
    auto report = run_stage("evaluate", [&] {
        return sim::evaluate(world, models.store, events, outputs, s.cfg.eval);
    });
    text::write_file_atomic(s.path("report.json"), report.to_json() + "\n");
    write_manifest(s, "eval",
                   {ev_path, s.path("embeddings.tsv"), s.path("codebook.tsv"),
                    s.path("assignments.tsv"), s.path("prerank.tsv"), s.path("rerank.tsv"),
                    s.path("sketch.tsv")},
                   {s.path("report.json")});
    std::cout << report.to_json() << "\n";
}

void
cmd_pipeline(const Session& s) {
    auto result = run_pipeline(s.cfg);
    std::vector<std::string> outputs{s.path("items.tsv"), s.path("events.jsonl")};
    write_items(s.path("items.tsv"), result.world);
    write_event_log(s.path("events.jsonl"), result.events);
    save_models(s, result.models, outputs);
    result.sketch.save(s.path("sketch.tsv"));
    text::write_file_atomic(s.path("report.json"), result.report.to_json() + "\n");
    outputs.push_back(s.path("sketch.tsv"));
    outputs.push_back(s.path("report.json"));
    write_manifest(s, "pipeline", {}, outputs);
    std::cout << result.report.to_json() << "\n";
}

int
run(int argc, char** argv) {
    CLI::App app{"trinity: multi-interest, long-tail and long-term retrieval toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Base seed (overrides the config)");
    app.add_option("--config", g.config_path, "key=value configuration file");
    app.add_option("--out-dir", g.out_dir, "Directory for artifacts")->capture_default_str();

    std::string events_in;
    auto add_events = [&](CLI::App* sub) {
        sub->add_option("--events", events_in, "Event log (default: <out-dir>/events.jsonl)");
    };

    auto* simulate = app.add_subcommand("simulate", "Generate a world and its event log");
    auto* train = app.add_subcommand("train", "Train embeddings, codebook and assignments");
    add_events(train);
    auto* assign = app.add_subcommand("assign", "Re-assign items with the stored codebook");

    UserId user = 0;
    std::optional<size_t> tp, ts, nm;
    bool any_child = false;
    auto* rm = app.add_subcommand("retrieve-m", "Multi-interest clusters for one user");
    rm->add_option("--user", user, "User id")->required();
    rm->add_option("--tp", tp, "Primary-count threshold");
    rm->add_option("--ts", ts, "Secondary-count threshold");
    rm->add_option("--nm", nm, "Number of clusters");
    rm->add_flag("--any-child", any_child, "Phase-1 eligibility needs only one qualifying child");
    add_events(rm);

    std::optional<size_t> item_threshold, response_threshold, nc, nlt;
    std::optional<double> alpha, beta;
    auto* rlt = app.add_subcommand("retrieve-lt", "Long-tail clusters for one user");
    rlt->add_option("--user", user, "User id")->required();
    rlt->add_option("--nc", nc, "Size of the long-tail set");
    rlt->add_option("--item-threshold", item_threshold, "Minimum items per long-tail cluster");
    rlt->add_option("--response-threshold", response_threshold,
                    "Maximum user responses to a candidate cluster");
    rlt->add_option("--nlt", nlt, "Clusters to sample");
    rlt->add_option("--alpha", alpha, "Interval exponent");
    rlt->add_option("--beta", beta, "Smoothing constant");
    add_events(rlt);

    std::optional<size_t> tc, ns, nl, knn;
    auto* rl = app.add_subcommand("retrieve-l", "Long-term neighbours for one user");
    rl->add_option("--user", user, "User id")->required();
    rl->add_option("--tc", tc, "Per-cluster cap while scanning");
    rl->add_option("--ns", ns, "Dispersed pool size");
    rl->add_option("--nl", nl, "Seeds drawn from the pool");
    rl->add_option("--knn", knn, "Neighbours per seed");
    add_events(rl);

    std::string candidates_path = "-";
    size_t budget = 100;
    auto* rr = app.add_subcommand("rerank", "Score candidates with the stay-time model");
    rr->add_option("--user", user, "User id")->required();
    rr->add_option("--candidates", candidates_path, "Item ids, one per line ('-' for stdin)");
    rr->add_option("--budget", budget, "Items to keep")->capture_default_str();
    add_events(rr);

    auto* eval = app.add_subcommand("eval", "Retrieve for every user and write report.json");
    add_events(eval);
    auto* pipeline = app.add_subcommand("pipeline", "Run the whole simulated pipeline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    Session s = open_session(g);
    auto override_if = [](auto& field, const auto& opt) {
        if (opt) {
            field = *opt;
        }
    };
    override_if(s.cfg.m.primary_threshold, tp);
    override_if(s.cfg.m.secondary_threshold, ts);
    override_if(s.cfg.m.output_size, nm);
    if (any_child) {
        s.cfg.m.require_all_children = false;
    }
    override_if(s.cfg.lt.item_threshold, item_threshold);
    override_if(s.cfg.lt.response_threshold, response_threshold);
    override_if(s.cfg.lt.longtail_size, nc);
    override_if(s.cfg.lt.sample_size, nlt);
    override_if(s.cfg.lt.alpha, alpha);
    override_if(s.cfg.lt.beta, beta);
    override_if(s.cfg.l.per_cluster_cap, tc);
    override_if(s.cfg.l.pool_size, ns);
    override_if(s.cfg.l.seed_count, nl);
    override_if(s.cfg.l.neighbors, knn);
    try {
        s.cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::USAGE, e.what());
    }

    if (*simulate) {
        cmd_simulate(s);
    } else if (*train) {
        cmd_train(s, events_in);
    } else if (*assign) {
        cmd_assign(s);
    } else if (*rm) {
        cmd_retrieve_m(s, user, events_in);
    } else if (*rlt) {
        cmd_retrieve_lt(s, user, events_in);
    } else if (*rl) {
        cmd_retrieve_l(s, user, events_in);
    } else if (*rr) {
        cmd_rerank(s, user, candidates_path, budget, events_in);
    } else if (*eval) {
        cmd_eval(s, events_in);
    } else if (*pipeline) {
        cmd_pipeline(s);
    }
    return 0;
}

}  // namespace
}  // namespace trinity

int
main(int argc, char** argv) {
    try {
        return trinity::run(argc, argv);
    } catch (const trinity::Error& e) {
        std::cerr << "trinity: " << trinity::error_code_name(e.code()) << ": " << e.what() << "\n";
        return e.code() == trinity::ErrorCode::USAGE ? trinity::kExitUsage : trinity::kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "trinity: " << e.what() << "\n";
        return trinity::kExitRuntime;
    }
}
