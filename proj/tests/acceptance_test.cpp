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

// Acceptance suite. Runs every criterion and prints one PASS/FAIL line per
// criterion. Pass criterion numbers as arguments to run a subset.

#include <sys/wait.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "reference_m.h"
#include "stats_util.h"
#include "test_util.h"
#include "trinity/pipeline.h"

namespace trinity {
namespace {

// Pinned tolerances.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradRelFloor = 1e-6;
constexpr double kGradStep = 1e-5;
constexpr double kGradBudgetS = 5.0;
constexpr double kEmaTol = 1e-4;
constexpr double kSketchTol = 1e-6;
constexpr double kChiSquareMinP = 0.01;
constexpr double kPurityMin = 0.90;
constexpr double kClusteringBudgetS = 600.0;
constexpr double kPairedTMaxP = 0.05;
constexpr int kLongTailMinSeeds = 8;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string
fmt(double v, int precision = 4) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

double
seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---- 1: BCE gradient ----

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

// Loss evaluated in 50-digit arithmetic so central differences stay exact
// where the double loss saturates.
HighPrecision
bce_loss_oracle(const Vector& user, const std::vector<Vector>& targets, double label) {
    using boost::multiprecision::exp;
    using boost::multiprecision::log;
    HighPrecision total = 0;
    for (const auto& t : targets) {
        HighPrecision z = 0;
        for (size_t i = 0; i < user.size(); ++i) {
            z += HighPrecision(user[i]) * HighPrecision(t[i]);
        }
        // -log sigmoid(z) = log(1 + e^-z); -log(1 - sigmoid(z)) = log(1 + e^z)
        const HighPrecision margin = label == 1.0 ? HighPrecision(-z) : z;
        total += log(1 + exp(margin));
    }
    return total;
}

Outcome
bce_gradient_suite() {
    auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    std::uniform_real_distribution<double> scale(0.1, 2.0);
    double worst = 0.0;
    double worst_loss = 0.0;
    auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kGradRelFloor});
    };
    for (int point = 0; point < 100; ++point) {
        const size_t dim = 32;
        const double s = scale(rng);
        Vector user = test::random_vector(dim, rng, s);
        std::vector<Vector> targets;
        for (int t = 0; t < 3; ++t) {
            targets.push_back(test::random_vector(dim, rng, s));
        }
        const double label = point % 2;
        std::vector<std::span<const double>> views(targets.begin(), targets.end());
        auto res = bce_loss_and_gradient(user, views, label);
        const double oracle_loss = bce_loss_oracle(user, targets, label).convert_to<double>();
        worst_loss = std::max(worst_loss, rel(res.loss, oracle_loss));
        auto check = [&](double& coord, double analytic) {
            const double keep = coord;
            coord = keep + kGradStep;
            const HighPrecision up = bce_loss_oracle(user, targets, label);
            coord = keep - kGradStep;
            const HighPrecision down = bce_loss_oracle(user, targets, label);
            coord = keep;
            // the perturbed coordinates are exact doubles, so divide by their true spacing
            const HighPrecision spacing =
                HighPrecision(keep + kGradStep) - HighPrecision(keep - kGradStep);
            const HighPrecision numeric = (up - down) / spacing;
            worst = std::max(worst, rel(analytic, numeric.convert_to<double>()));
        };
        for (size_t i = 0; i < dim; ++i) {
            check(user[i], res.grad_user[i]);
        }
        for (size_t t = 0; t < 3; ++t) {
            for (size_t i = 0; i < dim; ++i) {
                check(targets[t][i], res.grad_targets[t][i]);
            }
        }
    }
    double secs = seconds_since(start);
    return {worst < kGradRelTol && worst_loss < kGradRelTol && secs < kGradBudgetS,
            "100 points, worst gradient relative error " + fmt(worst, 3) + ", loss " +
                fmt(worst_loss, 3) + ", " + fmt(secs, 3) + " s"};
}

// ---- 2: codebook assignment and EMA ----

ClusterId
scan_nearest(std::span<const double> x, const std::vector<Vector>& centroids) {
    ClusterId best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < centroids.size(); ++k) {
        double d = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            d += (x[i] - centroids[k][i]) * (x[i] - centroids[k][i]);
        }
        if (d < best_d) {
            best_d = d;
            best = static_cast<ClusterId>(k);
        }
    }
    return best;
}

Outcome
codebook_oracle() {
    Rng rng(202);
    std::uniform_int_distribution<size_t> dim_of(1, 32);
    std::uniform_int_distribution<size_t> count_of(1, 64);
    size_t mismatches = 0;
    for (int c = 0; c < 10000; ++c) {
        const size_t dim = dim_of(rng);
        const size_t j = count_of(rng);
        const size_t k = count_of(rng);
        ClusterCodebook cb(dim, j, k);
        std::vector<Vector> prim, sec;
        for (size_t a = 0; a < j; ++a) {
            // every fifth case duplicates a centroid to exercise ties
            prim.push_back(c % 5 == 0 && a > 0 ? prim[0] : test::random_vector(dim, rng));
            std::copy(prim.back().begin(), prim.back().end(),
                      cb.mutable_primary(static_cast<ClusterId>(a)).begin());
        }
        for (size_t b = 0; b < k; ++b) {
            sec.push_back(c % 5 == 0 && b > 0 ? sec[0] : test::random_vector(dim, rng));
            std::copy(sec.back().begin(), sec.back().end(),
                      cb.mutable_secondary(static_cast<ClusterId>(b)).begin());
        }
        auto x = test::random_vector(dim, rng);
        auto a = assign_item(x, cb);
        mismatches += (a.primary != scan_nearest(x, prim)) + (a.secondary != scan_nearest(x, sec));
    }

    ClusterCodebook cb(8, 2, 3, ClusterCodebook::kDefaultEmaDecay);
    auto start = test::random_vector(8, rng, 3.0);
    std::copy(start.begin(), start.end(), cb.mutable_primary(1).begin());
    std::copy(start.begin(), start.end(), cb.mutable_secondary(2).begin());
    auto v = test::random_vector(8, rng);
    std::vector<CodebookUpdate> updates{{v, 1, 2}};
    for (int step = 0; step < 2000; ++step) {
        cb.update_ema(updates);
    }
    double drift = 0.0;
    for (size_t i = 0; i < 8; ++i) {
        drift = std::max({drift, std::abs(cb.primary(1)[i] - v[i]),
                          std::abs(cb.secondary(2)[i] - v[i])});
    }
    return {mismatches == 0 && drift < kEmaTol,
            "10000 cases, " + std::to_string(mismatches) + " mismatches; EMA residual " +
                fmt(drift, 3)};
}

// ---- 3: multi-interest selection ----

Outcome
multi_interest_conformance() {
    Rng rng(303);
    std::uniform_int_distribution<int64_t> ts_of(1, 15);
    std::uniform_int_distribution<int64_t> extra(0, 30);
    std::uniform_int_distribution<size_t> nm_of(1, 25);
    size_t violations = 0;
    size_t reference_mismatches = 0;
    std::string first;
    for (int t = 0; t < 1000; ++t) {
        auto tree = test::random_tree(rng);
        TrinityMConfig cfg;
        cfg.secondary_threshold = ts_of(rng);
        cfg.primary_threshold = cfg.secondary_threshold + extra(rng);
        cfg.output_size = nm_of(rng);
        cfg.rng_seed = rng();
        auto why = test::check_multi_interest_invariants(tree, cfg);
        if (!why.empty()) {
            ++violations;
            if (first.empty()) {
                first = why;
            }
        }
        reference_mismatches +=
            select_multi_interest(tree, cfg) !=
            test::reference_select(tree, cfg.primary_threshold, cfg.secondary_threshold,
                                   cfg.output_size, cfg.rng_seed);
    }

    // hand-traced fixture: A{x:5, y:4}, B{z:3, w:1}, C{u:2}; Tp 3, Ts 2, N_M 2
    const ClusterId A = 0, B = 1, C = 2, x = 10, y = 11, z = 12, w = 13, u = 14;
    StructuralTree fixture{{A, {{x, 5}, {y, 4}}}, {B, {{z, 3}, {w, 1}}}, {C, {{u, 2}}}};
    std::set<ClusterId> branches;
    size_t fixture_mismatches = 0;
    for (uint64_t seed = 0; seed < 64; ++seed) {
        TrinityMConfig cfg;
        cfg.primary_threshold = 3;
        cfg.secondary_threshold = 2;
        cfg.output_size = 2;
        cfg.rng_seed = seed;
        for (const auto& pick : select_multi_interest_traced(fixture, cfg)) {
            if (pick.phase == SelectionPhase::DISPERSED) {
                branches.insert(pick.secondary);
            }
        }
        fixture_mismatches +=
            select_multi_interest(fixture, cfg) != test::reference_select(fixture, 3, 2, 2, seed);
    }
    (void)C, (void)w, (void)u, (void)z;
    bool both = branches == std::set<ClusterId>{x, y};
    std::string detail = "1000 trees, " + std::to_string(violations) + " invariant violations, " +
                         std::to_string(reference_mismatches) +
                         " reference mismatches; fixture branches " + (both ? "x,y" : "incomplete") +
                         ", " + std::to_string(fixture_mismatches) + " mismatches";
    if (!first.empty()) {
        detail += " (" + first + ")";
    }
    return {violations == 0 && reference_mismatches == 0 && both && fixture_mismatches == 0,
            detail};
}

// ---- 4: interval sketch convergence ----

Outcome
sketch_convergence() {
    double worst = 0.0;
    for (EventIndex gap : {3, 7, 50}) {
        IntervalSketch sketch(16, 0.1);
        for (int i = 0; i < 500; ++i) {
            sketch.update(5, gap * i);
        }
        worst = std::max(worst, std::abs(sketch.interval(5).value_or(0.0) - static_cast<double>(gap)));
    }
    return {worst < kSketchTol, "gaps 3/7/50, worst |B - g| " + fmt(worst, 3)};
}

// ---- 5: power-law sampler ----

Outcome
sampler_distribution() {
    const std::vector<int64_t> h{0, 1, 2, 3, 5, 8, 13, 21, 34, 55};
    std::vector<std::pair<ClusterId, int64_t>> candidates;
    for (size_t i = 0; i < h.size(); ++i) {
        candidates.emplace_back(static_cast<ClusterId>(i), h[i]);
    }
    const double beta = LongTailConfig{}.beta;
    std::vector<double> p_values;
    for (double alpha : {LongTailConfig{}.alpha, 0.0}) {
        std::vector<double> weight;
        double total = 0.0;
        for (int64_t v : h) {
            weight.push_back(std::pow(beta + static_cast<double>(v), alpha));
            total += weight.back();
        }
        const int n = 100000;
        std::vector<double> observed(h.size(), 0.0), expected(h.size());
        Rng rng(alpha == 0.0 ? 505 : 504);
        for (int i = 0; i < n; ++i) {
            observed[sample_clusters(candidates, 1, alpha, beta, rng)[0]] += 1.0;
        }
        for (size_t i = 0; i < h.size(); ++i) {
            expected[i] = n * weight[i] / total;
        }
        p_values.push_back(test::chi_square_p(observed, expected));
    }
    return {p_values[0] > kChiSquareMinP && p_values[1] > kChiSquareMinP,
            "100000 first draws, chi-square p " + fmt(p_values[0]) + " (alpha 0.75), " +
                fmt(p_values[1]) + " (alpha 0, uniform)"};
}

// ---- 6: planted-topic clustering ----

const char* kClusteringWorld =
    "world.n_items = 20000\n"
    "world.n_topics = 64\n"
    "world.zipf = 1.2\n"
    "world.popularity_zipf = 1.2\n"
    "world.n_users = 1000\n"
    "world.horizon = 1500\n"
    "trainer.num_primary = 64\n"
    "trainer.num_secondary = 256\n"
    "trainer.epochs = 5\n";

Outcome
planted_clustering() {
    auto start = std::chrono::steady_clock::now();
    PipelineConfig cfg;
    cfg.apply(KeyValueConfig::parse(kClusteringWorld, "clustering world"));
    cfg.seed = 606;
    auto seeds = cfg.stage_seeds();
    sim::WorldConfig wc = cfg.world;
    wc.seed = seeds["world"];
    auto world = sim::generate_world(wc);
    auto events = sim::simulate_stream(world, wc.horizon);

    auto table = ItemEmbeddingTable::random(world.all_items(), cfg.trainer.dim,
                                            seeds["embedding_init"]);
    ClusterCodebook codebook(cfg.trainer.dim, cfg.trainer.num_primary, cfg.trainer.num_secondary,
                             cfg.trainer.ema_decay);
    AssignmentStore store;
    TrainerConfig tc = cfg.trainer;
    tc.seed = seeds["trainer"];
    TwoTowerTrainer trainer(table, &codebook, &store, tc);
    trainer.initialize_codebook();
    std::string curve;
    for (size_t epoch = 0; epoch < tc.epochs; ++epoch) {
        EventSampleSource source(events, tc.window, tc.max_behaviors, derive_seed(tc.seed, epoch));
        trainer.train_epoch(source);
        curve += (epoch ? "/" : "") + fmt(sim::topic_purity(world, store), 3);
    }
    const double purity = sim::topic_purity(world, store);
    const double secs = seconds_since(start);
    return {purity >= kPurityMin && secs < kClusteringBudgetS,
            "64 topics, 20000 items, " + std::to_string(events.size()) + " events, purity by epoch " +
                curve + ", " + fmt(secs, 4) + " s"};
}

// ---- 7-9: simulated pipeline directions ----

const char* kPipelineWorld =
    "world.n_items = 2000\n"
    "world.n_topics = 16\n"
    "world.zipf = 0\n"
    "world.n_users = 200\n"
    "world.horizon = 1000\n"
    "trainer.num_primary = 16\n"
    "trainer.num_secondary = 64\n"
    "lt.longtail_size = 16\n"
    "lt.sample_size = 4\n"
    "l.neighbors = 5\n";

struct SeedRun {
    uint64_t seed = 0;
    sim::EvalReport report;
};

const std::vector<SeedRun>&
pipeline_runs() {
    static std::optional<std::vector<SeedRun>> runs;
    if (!runs) {
        runs.emplace();
        for (uint64_t seed = 1; seed <= 10; ++seed) {
            PipelineConfig cfg;
            cfg.apply(KeyValueConfig::parse(kPipelineWorld, "pipeline world"));
            cfg.seed = seed;
            runs->push_back({seed, run_pipeline(cfg).report});
        }
    }
    return *runs;
}

Outcome
complementariness() {
    const auto& runs = pipeline_runs();
    std::vector<double> with_m, base, niche_with_m, niche_base;
    double min_uniqueness = 1.0;
    size_t users = runs.front().report.users;
    for (const auto& r : runs) {
        with_m.push_back(r.report.interest_coverage.at("m_union_baseline"));
        base.push_back(r.report.interest_coverage.at("baseline"));
        niche_with_m.push_back(r.report.niche_coverage.at("m_union_baseline"));
        niche_base.push_back(r.report.niche_coverage.at("baseline"));
        min_uniqueness = std::min(min_uniqueness, r.report.uniqueness);
        users = std::min(users, r.report.users);
    }
    const double p = test::paired_t_p_greater(with_m, base);
    const double p_niche = test::paired_t_p_greater(niche_with_m, niche_base);
    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    bool pass = users >= 100 && runs.size() >= 5 && min_uniqueness > 0.0 && p < kPairedTMaxP &&
                p_niche < kPairedTMaxP;
    return {pass, std::to_string(runs.size()) + " seeds x " + std::to_string(users) +
                      " users; coverage M+baseline " + fmt(mean(with_m)) + " vs baseline " +
                      fmt(mean(base)) + " (p " + fmt(p, 3) + "); niche " + fmt(mean(niche_with_m)) +
                      " vs " + fmt(mean(niche_base)) + " (p " + fmt(p_niche, 3) +
                      "); min uniqueness " + fmt(min_uniqueness)};
}

Outcome
longtail_direction() {
    const auto& runs = pipeline_runs();
    int increased = 0;
    double weighted = 0.0, uniform = 0.0, delta = 0.0;
    for (const auto& r : runs) {
        increased += r.report.longtail_share_delta > 0.0;
        weighted += r.report.longtail_coverage_weighted;
        uniform += r.report.longtail_coverage_uniform;
        delta += r.report.longtail_share_delta;
    }
    const double n = static_cast<double>(runs.size());
    return {increased >= kLongTailMinSeeds && weighted >= uniform,
            "share up on " + std::to_string(increased) + "/" + std::to_string(runs.size()) +
                " seeds (mean delta " + fmt(delta / n, 3) + "); coverage weighted " +
                fmt(weighted / n) + " vs uniform " + fmt(uniform / n)};
}

Outcome
seed_age_direction() {
    const auto& runs = pipeline_runs();
    int older = 0;
    std::string ages;
    for (const auto& r : runs) {
        const auto& h = r.report.seed_age_histogram;
        older += h.dormant_median_trinity_l > h.dormant_median_recency;
        ages += (ages.empty() ? "" : " ") + fmt(h.dormant_median_trinity_l, 3) + "/" +
                fmt(h.dormant_median_recency, 3);
    }
    return {older == static_cast<int>(runs.size()),
            "dormant cohort median seed age (days, L/recency) " + ages};
}

// ---- 10: end-to-end determinism through the CLI ----

int
run_command(const std::string& cmd) {
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome
end_to_end_determinism() {
    test::TempDir dir;
    const auto cfg = dir.file("world.cfg");
    test::spit(cfg, kPipelineWorld);
    std::string base = std::string(TRINITY_CLI_PATH) + " --seed 10 --config " + cfg;
    int a = run_command(base + " --out-dir " + dir.file("a") + " pipeline > /dev/null");
    int b = run_command(base + " --out-dir " + dir.file("b") + " pipeline > /dev/null");
    if (a != 0 || b != 0) {
        return {false, "pipeline exit codes " + std::to_string(a) + ", " + std::to_string(b)};
    }
    auto ra = test::slurp(dir.file("a") + "/report.json");
    auto rb = test::slurp(dir.file("b") + "/report.json");
    return {!ra.empty() && ra == rb,
            "two pipeline runs, seed 10, report.json " + std::to_string(ra.size()) + " bytes, " +
                (ra == rb ? "identical" : "different")};
}

}  // namespace
}  // namespace trinity

int
main(int argc, char** argv) {
    using namespace trinity;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"bce gradient suite", bce_gradient_suite},
        {"codebook oracle equivalence", codebook_oracle},
        {"multi-interest conformance", multi_interest_conformance},
        {"interval sketch convergence", sketch_convergence},
        {"power-law sampler", sampler_distribution},
        {"planted-topic clustering", planted_clustering},
        {"complementariness", complementariness},
        {"long-tail share", longtail_direction},
        {"long-term seed age", seed_age_direction},
        {"end-to-end determinism", end_to_end_determinism},
    };
    std::set<size_t> only;
    for (int i = 1; i < argc; ++i) {
        only.insert(std::stoul(argv[i]));
    }
    int failed = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.contains(i + 1)) {
            continue;
        }
        Outcome out;
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        failed += !out.pass;
        std::cout << (out.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first
                  << ": " << out.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
