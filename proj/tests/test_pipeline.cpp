#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "stereo/parallel.hpp"
#include "stereo/pipeline.hpp"
#include "support/synthetic.hpp"

using namespace stereo;

TEST(StripePlan, SingleWorkerTakesAll) {
    EXPECT_EQ(stripe_plan(10, 1), (std::vector<RowRange>{{0, 10}}));
}

TEST(StripePlan, BalancedSplit) {
    EXPECT_EQ(stripe_plan(10, 3), (std::vector<RowRange>{{0, 4}, {4, 7}, {7, 10}}));
}

TEST(StripePlan, MoreWorkersThanRows) {
    const auto plan = stripe_plan(2, 8);
    ASSERT_EQ(plan.size(), 8u);
    int non_empty = 0;
    for (auto r : plan) non_empty += r.size() > 0;
    EXPECT_EQ(non_empty, 2);
}

TEST(StripePlan, CoversRangeExactlyOnce) {
    for (int h = 0; h < 40; ++h)
        for (int w = 1; w < 12; ++w) {
            const auto plan = stripe_plan(h, w);
            int next = 0, lo = h, hi = 0;
            for (auto r : plan) {
                EXPECT_EQ(r.begin, next);
                next = r.end;
                lo = std::min(lo, r.size());
                hi = std::max(hi, r.size());
            }
            EXPECT_EQ(next, h);
            EXPECT_LE(hi - lo, 1);
        }
}

TEST(StripePlan, RejectsZeroWorkers) { EXPECT_THROW(stripe_plan(5, 0), ContractViolation); }

TEST(ForEachStripe, VisitsEveryRowOnce) {
    std::vector<std::atomic<int>> hits(37);
    for_each_stripe(37, 5, [&](RowRange r) {
        for (int y = r.begin; y < r.end; ++y) ++hits[static_cast<std::size_t>(y)];
    });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ForEachStripe, PropagatesWorkerException) {
    EXPECT_THROW(for_each_stripe(8, 4,
                                 [](RowRange r) {
                                     if (r.begin == 6) throw std::runtime_error("boom");
                                 }),
                 std::runtime_error);
}

TEST(Estimate, IdenticalPairGivesZero) {
    std::mt19937 rng(1);
    const auto img = synth::random_image(48, 32, rng);
    const auto cfg = PipelineConfig::for_cost(CostFunction::census5x5, {0, 15});
    const auto [disp, stats] = estimate(img, img, cfg);
    ASSERT_GT(disp.valid_count(), 0u);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 48; ++x)
            if (auto d = disp.get(x, y)) {
                EXPECT_EQ(*d, 0.0f) << x << "," << y;
            }
}

TEST(Estimate, ShiftedBandsGivePlateau) {
    // vertical bands of random width and intensity, shifted by 7 px
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> width(1, 4), value(0, 255);
    GrayImage left(80, 40);
    for (int x = 0; x < 80;) {
        const int w = width(rng);
        const auto v = static_cast<std::uint8_t>(value(rng));
        for (int i = x; i < std::min(80, x + w); ++i)
            for (int y = 0; y < 40; ++y) left(i, y) = static_cast<std::uint8_t>(v ^ ((y * 37) & 0x1f));
        x += w;
    }
    const auto right = synth::shifted_right(left, 7, rng);
    const auto cfg = PipelineConfig::for_cost(CostFunction::census9x7, {0, 15});
    const auto [disp, stats] = estimate(left, right, cfg);
    int checked = 0;
    for (int y = 3; y < 37; ++y)
        for (int x = 7 + 4; x < 80 - 4; ++x) {
            ASSERT_TRUE(disp.is_valid(x, y)) << x << "," << y;
            EXPECT_EQ(std::lround(*disp.get(x, y)), 7) << x << "," << y;
            ++checked;
        }
    EXPECT_GT(checked, 1000);
}

TEST(Estimate, WorkerCountDoesNotChangeResult) {
    std::mt19937 rng(3);
    for (auto f : {CostFunction::census9x7, CostFunction::ncc5x5}) {
        const auto left = synth::random_image(57, 31, rng);
        const auto right = synth::shifted_right(left, 4, rng);
        auto cfg = PipelineConfig::for_cost(f, {0, 23});
        for (auto c : {Consistency::approximate, Consistency::exact}) {
            cfg.consistency = c;
            cfg.workers = 1;
            const auto base = estimate(left, right, cfg).first;
            for (int w : {2, 3, 8}) {
                cfg.workers = w;
                EXPECT_EQ(estimate(left, right, cfg).first, base);
            }
        }
    }
}

TEST(Estimate, EqualsStageComposition) {
    std::mt19937 rng(4);
    const auto left = synth::random_image(40, 30, rng);
    const auto right = synth::shifted_right(left, 3, rng);
    const auto cfg = PipelineConfig::for_cost(CostFunction::census9x7, {0, 11});

    CostVolume cost;
    compute_cost_volume(left, right, cfg.cost_function, cfg.range, cost);
    const auto agg = aggregate_all(cost, cfg.paths, {cfg.p1, cfg.p2, cfg.normalize});
    auto disp = subpixel_refine(wta(agg), agg);
    disp = consistency_check(disp, approx_right_disparity(agg), cfg.consistency_threshold);
    disp = median3x3(disp);

    EXPECT_EQ(estimate(left, right, cfg).first, disp);
}

TEST(Estimate, StagesCanBeSwitchedOff) {
    std::mt19937 rng(5);
    const auto left = synth::random_image(30, 20, rng);
    const auto right = synth::random_image(30, 20, rng);
    auto cfg = PipelineConfig::for_cost(CostFunction::census5x5, {0, 7});
    cfg.subpixel = false;
    cfg.consistency = Consistency::off;
    cfg.median = false;
    CostVolume cost;
    compute_cost_volume(left, right, cfg.cost_function, cfg.range, cost);
    EXPECT_EQ(estimate(left, right, cfg).first, wta(aggregate_all(cost, 8, {cfg.p1, cfg.p2})));
}

TEST(Estimate, WorkspaceReuseGivesSameResult) {
    std::mt19937 rng(6);
    const auto left = synth::random_image(33, 22, rng);
    const auto right = synth::shifted_right(left, 2, rng);
    const auto cfg = PipelineConfig::for_cost(CostFunction::census9x7, {0, 9});
    Workspace ws;
    const auto first = estimate(left, right, cfg, ws).first;
    EXPECT_EQ(estimate(left, right, cfg, ws).first, first);
}

TEST(Estimate, RejectsInvalidConfig) {
    GrayImage l(40, 30), r(40, 29);
    EXPECT_THROW(estimate(l, r, PipelineConfig{}), ConfigError);
}

TEST(Estimate, StatsAreConsistent) {
    std::mt19937 rng(7);
    const auto left = synth::random_image(64, 48, rng);
    const auto cfg = PipelineConfig::for_cost(CostFunction::census9x7, {0, 31});
    const auto stats = estimate(left, left, cfg).second;
    EXPECT_EQ(stats.width, 64);
    EXPECT_EQ(stats.height, 48);
    EXPECT_EQ(stats.disparities, 32);
    EXPECT_GT(stats.time_total_s, 0.0);
    EXPECT_LE(stats.time_cost_s + stats.time_aggregate_s + stats.time_post_s, stats.time_total_s * (1 + 1e-9));
    EXPECT_DOUBLE_EQ(stats.mde_per_s(), 64.0 * 48 * 32 / stats.time_total_s / 1e6);
    EXPECT_NEAR(stats.fps(), 1.0 / stats.time_total_s, 1e-9 / stats.time_total_s);
}
