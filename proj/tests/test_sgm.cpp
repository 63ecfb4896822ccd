#include <gtest/gtest.h>

#include <random>

#include "oracle/naive.hpp"
#include "stereo/sgm.hpp"
#include "support/synthetic.hpp"

using namespace stereo;

TEST(SgmPath, TwoPixelRowByHand) {
    CostVolume cost(2, 1, {0, 1});
    cost.at(0, 0, 0) = 2;
    cost.at(0, 0, 1) = 0;
    cost.at(1, 0, 0) = 1;
    cost.at(1, 0, 1) = 3;
    for (bool normalize : {false, true}) {
        const auto l = aggregate_path(cost, paths::LR, {1, 2, normalize});
        EXPECT_EQ(l.at(0, 0, 0), 2u);
        EXPECT_EQ(l.at(0, 0, 1), 0u);
        EXPECT_EQ(l.at(1, 0, 0), 2u);
        EXPECT_EQ(l.at(1, 0, 1), 3u);
    }
}

TEST(SgmPath, FirstPixelOfPathIsItsCost) {
    std::mt19937 rng(1);
    const auto cost = synth::random_cost(6, 5, {0, 7}, rng);
    const auto l = aggregate_path(cost, paths::RL, {10, 40});
    for (int y = 0; y < 5; ++y)
        for (int d = 0; d <= 7; ++d) EXPECT_EQ(l.at(5, y, d), cost.at(5, y, d));
}

TEST(SgmAll, SinglePixelIsPathCountTimesCost) {
    CostVolume cost(1, 1, {0, 4});
    const std::uint8_t s[5] = {9, 3, 200, 0, 17};
    for (int d = 0; d <= 4; ++d) cost.at(0, 0, d) = s[d];
    for (int paths : {4, 8}) {
        const auto agg = aggregate_all(cost, paths, {5, 20});
        for (int d = 0; d <= 4; ++d) EXPECT_EQ(agg.at(0, 0, d), static_cast<std::uint32_t>(paths) * s[d]);
    }
}

TEST(SgmAll, ZeroVolumeStaysZero) {
    const CostVolume cost(7, 5, {0, 9}, 0);
    const auto agg = aggregate_all(cost, 8, {27, 86, false});
    for (auto c : agg.cells()) EXPECT_EQ(c, 0u);
}

TEST(SgmAll, MatchesOracleOnRandomVolumes) {
    std::mt19937 rng(2);
    for (int trial = 0; trial < 24; ++trial) {
        const int w = 1 + trial % 7, h = 1 + (trial / 3) % 5;
        const DisparityRange range{trial % 4, trial % 4 + trial % 6};
        const auto cost = synth::random_cost(w, h, range, rng);
        const std::uint32_t p1 = 1 + trial % 30, p2 = p1 + 1 + trial * 7 % 100;
        const bool normalize = trial % 2;
        const int paths = trial % 3 ? 8 : 4;
        const auto expected = oracle::naive_sgm(cost, paths, p1, p2, normalize);
        EXPECT_EQ(aggregate_all(cost, paths, {p1, p2, normalize}, 1 + trial % 4), expected)
            << "trial " << trial << " " << w << "x" << h;
    }
}

TEST(SgmAll, SixByFourByEightMatchesOracle) {
    std::mt19937 rng(3);
    const auto cost = synth::random_cost(6, 4, {0, 7}, rng);
    EXPECT_EQ(aggregate_all(cost, 8, {27, 86, false}), oracle::naive_sgm(cost, 8, 27, 86, false));
    EXPECT_EQ(aggregate_all(cost, 8, {27, 86, true}), oracle::naive_sgm(cost, 8, 27, 86, true));
}

TEST(SgmAll, EachPathDirectionMatchesOracle) {
    std::mt19937 rng(4);
    const auto cost = synth::random_cost(7, 5, {1, 6}, rng);
    for (std::size_t k = 0; k < 8; ++k) {
        const auto l = aggregate_path(cost, kAllPaths[k], {8, 30, false}, 3);
        const auto want = oracle::naive_path(cost, oracle::all_dirs()[k], 8, 30, false);
        for (std::size_t i = 0; i < want.size(); ++i) ASSERT_EQ(l.cells()[i], want[i]) << "path " << k;
    }
}

TEST(SgmAll, NormalizationOnlyShiftsPerPixel) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cost = synth::random_cost(9, 6, {0, 11}, rng);
        const auto raw = aggregate_all(cost, 8, {7, 50, false});
        const auto norm = aggregate_all(cost, 8, {7, 50, true});
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 9; ++x) {
                const auto shift = raw.at(x, y, 0) - norm.at(x, y, 0);
                for (int d = 0; d <= 11; ++d) EXPECT_EQ(raw.at(x, y, d) - norm.at(x, y, d), shift);
            }
        EXPECT_EQ(wta(raw), wta(norm));
    }
}

TEST(SgmAll, ConstantCostOffsetKeepsWinners) {
    std::mt19937 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const auto cost = synth::random_cost(8, 7, {0, 9}, rng, 200);
        auto shifted = cost;
        for (auto& c : shifted.cells()) c = static_cast<std::uint8_t>(c + 40);
        for (bool normalize : {false, true})
            EXPECT_EQ(wta(aggregate_all(cost, 8, {10, 60, normalize})),
                      wta(aggregate_all(shifted, 8, {10, 60, normalize})));
    }
}

TEST(SgmPath, NeverBelowMatchingCost) {
    std::mt19937 rng(7);
    const auto cost = synth::random_cost(10, 8, {0, 15}, rng);
    for (auto dir : kAllPaths)
        for (bool normalize : {false, true}) {
            const auto l = aggregate_path(cost, dir, {15, 70, normalize});
            for (std::size_t i = 0; i < l.cells().size(); ++i) ASSERT_GE(l.cells()[i], cost.cells()[i]);
        }
}

TEST(SgmAll, EightPathsAreFourPlusDiagonals) {
    std::mt19937 rng(8);
    const auto cost = synth::random_cost(12, 9, {0, 13}, rng);
    const SgmParams params{20, 80};
    auto eight = aggregate_all(cost, 8, params);
    const auto four = aggregate_all(cost, 4, params);
    for (std::size_t k = 4; k < 8; ++k) {
        const auto l = aggregate_path(cost, kAllPaths[k], params);
        for (std::size_t i = 0; i < l.cells().size(); ++i) eight.cells()[i] -= l.cells()[i];
    }
    EXPECT_EQ(eight, four);
}

TEST(SgmAll, WorkerCountIsBitwiseIrrelevant) {
    std::mt19937 rng(9);
    const auto cost = synth::random_cost(33, 21, {0, 19}, rng);
    const auto base = aggregate_all(cost, 8, {27, 86}, 1);
    for (int workers : {2, 3, 4, 8, 40}) EXPECT_EQ(aggregate_all(cost, 8, {27, 86}, workers), base);
}

TEST(SgmAll, RejectsBadPenaltiesAndPathCounts) {
    const CostVolume cost(4, 4, {0, 3});
    EXPECT_THROW(aggregate_all(cost, 8, {0, 10}), ContractViolation);
    EXPECT_THROW(aggregate_all(cost, 8, {10, 10}), ContractViolation);
    EXPECT_THROW(aggregate_all(cost, 6, {10, 20}), ContractViolation);
    EXPECT_THROW(aggregate_path(cost, {0, 0}, {10, 20}), ContractViolation);
}

TEST(SgmAll, RejectsGeometryThatCouldOverflow) {
    const CostVolume wide(5000, 1, {0, 0});
    EXPECT_THROW(aggregate_all(wide, 8, {10, 1'000'000, false}), ContractViolation);
    EXPECT_NO_THROW(aggregate_all(wide, 8, {10, 1'000'000, true}));
    const CostVolume small(2, 2, {0, 1});
    EXPECT_THROW(aggregate_all(small, 8, {10, 200'000'000, true}), ContractViolation);
}

TEST(Wta, TiesGoToSmallestDisparity) {
    CostVolume v(3, 1, {2, 5});
    const std::uint8_t cells[3][4] = {{5, 1, 1, 9}, {3, 3, 3, 3}, {9, 8, 7, 6}};
    for (int x = 0; x < 3; ++x)
        for (int d = 0; d < 4; ++d) v.at(x, 0, 2 + d) = cells[x][d];
    const auto m = wta(v);
    EXPECT_EQ(m.get(0, 0), 3.0f);
    EXPECT_EQ(m.get(1, 0), 2.0f);
    EXPECT_EQ(m.get(2, 0), 5.0f);
}

TEST(Wta, MatchesOracle) {
    std::mt19937 rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const auto v = synth::random_aggregated(9, 7, {trial, trial + 12}, rng, 20);
        EXPECT_EQ(wta(v, 1 + trial % 3), oracle::naive_wta(v));
    }
}
