#include "rbdsde/parallel.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <string>
#include <vector>

using rbdsde::parallel_for;

TEST(Parallel, EveryIndexRunsOnceForAnyWorkerCount) {
    for (std::size_t workers : {0u, 1u, 2u, 7u, 64u}) {
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) EXPECT_EQ(h, 1);
    }
}

TEST(Parallel, EmptyRangeIsANoOp) {
    std::atomic<int> calls{0};
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls.load(), 0);
}

TEST(Parallel, SmallestFailingIndexIsRethrown) {
    for (std::size_t workers : {1u, 4u}) {
        try {
            parallel_for(100, workers, [](std::size_t i) {
                if (i == 3 || i == 40) throw std::runtime_error("index " + std::to_string(i));
            });
            FAIL() << "expected an exception";
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "index 3");
        }
    }
}
