#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>
#include <vector>

#include "isip4d/parallel.hpp"

using namespace isip4d;

namespace {

struct ThreadGuard {
  int saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST(Parallel, CoversRangeExactlyOnce) {
  ThreadGuard guard;
  for (int n : {1, 3, 8}) {
    set_thread_count(n);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) ASSERT_EQ(h, 1);
  }
}

TEST(Parallel, EmptyRangeIsANoOp) {
  std::atomic<int> calls{0};
  parallel_for(0, [&](std::size_t, std::size_t) { ++calls; });
  EXPECT_EQ(calls.load(), 0);
}

TEST(Parallel, RethrowsWorkerException) {
  ThreadGuard guard;
  set_thread_count(4);
  EXPECT_THROW(parallel_for(100,
                            [](std::size_t b, std::size_t) {
                              if (b == 0) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
