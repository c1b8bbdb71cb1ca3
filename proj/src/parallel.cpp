#include "levelset/parallel.hpp"

namespace levelset {
namespace {
thread_local unsigned tl_workers = 0;
}

unsigned intra_op_workers() noexcept {
  if (tl_workers != 0) return tl_workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void set_intra_op_workers(unsigned workers) noexcept { tl_workers = workers; }

}  // namespace levelset
