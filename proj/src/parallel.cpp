#include "facetproc/parallel.hpp"

#include <cstdlib>
#include <string>

namespace facetproc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t task) {
  return mix64(master ^ mix64(task + 0x9e3779b97f4a7c15ULL));
}

WorkerPool::WorkerPool(unsigned threads) : threads_(threads) {
  if (threads_ == 0) {
    if (const char* env = std::getenv("FACETPROC_THREADS")) threads_ = static_cast<unsigned>(std::stoul(env));
  }
  if (threads_ == 0) threads_ = std::max(1u, std::thread::hardware_concurrency());
}

const WorkerPool& default_pool() {
  static const WorkerPool pool;
  return pool;
}

}  // namespace facetproc
