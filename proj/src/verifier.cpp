#include "verifier.hpp"

#include <exception>
#include <thread>

namespace geolink::detail {

namespace {
constexpr std::size_t kBatchPerThread = 2048;
}

Verifier::Verifier(std::size_t threads, Observer observer, bool self_join)
    : threads_(threads == 0 ? 1 : threads), observer_(std::move(observer)), self_join_(self_join) {}

void Verifier::add(const Geometry& source, const Geometry& target, GeometryId sid, GeometryId tid) {
  if (self_join_ && !(sid < tid)) return;
  if (observer_) observer_(sid, tid);
  if (threads_ == 1) {
    verify_into(links_, source, target, sid, tid);
    return;
  }
  queue_.push_back({&source, &target, sid, tid});
  if (queue_.size() >= kBatchPerThread * threads_) flush();
}

void Verifier::flush() {
  if (queue_.empty()) return;
  const std::size_t n = std::min(threads_, queue_.size());
  std::vector<LinkSet> parts(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(n);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t lo = queue_.size() * w / n;
        const std::size_t hi = queue_.size() * (w + 1) / n;
        for (std::size_t i = lo; i < hi; ++i) {
          const Task& t = queue_[i];
          verify_into(parts[w], *t.source, *t.target, t.sid, t.tid);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  queue_.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const auto& p : parts) links_.merge(p);
}

LinkSet Verifier::finish() {
  flush();
  links_.normalize();
  return std::move(links_);
}

}  // namespace geolink::detail
