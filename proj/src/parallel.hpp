#pragma once

#include <exception>
#include <mutex>

namespace dcop::detail {

// Carries the first exception out of an OpenMP region.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (!ptr_) ptr_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (ptr_) std::rethrow_exception(ptr_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr ptr_;
};

}  // namespace dcop::detail
