#pragma once

#include <cstddef>

namespace edgepool::cli {

/// Byte counts seen by the global operator new/delete replacement linked
/// into this library. Counts every thread.
struct AllocTracker {
  static std::size_t current() noexcept;
  static std::size_t peak() noexcept;
  /// Sets the peak to the current live byte count.
  static void reset_peak() noexcept;
};

} // namespace edgepool::cli
