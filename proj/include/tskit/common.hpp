#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tskit {

using index_t = std::size_t;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Dimension mismatch or invalid-argument failure.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

/// An operation would materialize a buffer larger than the size guard allows.
class SizeError : public Error {
 public:
  explicit SizeError(const std::string& msg) : Error(msg) {}
};

/// Materialization guard: any op that allocates a buffer whose element count
/// scales like d^p (explicit tensor powers, explicit sketch matrices, Kronecker
/// products) must pass through check_size_guard first.  Sketch application
/// paths never allocate at this scale, so a small guard value is a cheap way
/// to prove that no code path secretly expands a tensor power.
inline std::atomic<std::uint64_t>& size_guard_slot() {
  static std::atomic<std::uint64_t> guard{std::uint64_t{1} << 24};
  return guard;
}

inline std::uint64_t size_guard() { return size_guard_slot().load(); }
inline void set_size_guard(std::uint64_t elems) { size_guard_slot().store(elems); }

inline void check_size_guard(std::uint64_t elems, const char* what) {
  const std::uint64_t guard = size_guard();
  if (elems > guard) {
    throw SizeError(std::string(what) + ": would materialize " +
                    std::to_string(elems) + " elements, exceeding the size guard of " +
                    std::to_string(guard) +
                    " (set_size_guard / TSKIT_SIZE_GUARD raises the limit)");
  }
}

/// RAII override of the size guard, for oracle-scale code and tests.
class SizeGuardOverride {
 public:
  explicit SizeGuardOverride(std::uint64_t elems) : saved_(size_guard()) { set_size_guard(elems); }
  ~SizeGuardOverride() { set_size_guard(saved_); }
  SizeGuardOverride(const SizeGuardOverride&) = delete;
  SizeGuardOverride& operator=(const SizeGuardOverride&) = delete;

 private:
  std::uint64_t saved_;
};

}  // namespace tskit
