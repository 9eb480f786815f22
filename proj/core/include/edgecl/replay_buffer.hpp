#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "edgecl/tensor.hpp"

namespace edgecl::replay {

// How insert_class picks which latents to keep once a class is at quota.
enum class InsertPolicy {
  kFirstK,         // keep the first `quota` arrivals
  kUniformRandom,  // reservoir sample over all arrivals for the class
};

// Class-keyed store of latent replay vectors. Every vector has the same
// per-sample shape and each class holds at most `quota` vectors.
//
// Optionally file-backed: with a backing path every insertion rewrites the
// store in the LRBF format (see save()). Concurrent readers are fine;
// insertions take an exclusive lock.
class ReplayBuffer {
 public:
  ReplayBuffer(Shape vector_shape, std::size_t quota, InsertPolicy policy = InsertPolicy::kFirstK,
               std::uint64_t seed = 0);

  const Shape& vector_shape() const noexcept { return shape_; }
  std::size_t vector_size() const noexcept { return stride_; }
  std::size_t quota() const noexcept { return quota_; }
  InsertPolicy policy() const noexcept { return policy_; }

  // `latents` is N x vector_shape. Keeps at most `quota` vectors per class,
  // counting those already stored.
  void insert_class(std::uint32_t class_id, const Tensor& latents);

  std::size_t count(std::uint32_t class_id) const;
  std::size_t total() const noexcept;
  std::size_t class_count() const noexcept { return classes_.size(); }
  bool empty() const noexcept { return classes_.empty(); }
  std::vector<std::uint32_t> classes() const;
  std::span<const float> vector(std::uint32_t class_id, std::size_t index) const;
  // Count x vector_shape copy of one class.
  Tensor class_tensor(std::uint32_t class_id) const;

  // Binary layout, little-endian:
  //   "LRBF" | version u16 | rank u32 | rank x extent u32 | quota u32 | class_count u32
  //   then per class: class_id u32 | count u32 | count*size f32
  void save(const std::filesystem::path& path) const;
  static ReplayBuffer load(const std::filesystem::path& path, InsertPolicy policy = InsertPolicy::kFirstK,
                           std::uint64_t seed = 0);

  void attach(std::filesystem::path path);
  const std::optional<std::filesystem::path>& backing_path() const noexcept { return backing_; }

  static constexpr std::uint16_t kFormatVersion = 1;

 private:
  struct ClassStore {
    std::vector<float> values;
    std::size_t seen = 0;  // arrivals, for reservoir sampling
  };

  // Copies get a fresh lock, never the source's lock state.
  struct Lock {
    mutable std::shared_mutex mutex;
    Lock() = default;
    Lock(const Lock&) {}
    Lock& operator=(const Lock&) { return *this; }
  };

  void write_to(const std::filesystem::path& path) const;

  Lock lock_;
  Shape shape_;
  std::size_t stride_;
  std::size_t quota_;
  InsertPolicy policy_;
  std::uint64_t rng_state_;
  std::map<std::uint32_t, ClassStore> classes_;
  std::optional<std::filesystem::path> backing_;
};

}  // namespace edgecl::replay
