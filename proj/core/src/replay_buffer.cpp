#include "edgecl/replay_buffer.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <utility>

#include "edgecl/errors.hpp"

namespace edgecl::replay {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'R', 'B', 'F'};

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw FormatError("replay store truncated");
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<U>(bytes[i]) << (8 * i));
  return std::bit_cast<T>(bits);
}

std::uint32_t narrow_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw FormatError(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

ReplayBuffer::ReplayBuffer(Shape vector_shape, std::size_t quota, InsertPolicy policy, std::uint64_t seed)
    : shape_(std::move(vector_shape)), stride_(element_count(shape_)), quota_(quota), policy_(policy),
      rng_state_(seed) {
  if (shape_.empty() || stride_ == 0) throw ShapeError("replay vectors need a non-empty shape");
}

void ReplayBuffer::insert_class(std::uint32_t class_id, const Tensor& latents) {
  if (latents.rank() != shape_.size() + 1 || Shape(latents.dims().begin() + 1, latents.dims().end()) != shape_) {
    throw ShapeError("latents " + to_string(latents.dims()) + " do not match replay shape " + to_string(shape_));
  }
  std::unique_lock guard(lock_.mutex);
  ClassStore& store = classes_[class_id];
  std::mt19937_64 rng(rng_state_ ^ (static_cast<std::uint64_t>(class_id) << 32) ^ store.seen);
  for (std::size_t n = 0; n < latents.dim(0); ++n) {
    const std::span<const float> v = latents.outer_slice(n);
    const std::size_t held = store.values.size() / stride_;
    if (held < quota_) {
      store.values.insert(store.values.end(), v.begin(), v.end());
    } else if (policy_ == InsertPolicy::kUniformRandom && quota_ > 0) {
      std::uniform_int_distribution<std::size_t> pick(0, store.seen);
      const std::size_t slot = pick(rng);
      if (slot < quota_) std::copy(v.begin(), v.end(), store.values.begin() + static_cast<std::ptrdiff_t>(slot * stride_));
    }
    ++store.seen;
  }
  if (store.values.empty()) classes_.erase(class_id);
  if (backing_) write_to(*backing_);
}

std::size_t ReplayBuffer::count(std::uint32_t class_id) const {
  std::shared_lock guard(lock_.mutex);
  auto it = classes_.find(class_id);
  return it == classes_.end() ? 0 : it->second.values.size() / stride_;
}

std::size_t ReplayBuffer::total() const noexcept {
  std::shared_lock guard(lock_.mutex);
  std::size_t n = 0;
  for (const auto& [id, store] : classes_) n += store.values.size() / stride_;
  return n;
}

std::vector<std::uint32_t> ReplayBuffer::classes() const {
  std::shared_lock guard(lock_.mutex);
  std::vector<std::uint32_t> ids;
  ids.reserve(classes_.size());
  for (const auto& [id, store] : classes_) ids.push_back(id);
  return ids;
}

std::span<const float> ReplayBuffer::vector(std::uint32_t class_id, std::size_t index) const {
  auto it = classes_.find(class_id);
  if (it == classes_.end() || index >= it->second.values.size() / stride_) {
    throw ArgumentError("no replay vector " + std::to_string(index) + " for class " + std::to_string(class_id));
  }
  return std::span<const float>(it->second.values).subspan(index * stride_, stride_);
}

Tensor ReplayBuffer::class_tensor(std::uint32_t class_id) const {
  std::shared_lock guard(lock_.mutex);
  auto it = classes_.find(class_id);
  if (it == classes_.end()) throw ArgumentError("class " + std::to_string(class_id) + " not in replay buffer");
  Shape dims{it->second.values.size() / stride_};
  dims.insert(dims.end(), shape_.begin(), shape_.end());
  return Tensor(dims, it->second.values);
}

void ReplayBuffer::save(const std::filesystem::path& path) const {
  std::shared_lock guard(lock_.mutex);
  write_to(path);
}

void ReplayBuffer::write_to(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write replay store '" + path.string() + "'");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, narrow_u32(shape_.size(), "rank"));
  for (std::size_t extent : shape_) put_le<std::uint32_t>(out, narrow_u32(extent, "extent"));
  put_le<std::uint32_t>(out, narrow_u32(quota_, "quota"));
  put_le<std::uint32_t>(out, narrow_u32(classes_.size(), "class count"));
  for (const auto& [id, store] : classes_) {
    put_le<std::uint32_t>(out, id);
    put_le<std::uint32_t>(out, narrow_u32(store.values.size() / stride_, "count"));
    for (float v : store.values) put_le<float>(out, v);
  }
  if (!out) throw ConfigError("failed writing replay store '" + path.string() + "'");
}

ReplayBuffer ReplayBuffer::load(const std::filesystem::path& path, InsertPolicy policy, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open replay store '" + path.string() + "'");
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not an LRBF replay store");
  const auto version = get_le<std::uint16_t>(in);
  if (version != kFormatVersion) throw FormatError("unsupported replay store version " + std::to_string(version));
  const auto rank = get_le<std::uint32_t>(in);
  if (rank == 0 || rank > 8) throw FormatError("implausible replay vector rank");
  Shape shape(rank);
  for (auto& extent : shape) extent = get_le<std::uint32_t>(in);
  const auto quota = get_le<std::uint32_t>(in);
  const auto class_count = get_le<std::uint32_t>(in);

  ReplayBuffer buffer(shape, quota, policy, seed);
  for (std::uint32_t c = 0; c < class_count; ++c) {
    const auto id = get_le<std::uint32_t>(in);
    const auto count = get_le<std::uint32_t>(in);
    if (count > quota) throw FormatError("class " + std::to_string(id) + " exceeds the stored quota");
    if (buffer.classes_.contains(id)) throw FormatError("class " + std::to_string(id) + " stored twice");
    ClassStore& store = buffer.classes_[id];
    store.values.resize(static_cast<std::size_t>(count) * buffer.stride_);
    for (float& v : store.values) v = get_le<float>(in);
    store.seen = count;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after replay store");
  return buffer;
}

void ReplayBuffer::attach(std::filesystem::path path) {
  std::unique_lock guard(lock_.mutex);
  backing_ = std::move(path);
  write_to(*backing_);
}

}  // namespace edgecl::replay
