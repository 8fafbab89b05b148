#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "tda/error.hpp"

namespace tda {

static_assert(std::endian::native == std::endian::little,
              "artifact formats are little-endian and written with memcpy");

/// Sequential little-endian writer for the packed artifact formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void bytes(const void* data, std::size_t size);

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void put(const T& value) {
    bytes(&value, sizeof(T));
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void put_span(std::span<const T> values) {
    bytes(values.data(), values.size_bytes());
  }

  /// u32 byte length followed by the UTF-8 bytes.
  void put_string(std::string_view text);

  std::uint64_t offset() const noexcept { return offset_; }

  /// Flushes and closes; throws if any write failed.
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
};

/// Read-only memory mapping of a whole file.
class MappedFile {
 public:
  explicit MappedFile(const std::filesystem::path& path);
  ~MappedFile();
  MappedFile(MappedFile&& other) noexcept;
  MappedFile& operator=(MappedFile&& other) noexcept;
  MappedFile(const MappedFile&) = delete;
  MappedFile& operator=(const MappedFile&) = delete;

  std::span<const std::byte> bytes() const noexcept {
    return {static_cast<const std::byte*>(data_), size_};
  }

 private:
  void release() noexcept;

  void* data_ = nullptr;
  std::size_t size_ = 0;
};

/// Bounds-checked cursor over a byte buffer. Truncation raises ErrorCode::format.
class BinaryReader {
 public:
  explicit BinaryReader(std::span<const std::byte> data) : data_(data) {}

  template <class T>
    requires std::is_trivially_copyable_v<T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  void get_into(std::span<T> out) {
    if (out.empty()) return;
    std::memcpy(out.data(), take(out.size_bytes()), out.size_bytes());
  }

  std::string get_string();

  /// Verifies and consumes a magic tag.
  void expect_magic(std::string_view magic);

  void seek(std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }
  std::size_t remaining() const noexcept { return data_.size() - offset_; }

 private:
  const std::byte* take(std::size_t size);

  std::span<const std::byte> data_;
  std::size_t offset_ = 0;
};

}  // namespace tda
