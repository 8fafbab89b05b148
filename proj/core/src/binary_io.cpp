#include "tda/binary_io.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <limits>
#include <utility>

namespace tda {

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::input, "cannot open for writing: " + path.string());
}

void BinaryWriter::bytes(const void* data, std::size_t size) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  offset_ += size;
}

void BinaryWriter::put_string(std::string_view text) {
  if (text.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::config, "string too long for artifact");
  put(static_cast<std::uint32_t>(text.size()));
  bytes(text.data(), text.size());
}

void BinaryWriter::close() {
  out_.flush();
  if (!out_) throw Error(ErrorCode::input, "write failed: " + path_.string());
  out_.close();
}

MappedFile::MappedFile(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY);
  if (fd < 0) throw Error(ErrorCode::input, "cannot open: " + path.string());
  struct stat info {};
  if (::fstat(fd, &info) != 0) {
    ::close(fd);
    throw Error(ErrorCode::input, "cannot stat: " + path.string());
  }
  size_ = static_cast<std::size_t>(info.st_size);
  if (size_ > 0) {
    data_ = ::mmap(nullptr, size_, PROT_READ, MAP_PRIVATE, fd, 0);
    if (data_ == MAP_FAILED) {
      data_ = nullptr;
      ::close(fd);
      throw Error(ErrorCode::input, "cannot map: " + path.string());
    }
  }
  ::close(fd);
}

MappedFile::~MappedFile() { release(); }

MappedFile::MappedFile(MappedFile&& other) noexcept
    : data_(std::exchange(other.data_, nullptr)), size_(std::exchange(other.size_, 0)) {}

MappedFile& MappedFile::operator=(MappedFile&& other) noexcept {
  if (this != &other) {
    release();
    data_ = std::exchange(other.data_, nullptr);
    size_ = std::exchange(other.size_, 0);
  }
  return *this;
}

void MappedFile::release() noexcept {
  if (data_ != nullptr) ::munmap(data_, size_);
  data_ = nullptr;
  size_ = 0;
}

std::string BinaryReader::get_string() {
  const auto length = get<std::uint32_t>();
  const auto* start = take(length);
  return std::string(reinterpret_cast<const char*>(start), length);
}

void BinaryReader::expect_magic(std::string_view magic) {
  const auto* start = take(magic.size());
  if (std::memcmp(start, magic.data(), magic.size()) != 0)
    throw Error(ErrorCode::format, "bad magic, expected " + std::string(magic));
}

void BinaryReader::seek(std::size_t offset) {
  if (offset > data_.size()) throw Error(ErrorCode::format, "seek past end of artifact");
  offset_ = offset;
}

const std::byte* BinaryReader::take(std::size_t size) {
  if (size > data_.size() - offset_) throw Error(ErrorCode::format, "truncated artifact");
  const std::byte* start = data_.data() + offset_;
  offset_ += size;
  return start;
}

}  // namespace tda
