#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tna {

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, std::size_t size);
void write_text(const std::string& path, const std::string& text);

std::string sha256_hex(const void* data, std::size_t size);
std::string md5_hex(const void* data, std::size_t size);

bool looks_gzip(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> gzip_decompress(const std::vector<std::uint8_t>& bytes);

// Little-endian scalar append/read helpers for compact binary formats.
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);
std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t& pos);
double get_f64(const std::vector<std::uint8_t>& in, std::size_t& pos);

}  // namespace tna
