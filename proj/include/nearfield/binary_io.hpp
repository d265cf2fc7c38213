#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nearfield {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Little-endian encoding independent of the host byte order.
void append_u64_le(std::string& buf, std::uint64_t v);
void append_f64_le(std::string& buf, double v);
std::uint64_t read_u64_le(std::string_view buf, std::size_t pos);
double read_f64_le(std::string_view buf, std::size_t pos);

// Whole-file helpers; all throw IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);
void write_f64_file(const std::filesystem::path& path, const std::vector<double>& values);
// Throws IoError when the size is not a multiple of 8.
std::vector<double> read_f64_file(const std::filesystem::path& path);

}  // namespace nearfield
