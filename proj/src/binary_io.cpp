#include "nearfield/binary_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

namespace nearfield {

void append_u64_le(std::string& buf, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
    }
}

void append_f64_le(std::string& buf, double v)
{
    append_u64_le(buf, std::bit_cast<std::uint64_t>(v));
}

std::uint64_t read_u64_le(std::string_view buf, std::size_t pos)
{
    if (pos + 8 > buf.size()) {
        throw IoError("truncated binary data");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    }
    return v;
}

double read_f64_le(std::string_view buf, std::size_t pos)
{
    return std::bit_cast<double>(read_u64_le(buf, pos));
}

void write_text_file(const std::filesystem::path& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_f64_file(const std::filesystem::path& path, const std::vector<double>& values)
{
    std::string buf;
    buf.reserve(values.size() * 8);
    for (double v : values) {
        append_f64_le(buf, v);
    }
    write_text_file(path, buf);
}

std::vector<double> read_f64_file(const std::filesystem::path& path)
{
    const std::string buf = read_text_file(path);
    if (buf.size() % 8 != 0) {
        throw IoError(path.string() + ": size is not a multiple of 8 bytes");
    }
    std::vector<double> values(buf.size() / 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = read_f64_le(buf, i * 8);
    }
    return values;
}

}  // namespace nearfield
