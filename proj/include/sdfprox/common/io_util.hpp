#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace sdfprox {

// Little-endian binary scalar I/O. The build targets little-endian hosts;
// the writers assert that at compile time where it matters.

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f64(std::ostream& os, double v);

std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);

/// Shortest round-trip decimal for a double (printf %.17g).
std::string format_g17(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace sdfprox
