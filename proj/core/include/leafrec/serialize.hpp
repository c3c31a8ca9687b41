#ifndef LEAFREC_SERIALIZE_HPP
#define LEAFREC_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace leafrec {

/// Splits one CSV line on commas; no quoting (none of our fields need it).
std::vector<std::string> csv_split(const std::string& line);

std::string csv_join(const std::vector<std::string>& fields);

/// Shortest decimal form that round-trips a double (max_digits10).
std::string format_double(double v);

/// FNV-1a 64-bit, used to stamp configuration hashes into reports.
std::uint64_t fnv1a(const std::string& s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

}  // namespace leafrec

#endif
