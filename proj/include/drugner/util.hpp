#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace drugner {

// Error taxonomy mapped to CLI exit codes: ConfigError -> 1, DataError -> 2,
// DivergenceError -> 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics go to stderr; tests can silence them.
void warn(const std::string& msg);
void set_warnings_enabled(bool on);

std::string to_lower(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::vector<std::string> split_on(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Fixed-format float printing used by every text artifact so that identical
// runs produce identical bytes.
std::string fmt_g9(double v);
std::string fmt_f4(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_mix(std::uint64_t seed, std::string_view bytes);
std::string hash_hex(std::uint64_t h);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace drugner
