#pragma once

#include <stdexcept>
#include <string>

namespace diskbsp {

// An operation hit a mathematically degenerate input (e.g. a vanishing
// a_{n,1} during bispectrum inversion). `order` names the failing n where
// that makes sense, else -1.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& msg, int order = -1)
        : std::runtime_error(msg), order_(order) {}
    int order() const { return order_; }

private:
    int order_;
};

// Malformed input bytes; offset is the byte position where parsing stopped
// (-1 when it does not apply).
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& msg, long long offset = -1)
        : std::runtime_error(msg), offset_(offset) {}
    long long offset() const { return offset_; }

private:
    long long offset_;
};

}  // namespace diskbsp
