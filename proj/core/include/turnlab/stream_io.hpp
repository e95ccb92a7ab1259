#pragma once

// Replayable stream files: JSON lines, header `{"n": <int>}` followed by one
// `{"i": <int>, "d": <int>}` object per update.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "turnlab/stream.hpp"

namespace turnlab {

class StreamFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_stream(std::ostream& out, const Stream& stream);
Stream read_stream(std::istream& in);

void save_stream(const std::string& path, const Stream& stream);
Stream load_stream(const std::string& path);

}  // namespace turnlab
