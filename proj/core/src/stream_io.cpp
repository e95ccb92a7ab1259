#include "turnlab/stream_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace turnlab {

using nlohmann::json;

void write_stream(std::ostream& out, const Stream& stream) {
  out << json{{"n", stream.dimension()}}.dump() << '\n';
  stream.for_each([&](const Update& u) {
    out << json{{"i", u.index}, {"d", u.delta}}.dump() << '\n';
    return true;
  });
}

Stream read_stream(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto parse = [&](const std::string& text) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw StreamFormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  };

  std::optional<std::size_t> dimension;
  std::vector<Update> updates;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = parse(line);
    if (!dimension) {
      if (!j.contains("n") || !j["n"].is_number_unsigned()) {
        throw StreamFormatError("line " + std::to_string(line_no) + ": expected header {\"n\": <int>}");
      }
      dimension = j["n"].get<std::size_t>();
      continue;
    }
    if (!j.contains("i") || !j.contains("d") || !j["i"].is_number_integer() ||
        !j["d"].is_number_integer()) {
      throw StreamFormatError("line " + std::to_string(line_no) + ": expected {\"i\": <int>, \"d\": <int>}");
    }
    const auto index = j["i"].get<std::int64_t>();
    if (index < 1 || static_cast<std::size_t>(index) > *dimension) {
      throw StreamFormatError("line " + std::to_string(line_no) + ": index out of range");
    }
    updates.push_back({static_cast<Coordinate>(index), j["d"].get<Value>()});
  }
  if (!dimension) throw StreamFormatError("missing header line");
  return Stream(*dimension, std::move(updates));
}

void save_stream(const std::string& path, const Stream& stream) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_stream(out, stream);
}

Stream load_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_stream(in);
}

}  // namespace turnlab
