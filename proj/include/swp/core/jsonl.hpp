#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <string>

#include <json.hpp>

#include "swp/core/error.hpp"

namespace swp {

// Append-only line-delimited JSON writer; every record is flushed so a
// crash loses at most the record being written.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path, bool append = true)
      : out_(path, append ? std::ios::app : std::ios::trunc), path_(path) {
    if (!out_) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  }

  void write(const nlohmann::json& record) {
    std::lock_guard lock(mu_);
    out_ << record.dump() << '\n';
    out_.flush();
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::filesystem::path path_;
};

// Calls `fn(record, line_number)` for every non-blank line. Parse failures
// throw Errc::corrupt_state naming the line.
inline void for_each_jsonl(std::istream& in, const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt_state, "line " + std::to_string(n) + ": " + e.what());
    }
    fn(j, n);
  }
}

inline void for_each_jsonl(const std::filesystem::path& path,
                           const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  for_each_jsonl(in, fn);
}

}  // namespace swp
