#pragma once

#include <functional>
#include <optional>
#include <string>

#include "json.hpp"

namespace qpm {

// Content-addressed JSON store for solved mode metadata.  Writes go through a
// temporary file and an atomic rename; concurrent writers of the same key
// produce identical content, so last-writer-wins is benign.
class SolveCache {
 public:
  SolveCache() = default;
  SolveCache(std::string dir, bool enabled);

  bool enabled() const { return enabled_; }
  const std::string& dir() const { return dir_; }

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& value) const;

  static std::string key_of(const std::string& canonical);

 private:
  std::string dir_;
  bool enabled_ = false;
};

// Minimal deterministic worker pool: jobs write their own result slots; the
// caller serializes output afterwards in index order.
void run_parallel(int threads, int job_count, const std::function<void(int)>& job);

}  // namespace qpm
