#include "qpmshg/cache.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qpm {

namespace fs = std::filesystem;

SolveCache::SolveCache(std::string dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
  if (enabled_) fs::create_directories(dir_);
}

std::optional<nlohmann::json> SolveCache::get(const std::string& key) const {
  if (!enabled_) return std::nullopt;
  const fs::path path = fs::path(dir_) / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;  // treat a corrupt entry as a miss
  }
}

void SolveCache::put(const std::string& key, const nlohmann::json& value) const {
  if (!enabled_) return;
  const fs::path path = fs::path(dir_) / (key + ".json");
  const fs::path tmp = fs::path(dir_) / (key + ".tmp");
  {
    std::ofstream out(tmp);
    out << value.dump(1);
  }
  fs::rename(tmp, path);
}

std::string SolveCache::key_of(const std::string& canonical) {
  // Two FNV-1a streams with different offsets; 32 hex digits.
  const auto fnv = [&](std::uint64_t h) {
    for (unsigned char c : canonical) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  };
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(fnv(14695981039346656037ull)),
                static_cast<unsigned long long>(fnv(0x9ae16a3b2f90404full)));
  return buf;
}

void run_parallel(int threads, int job_count, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, job_count));
  if (threads == 1) {
    for (int i = 0; i < job_count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= job_count) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace qpm
