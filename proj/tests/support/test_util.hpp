#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "anchor/dataset.hpp"
#include "anchor/rng.hpp"

namespace testutil {

// Random regression dataset with a discrete anchor; not an SCM, just noise
// with per-environment structure for exercising the numerics.
inline anchor::Dataset random_dataset(int64_t n, int p, int n_envs, uint64_t seed,
                                      anchor::Task task = anchor::Task::regression) {
  anchor::Rng rng(seed);
  anchor::Dataset d;
  d.task = task;
  d.features.resize(n, p);
  d.outcome.resize(n);
  anchor::DiscreteAnchor disc;
  disc.labels.resize(n_envs);
  for (int e = 0; e < n_envs; ++e) disc.labels[e] = "e" + std::to_string(e);
  disc.env.resize(n);
  for (int64_t i = 0; i < n; ++i)
    disc.env[i] = static_cast<int32_t>(i < n_envs ? i : rng.below(n_envs));
  for (int64_t i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.features(i, j) = rng.normal() + 0.5 * disc.env[i];
    double y = 0.3 * disc.env[i] + rng.normal();
    for (int j = 0; j < p; ++j) y += 0.4 * d.features(i, j) * (j % 2 ? 1.0 : -0.5);
    d.outcome[i] = task == anchor::Task::regression ? y : (y >= 0.0 ? 1.0 : -1.0);
  }
  d.column_names.resize(p);
  for (int j = 0; j < p; ++j) d.column_names[j] = "x" + std::to_string(j + 1);
  d.anchor = std::move(disc);
  return d;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("anchorkit_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace testutil
