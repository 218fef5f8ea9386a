#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "zongd/dataset.hpp"
#include "zongd/model.hpp"
#include "zongd/rng.hpp"

namespace zongd::testing {

#ifndef ZONGD_DATA_DIR
#define ZONGD_DATA_DIR "data"
#endif

inline std::string data_path(const std::string& name) {
  return std::string(ZONGD_DATA_DIR) + "/" + name;
}

/// The committed desk classifier and test split, loaded once per binary.
inline const MlpModel& desk_model() {
  static const MlpModel model = load_model(data_path("desk_mlp.txt"));
  return model;
}

inline const std::vector<Sample>& desk_test_set() {
  static const std::vector<Sample> samples = load_dataset(data_path("digits_test.csv"));
  return samples;
}

/// Scratch file path under the system temp dir, removed on destruction.
class TempFile {
 public:
  explicit TempFile(const std::string& name)
      : path_((std::filesystem::temp_directory_path() /
               ("zongd_test_" + std::to_string(::getpid()) + "_" + name))
                  .string()) {}
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

  void write(const std::string& content) const {
    std::ofstream out(path_, std::ios::binary);
    out << content;
  }

 private:
  std::string path_;
};

}  // namespace zongd::testing
