#pragma once

#include <string>
#include <vector>

#include "zongd/linalg.hpp"

namespace zongd {

struct Sample {
  Vec x;  // features in [0,1]
  int label = 0;
};

/// CSV rows of "label,f1,...,fd". Features must already be scaled to [0,1];
/// violations are reported with the offending row. An empty file yields an
/// empty list (campaigns reject it at start).
std::vector<Sample> load_dataset(const std::string& path);

void save_dataset(const std::vector<Sample>& samples, const std::string& path);

}  // namespace zongd
