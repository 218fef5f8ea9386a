#include "zongd/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "zongd/errors.hpp"

namespace zongd {

std::vector<Sample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open dataset: " + path);

  std::vector<Sample> samples;
  std::string line;
  int line_no = 0;
  int width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    Sample sample;
    const char* cursor = line.c_str();
    char* end = nullptr;
    const long label = std::strtol(cursor, &end, 10);
    if (end == cursor || *end != ',')
      throw ParseError("row " + std::to_string(line_no) + ": expected integer label", line_no);
    if (label < 0)
      throw DataError("row " + std::to_string(line_no) + ": negative label " + std::to_string(label));
    sample.label = static_cast<int>(label);
    cursor = end;

    while (*cursor == ',') {
      ++cursor;
      const double v = std::strtod(cursor, &end);
      if (end == cursor)
        throw ParseError("row " + std::to_string(line_no) + ": expected feature value", line_no);
      if (v < 0.0 || v > 1.0)
        throw DataError("row " + std::to_string(line_no) + ": feature " +
                        std::to_string(sample.x.size() + 1) + " out of [0,1]: " + std::to_string(v));
      sample.x.push_back(v);
      cursor = end;
    }
    if (*cursor != '\0')
      throw ParseError("row " + std::to_string(line_no) + ": trailing content", line_no);
    if (sample.x.empty())
      throw ParseError("row " + std::to_string(line_no) + ": no features", line_no);
    if (width < 0) width = static_cast<int>(sample.x.size());
    if (static_cast<int>(sample.x.size()) != width)
      throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " features, got " + std::to_string(sample.x.size()));
    samples.push_back(std::move(sample));
  }
  return samples;
}

void save_dataset(const std::vector<Sample>& samples, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  char buf[64];
  for (const Sample& s : samples) {
    std::fprintf(f, "%d", s.label);
    for (double v : s.x) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      std::fprintf(f, ",%s", buf);
    }
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

}  // namespace zongd
