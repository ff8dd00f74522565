#pragma once

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "lakesketch/table.hpp"

namespace lakesketch::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("lakesketch-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t min_len = 3, std::size_t max_len = 8) {
  static const std::string letters = "abcdefghijklmnopqrstuvwxyz";
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
  std::string w;
  for (std::size_t i = len(rng); i > 0; --i) w.push_back(letters[pick(rng)]);
  return w;
}

/// Random table mixing string, integer, float and date columns.
inline Table random_table(std::mt19937_64& rng, std::string id, std::size_t rows, std::size_t cols) {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> data(rows, std::vector<std::string>(cols));
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<int> ints(-500, 5000);
  std::uniform_real_distribution<double> reals(-100.0, 100.0);
  std::uniform_int_distribution<int> day(1, 28), month(1, 12), year(1990, 2024);
  for (std::size_t c = 0; c < cols; ++c) {
    names.push_back(random_word(rng) + " " + random_word(rng));
    const int k = kind(rng);
    for (std::size_t r = 0; r < rows; ++r) {
      std::string cell;
      switch (k) {
        case 0: cell = random_word(rng) + " " + random_word(rng, 2, 4); break;
        case 1: cell = std::to_string(ints(rng)); break;
        case 2: cell = std::to_string(reals(rng)); break;
        default: {
          char buf[16];
          std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year(rng), month(rng), day(rng));
          cell = buf;
        }
      }
      data[r][c] = cell;
    }
  }
  return make_table(std::move(id), std::move(names), data, random_word(rng) + " " + random_word(rng));
}

/// Table whose column names come from a small recurring pool and whose
/// values depend on the column, so metadata is predictable from sketches.
inline Table themed_table(std::mt19937_64& rng, std::string id, std::size_t rows = 30) {
  static const std::vector<std::string> names = {"country name", "city", "unit price", "year",
                                                 "population", "area code", "product", "rating"};
  static const std::vector<std::string> countries = {"austria", "belgium", "chile", "denmark", "egypt",
                                                     "france", "ghana", "india"};
  std::vector<std::size_t> pick(names.size());
  for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
  std::shuffle(pick.begin(), pick.end(), rng);
  pick.resize(3 + rng() % 4);
  std::vector<std::string> cols;
  std::vector<std::vector<std::string>> data(rows);
  for (auto c : pick) {
    cols.push_back(names[c]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::string cell;
      switch (c) {
        case 0: cell = countries[rng() % countries.size()]; break;
        case 1: cell = "city " + random_word(rng, 4, 6); break;
        case 2: cell = std::to_string(100 + rng() % 900) + ".5"; break;
        case 3: cell = std::to_string(1990 + rng() % 30); break;
        case 4: cell = std::to_string(100000 + rng() % 9000000); break;
        case 5: cell = std::to_string(rng() % 1000); break;
        case 6: cell = random_word(rng, 5, 9) + " " + random_word(rng, 3, 5); break;
        default: cell = std::to_string(rng() % 5) + "." + std::to_string(rng() % 10); break;
      }
      data[r].push_back(cell);
    }
  }
  return make_table(std::move(id), std::move(cols), data, "table of " + names[pick[0]]);
}

}  // namespace lakesketch::testing
