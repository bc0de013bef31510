// Copyright 2026 The covplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef COVPLAN_TESTS_TEST_DIRS_HPP_
#define COVPLAN_TESTS_TEST_DIRS_HPP_

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace covplan::testing_support {

// Fresh per-test scratch directory, removed on teardown.
class ScratchDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = std::filesystem::temp_directory_path() /
           (std::string("covplan_") + info->test_suite_name() + "_" + info->name());
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// True when both trees hold the same relative paths with identical bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::size_t count = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++count;
    const auto other = b / std::filesystem::relative(e.path(), a);
    if (!std::filesystem::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  std::size_t other_count = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(b)) other_count += e.is_regular_file();
  return count == other_count && count > 0;
}

}  // namespace covplan::testing_support

#endif  // COVPLAN_TESTS_TEST_DIRS_HPP_
