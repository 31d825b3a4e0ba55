#ifndef TUMBLE_TEST_UTIL_HPP
#define TUMBLE_TEST_UTIL_HPP

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "tumble/error.hpp"
#include "tumble/geom.hpp"
#include "tumble/text_io.hpp"

#define EXPECT_VEC_NEAR(a, b, tol) EXPECT_LE(((a) - (b)).cwiseAbs().maxCoeff(), (tol)) << (a).transpose() << " vs " << (b).transpose()
#define ASSERT_VEC_NEAR(a, b, tol) ASSERT_LE(((a) - (b)).cwiseAbs().maxCoeff(), (tol)) << (a).transpose() << " vs " << (b).transpose()
#define EXPECT_MAT_NEAR(a, b, tol) EXPECT_LE(((a) - (b)).cwiseAbs().maxCoeff(), (tol))
#define ASSERT_MAT_NEAR(a, b, tol) ASSERT_LE(((a) - (b)).cwiseAbs().maxCoeff(), (tol))

/// Expects `stmt` to throw tumble::Error of the given kind.
#define EXPECT_THROW_KIND(stmt, expected_kind)                                                           \
  do {                                                                                                   \
    try {                                                                                                \
      stmt;                                                                                              \
      ADD_FAILURE() << "no exception from " #stmt;                                                       \
    } catch (const ::tumble::Error& e_) {                                                                \
      EXPECT_EQ(e_.kind(), expected_kind) << e_.what();                                                  \
    }                                                                                                    \
  } while (0)

namespace tumble::test {

inline std::string data_path(const std::string& name) { return std::string(TUMBLE_TEST_DATA_DIR) + "/" + name; }

inline std::string read_data(const std::string& name) { return text::read_file(data_path(name)); }

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("tumble_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tumble::test

#endif  // TUMBLE_TEST_UTIL_HPP
