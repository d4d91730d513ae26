#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include <mapless/goal_seeking_params.hpp>
#include <mapless/weights_io.hpp>

using namespace mapless;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mapless_weights_" + name)).string();
}

}  // namespace

TEST(WeightsIo, RoundTripIsBitIdentical) {
  const auto p = init_params<float>(Architecture{}, 42, 1.0);
  const auto path = temp_path("roundtrip.bin");
  save_params(p, path);
  const Architecture arch;
  const auto back = load_params(path, &arch);
  EXPECT_EQ(back, p);
  EXPECT_EQ(back.parameter_count(), p.parameter_count());
  EXPECT_EQ(deserialize_params(serialize_params(goal_seeking_params<float>())), goal_seeking_params<float>());
}

TEST(WeightsIo, TruncatedFileIsCorrupt) {
  const std::string blob = serialize_params(init_params<float>(Architecture{}, 1));
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, std::size_t{100}, blob.size() - 1})
    EXPECT_THROW(deserialize_params(blob.substr(0, cut)), weights_corrupt_error) << cut;
  EXPECT_THROW(deserialize_params(blob + "x"), weights_corrupt_error);
  std::string bad_magic = blob;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_params(bad_magic), weights_corrupt_error);
}

TEST(WeightsIo, VersionMismatch) {
  std::string blob = serialize_params(init_params<float>(Architecture{}, 1));
  blob[4] = 2;
  EXPECT_THROW(deserialize_params(blob), weights_version_error);
}

TEST(WeightsIo, ShapeMismatchNamesTensor) {
  Architecture small;
  small.hidden = 64;
  const std::string blob = serialize_params(init_params<float>(small, 1));
  const Architecture expected;
  try {
    deserialize_params(blob, &expected);
    FAIL() << "expected weights_shape_error";
  } catch (const weights_shape_error& e) {
    EXPECT_NE(std::string(e.what()).find("fc.weight"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(deserialize_params(blob));  // without an expectation the file's own layout is used
}

TEST(WeightsIo, MissingFile) {
  EXPECT_THROW(load_params(temp_path("does_not_exist.bin")), std::runtime_error);
}
