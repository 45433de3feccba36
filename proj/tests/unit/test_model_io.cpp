#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "quadlearn/csv.hpp"
#include "quadlearn/error.hpp"
#include "quadlearn/model_io.hpp"
#include "random_models.hpp"

using namespace quadlearn;
using quadlearn::testing::random_batch;
using quadlearn::testing::random_model;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("quadlearn_test_" + name);
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const ControllerModel m = random_model(rng);
    EXPECT_EQ(deserialize_model(serialize_model(m)), m);
  }
}

TEST(ModelIo, TruncatedFileIsCorrupt) {
  std::mt19937_64 rng(2);
  const std::string text = serialize_model(random_model(rng));
  EXPECT_EQ(code_of([&] { deserialize_model(text.substr(0, text.size() / 2)); }),
            ErrorCode::CorruptFile);
  EXPECT_EQ(code_of([&] { deserialize_model("{}"); }), ErrorCode::CorruptFile);
}

TEST(ModelIo, VersionMismatch) {
  std::mt19937_64 rng(3);
  std::string text = serialize_model(random_model(rng));
  const std::string key = "\"version\": " + std::to_string(kModelFormatVersion);
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"version\": 99");
  EXPECT_EQ(code_of([&] { deserialize_model(text); }), ErrorCode::VersionMismatch);
}

TEST(ModelIo, ReloadedModelGivesIdenticalOutputs) {
  std::mt19937_64 rng(4);
  const ControllerModel m = random_model(rng);
  const auto path = temp_path("model.json");
  save_model(m, path);
  const ControllerModel back = load_model(path);
  std::filesystem::remove(path);
  for (const auto& s : random_batch(rng, 100)) {
    for (std::size_t a = 0; a < kAxes; ++a) {
      EXPECT_EQ(back.nets[a].forward(s.features), m.nets[a].forward(s.features));
    }
  }
  EXPECT_EQ(back.provenance.at("source"), "test");
}

TEST(ModelIo, MissingFile) {
  EXPECT_EQ(code_of([] { load_model(temp_path("does_not_exist.json")); }), ErrorCode::IoError);
}

TEST(DatasetIo, RoundTrip) {
  std::mt19937_64 rng(5);
  Dataset d;
  for (auto& axis : d.axes) axis = random_batch(rng, 37);
  d.provenance["seed"] = "5";
  const auto path = temp_path("dataset.csv");
  write_dataset_csv(d, path);
  const Dataset back = read_dataset_csv(path);
  const std::string header = std::string(csv::lines(csv::read_file(path)).front());
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".meta.json");
  EXPECT_EQ(header, "axis,e_k,e_k1,e_k2,de_k,de_k1,de_k2,target");
  for (std::size_t a = 0; a < kAxes; ++a) {
    ASSERT_EQ(back.axes[a].size(), 37u);
    for (std::size_t i = 0; i < 37; ++i) {
      EXPECT_EQ(back.axes[a][i].features, d.axes[a][i].features);
      EXPECT_EQ(back.axes[a][i].target, d.axes[a][i].target);
    }
  }
  EXPECT_EQ(back.provenance.at("seed"), "5");
}

TEST(DatasetIo, Validation) {
  Dataset d;
  EXPECT_THROW(d.validate(), Error);
  std::mt19937_64 rng(6);
  for (auto& axis : d.axes) axis = random_batch(rng, 4);
  d.axes[1].pop_back();
  EXPECT_THROW(d.validate(), Error);
  EXPECT_THROW(dataset_from_csv("axis,e_k,e_k1,e_k2,de_k,de_k1,de_k2,target\nq,1,2,3,4,5,6,7\n"),
               Error);
}
