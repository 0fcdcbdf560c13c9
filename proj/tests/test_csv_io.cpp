#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <accsim/csv_io.hpp>

namespace {

namespace fs = std::filesystem;

class CsvIoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "accsim_csv_test";
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_file(const std::string& name, const std::string& body) {
    const fs::path path = dir_ / name;
    std::ofstream out(path);
    out << body;
    return path.string();
  }

  fs::path dir_;
};

const char kBasicCsv[] =
    "time,lead_x,lead_v,lead_a,ego_x,ego_v,ego_a\n"
    "0.0,100.0,10.0,0.0,80.0,10.0,0.0\n"
    "0.1,101.0,10.0,0.0,81.0,10.0,0.0\n"
    "0.2,102.0,10.0,0.0,82.0,10.0,0.0\n";

TEST_F(CsvIoTest, InfersVehiclesFromHeaderSuffixes) {
  const auto path = write_file("basic.csv", kBasicCsv);
  const auto traj = accsim::load_platoon(path);
  ASSERT_EQ(traj.vehicles.size(), 2u);
  EXPECT_EQ(traj.vehicles[0].id, "lead");
  EXPECT_EQ(traj.vehicles[1].id, "ego");
  EXPECT_DOUBLE_EQ(traj.dt, 0.1);
  EXPECT_TRUE(traj.vehicles[0].default_length_used);
  EXPECT_DOUBLE_EQ(traj.vehicles[0].length, accsim::kDefaultVehicleLength);
  EXPECT_DOUBLE_EQ(traj.vehicles[0].series.x[2], 102.0);
  EXPECT_DOUBLE_EQ(traj.vehicles[1].series.v[1], 10.0);
  EXPECT_TRUE(traj.vehicles[1].series.has_acceleration());
  EXPECT_FALSE(traj.slope.has_value());
}

TEST_F(CsvIoTest, SchemaSelectsColumnsAndLengths) {
  const auto csv = write_file("named.csv",
                              "t,xA,vA,xB,vB,grade\n"
                              "0.0,50.0,8.0,30.0,8.0,0.01\n"
                              "0.5,54.0,8.0,34.0,8.0,0.01\n"
                              "1.0,58.0,8.0,38.0,8.0,0.01\n");
  const auto schema_path = write_file("named.json", R"({
    "platoon_id": "demo",
    "time": "t",
    "slope": "grade",
    "vehicles": [
      {"id": "A", "x": "xA", "v": "vA", "length": 4.2},
      {"id": "B", "x": "xB", "v": "vB"}
    ]
  })");
  const auto traj = accsim::load_platoon(csv, schema_path);
  EXPECT_EQ(traj.platoon_id, "demo");
  ASSERT_EQ(traj.vehicles.size(), 2u);
  EXPECT_DOUBLE_EQ(traj.vehicles[0].length, 4.2);
  EXPECT_FALSE(traj.vehicles[0].default_length_used);
  EXPECT_TRUE(traj.vehicles[1].default_length_used);
  EXPECT_FALSE(traj.vehicles[0].series.has_acceleration());
  ASSERT_TRUE(traj.slope.has_value());
  EXPECT_EQ(traj.slope->size(), 3u);
}

TEST_F(CsvIoTest, MissingColumnIsFormatError) {
  const auto path = write_file("missing.csv",
                               "time,lead_x,lead_v\n"
                               "0.0,10.0,1.0\n"
                               "0.1,10.1,1.0\n");
  const auto schema_path = write_file("missing.json", R"({
    "vehicles": [{"id": "ghost"}]
  })");
  EXPECT_THROW(accsim::load_platoon(path, schema_path), accsim::FormatError);
}

TEST_F(CsvIoTest, BadNumberReportsLine) {
  const auto path = write_file("bad.csv",
                               "time,lead_x,lead_v\n"
                               "0.0,10.0,1.0\n"
                               "0.1,oops,1.0\n");
  try {
    accsim::load_platoon(path);
    FAIL() << "expected ParseError";
  } catch (const accsim::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST_F(CsvIoTest, NonUniformGridIsFormatError) {
  const auto path = write_file("jitter.csv",
                               "time,lead_x,lead_v\n"
                               "0.0,10.0,1.0\n"
                               "0.1,10.1,1.0\n"
                               "0.25,10.2,1.0\n");
  EXPECT_THROW(accsim::load_platoon(path), accsim::FormatError);
}

TEST_F(CsvIoTest, TimestampsCanonicalizedWithinJitter) {
  const auto path = write_file("canon.csv",
                               "time,lead_x,lead_v\n"
                               "0.0,10.0,1.0\n"
                               "0.1000004,10.1,1.0\n"
                               "0.2,10.2,1.0\n");
  const auto traj = accsim::load_platoon(path);
  EXPECT_DOUBLE_EQ(traj.vehicles[0].series.t[1], 0.1);
}

TEST_F(CsvIoTest, OverlappingVehiclesRejected) {
  const auto path = write_file("overlap.csv",
                               "time,lead_x,lead_v,ego_x,ego_v\n"
                               "0.0,10.0,1.0,8.0,1.0\n"
                               "0.1,10.1,1.0,8.1,1.0\n");
  // 2 m gap is inside the default 5 m vehicle length.
  EXPECT_THROW(accsim::load_platoon(path), accsim::DataError);
}

TEST_F(CsvIoTest, SaveThenLoadRoundTrips) {
  const auto path = write_file("basic.csv", kBasicCsv);
  const auto traj = accsim::load_platoon(path);
  const auto out_path = (dir_ / "roundtrip.csv").string();
  accsim::save_platoon(traj, out_path);
  const auto again = accsim::load_platoon(out_path);
  ASSERT_EQ(again.vehicles.size(), traj.vehicles.size());
  for (std::size_t k = 0; k < traj.vehicles.size(); ++k) {
    EXPECT_EQ(again.vehicles[k].id, traj.vehicles[k].id);
    for (std::size_t i = 0; i < traj.vehicles[k].series.size(); ++i) {
      EXPECT_DOUBLE_EQ(again.vehicles[k].series.x[i],
                       traj.vehicles[k].series.x[i]);
      EXPECT_DOUBLE_EQ(again.vehicles[k].series.v[i],
                       traj.vehicles[k].series.v[i]);
    }
  }
}

}  // namespace
