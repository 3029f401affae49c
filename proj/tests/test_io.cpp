#include <gtest/gtest.h>

#include <filesystem>

#include "dcg.hpp"
#include "dcg/io.hpp"

using namespace dcg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / "dcg_test_io";
  fs::create_directories(d);
  return d / name;
}

} // namespace

TEST(Io, FullPrecisionFormatting) {
  EXPECT_EQ(io::fmt(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(io::fmt(std::numbers::pi)), std::numbers::pi);
}

TEST(Io, SolutionCsv) {
  const GameParams p{1.0, 1.0, 1.0, 1.0, 1.0, 1};
  const auto s = solve_finite_chain(p, bc::General{1, 0, 0.5, 1, 0}, 2, TimeGrid(1.0, 0.5));
  const auto csv = io::solution_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,phi_1_1,phi_1_2,phi_2_2,psi_1,psi_2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Io, StationaryJsonKeepsExactValues) {
  const auto j = io::to_json(stationary_coeffs(CoeffKind::chain(), 4));
  EXPECT_EQ(io::stationary_csv(stationary_coeffs(CoeffKind::chain(), 2)), "k,phi\n0,1\n1,-0.5\n2,-0.125\n");
  EXPECT_NE(j.dump().find("-5/128"), std::string::npos);
}

TEST(Io, MixedPsiAtUnitWeightIsNull) {
  const auto j = io::to_json(stationary_coeffs(CoeffKind::mixed(1.0), 2));
  EXPECT_NE(j.dump().find("null"), std::string::npos);
}

TEST(Io, BundleRoundTrip) {
  auto c = stationary_config(SimMode::Chain, 8, 3);
  c.t_end = 0.5;
  c.n_paths = 7;
  c.record_every = 10;
  c.record_players = {2, 5};
  const auto b = simulate(c);
  const auto path = scratch("b.bin");
  io::write_bundle(path, b);
  const auto r = io::read_bundle(path);
  EXPECT_EQ(r.n_paths, b.n_paths);
  EXPECT_EQ(r.seed, b.seed);
  EXPECT_EQ(r.players, b.players);
  EXPECT_EQ(r.times, b.times);
  EXPECT_EQ(r.data, b.data);
  EXPECT_DOUBLE_EQ(r.config.step, c.step);
}

TEST(Io, CorruptBundlesAreRejected) {
  const auto path = scratch("bad.bin");
  io::write_text(path, "not a bundle at all");
  EXPECT_THROW(io::read_bundle(path), IoError);
  auto c = stationary_config(SimMode::Chain, 8, 3);
  c.t_end = 0.1;
  c.n_paths = 3;
  io::write_bundle(path, simulate(c));
  auto bytes = io::read_text(path);
  io::write_text(path, bytes.substr(0, bytes.size() - 8));
  EXPECT_THROW(io::read_bundle(path), IoError);
  EXPECT_THROW(io::read_bundle(scratch("missing.bin")), IoError);
  EXPECT_THROW(io::write_text("/proc/dcg/none.txt", "x"), IoError);
}

TEST(Io, ReportsSerialize) {
  const auto m = table1_report({0.5}, 20);
  const auto j = io::to_json(m);
  EXPECT_TRUE(j.contains("table"));
  const auto v = io::to_json(identity_suite(1e-2));
  EXPECT_TRUE(v.contains("points"));
  const auto t = io::transition_csv(transition_matrix(build_generator(CoeffKind::chain(), 3), 1.0));
  EXPECT_EQ(t.substr(0, 14), "row,col,value\n");
}
