#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "gax/shape_export.hpp"
#include "helpers.hpp"

namespace gax {
namespace {

namespace fs = std::filesystem;

AdditiveModel golden_model() {
  std::vector<FeatureShape> shapes;
  shapes.emplace_back("x1", std::vector<double>{-1.0, -0.25, 0.5},
                      std::vector<double>{-0.5, 0.25, 1.0}, Interpolation::PiecewiseConstant);
  shapes.emplace_back("x2", std::vector<double>{-1.0, 0.0, 1.0},
                      std::vector<double>{1.0, -1.0, 0.5}, Interpolation::CubicSpline);
  Eigen::MatrixXd v(2, 2);
  v << 0.5, -0.25, -1.0, 0.0;
  PairShape pair({"x1", "x2"}, {-1.0, 0.0}, {-1.0, 0.0}, v);
  return AdditiveModel(0.1, shapes, {pair}, Task::Regression, "SAT");
}

// Set GAX_UPDATE_GOLDEN=1 to rewrite the expected files after an intended
// rendering change.
void expect_golden(const std::string& name, const std::string& actual) {
  const fs::path path = fs::path(GAX_TEST_DATA_DIR) / name;
  if (std::getenv("GAX_UPDATE_GOLDEN")) test::write_file(path, actual);
  ASSERT_TRUE(fs::exists(path)) << path;
  EXPECT_EQ(test::slurp(path), actual) << "golden mismatch for " << name;
}

TEST(ShapeCsv, RoundTripIsExact) {
  const auto dir = test::scratch_dir();
  std::vector<FeatureShape> shapes;
  shapes.emplace_back("a", std::vector<double>{-0.1, 1.0 / 3.0, 2.0},
                      std::vector<double>{1e-300, -2.0 / 7.0, 5.0}, Interpolation::PiecewiseConstant);
  shapes.emplace_back("b", std::vector<double>{0.0, 0.1}, std::vector<double>{0.2, 0.3},
                      Interpolation::CubicSpline);
  write_shapes_csv(shapes, dir / "s.csv");
  const auto back = read_shapes_csv(dir / "s.csv");
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_EQ(back[j].feature(), shapes[j].feature());
    EXPECT_EQ(back[j].xs(), shapes[j].xs());
    EXPECT_EQ(back[j].ys(), shapes[j].ys());
    EXPECT_EQ(back[j].mode(), shapes[j].mode());
  }
  const std::string text = test::slurp(dir / "s.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "feature,breakpoint,value,mode");
}

TEST(ShapeCsv, RejectsForeignHeader) {
  const auto dir = test::scratch_dir();
  test::write_file(dir / "bad.csv", "a,b,c\n1,2,3\n");
  EXPECT_GAX_ERROR(read_shapes_csv(dir / "bad.csv"), MissingColumn);
}

TEST(ShapeSvg, FeatureGolden) {
  const AdditiveModel m = golden_model();
  const AdditiveModel other = m.with_method("PD");
  const std::vector<SvgSeries> series{{"SAT", &m}, {"PD", &other}};
  expect_golden("shape_x1.svg", render_feature_svg("x1", series));
  expect_golden("shape_x2.svg", render_feature_svg("x2", series));
}

TEST(ShapeSvg, PairGolden) {
  expect_golden("pair_x1__x2.svg", render_pair_svg(golden_model().pairs().front()));
}

TEST(ShapeSvg, OneFilePerFeatureAndNoHeatmapsWithoutPairs) {
  const auto dir = test::scratch_dir();
  const AdditiveModel m = golden_model();
  const auto paths = export_shapes(m, dir / "shapes.csv", dir / "svg");
  ASSERT_EQ(paths.size(), 3u);
  EXPECT_EQ(paths[0].filename(), "shape_x1.svg");
  EXPECT_EQ(paths[1].filename(), "shape_x2.svg");
  EXPECT_EQ(paths[2].filename(), "pair_x1__x2.svg");

  const AdditiveModel mains = m.with_pairs({});
  const auto dir2 = dir / "mains";
  fs::create_directories(dir2);
  const auto mains_paths = export_shapes(mains, dir2 / "shapes.csv", dir2 / "svg");
  EXPECT_EQ(mains_paths.size(), 2u);
  for (const auto& entry : fs::directory_iterator(dir2 / "svg")) {
    EXPECT_EQ(entry.path().filename().string().rfind("pair_", 0), std::string::npos);
  }
}

TEST(ShapeSvg, RenderingIsDeterministic) {
  const AdditiveModel m = golden_model();
  const std::vector<SvgSeries> series{{"SAT", &m}};
  EXPECT_EQ(render_feature_svg("x2", series), render_feature_svg("x2", series));
}

}  // namespace
}  // namespace gax
