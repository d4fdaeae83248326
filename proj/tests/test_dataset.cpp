#include <doctest.h>

#include "support.hpp"

#include "goalskit/dataset.hpp"
#include "goalskit/simgen.hpp"

#include <filesystem>
#include <fstream>

using namespace goalskit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("goalskit_dataset_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("load_csv reads a small table") {
  const auto p = temp_file("small.csv", "a,y,b\n1,10,4\n2,20,5\n3,30,6.5\n");
  const Dataset d = load_csv(p, "y");
  CHECK(d.n() == 3);
  CHECK(d.j() == 2);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.x(2, 1) == 6.5);
  CHECK(d.y(1) == 20.0);
  CHECK_FALSE(d.standardized);
}

TEST_CASE("load_csv errors name the offending cell") {
  const auto p = temp_file("bad.csv", "a,y\n1,2\n3,oops\n");
  try {
    (void)load_csv(p, "y");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
  CHECK_THROWS_AS((void)load_csv(temp_file("nores.csv", "a,b\n1,2\n3,4\n"), "y"), DataError);
  CHECK_THROWS_AS((void)load_csv(temp_file("onerow.csv", "a,y\n1,2\n"), "y"), DataError);
  CHECK_THROWS_AS((void)load_csv(fs::temp_directory_path() / "goalskit_no_such_file.csv", "y"), DataError);
}

TEST_CASE("write_csv then load_csv round-trips a simulated 2000 x 25 design bit-identically") {
  SimConfig cfg = scenario_preset(Scenario::I);
  cfg.seed = 3;
  const Simulation s = simulate(cfg);
  const fs::path p = fs::temp_directory_path() / "goalskit_dataset_roundtrip.csv";
  write_csv(s.data, p);
  const Dataset back = load_csv(p, "y");
  CHECK(back.n() == 2000);
  CHECK(back.j() == 25);
  CHECK((back.x.array() == s.data.x.array()).all());
  CHECK((back.y.array() == s.data.y.array()).all());
}

TEST_CASE("standardize") {
  Dataset d;
  d.x = Matrix(3, 1);
  d.x << 1, 2, 3;
  d.y = Vector(3);
  d.y << 4, 5, 9;
  d.feature_names = {"x1"};
  const Dataset s = standardize(d);
  CHECK(s.x(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s.x(1, 0) == doctest::Approx(0.0));
  CHECK(s.x(2, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.column_means(0) == 2.0);
  CHECK(s.column_sds(0) == 1.0);
  CHECK_THROWS_AS((void)standardize(s), DataError);

  Dataset c = d;
  c.x.col(0).setConstant(4.0);
  try {
    (void)standardize(c);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
}

TEST_CASE("standardize moments on a random 100 x 5 matrix") {
  std::mt19937_64 rng(5);
  Dataset d;
  d.x = oracle::random_matrix(100, 5, rng, 3.0).array() + 7.0;
  d.y = oracle::random_vector(100, rng);
  d.feature_names = default_feature_names(5);
  const Dataset s = standardize(d);
  for (Index c = 0; c < 5; ++c) {
    const Vector col = s.x.col(c);
    CHECK(std::abs(col.mean()) < 1e-12);
    CHECK(std::abs(std::sqrt(sample_variance(col)) - 1.0) < 1e-12);
    // inverse transform recovers the raw column
    CHECK(((col.array() * s.column_sds(c) + s.column_means(c)) - d.x.col(c).array()).abs().maxCoeff() < 1e-12);
  }
  CHECK(std::abs(s.y.mean()) < 1e-12);
  CHECK(std::abs(std::sqrt(sample_variance(s.y)) - 1.0) < 1e-12);
}

TEST_CASE("validate rejects non-finite values and shape mismatches") {
  Dataset d;
  d.x = Matrix::Ones(3, 2);
  d.y = Vector::Ones(3);
  d.feature_names = default_feature_names(2);
  CHECK_NOTHROW(validate(d));
  d.x(1, 1) = std::nan("");
  CHECK_THROWS_AS(validate(d), DataError);
  d.x(1, 1) = 0.0;
  d.y = Vector::Ones(4);
  CHECK_THROWS_AS(validate(d), DataError);
}

TEST_CASE("principal components") {
  std::mt19937_64 rng(6);
  SUBCASE("dominant direction") {
    const Vector u = oracle::random_vector(200, rng);
    const Vector w = oracle::random_vector(8, rng);
    Dataset d;
    d.x = u * w.transpose() + 1e-3 * oracle::random_matrix(200, 8, rng);
    d.y = oracle::random_vector(200, rng);
    d.feature_names = default_feature_names(8);
    d = standardize(d);
    const Matrix pc = top_principal_components(d, 1);
    const Vector a = pc.col(0).array() - pc.col(0).mean();
    const Vector b = u.array() - u.mean();
    CHECK(std::abs(a.dot(b)) / (a.norm() * b.norm()) > 0.999);
  }
  SUBCASE("scores are orthogonal and unit SD; all components explain the total variance") {
    Dataset d;
    d.x = oracle::random_matrix(40, 6, rng);
    d.y = oracle::random_vector(40, rng);
    d.feature_names = default_feature_names(6);
    d = standardize(d);
    const Matrix raw = principal_component_scores(d.x, 6, false);
    for (Index a = 0; a < 6; ++a)
      for (Index b = a + 1; b < 6; ++b) CHECK(std::abs(raw.col(a).dot(raw.col(b))) < 1e-8);
    CHECK(std::abs(raw.squaredNorm() - d.x.squaredNorm()) < 1e-8);
    // descending variance
    for (Index a = 0; a + 1 < 6; ++a) CHECK(raw.col(a).squaredNorm() >= raw.col(a + 1).squaredNorm() - 1e-12);
    const Matrix pc = top_principal_components(d, 3);
    for (Index a = 0; a < 3; ++a) CHECK(std::abs(std::sqrt(sample_variance(pc.col(a))) - 1.0) < 1e-12);
    CHECK_THROWS_AS((void)top_principal_components(d, 0), std::out_of_range);
    CHECK_THROWS_AS((void)top_principal_components(d, 7), std::out_of_range);
  }
  SUBCASE("orthonormal design") {
    Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(30, 4, rng));
    Matrix q = qr.householderQ() * Matrix::Identity(30, 4);
    q = q.rowwise() - q.colwise().mean();
    const Matrix raw = principal_component_scores(q, 4, false);
    for (Index a = 0; a < 4; ++a)
      for (Index b = a + 1; b < 4; ++b) CHECK(std::abs(raw.col(a).dot(raw.col(b))) < 1e-8);
  }
  SUBCASE("requires standardized data") {
    Dataset d;
    d.x = oracle::random_matrix(10, 3, rng);
    d.y = oracle::random_vector(10, rng);
    d.feature_names = default_feature_names(3);
    CHECK_THROWS_AS((void)top_principal_components(d, 1), DataError);
  }
}
