#include "doctest.h"

#include <filesystem>
#include <random>

#include "symstat/artifacts.hpp"
#include "symstat/errors.hpp"

using namespace symstat;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("symstat_artifacts_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::shared_ptr<const PointGroup> ico() {
  static auto g = std::make_shared<const PointGroup>(build_icosahedral());
  return g;
}

}  // namespace

TEST_CASE("content hash") {
  CHECK(content_hash("") == "cbf29ce484222325");
  CHECK(content_hash("a") == "af63dc4c8601ec8c");
  CHECK(content_hash("ab") != content_hash("ba"));
}

TEST_CASE("basis round trip is byte-identical") {
  const auto dir = scratch("basis");
  const auto set = build_angular_basis_set(ico(), 12);
  write_basis(dir, set, 3, {0, 1, 2, 3, 4});
  const auto back = read_basis(dir, ico());
  CHECK(back.l_max() == 12);
  for (int l = 0; l <= 12; ++l)
    for (int p = 0; p < 5; ++p)
      for (int n = 0; n < set.multiplicity(p, l); ++n) CHECK(back.slice(l).coeff(p, n) == set.slice(l).coeff(p, n));
  const auto first = read_file(dir / "basis.bin");
  const auto dir2 = scratch("basis2");
  write_basis(dir2, back, 3, {0, 1, 2, 3, 4});
  CHECK(read_file(dir2 / "basis.bin") == first);
  CHECK(read_file(dir2 / "basis.json") == read_file(dir / "basis.json"));
  const auto manifest = read_json(dir / "basis.json");
  CHECK(manifest["payload_hash"] == file_hash(dir / "basis.bin"));

  auto other = std::make_shared<const PointGroup>(build_cyclic(2));
  CHECK_THROWS_AS(read_basis(dir, other), Error);
  write_file(dir / "basis.bin", first.substr(0, first.size() / 2));
  try {
    read_basis(dir, ico());
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("params round trip") {
  const auto dir = scratch("params");
  const auto angular = std::make_shared<const AngularBasisSet>(build_angular_basis_set(ico(), 6));
  const auto m = make_model(angular, 254.0, 6, 2, {0, 1, 2, 3, 4});
  auto p = make_params(m, 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (auto& x : p.mu) x = n(rng);
  p.v[2](0, 1) = p.v[2](1, 0) = 0.01;
  write_params(dir, p);
  const auto back = read_params(dir);
  CHECK(back.mu == p.mu);
  for (size_t k = 0; k < p.v.size(); ++k) CHECK(back.v[k] == p.v[k]);
  CHECK(back.model->index.p_set() == p.model->index.p_set());
  CHECK(read_json(dir / "params.json")["p_set"] == nlohmann::json::array({1, 2, 3, 4, 5}));
  const auto dir2 = scratch("params2");
  write_params(dir2, back);
  CHECK(read_file(dir2 / "params.bin") == read_file(dir / "params.bin"));
  CHECK(read_file(dir2 / "params.json") == read_file(dir / "params.json"));
}

TEST_CASE("stack round trip") {
  const auto dir = scratch("stack");
  const auto angular = std::make_shared<const AngularBasisSet>(build_angular_basis_set(ico(), 4));
  const auto m = make_model(angular, 1.0, 4, 2, {0, 1, 2, 3, 4});
  const auto stack = simulate_images(make_params(m, 0.1), 5, 1.0, ImageGeometry{6, 0.3}, 3);
  write_stack(dir, stack);
  const auto back = read_stack(dir);
  CHECK(back.count() == 5);
  CHECK(back.sigma2 == stack.sigma2);
  CHECK(back.geometry.side == 6);
  // Images are stored in single precision.
  CHECK((back.images - stack.images).cwiseAbs().maxCoeff() < 1e-6 * stack.images.cwiseAbs().maxCoeff());
  CHECK(back.true_coefficients == stack.true_coefficients);
  for (int i = 0; i < 5; ++i) CHECK(back.true_rotations[i] == stack.true_rotations[i]);
  const auto dir2 = scratch("stack2");
  write_stack(dir2, back);
  CHECK(read_file(dir2 / "stack.bin") == read_file(dir / "stack.bin"));
  CHECK(read_file(dir2 / "truth.bin") == read_file(dir / "truth.bin"));
}

TEST_CASE("volume round trip and CSV") {
  const auto dir = scratch("volume");
  VolumeGrid v(4, 2.5);
  for (size_t i = 0; i < v.size(); ++i) v.data[i] = 0.25 * static_cast<double>(i);
  write_volume(dir, v, "mean");
  const auto back = read_volume(dir, "mean");
  CHECK(back.side == 4);
  CHECK(back.voxel_size == 2.5);
  CHECK(back.data == v.data);
  const auto c = fsc(v, v);
  const auto csv = fsc_csv(c);
  CHECK(csv.rfind("k,fsc,energy\n", 0) == 0);
}

TEST_CASE("I/O errors") {
  try {
    read_file("/nonexistent/definitely/missing.bin");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
  const auto dir = scratch("bad");
  write_file(dir / "params.json", "{ not json");
  CHECK_THROWS_AS(read_params(dir), Error);
  CHECK_THROWS_AS(read_stack(dir), Error);
}

TEST_CASE("report JSON carries no timings") {
  RunReport r;
  r.iterations.push_back({"homogeneous", 1, -10.0, 3.5, 0.0});
  r.seconds = 12.0;
  const auto a = report_json(r).dump();
  r.seconds = 99.0;
  r.iterations[0].seconds = 1.0;
  CHECK(report_json(r).dump() == a);
}
