#include <doctest.h>

#include "agepath/acs.hpp"
#include "agepath/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <set>

using namespace agepath;

TEST_CASE("csv parsing") {
  const Dataset ds = parse_csv("a,b,y\n1,2,0\n3,4,1\n", Task::classification);
  CHECK(ds.n() == 2);
  CHECK(ds.d() == 2);
  CHECK(ds.y()(0) == -1.0);
  CHECK(ds.y()(1) == 1.0);
  CHECK(ds.feature_names() == std::vector<std::string>{"a", "b"});

  try {
    parse_csv("a,b,y\n1,2,3\n4,NaN,1\n", Task::regression);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_csv("a,b,y\n1,2\n", Task::regression), ParseError);
  CHECK_THROWS_AS(parse_csv("", Task::regression), ParseError);
  CHECK_THROWS_AS(parse_csv("a,y\n1,2\n", Task::classification), std::invalid_argument);
}

TEST_CASE("libsvm parsing") {
  const Dataset ds = parse_libsvm("+1 1:0.5 3:2.0\n-1 2:1\n", Task::classification);
  CHECK(ds.d() == 3);
  CHECK(ds.X()(0, 0) == 0.5);
  CHECK(ds.X()(0, 1) == 0.0);
  CHECK(ds.X()(0, 2) == 2.0);
  CHECK(ds.y()(1) == -1.0);
  CHECK_THROWS_AS(parse_libsvm("1 0:1\n", Task::regression), ParseError);
}

TEST_CASE("csv round trip is exact") {
  const Synthetic s = synthesize(7, 3, Task::regression, 9);
  const auto path = (std::filesystem::temp_directory_path() / "agepath_rt.csv").string();
  save_csv(s.data, path);
  const Dataset back = load(path, FileFormat::csv, Task::regression);
  CHECK(back == s.data);
  std::remove(path.c_str());
}

TEST_CASE("noise injection") {
  const Dataset c = synthesize(10, 2, Task::classification, 1).data;
  const NoisyDataset none = inject_noise(c, {0.0, NoiseKind::label_flip, 3});
  CHECK(none.data == c);
  CHECK(none.corrupted.empty());

  const NoisyDataset a = inject_noise(c, {0.3, NoiseKind::label_flip, 3});
  const NoisyDataset b = inject_noise(c, {0.3, NoiseKind::label_flip, 3});
  CHECK(a.corrupted.size() == 3);
  CHECK(a.corrupted == b.corrupted);
  CHECK(a.data.X() == c.X());
  int changed = 0;
  for (Eigen::Index i = 0; i < c.n(); ++i) changed += a.data.y()(i) != c.y()(i);
  CHECK(changed == 3);

  const Dataset r = synthesize(25, 2, Task::regression, 2).data;
  const NoisyDataset rn = inject_noise(r, {0.3, NoiseKind::target_perturb, 4});
  CHECK(rn.corrupted.size() == 8);  // floor(7.5 + 0.5)
  CHECK_THROWS_AS(inject_noise(r, {0.3, NoiseKind::label_flip, 4}), std::invalid_argument);
  CHECK_THROWS_AS(inject_noise(c, {0.3, NoiseKind::target_perturb, 4}), std::invalid_argument);
}

TEST_CASE("synthesize") {
  const Synthetic a = synthesize(4, 2, Task::regression, 7);
  const Synthetic b = synthesize(4, 2, Task::regression, 7);
  CHECK(a.data == b.data);

  SynthOptions o;
  o.noise_scale = 0.0;
  o.w0 = Vector::Unit(3, 0);
  const Synthetic e = synthesize(12, 3, Task::regression, 4, o);
  const Vector ls = e.data.X().colPivHouseholderQr().solve(e.data.y());
  CHECK((ls - *o.w0).norm() <= 1e-12);

  // separated blobs are linearly separable for a hard-ish linear SVM
  const Synthetic blobs = synthesize(30, 2, Task::classification, 12);
  Hyper h;
  h.C = 100.0;
  h.kernel.kind = KernelKind::linear;
  const Problem pb(ModelKind::svm, blobs.data, h);
  const FitResult fit = weighted_fit(pb, Vector::Ones(30));
  const Vector f = pb.decision(fit.params);
  int correct = 0;
  for (Eigen::Index i = 0; i < 30; ++i) correct += f(i) * blobs.data.y()(i) > 0;
  CHECK(correct == 30);

  SynthDescriptor dsc{5, 2, Task::regression, 3, std::nullopt};
  const SynthDescriptor back = read_descriptor(write_descriptor(dsc));
  CHECK(synthesize(back).data == synthesize(5, 2, Task::regression, 3).data);
}

TEST_CASE("split") {
  const Dataset ds = synthesize(8, 2, Task::regression, 1).data;
  const SplitResult s = split(ds, 0.75, 5);
  CHECK(s.train.n() == 6);
  CHECK(s.test.n() == 2);
  std::set<Eigen::Index> all(s.train_rows.begin(), s.train_rows.end());
  all.insert(s.test_rows.begin(), s.test_rows.end());
  CHECK(all.size() == 8);
  const SplitResult t = split(synthesize(2, 1, Task::regression, 1).data, 0.5, 1);
  CHECK(t.train.n() == 1);
  CHECK(t.test.n() == 1);
  CHECK_THROWS_AS(split(ds, 1.0, 1), std::invalid_argument);
  const SplitResult u = split(ds, 0.75, 5);
  CHECK(u.train_rows == s.train_rows);
}

TEST_CASE("standardize") {
  const Dataset ds = synthesize(20, 3, Task::regression, 2).data;
  const Dataset z = standardize(ds);
  REQUIRE(z.standardization().has_value());
  CHECK(z.X().colwise().mean().norm() <= 1e-12);
  const Vector back = z.X().row(3).transpose().cwiseProduct(z.standardization()->scale) + z.standardization()->mean;
  CHECK((back - ds.X().row(3).transpose()).norm() <= 1e-12);
}
