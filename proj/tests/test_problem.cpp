#include <doctest.h>

#include <cmath>
#include <vector>

#include "cvcon/distributions.hpp"
#include "cvcon/errors.hpp"
#include "cvcon/problem.hpp"

using namespace cvcon;

namespace {

std::vector<double> scalars(const Sample& s) {
  std::vector<double> out;
  for (const auto& x : s) out.push_back(std::get<double>(x));
  return out;
}

}  // namespace

TEST_CASE("remove_indexed drops one item and keeps order") {
  const Sample abc = scalar_sample({0.1, 0.2, 0.3});
  CHECK(scalars(remove_indexed(abc, 1)) == std::vector<double>{0.1, 0.3});
  const Sample abcd = scalar_sample({0.1, 0.2, 0.3, 0.4});
  CHECK(scalars(remove_indexed(abcd, 0)) == std::vector<double>{0.2, 0.3, 0.4});
  CHECK_THROWS_AS(remove_indexed(scalar_sample({0.1}), 0), ArgumentError);
  CHECK_THROWS_AS(remove_indexed(abc, 3), ArgumentError);
}

TEST_CASE("remove_prefix") {
  CHECK(scalars(remove_prefix(scalar_sample({0.1, 0.2, 0.3, 0.4}), 2)) == std::vector<double>{0.3, 0.4});
  CHECK(scalars(remove_prefix(scalar_sample({0.1, 0.2}), 1)) == std::vector<double>{0.2});
  CHECK_THROWS_AS(remove_prefix(scalar_sample({0.1, 0.2, 0.3}), 3), ArgumentError);
  CHECK_THROWS_AS(remove_prefix(scalar_sample({0.1, 0.2, 0.3}), 0), ArgumentError);
}

TEST_CASE("fold plans are contiguous and 1-based") {
  CHECK_THROWS_AS(FoldPlan(7, 3), ArgumentError);
  CHECK_THROWS_AS(FoldPlan(6, 0), ArgumentError);
  const FoldPlan plan(6, 3);
  CHECK(plan.m() == 2);
  CHECK(plan.fold_begin(1) == 0);
  CHECK(plan.fold_begin(3) == 4);
  CHECK_THROWS_AS(plan.fold_begin(0), ArgumentError);
  CHECK_THROWS_AS(plan.fold_begin(4), ArgumentError);
}

TEST_CASE("remove_folds") {
  const Sample s = scalar_sample({0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  const FoldPlan plan(6, 3);
  CHECK(scalars(remove_folds(s, plan, {2})) == std::vector<double>{0.0, 0.1, 0.4, 0.5});
  CHECK(remove_folds(s, plan, {1, 3}) == remove_folds(s, plan, {3, 1}));
  CHECK(scalars(remove_folds(s, plan, {1, 3})) == std::vector<double>{0.2, 0.3});
  CHECK_THROWS_AS(remove_folds(s, plan, {2, 2}), ArgumentError);
  CHECK_THROWS_AS(remove_folds(s, plan, {4}), ArgumentError);
  CHECK_THROWS_AS(remove_folds(s, plan, {1, 2, 3}), ArgumentError);

  const Sample four = scalar_sample({0.1, 0.2, 0.3, 0.4});
  CHECK_THROWS_AS(remove_folds(four, FoldPlan(4, 2), {1, 2}), ArgumentError);
  CHECK_THROWS_AS(remove_folds(four, FoldPlan(6, 3), {1}), ArgumentError);
}

TEST_CASE("fold_view") {
  const Sample s = scalar_sample({0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(scalars(fold_view(s, FoldPlan(6, 3), 2)) == std::vector<double>{0.2, 0.3});
  const Sample four = scalar_sample({0.1, 0.2, 0.3, 0.4});
  CHECK(scalars(fold_view(four, FoldPlan(4, 4), 4)) == std::vector<double>{0.4});
  CHECK_THROWS_AS(fold_view(s, FoldPlan(6, 2), 3), ArgumentError);
}

TEST_CASE("instances are validated") {
  CHECK_THROWS_AS(scalar_sample({0.5, 1.5}), ArgumentError);
  CHECK_THROWS_AS(scalar_sample({-0.1}), ArgumentError);
  CHECK_THROWS_AS(Sample(std::vector<Instance>{}), ArgumentError);
  CHECK_THROWS_AS(validate_instance(Instance{LabeledPoint{{0.0}, -1}}), ArgumentError);
  CHECK_NOTHROW(validate_instance(Instance{RegressionPoint{{1.0, 2.0}, 3.0}}));
}

TEST_CASE("property: removal views reconstruct the sample") {
  for (std::uint64_t t = 0; t < 50; ++t) {
    Rng rng = stream(99, phase_tag("test/problem"), t);
    const std::size_t k = 2 + t % 4;
    const std::size_t n = k * (1 + t % 3);
    UniformDistribution u(0.0, 1.0);
    const Sample s = u.draw_sample(n, rng);

    for (std::size_t i = 0; i < n; ++i) {
      const Sample r = remove_indexed(s, i);
      std::vector<Instance> items(r.begin(), r.end());
      items.insert(items.begin() + static_cast<std::ptrdiff_t>(i), s[i]);
      CHECK(Sample(items) == s);
    }

    for (std::size_t m = 1; m < n; ++m) {
      Sample chained = s;
      for (std::size_t j = 0; j < m; ++j) chained = remove_indexed(chained, 0);
      CHECK(remove_prefix(s, m) == chained);
    }

    const FoldPlan plan(n, k);
    std::vector<Instance> joined;
    for (std::size_t j = 1; j <= k; ++j) {
      const Sample f = fold_view(s, plan, j);
      joined.insert(joined.end(), f.begin(), f.end());
    }
    CHECK(Sample(joined) == s);

    if (k >= 3) {
      for (std::size_t i = 1; i <= k; ++i) {
        for (std::size_t j = i + 1; j <= k; ++j) CHECK(remove_folds(s, plan, {i, j}) == remove_folds(s, plan, {j, i}));
      }
    }
  }
}

TEST_CASE("distributions sample inside their support and respect their seed") {
  BernoulliDistribution b(0.3);
  Rng r1 = stream(5, phase_tag("test/dist"), 0);
  Rng r2 = stream(5, phase_tag("test/dist"), 0);
  CHECK(b.draw_sample(100, r1) == b.draw_sample(100, r2));
  for (const auto& x : b.draw_sample(1000, r1)) {
    const double v = std::get<double>(x);
    CHECK((v == 0.0 || v == 1.0));
  }
  CHECK_THROWS_AS(BernoulliDistribution(1.5), ArgumentError);
  CHECK_THROWS_AS(UniformDistribution(0.6, 0.2), ArgumentError);
}

TEST_CASE("analytic moments match the sampler") {
  UniformDistribution u(0.2, 0.8);
  Rng rng = stream(11, phase_tag("test/moments"), 0);
  const std::size_t count = 200000;
  double sum = 0.0;
  double sum2 = 0.0;
  double sum3 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = std::get<double>(u.draw(rng));
    sum += x;
    sum2 += x * x;
    sum3 += x * x * x;
  }
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  CHECK(mean == doctest::Approx(*u.mean()).epsilon(0.005));
  CHECK(var == doctest::Approx(*u.variance()).epsilon(0.02));
  CHECK(std::cbrt(sum3 / count) == doctest::Approx(*u.moment_norm(3.0)).epsilon(0.005));
}

TEST_CASE("phase tags are FNV-1a") {
  static_assert(phase_tag("") == 0xCBF29CE484222325ULL);
  CHECK(phase_tag("a") == 0xAF63DC4C8601EC8CULL);
  CHECK(phase_tag("coverage") != phase_tag("coverage/probe"));
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a = stream(1, phase_tag("x"), 3, 4);
  Rng b = stream(1, phase_tag("x"), 3, 4);
  Rng c = stream(1, phase_tag("x"), 3, 5);
  Rng d = stream(2, phase_tag("x"), 3, 4);
  const auto a0 = a();
  CHECK(a0 == b());
  CHECK(a0 != c());
  CHECK(a0 != d());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(a.below(7) < 7);
  }
}
