#include "cvcon/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cvcon/errors.hpp"

namespace cvcon {

void validate_instance(const Instance& x) {
  if (const auto* v = std::get_if<double>(&x)) {
    require(*v >= 0.0 && *v <= 1.0, "scalar instance outside [0,1]");
  } else if (const auto* r = std::get_if<RegressionPoint>(&x)) {
    require(std::isfinite(r->y), "regression response is not finite");
    require(std::all_of(r->x.begin(), r->x.end(), [](double v) { return std::isfinite(v); }),
            "regression features are not finite");
  } else {
    const auto& l = std::get<LabeledPoint>(x);
    require(l.label >= 0, "labels must be non-negative integers");
  }
}

Sample::Sample(std::vector<Instance> items, std::string provenance)
    : items_(std::move(items)), provenance_(std::move(provenance)) {
  require(!items_.empty(), "a sample needs at least one instance");
}

Sample scalar_sample(std::initializer_list<double> values) {
  return scalar_sample(std::span<const double>(values.begin(), values.size()));
}

Sample scalar_sample(std::span<const double> values) {
  std::vector<Instance> items;
  items.reserve(values.size());
  for (double v : values) {
    Instance x = v;
    validate_instance(x);
    items.push_back(std::move(x));
  }
  return Sample(std::move(items));
}

FoldPlan::FoldPlan(std::size_t n, std::size_t k) : n_(n), k_(k), m_(0) {
  require(k >= 1, "fold count must be at least 1");
  require(n >= 1, "sample size must be at least 1");
  require(n % k == 0, "sample size " + std::to_string(n) + " is not divisible by k = " + std::to_string(k));
  m_ = n / k;
}

std::size_t FoldPlan::fold_begin(std::size_t j) const {
  require(j >= 1 && j <= k_, "fold index " + std::to_string(j) + " outside [1, " + std::to_string(k_) + "]");
  return (j - 1) * m_;
}

Sample remove_indexed(const Sample& s, std::size_t i) {
  require(i < s.size(), "removal index out of range");
  require(s.size() >= 2, "removal would leave an empty sample");
  std::vector<Instance> items;
  items.reserve(s.size() - 1);
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j != i) items.push_back(s[j]);
  }
  return Sample(std::move(items), s.provenance());
}

Sample remove_prefix(const Sample& s, std::size_t m) {
  require(m >= 1 && m < s.size(), "prefix removal needs 1 <= m < n");
  return Sample(std::vector<Instance>(s.begin() + static_cast<std::ptrdiff_t>(m), s.end()), s.provenance());
}

Sample remove_folds(const Sample& s, const FoldPlan& plan, std::span<const std::size_t> folds) {
  require(plan.n() == s.size(), "fold plan does not match the sample size");
  require(folds.size() == 1 || folds.size() == 2, "remove one or two folds");
  for (std::size_t j : folds) (void)plan.fold_begin(j);
  require(folds.size() == 1 || folds[0] != folds[1], "duplicate fold index");
  require(folds.size() < plan.k(), "removal would leave no fold");
  std::vector<Instance> items;
  items.reserve(s.size() - folds.size() * plan.m());
  for (std::size_t j = 1; j <= plan.k(); ++j) {
    if (std::find(folds.begin(), folds.end(), j) != folds.end()) continue;
    for (std::size_t i = plan.fold_begin(j); i < plan.fold_end(j); ++i) items.push_back(s[i]);
  }
  return Sample(std::move(items), s.provenance());
}

Sample remove_folds(const Sample& s, const FoldPlan& plan, std::initializer_list<std::size_t> folds) {
  return remove_folds(s, plan, std::span<const std::size_t>(folds.begin(), folds.size()));
}

Sample fold_view(const Sample& s, const FoldPlan& plan, std::size_t j) {
  require(plan.n() == s.size(), "fold plan does not match the sample size");
  const std::size_t begin = plan.fold_begin(j);
  return Sample(std::vector<Instance>(s.begin() + static_cast<std::ptrdiff_t>(begin),
                                      s.begin() + static_cast<std::ptrdiff_t>(begin + plan.m())),
                s.provenance());
}

Sample replace_range(const Sample& s, std::size_t first, std::span<const Instance> replacement) {
  require(first + replacement.size() <= s.size(), "replacement range out of bounds");
  std::vector<Instance> items(s.begin(), s.end());
  std::copy(replacement.begin(), replacement.end(), items.begin() + static_cast<std::ptrdiff_t>(first));
  return Sample(std::move(items), s.provenance());
}

double LinearHypothesis::predict(std::span<const double> x) const {
  require(x.size() == coef.size(), "feature dimension does not match the coefficients");
  return std::inner_product(coef.begin(), coef.end(), x.begin(), 0.0);
}

int KnnHypothesis::predict(std::span<const double> x) const {
  require(train && !train->empty(), "k-NN hypothesis without training data");
  const auto& points = *train;
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].x.size() == x.size(), "feature dimension mismatch");
    double d2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double diff = points[i].x[c] - x[c];
      d2 += diff * diff;
    }
    order.emplace_back(d2, i);
  }
  const std::size_t kappa = std::min<std::size_t>(static_cast<std::size_t>(neighbors), points.size());
  // Pair comparison orders by distance, then by training index.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kappa), order.end());
  std::map<int, std::size_t> votes;
  for (std::size_t r = 0; r < kappa; ++r) ++votes[points[order[r].second].label];
  int best = votes.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

bool KnnHypothesis::operator==(const KnnHypothesis& other) const {
  if (neighbors != other.neighbors) return false;
  if (train == other.train) return true;
  return train && other.train && *train == *other.train;
}

std::vector<Instance> Distribution::draw_items(std::size_t n, Rng& rng) const {
  std::vector<Instance> items;
  items.reserve(n);
  for (std::size_t i = 0; i < n; ++i) items.push_back(draw(rng));
  return items;
}

Sample Distribution::draw_sample(std::size_t n, Rng& rng, std::string provenance) const {
  return Sample(draw_items(n, rng), std::move(provenance));
}

}  // namespace cvcon
