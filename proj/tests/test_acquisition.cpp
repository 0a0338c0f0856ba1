#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "balds/acquisition.hpp"
#include "balds/rng.hpp"

using namespace balds;

namespace {

PosteriorSamples make_samples(const Matrix& rows, HeadKind head) {
  PosteriorSamples s;
  s.samples = rows;
  s.head = head;
  return s;
}

PosteriorSamples random_softmax_samples(int passes, int classes, Rng& rng) {
  Matrix m(passes, classes);
  for (int t = 0; t < passes; ++t) {
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) {
      m(t, c) = -std::log(1.0 - rng.uniform());
      sum += m(t, c);
    }
    m.row(t) /= sum;
  }
  return make_samples(m, HeadKind::Softmax);
}

double brute_entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

}  // namespace

TEST_CASE("variance: degenerate and two-point posteriors") {
  Matrix same = Matrix::Constant(5, 3, 1.0 / 3.0);
  CHECK(variance(make_samples(same, HeadKind::Softmax)).cwiseAbs().maxCoeff() == 0.0);

  Matrix two(2, 1);
  two << 0.0, 1.0;
  CHECK(variance(make_samples(two, HeadKind::Sigmoid))[0] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("variance: matches the brute-force population variance") {
  Rng rng(1);
  PosteriorSamples s = random_softmax_samples(10, 3, rng);
  Vector v = variance(s);
  for (int c = 0; c < 3; ++c) {
    double mu = 0.0;
    for (int t = 0; t < 10; ++t) mu += s.samples(t, c);
    mu /= 10.0;
    double acc = 0.0;
    for (int t = 0; t < 10; ++t) acc += (s.samples(t, c) - mu) * (s.samples(t, c) - mu);
    CHECK(v[c] == doctest::Approx(acc / 10.0).epsilon(1e-9));
  }
}

TEST_CASE("variation_ratio: closed forms") {
  Matrix agree(4, 3);
  agree << 0.7, 0.2, 0.1, 0.6, 0.3, 0.1, 0.8, 0.1, 0.1, 0.9, 0.05, 0.05;
  CHECK(variation_ratio(make_samples(agree, HeadKind::Softmax)) == 0.0);

  // T=10, modal class appears 6 times -> 0.4 exactly.
  Matrix m(10, 2);
  for (int t = 0; t < 10; ++t) {
    double p = t < 6 ? 0.9 : 0.1;
    m(t, 0) = p;
    m(t, 1) = 1.0 - p;
  }
  CHECK(variation_ratio(make_samples(m, HeadKind::Softmax)) == doctest::Approx(0.4).epsilon(0.0));
}

TEST_CASE("variation_ratio: matches explicit mode counting on random rows") {
  Rng rng(2);
  PosteriorSamples s = random_softmax_samples(7, 4, rng);
  std::map<int, int> counts;
  for (int t = 0; t < 7; ++t) {
    Eigen::Index am = 0;
    s.samples.row(t).maxCoeff(&am);
    counts[static_cast<int>(am)]++;
  }
  int mode = 0;
  for (auto& [cls, n] : counts) mode = std::max(mode, n);
  CHECK(variation_ratio(s) == doctest::Approx(1.0 - mode / 7.0).epsilon(1e-12));
}

TEST_CASE("variation_ratio: sigmoid per-class binarization") {
  Matrix m(4, 2);
  m << 0.9, 0.2, 0.8, 0.7, 0.6, 0.3, 0.2, 0.4;
  // class 0: binarized {1,1,1,0} -> mode 3/4 -> 0.25; class 1: {0,1,0,0} -> 0.25
  Vector vr = variation_ratio_per_class(make_samples(m, HeadKind::Sigmoid));
  CHECK(vr[0] == doctest::Approx(0.25));
  CHECK(vr[1] == doctest::Approx(0.25));
}

TEST_CASE("entropy: closed forms") {
  Matrix onehot = Matrix::Zero(3, 4);
  onehot.col(1).setOnes();
  CHECK(entropy(make_samples(onehot, HeadKind::Softmax)) == 0.0);

  Matrix uniform = Matrix::Constant(2, 7, 1.0 / 7.0);
  CHECK(entropy(make_samples(uniform, HeadKind::Softmax)) ==
        doctest::Approx(1.9459101490553132).epsilon(1e-9));

  Matrix skewed(1, 4);
  skewed << 0.7, 0.1, 0.1, 0.1;
  CHECK(entropy(make_samples(skewed, HeadKind::Softmax)) ==
        doctest::Approx(0.94044798865532642).epsilon(1e-12));
}

TEST_CASE("entropy: bounded by ln C with equality only at uniform") {
  Rng rng(3);
  double lnC = std::log(5.0);
  for (int trial = 0; trial < 50; ++trial) {
    PosteriorSamples s = random_softmax_samples(8, 5, rng);
    CHECK(entropy(s) <= lnC + 1e-12);
  }
  Matrix uniform = Matrix::Constant(3, 5, 0.2);
  CHECK(entropy(make_samples(uniform, HeadKind::Softmax)) == doctest::Approx(lnC).epsilon(1e-12));
  Matrix perturbed = uniform;
  perturbed(0, 0) += 0.05;
  perturbed(0, 1) -= 0.05;
  CHECK(entropy(make_samples(perturbed, HeadKind::Softmax)) < lnC - 1e-6);
}

TEST_CASE("mutual_information: closed forms") {
  Matrix same = Matrix::Constant(6, 3, 1.0 / 3.0);
  CHECK(mutual_information(make_samples(same, HeadKind::Softmax)) == doctest::Approx(0.0));

  Matrix flip(2, 2);
  flip << 1, 0, 0, 1;
  CHECK(mutual_information(make_samples(flip, HeadKind::Softmax)) ==
        doctest::Approx(0.69314718055994529).epsilon(1e-9));
}

TEST_CASE("mutual_information: brute force and bounds on random posteriors") {
  Rng rng(4);
  PosteriorSamples s = random_softmax_samples(10, 5, rng);
  Vector mean = posterior_mean(s);
  double expect_h = 0.0;
  for (int t = 0; t < 10; ++t) expect_h += brute_entropy(s.samples.row(t).transpose());
  expect_h /= 10.0;
  double brute = brute_entropy(mean) - expect_h;
  double mi = mutual_information(s);
  CHECK(mi == doctest::Approx(brute).epsilon(1e-9));
  CHECK(mi >= 0.0);
  CHECK(mi <= entropy(s) + 1e-12);
}

TEST_CASE("acquisition metrics are permutation-invariant over passes") {
  Rng rng(5);
  PosteriorSamples s = random_softmax_samples(9, 4, rng);
  PosteriorSamples shuffled = s;
  std::vector<int> perm = {4, 7, 0, 2, 8, 1, 6, 3, 5};
  for (int t = 0; t < 9; ++t) shuffled.samples.row(t) = s.samples.row(perm[t]);
  CHECK((variance(s) - variance(shuffled)).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(variation_ratio(s) == variation_ratio(shuffled));
  CHECK(entropy(s) == doctest::Approx(entropy(shuffled)).epsilon(1e-15));
  CHECK(mutual_information(s) == doctest::Approx(mutual_information(shuffled)).epsilon(1e-15));
}

TEST_CASE("all four metrics are zero on a one-hot degenerate posterior") {
  Matrix rows = Matrix::Zero(8, 5);
  rows.col(2).setOnes();
  PosteriorSamples s = make_samples(rows, HeadKind::Softmax);
  CHECK(variance(s).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::fabs(variation_ratio(s)) <= 1e-12);
  CHECK(std::fabs(entropy(s)) <= 1e-12);
  CHECK(std::fabs(mutual_information(s)) <= 1e-12);
}

TEST_CASE("metrics strictly positive on genuinely disagreeing posteriors") {
  Matrix rows(4, 3);
  rows << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.7, 0.2, 0.1, 0.2, 0.7, 0.1;
  PosteriorSamples s = make_samples(rows, HeadKind::Softmax);
  CHECK(variance(s).maxCoeff() > 0.0);
  CHECK(variation_ratio(s) > 0.0);
  CHECK(mutual_information(s) > 0.0);
  CHECK(entropy(s) > 0.0);
}

TEST_CASE("sigmoid per-class entropy and MI") {
  Matrix rows(4, 2);
  rows << 0.9, 0.5, 0.9, 0.5, 0.9, 0.5, 0.9, 0.5;
  PosteriorSamples s = make_samples(rows, HeadKind::Sigmoid);
  Vector h = entropy_per_class(s);
  CHECK(h[0] == doctest::Approx(-(0.9 * std::log(0.9) + 0.1 * std::log(0.1))).epsilon(1e-12));
  CHECK(h[1] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // identical passes -> epistemic disagreement is zero per class
  CHECK(mutual_information_per_class(s).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("aggregate: mean and max") {
  Vector zeros = Vector::Zero(3);
  CHECK(aggregate(zeros, AggregationKind::Mean) == 0.0);
  CHECK(aggregate(zeros, AggregationKind::Max) == 0.0);
  Vector v(2);
  v << 0.1, 0.9;
  CHECK(aggregate(v, AggregationKind::Mean) == doctest::Approx(0.5));
  CHECK(aggregate(v, AggregationKind::Max) == doctest::Approx(0.9));
  Rng rng(6);
  Vector r(7);
  for (int i = 0; i < 7; ++i) r[i] = rng.uniform();
  double mx = r[0], mn = 0.0;
  for (int i = 0; i < 7; ++i) {
    mx = std::max(mx, r[i]);
    mn += r[i];
  }
  CHECK(aggregate(r, AggregationKind::Max) == doctest::Approx(mx));
  CHECK(aggregate(r, AggregationKind::Mean) == doctest::Approx(mn / 7.0));
  CHECK_THROWS_AS(aggregate(Vector(), AggregationKind::Mean), DataError);
}

TEST_CASE("rank_pool: descending with id tie-break") {
  std::vector<ScoredItem> scored = {{10, 0.2}, {11, 0.9}, {12, 0.9}};
  auto order = rank_pool(scored, AcquisitionKind::Entropy, 0);
  CHECK(order == std::vector<std::int64_t>{11, 12, 10});

  std::vector<ScoredItem> one = {{5, 0.4}};
  CHECK(rank_pool(one, AcquisitionKind::Variance, 0) == std::vector<std::int64_t>{5});
}

TEST_CASE("rank_pool: invariant to input order for non-random kinds") {
  Rng rng(7);
  std::vector<ScoredItem> scored;
  for (int i = 0; i < 40; ++i) scored.push_back({i, rng.uniform()});
  scored[7].score = scored[21].score;  // force a tie
  auto base = rank_pool(scored, AcquisitionKind::MutualInformation, 0);
  std::vector<ScoredItem> shuffled = scored;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(rank_pool(shuffled, AcquisitionKind::MutualInformation, 9) == base);
}

TEST_CASE("rank_pool: random ranking is a seeded shuffle, reproducible") {
  std::vector<ScoredItem> scored;
  for (int i = 0; i < 20; ++i) scored.push_back({i, 0.5});
  auto a = rank_pool(scored, AcquisitionKind::Random, 42);
  auto b = rank_pool(scored, AcquisitionKind::Random, 42);
  CHECK(a == b);
  auto c = rank_pool(scored, AcquisitionKind::Random, 43);
  CHECK(a != c);
  std::vector<std::int64_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("class_scores: softmax scalar metrics become length-1 vectors") {
  Rng rng(8);
  PosteriorSamples s = random_softmax_samples(6, 4, rng);
  CHECK(class_scores(s, AcquisitionKind::Entropy).size() == 1);
  CHECK(class_scores(s, AcquisitionKind::Variance).size() == 4);
  CHECK(item_score(s, AcquisitionKind::Entropy, AggregationKind::Max) ==
        doctest::Approx(entropy(s)));
}
