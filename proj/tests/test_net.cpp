#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "balds/adam.hpp"
#include "balds/losses.hpp"
#include "balds/net.hpp"
#include "balds/rng.hpp"
#include "gradcheck.hpp"

using namespace balds;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = scale * rng.normal();
  return m;
}

}  // namespace

TEST_CASE("forward: all-ones masks at p=0 equal the maskless deterministic pass") {
  NetworkSpec spec = NetworkSpec::frame_model(5, 3, 0.0, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 7);
  Rng rng(11);
  Matrix x = random_matrix(4, 5, rng);
  DropoutMaskSet masks = sample_masks(spec, 99, 0);
  for (const auto& m : masks.masks) CHECK(m.minCoeff() == 1.0);
  Matrix with_masks = forward(spec, params, x, &masks);
  Matrix maskless = forward(spec, params, x, nullptr);
  CHECK((with_masks - maskless).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward: zero weights with softmax head give the uniform distribution") {
  NetworkSpec spec = NetworkSpec::frame_model(5, 7, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 7);
  for (auto& layer : params.values)
    for (auto& blob : layer) blob.setZero();
  Rng rng(3);
  Matrix x = random_matrix(2, 5, rng);
  Matrix out = forward(spec, params, x, nullptr);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c)
      CHECK(out(r, c) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("forward: hand-computed 2-class softmax") {
  // softmax(Wx + b) with W=[[0.5,-0.25,0.75],[-1,0.5,0.25]], b=[0.1,-0.2], x=[1,2,-1]
  NetworkSpec spec;
  spec.layers = {DenseSpec{3, 2, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 0);
  params.values[0][0] << 0.5, -0.25, 0.75, -1.0, 0.5, 0.25;
  params.values[0][1] << 0.1, -0.2;
  Matrix x(1, 3);
  x << 1.0, 2.0, -1.0;
  Matrix out = forward(spec, params, x, nullptr);
  CHECK(out(0, 0) == doctest::Approx(0.4501660026875221).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(0.54983399731247795).epsilon(1e-12));
}

TEST_CASE("forward: softmax rows sum to one for random logits") {
  NetworkSpec spec = NetworkSpec::frame_model(8, 7, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 21);
  Rng rng(5);
  Matrix x = random_matrix(64, 8, rng, 3.0);
  Matrix out = forward(spec, params, x, nullptr);
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    CHECK(std::fabs(out.row(r).sum() - 1.0) <= 1e-9);
}

TEST_CASE("forward: sigmoid outputs lie strictly inside (0,1)") {
  NetworkSpec spec = NetworkSpec::frame_model(8, 7, 0.5, HeadKind::Sigmoid);
  ParameterStore params = init_parameters(spec, 21);
  Rng rng(6);
  Matrix x = random_matrix(32, 8, rng);
  Matrix out = forward(spec, params, x, nullptr);
  CHECK(out.minCoeff() > 0.0);
  CHECK(out.maxCoeff() < 1.0);
}

TEST_CASE("forward: shape mismatch raises") {
  NetworkSpec spec = NetworkSpec::frame_model(5, 3, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 7);
  Matrix bad(2, 4);
  bad.setZero();
  CHECK_THROWS_AS(forward(spec, params, bad, nullptr), ConfigError);
}

TEST_CASE("forward: inverted dropout keeps the deterministic pass in expectation") {
  // Linear layer followed by dropout; the mean over many masked passes of the
  // post-dropout activation must approach the deterministic activation.
  NetworkSpec spec;
  spec.layers = {DenseSpec{6, 8, Activation::Identity}, DropoutSpec{0.37},
                 DenseSpec{8, 2, Activation::Identity}};
  spec.head = HeadKind::Sigmoid;
  ParameterStore params = init_parameters(spec, 12);
  Rng rng(13);
  Matrix x = random_matrix(1, 6, rng);

  ForwardCache det_cache;
  forward(spec, params, x, nullptr, &det_cache);
  Vector det = det_cache.layer_out[1].row(0);

  const int passes = 10000;
  Matrix sum = Matrix::Zero(1, 8);
  Matrix sum_sq = Matrix::Zero(1, 8);
  for (int t = 0; t < passes; ++t) {
    DropoutMaskSet masks = sample_masks(spec, 77, t);
    ForwardCache cache;
    forward(spec, params, x, &masks, &cache);
    sum += cache.layer_out[1];
    sum_sq += cache.layer_out[1].cwiseProduct(cache.layer_out[1]);
  }
  for (int u = 0; u < 8; ++u) {
    double mean = sum(0, u) / passes;
    double var = sum_sq(0, u) / passes - mean * mean;
    double sem = std::sqrt(std::max(var, 0.0) / passes);
    CHECK(std::fabs(mean - det[u]) <= 3.0 * sem + 1e-12);
  }
}

TEST_CASE("lstm_step: zero weights and zero state give zero output") {
  LstmSpec cell{3, 4};
  std::vector<Matrix> params = {Matrix::Zero(16, 3), Matrix::Zero(16, 4), Matrix::Zero(16, 1)};
  LstmState state = zero_state(cell);
  Vector x = Vector::Ones(3);
  auto [next, out] = lstm_step(cell, params, state, x);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
  CHECK(next.cell.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm_step: pure function of (state, input, params)") {
  LstmSpec cell{3, 4};
  NetworkSpec spec;
  spec.layers = {LstmSpec{3, 4}, DenseSpec{4, 2, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore store = init_parameters(spec, 5);
  LstmState state{Vector::Ones(4) * 0.3, Vector::Ones(4) * -0.2};
  Rng rng(8);
  Vector x(3);
  x << rng.normal(), rng.normal(), rng.normal();
  auto [s1, o1] = lstm_step(cell, store.values[0], state, x);
  auto [s2, o2] = lstm_step(cell, store.values[0], state, x);
  CHECK((o1 - o2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1.cell - s2.cell).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm_step: hand-evaluated single-unit gates") {
  // i,f,g,o weights [0.5,-0.3,0.8,1.0], recurrent [0.2,0.4,-0.5,0.3],
  // bias [0.1,0.2,-0.1,0.05]; h=0.5, c=-0.25, x=1.5.
  LstmSpec cell{1, 1};
  std::vector<Matrix> params(3);
  params[0] = Matrix(4, 1);
  params[0] << 0.5, -0.3, 0.8, 1.0;
  params[1] = Matrix(4, 1);
  params[1] << 0.2, 0.4, -0.5, 0.3;
  params[2] = Matrix(4, 1);
  params[2] << 0.1, 0.2, -0.1, 0.05;
  LstmState state{Vector::Constant(1, 0.5), Vector::Constant(1, -0.25)};
  Vector x = Vector::Constant(1, 1.5);
  auto [next, out] = lstm_step(cell, params, state, x);
  CHECK(next.cell[0] == doctest::Approx(0.37646503288579192).epsilon(1e-12));
  CHECK(out[0] == doctest::Approx(0.30408271817957538).epsilon(1e-12));
}

TEST_CASE("backward: zero loss gradient gives zero parameter gradients") {
  NetworkSpec spec = NetworkSpec::frame_model(5, 3, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 7);
  Rng rng(4);
  Matrix x = random_matrix(6, 5, rng);
  DropoutMaskSet masks = sample_masks(spec, 3, 0);
  ForwardCache cache;
  forward(spec, params, x, &masks, &cache);
  ParamBlocks grads = backward(spec, params, cache, Matrix::Zero(6, 3));
  CHECK(flatten(grads).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("backward: missing cache raises") {
  NetworkSpec spec = NetworkSpec::frame_model(5, 3, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 7);
  ForwardCache empty;
  CHECK_THROWS_AS(backward(spec, params, empty, Matrix::Zero(1, 3)), ConfigError);
}

TEST_CASE("backward: dropped units contribute exactly zero gradient") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{4, 6, Activation::Tanh}, DropoutSpec{0.5},
                 DenseSpec{6, 3, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 31);
  Rng rng(32);
  Matrix x = random_matrix(5, 4, rng);
  DropoutMaskSet masks = sample_masks(spec, 17, 2);
  REQUIRE(masks.masks[0].minCoeff() == 0.0);  // at least one dropped unit
  ForwardCache cache;
  forward(spec, params, x, &masks, &cache);
  Matrix d = random_matrix(5, 3, rng);
  ParamBlocks grads = backward(spec, params, cache, d);
  for (int u = 0; u < 6; ++u) {
    if (masks.masks[0][u] != 0.0) continue;
    CHECK(grads[0][0].row(u).cwiseAbs().maxCoeff() == 0.0);  // into the dropped unit
    CHECK(grads[0][1](u, 0) == 0.0);
    CHECK(grads[2][0].col(u).cwiseAbs().maxCoeff() == 0.0);  // out of the dropped unit
  }
}

TEST_CASE("gradcheck: dense net with dice loss against central differences") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{4, 6, Activation::ReLU}, DropoutSpec{0.3},
                 DenseSpec{6, 3, Activation::Identity}};
  spec.head = HeadKind::Sigmoid;
  ParameterStore params = init_parameters(spec, 42);
  REQUIRE(params.parameter_count() <= 500);
  Rng rng(43);
  Matrix x = random_matrix(5, 4, rng);
  Matrix g(5, 3);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 3; ++c) g(r, c) = rng.bernoulli(0.4) ? 1 : 0;
  Vector w(3);
  w << 1.0, 2.5, 0.7;
  DropoutMaskSet masks = sample_masks(spec, 9, 1);

  ForwardCache cache;
  Matrix pred = forward(spec, params, x, &masks, &cache);
  ParamBlocks analytic = backward(spec, params, cache, dice_loss_grad(pred, g, w));
  Vector fd = balds::testing::fd_gradient(
      [&] { return dice_loss(forward(spec, params, x, &masks), g, w); }, params);
  CHECK(balds::testing::max_rel_error(flatten(analytic), fd) < 1e-4);
}

TEST_CASE("gradcheck: dense softmax net with cross entropy") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{3, 5, Activation::Tanh}, DropoutSpec{0.4},
                 DenseSpec{5, 4, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 77);
  REQUIRE(params.parameter_count() <= 500);
  Rng rng(78);
  Matrix x = random_matrix(6, 3, rng);
  IntVector targets(6);
  for (int i = 0; i < 6; ++i) targets[i] = static_cast<int>(rng.below(4));
  Vector row_w = Vector::Constant(6, 1.0 / 6.0);
  DropoutMaskSet masks = sample_masks(spec, 5, 0);

  auto loss = [&] {
    Matrix p = forward(spec, params, x, &masks);
    return cross_entropy_rows(p, targets).mean();
  };
  ForwardCache cache;
  Matrix pred = forward(spec, params, x, &masks, &cache);
  ParamBlocks analytic = backward(spec, params, cache,
                                  cross_entropy_rows_grad(pred, targets, row_w));
  Vector fd = balds::testing::fd_gradient(loss, params);
  CHECK(balds::testing::max_rel_error(flatten(analytic), fd) < 1e-4);
}

TEST_CASE("gradcheck: BPTT through a 3-step LSTM sequence with masked cost") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{2, 3, Activation::Tanh}, DropoutSpec{0.25},
                 LstmSpec{3, 4}, DropoutSpec{0.25}, DenseSpec{4, 3, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 101);
  REQUIRE(params.parameter_count() <= 500);
  Rng rng(102);
  Matrix seq = random_matrix(3, 2, rng);
  IntVector targets(3);
  targets << 2, 0, 1;
  AnnotationMask mask = {1, 0, 1};
  DropoutMaskSet masks = sample_masks(spec, 8, 0);

  auto loss = [&] {
    Matrix p = forward_sequence(spec, params, seq, &masks);
    return masked_sequence_loss(cross_entropy_rows(p, targets), mask);
  };
  ForwardCache cache;
  Matrix pred = forward_sequence(spec, params, seq, &masks, &cache);
  int annotated = 0;
  masked_sequence_loss(cross_entropy_rows(pred, targets), mask, &annotated);
  Vector row_w = Vector::Zero(3);
  for (int i = 0; i < 3; ++i)
    if (mask[i]) row_w[i] = 1.0 / annotated;
  std::vector<Matrix> d_out = {cross_entropy_rows_grad(pred, targets, row_w)};
  ParamBlocks analytic = backward_sequences(spec, params, cache, d_out);
  Vector fd = balds::testing::fd_gradient(loss, params);
  CHECK(balds::testing::max_rel_error(flatten(analytic), fd) < 1e-4);
}

TEST_CASE("gradcheck: batched sequences agree with finite differences") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{2, 4, Activation::ReLU}, DropoutSpec{0.2}, LstmSpec{4, 3},
                 DenseSpec{3, 2, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 55);
  Rng rng(56);
  std::vector<Matrix> seqs = {random_matrix(4, 2, rng), random_matrix(2, 2, rng),
                              random_matrix(3, 2, rng)};
  std::vector<IntVector> targets;
  for (const auto& s : seqs) {
    IntVector t(s.rows());
    for (int i = 0; i < s.rows(); ++i) t[i] = static_cast<int>(rng.below(2));
    targets.push_back(t);
  }
  DropoutMaskSet masks = sample_masks(spec, 4, 3);
  int total = 9;

  auto loss = [&] {
    auto outs = forward_sequences(spec, params, seqs, &masks);
    double sum = 0.0;
    for (std::size_t b = 0; b < outs.size(); ++b)
      sum += cross_entropy_rows(outs[b], targets[b]).sum();
    return sum / total;
  };
  ForwardCache cache;
  auto outs = forward_sequences(spec, params, seqs, &masks, &cache);
  std::vector<Matrix> d_out;
  for (std::size_t b = 0; b < outs.size(); ++b)
    d_out.push_back(cross_entropy_rows_grad(outs[b], targets[b],
                                            Vector::Constant(outs[b].rows(), 1.0 / total)));
  ParamBlocks analytic = backward_sequences(spec, params, cache, d_out);
  Vector fd = balds::testing::fd_gradient(loss, params);
  CHECK(balds::testing::max_rel_error(flatten(analytic), fd) < 1e-4);
}

TEST_CASE("losses: dice matches targets within epsilon tolerance") {
  Matrix p(2, 2), g(2, 2);
  p << 1, 0, 0, 1;
  g << 1, 0, 0, 1;
  Vector w = Vector::Ones(2);
  CHECK(dice_loss(p, g, w) < 1e-6);
  Matrix q = Matrix::Ones(2, 2) - p;
  CHECK(dice_loss(q, g, w) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("losses: dice hand-evaluated batch") {
  Matrix p(2, 2), g(2, 2);
  p << 0.8, 0.3, 0.6, 0.9;
  g << 1, 0, 1, 1;
  Vector w(2);
  w << 2.0, 1.0;
  CHECK(dice_loss(p, g, w) == doctest::Approx(0.26348061222690217).epsilon(1e-12));
}

TEST_CASE("losses: dice tolerates an absent, unpredicted class") {
  Matrix p(2, 2), g(2, 2);
  p << 0.9, 1e-9, 0.8, 1e-9;
  g << 1, 0, 1, 0;
  Vector w = Vector::Ones(2);
  CHECK(std::isfinite(dice_loss(p, g, w)));
}

TEST_CASE("losses: dice rejects bad weights") {
  Matrix p(1, 2), g(1, 2);
  p << 0.5, 0.5;
  g << 1, 0;
  Vector w = Vector::Zero(2);
  CHECK_THROWS_AS(dice_loss(p, g, w), DataError);
}

TEST_CASE("losses: cross entropy closed forms") {
  Vector onehot = Vector::Zero(4);
  onehot[2] = 1.0;
  CHECK(cross_entropy(onehot, 2) == 0.0);
  Vector uniform = Vector::Constant(7, 1.0 / 7.0);
  CHECK(cross_entropy(uniform, 3) == doctest::Approx(1.9459101490553132).epsilon(1e-9));
  Vector two(2);
  two << 0.7, 0.3;
  CHECK(cross_entropy(two, 1) == doctest::Approx(1.2039728043259359).epsilon(1e-12));
  CHECK_THROWS_AS(cross_entropy(two, 2), DataError);
}

TEST_CASE("losses: masked sequence loss normalizes by annotated count") {
  Vector costs(3);
  costs << 1.0, 2.0, 3.0;
  CHECK(masked_sequence_loss(costs, {1, 1, 1}) == doctest::Approx(2.0));
  CHECK(masked_sequence_loss(costs, {1, 0, 1}) == doctest::Approx(2.0));
  int count = -1;
  CHECK(masked_sequence_loss(costs, {0, 0, 0}, &count) == 0.0);
  CHECK(count == 0);
  CHECK_THROWS_AS(masked_sequence_loss(costs, {1, 0}), DataError);
}

TEST_CASE("losses: masked frames' labels change neither loss nor gradients") {
  NetworkSpec spec = NetworkSpec::sequence_model(3, 4, 0.3);
  ParameterStore params = init_parameters(spec, 60);
  Rng rng(61);
  Matrix seq = random_matrix(5, 3, rng);
  AnnotationMask mask = {1, 0, 1, 0, 1};
  IntVector t1(5), t2(5);
  t1 << 0, 1, 2, 3, 0;
  t2 << 0, 3, 2, 1, 0;  // differs only at masked frames
  DropoutMaskSet masks = sample_masks(spec, 2, 0);

  auto run = [&](const IntVector& targets, double* loss) {
    ForwardCache cache;
    Matrix p = forward_sequence(spec, params, seq, &masks, &cache);
    int annotated = 0;
    *loss = masked_sequence_loss(cross_entropy_rows(p, targets), mask, &annotated);
    Vector row_w = Vector::Zero(5);
    for (int i = 0; i < 5; ++i)
      if (mask[i]) row_w[i] = 1.0 / annotated;
    return flatten(backward_sequences(spec, params, cache,
                                      {cross_entropy_rows_grad(p, targets, row_w)}));
  };
  double l1 = 0, l2 = 0;
  Vector g1 = run(t1, &l1), g2 = run(t2, &l2);
  CHECK(l1 == l2);
  CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("losses: masked frames' features still drive later predictions") {
  NetworkSpec spec = NetworkSpec::sequence_model(3, 4, 0.0);
  ParameterStore params = init_parameters(spec, 62);
  Rng rng(63);
  Matrix seq = random_matrix(5, 3, rng);
  Matrix seq2 = seq;
  seq2.row(1) += Vector::Constant(3, 1.0).transpose();  // masked frame's features
  Matrix p1 = forward_sequence(spec, params, seq, nullptr);
  Matrix p2 = forward_sequence(spec, params, seq2, nullptr);
  CHECK((p1.row(3) - p2.row(3)).cwiseAbs().maxCoeff() > 0.0);
  CHECK((p1.row(4) - p2.row(4)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("adam: zero gradient with zero decay leaves parameters unchanged") {
  NetworkSpec spec = NetworkSpec::frame_model(4, 2, 0.5, HeadKind::Softmax);
  ParameterStore params = init_parameters(spec, 1);
  Vector before = flatten(params.values);
  adam_step(params, zero_blocks_like(params.values), AdamConfig{});
  CHECK((flatten(params.values) - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(params.step == 1);
}

TEST_CASE("adam: first bias-corrected step is approximately -lr*sign(g)") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{1, 1, Activation::Identity}};
  spec.head = HeadKind::Sigmoid;
  ParameterStore params = init_parameters(spec, 2);
  double w0 = params.values[0][0](0, 0);
  ParamBlocks grads = zero_blocks_like(params.values);
  grads[0][0](0, 0) = 0.37;
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(params, grads, cfg);
  double update = params.values[0][0](0, 0) - w0;
  CHECK(update == doctest::Approx(-cfg.lr * 0.37 / (0.37 + cfg.eps)).epsilon(1e-12));
  CHECK(update == doctest::Approx(-cfg.lr).epsilon(1e-6));
}

TEST_CASE("adam: three steps on a scalar quadratic match a hand-stepped oracle") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{1, 1, Activation::Identity}};
  spec.head = HeadKind::Sigmoid;
  ParameterStore params = init_parameters(spec, 3);
  params.values[0][0](0, 0) = 1.5;
  params.values[0][1](0, 0) = 0.0;
  AdamConfig cfg;
  cfg.lr = 0.1;
  cfg.weight_decay = 0.01;

  // Oracle: independent scalar Adam on f(w) = 0.5*(w - 0.25)^2.
  double w = 1.5, m = 0.0, v = 0.0;
  std::vector<double> expected;
  for (int t = 1; t <= 3; ++t) {
    double g = (w - 0.25) + cfg.weight_decay * w;
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    double mh = m / (1 - std::pow(cfg.beta1, t));
    double vh = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    expected.push_back(w);
  }

  for (int t = 0; t < 3; ++t) {
    ParamBlocks grads = zero_blocks_like(params.values);
    grads[0][0](0, 0) = params.values[0][0](0, 0) - 0.25;  // decay added inside adam_step
    adam_step(params, grads, cfg);
    CHECK(params.values[0][0](0, 0) == doctest::Approx(expected[t]).epsilon(1e-12));
  }
}

TEST_CASE("init: identical seeds give bit-identical parameters, fresh zero moments") {
  NetworkSpec spec = NetworkSpec::sequence_model(6, 4, 0.5);
  ParameterStore a = init_parameters(spec, 123);
  ParameterStore b = init_parameters(spec, 123);
  CHECK((flatten(a.values) - flatten(b.values)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(flatten(a.m).cwiseAbs().maxCoeff() == 0.0);
  CHECK(flatten(a.v).cwiseAbs().maxCoeff() == 0.0);
  ParameterStore c = init_parameters(spec, 124);
  CHECK((flatten(a.values) - flatten(c.values)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("spec: validation rejects inconsistent stacks") {
  NetworkSpec bad;
  bad.layers = {DenseSpec{3, 4, Activation::ReLU}, DenseSpec{5, 2, Activation::Identity}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  NetworkSpec bad_p;
  bad_p.layers = {DenseSpec{3, 4, Activation::ReLU}, DropoutSpec{1.5}};
  CHECK_THROWS_AS(bad_p.validate(), ConfigError);
}

TEST_CASE("spec: p=1 dropout zeroes activations instead of dividing by zero") {
  NetworkSpec spec;
  spec.layers = {DenseSpec{3, 4, Activation::Identity}, DropoutSpec{1.0},
                 DenseSpec{4, 2, Activation::Identity}};
  spec.head = HeadKind::Softmax;
  ParameterStore params = init_parameters(spec, 9);
  Rng rng(10);
  Matrix x = random_matrix(2, 3, rng);
  DropoutMaskSet masks = sample_masks(spec, 1, 0);
  ForwardCache cache;
  Matrix out = forward(spec, params, x, &masks, &cache);
  CHECK(cache.layer_out[1].cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.allFinite());
}
