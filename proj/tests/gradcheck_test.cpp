// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lit/ops.hpp"
#include "support/oracles.hpp"

using namespace lit;
using oracle::fd_check;
using oracle::random_tensor;

namespace {

constexpr double kTol = 1e-4;

// keep values away from the kinks of relu/abs/huber so central differences
// stay on one side
template <typename T>
void nudge_away(Tensor<T>& t, std::initializer_list<double> kinks, double margin = 0.02) {
  for (auto& v : t.values())
    for (double k : kinks)
      if (std::fabs(double(v) - k) < margin) v = static_cast<T>(k + (v >= k ? margin : -margin) * 2);
}

// fixed random projection so the output gradient is non-uniform; the weight
// tensor must stay the same across every finite-difference evaluation
struct Weighted {
  Tensor<double> w;
  Weighted(Rng& rng, Shape shape) : w(random_tensor<double>(rng, std::move(shape))) {}
  Tensor<double> operator()(const Tensor<double>& y) const { return ops::sum_all(ops::mul(y, w)); }
};

}  // namespace

TEST_CASE("linear gradients vs central differences") {
  Rng rng(101);
  auto x = random_tensor<double>(rng, {4, 6});
  auto w = random_tensor<double>(rng, {3, 6});
  auto b = random_tensor<double>(rng, {3});
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  Weighted proj(rng, {4, 3});
  auto rep = fd_check({&x, &w, &b}, [&] { return proj(ops::linear(x, w, b)); });
  CHECK(rep.max_rel < kTol);
  CHECK(rep.checked == 4 * 6 + 3 * 6 + 3);
}

TEST_CASE("conv2d gradients vs central differences across attribute combos") {
  Rng rng(102);
  struct Case {
    int64_t N, C, H, F, k, stride, pad, groups;
  };
  for (const Case& c :
       {Case{2, 3, 6, 4, 3, 1, 1, 1}, Case{1, 4, 8, 4, 3, 2, 1, 2}, Case{1, 2, 5, 2, 1, 1, 0, 1},
        Case{1, 4, 6, 8, 3, 1, 0, 4}}) {
    auto x = random_tensor<double>(rng, {c.N, c.C, c.H, c.H});
    auto w = random_tensor<double>(rng, {c.F, c.C / c.groups, c.k, c.k});
    auto b = random_tensor<double>(rng, {c.F});
    x.set_requires_grad(true);
    w.set_requires_grad(true);
    b.set_requires_grad(true);
    const int64_t oh = (c.H + 2 * c.pad - c.k) / c.stride + 1;
    Weighted proj(rng, {c.N, c.F, oh, oh});
    auto rep =
        fd_check({&x, &w, &b}, [&] { return proj(ops::conv2d(x, w, b, {c.stride, c.pad, c.groups})); });
    CHECK(rep.max_rel < kTol);
  }
}

TEST_CASE("batch_norm gradients, train and eval mode") {
  Rng rng(103);
  for (bool training : {true, false}) {
    auto x = random_tensor<double>(rng, {3, 2, 4, 4});
    auto gamma = random_tensor<double>(rng, {2}, 0.5);
    auto beta = random_tensor<double>(rng, {2}, 0.5);
    for (auto& v : gamma.values()) v += 1.0;
    x.set_requires_grad(true);
    gamma.set_requires_grad(true);
    beta.set_requires_grad(true);
    std::vector<double> rm{0.1, -0.2}, rv{1.3, 0.8};
    Weighted proj(rng, {3, 2, 4, 4});
    auto rep = fd_check({&x, &gamma, &beta}, [&] {
      auto rm_copy = rm;  // forward re-runs during the check; keep stats fixed
      auto rv_copy = rv;
      return proj(ops::batch_norm(x, gamma, beta, rm_copy, rv_copy, training));
    });
    CHECK(rep.max_rel < kTol);
  }
}

TEST_CASE("elementwise primitive gradients") {
  Rng rng(104);
  auto a = random_tensor<double>(rng, {5, 3});
  auto b = random_tensor<double>(rng, {5, 3});
  nudge_away(a, {0.0, -1.0, 1.0});
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  Weighted proj(rng, {5, 3});

  CHECK(fd_check({&a, &b}, [&] { return proj(ops::add(a, b)); }).max_rel < kTol);
  CHECK(fd_check({&a, &b}, [&] { return proj(ops::sub(a, b)); }).max_rel < kTol);
  CHECK(fd_check({&a, &b}, [&] { return proj(ops::mul(a, b)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return proj(ops::square(a)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return proj(ops::abs_val(a)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return proj(ops::huber_unit(a)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return proj(ops::relu(a)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return proj(ops::scale(a, 1.7)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return ops::mean_all(ops::square(a)); }).max_rel < kTol);
  CHECK(fd_check({&a}, [&] { return ops::sum_all(ops::square(a)); }).max_rel < kTol);
}

TEST_CASE("pooling and upsampling gradients") {
  Rng rng(105);
  auto x = random_tensor<double>(rng, {2, 3, 4, 4});
  x.set_requires_grad(true);
  Weighted pool_proj(rng, {2, 3});
  Weighted up_proj(rng, {2, 3, 8, 8});
  CHECK(fd_check({&x}, [&] { return pool_proj(ops::global_avg_pool(x)); }).max_rel < kTol);
  CHECK(fd_check({&x}, [&] { return up_proj(ops::upsample_nearest2x(x)); }).max_rel < kTol);
}

TEST_CASE("softmax family gradients") {
  Rng rng(106);
  auto z = random_tensor<double>(rng, {4, 5});
  z.set_requires_grad(true);
  Weighted proj(rng, {4, 5});
  for (double tau : {0.7, 1.0, 4.0}) {
    CHECK(fd_check({&z}, [&] { return proj(ops::softmax_temperature(z, tau)); }).max_rel < kTol);
    CHECK(fd_check({&z}, [&] { return proj(ops::log_softmax_temperature(z, tau)); }).max_rel < kTol);
  }
  std::vector<int32_t> labels{0, 3, 2, 4};
  CHECK(fd_check({&z}, [&] { return ops::nll(ops::log_softmax_temperature(z, 1.0), labels); })
            .max_rel < kTol);
}

TEST_CASE("nll rejects out-of-range labels") {
  Tensor<double> z({2, 3});
  std::vector<int32_t> bad{0, 3};
  CHECK_THROWS_AS(ops::nll(ops::log_softmax_temperature(z, 1.0), bad), Error);
}
