// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "lit/net/network.hpp"
#include "support/oracles.hpp"

using namespace lit;

namespace {

TensorF random_input(uint64_t seed, const NetworkSpec& spec, int64_t batch = 2) {
  Rng rng(seed);
  return oracle::random_tensor<float>(rng,
                                      {batch, spec.input_channels, spec.input_size, spec.input_size});
}

bool same_values(const TensorF& a, const TensorF& b) {
  if (a.shape() != b.shape()) return false;
  for (int64_t i = 0; i < a.numel(); ++i)
    if (a.values()[static_cast<std::size_t>(i)] != b.values()[static_cast<std::size_t>(i)])
      return false;
  return true;
}

}  // namespace

TEST_CASE("weighted layer counts follow 6n+2") {
  CHECK(NetworkSpec::resnet({3, 3, 3}, {16, 32, 64}, 1, 10).weighted_layers() == 20);
  CHECK(NetworkSpec::resnet({18, 18, 18}, {16, 32, 64}, 1, 10).weighted_layers() == 110);
  CHECK(NetworkSpec::resnet({5, 5, 5}, {16, 32, 64}, 1, 10).weighted_layers() == 32);
  CHECK(NetworkSpec::resnet({9, 9, 9}, {16, 32, 64}, 1, 10).weighted_layers() == 56);
  CHECK(NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10).weighted_layers() == 8);
}

TEST_CASE("spec validation rejects bad cardinality") {
  CHECK_THROWS_AS(NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 3, 10), Error);
  CHECK_NOTHROW(NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 4, 10));
  // cardinality must also divide the section's input channels
  NetworkSpec s = NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10);
  s.sections[1].cardinality = 16;  // input channels 8 not divisible
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("same seed twice gives bit-identical parameters") {
  const auto spec = NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 2, 10);
  auto a = build_network<float>(spec, 99);
  auto b = build_network<float>(spec, 99);
  auto pa = a.parameters();
  auto pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->name == pb[i]->name);
    CHECK(same_values(pa[i]->value, pb[i]->value));
  }
  auto c = build_network<float>(spec, 100);
  bool any_diff = false;
  auto pc = c.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i)
    if (!same_values(pa[i]->value, pc[i]->value)) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("parameter names are unique") {
  auto net = build_network<float>(NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 1, 10), 1);
  std::set<std::string> names;
  for (auto* p : net.parameters()) CHECK(names.insert(p->name).second);
}

TEST_CASE("forward_collect equals composing segments and head, exactly") {
  for (const auto& spec :
       {NetworkSpec::resnet({2, 1, 2}, {8, 16, 32}, 1, 10), NetworkSpec::generator(3, 12, 6)}) {
    auto net = build_network<float>(spec, 7);
    auto x = random_input(3, spec);
    auto [out, irs] = net.forward_collect(x, /*training=*/false);
    CHECK(static_cast<int>(irs.size()) == net.split_count());

    TensorF y = x;
    for (int i = 0; i < net.split_count(); ++i) {
      y = net.forward_segment(i, y, false);
      CHECK(same_values(y, irs[static_cast<std::size_t>(i)]));
    }
    CHECK(same_values(net.forward_head(y, false), out));
    CHECK(same_values(net.forward(x, false), out));
  }
}

TEST_CASE("eval mode forward is repeatable; output shapes are right") {
  const auto spec = NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10);
  auto net = build_network<float>(spec, 5);
  auto x = random_input(4, spec, 3);
  auto a = net.forward(x, false);
  auto b = net.forward(x, false);
  CHECK(a.shape() == Shape{3, 10});
  CHECK(same_values(a, b));

  const auto gspec = NetworkSpec::generator(2, 12, 6);
  auto gen = build_network<float>(gspec, 5);
  auto gx = random_input(6, gspec, 2);
  CHECK(gen.forward(gx, false).shape() == Shape{2, 3, 16, 16});
}

TEST_CASE("input shape mismatch is a dimension error") {
  auto net = build_network<float>(NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10), 5);
  CHECK_THROWS_AS(net.forward(TensorF({2, 3, 8, 8}), false), Error);
}

TEST_CASE("ir shapes at section boundaries") {
  const auto spec = NetworkSpec::resnet({3, 3, 3}, {16, 32, 64}, 1, 10);
  const auto shapes = section_output_shapes(spec);
  REQUIRE(shapes.size() == 3);
  CHECK(shapes[0] == Shape{16, 16, 16});
  CHECK(shapes[1] == Shape{32, 8, 8});
  CHECK(shapes[2] == Shape{64, 4, 4});
}

TEST_CASE("validate_pairing accepts depth and cardinality mismatches, k = sections") {
  const auto teacher = NetworkSpec::resnet({18, 18, 18}, {16, 32, 64}, 1, 10);
  const auto student = NetworkSpec::resnet({3, 3, 3}, {16, 32, 64}, 1, 10);
  const auto split = validate_pairing(teacher, student);
  CHECK(split.k == 3);
  CHECK(split.ir_shapes == section_output_shapes(teacher));

  // wider group count in the teacher, same widths: valid
  const auto t2 = NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 4, 10);
  const auto s2 = NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 2, 10);
  CHECK(validate_pairing(t2, s2).k == 3);
}

TEST_CASE("validate_pairing succeeds on identical specs (Born-Again pairing)") {
  const auto spec = NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 1, 10);
  const auto split = validate_pairing(spec, spec);
  CHECK(split.k == 3);
  CHECK(split.ir_shapes == section_output_shapes(spec));
}

TEST_CASE("validate_pairing rejects differing widths, naming the first offending split") {
  const auto teacher = NetworkSpec::resnet({2, 2, 2}, {16, 32, 64}, 1, 10);
  const auto student = NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10);
  CHECK_THROWS_WITH_AS(validate_pairing(teacher, student), doctest::Contains("split 1"), Error);

  const auto s2 = NetworkSpec::resnet({1, 1}, {16, 32}, 1, 10);
  CHECK_THROWS_WITH_AS(validate_pairing(teacher, s2), doctest::Contains("section counts"), Error);
}

TEST_CASE("parameter count is strictly increasing in depth") {
  int64_t prev = 0;
  for (int n : {1, 2, 3, 5}) {
    auto net = build_network<float>(NetworkSpec::resnet({n, n, n}, {8, 16, 32}, 1, 10), 1);
    CHECK(net.parameter_count() > prev);
    prev = net.parameter_count();
  }
}

TEST_CASE("copy_layers: default plan copies stem and head bit-exactly, stays trainable") {
  const auto spec = NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 1, 10);
  auto teacher = build_network<float>(spec, 1);
  auto student = build_network<float>(spec, 2);

  PairingPlan plan{validate_pairing(spec, spec), default_copy_list()};
  copy_layers(teacher, student, plan);
  for (const char* name : {"stem.conv0.w", "stem.bn0.gamma", "head.fc.w", "head.fc.b"}) {
    auto* tp = teacher.find_parameter(name);
    auto* sp = student.find_parameter(name);
    REQUIRE(tp);
    REQUIRE(sp);
    CHECK(same_values(tp->value, sp->value));
    CHECK(sp->value.requires_grad());
  }
  // section parameters untouched (different seeds, still different)
  CHECK_FALSE(same_values(teacher.find_parameter("sec0.block0.conv1.w")->value,
                          student.find_parameter("sec0.block0.conv1.w")->value));
}

TEST_CASE("copy_layers: empty list leaves the student unchanged; bad entries throw") {
  const auto spec = NetworkSpec::resnet({1, 1, 1}, {8, 16, 32}, 1, 10);
  auto teacher = build_network<float>(spec, 1);
  auto student = build_network<float>(spec, 2);
  auto before = student.find_parameter("stem.conv0.w")->value.clone();

  copy_layers(teacher, student, {validate_pairing(spec, spec), {}});
  CHECK(same_values(before, student.find_parameter("stem.conv0.w")->value));

  PairingPlan bad{validate_pairing(spec, spec), {"nonexistent"}};
  CHECK_THROWS_AS(copy_layers(teacher, student, bad), Error);

  // shape mismatch between different stem widths
  const auto other = NetworkSpec::resnet({1, 1, 1}, {16, 32, 64}, 1, 10);
  auto wide = build_network<float>(other, 3);
  PairingPlan stem_only{{}, {"stem"}};
  CHECK_THROWS_AS(copy_layers(wide, student, stem_only), Error);
}

TEST_CASE("full copy list makes the student an exact functional copy") {
  const auto spec = NetworkSpec::resnet({2, 2, 2}, {8, 16, 32}, 2, 10);
  auto teacher = build_network<float>(spec, 1);
  auto student = build_network<float>(spec, 2);
  copy_layers(teacher, student, {validate_pairing(spec, spec), full_copy_list(spec)});
  auto x = random_input(9, spec);
  CHECK(same_values(teacher.forward(x, false), student.forward(x, false)));
}

TEST_CASE("generator pairing requires matching stem width") {
  const auto t = NetworkSpec::generator(6, 16, 8);
  const auto s = NetworkSpec::generator(2, 16, 8);
  CHECK(validate_pairing(t, s).k == 1);
  const auto s2 = NetworkSpec::generator(2, 16, 4);
  CHECK_THROWS_AS(validate_pairing(t, s2), Error);
}
