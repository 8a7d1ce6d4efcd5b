#include <map>
#include <set>

#include "support.hpp"

using namespace rcbdc;
using namespace rcbdc::test;

TEST(Pedersen, ToyCommitVectors) {
  const auto& grp = toy();
  EXPECT_EQ(commit(grp, op(grp, 5, 7)).point.value(), 16);
  EXPECT_EQ(commit(grp, op(grp, 0, 0)).point, grp.identity());
  EXPECT_EQ(commit(grp, op(grp, 10, 4)).point.value(), 1);
  EXPECT_EQ(commit(grp, op(grp, 6, 1)).point.value(), 6);
  EXPECT_EQ(commit(grp, op(grp, 4, 2)).point.value(), 12);
}

TEST(Pedersen, OpenCheck) {
  const auto& grp = toy();
  Commitment c{e(grp, 16)};
  EXPECT_TRUE(open_check(grp, c, op(grp, 5, 7)));
  EXPECT_FALSE(open_check(grp, c, op(grp, 6, 7)));
  EXPECT_EQ(commit(grp, op(grp, 6, 7)).point.value(), 9);

  const auto& big = test_group();
  Rng rng("open");
  for (int i = 0; i < 200; ++i) {
    auto o = make_opening(big, rng.below(std::uint64_t{1} << 40), rng);
    auto cc = commit(big, o);
    EXPECT_TRUE(open_check(big, cc, o));
    Opening wrong{big.add(o.value, big.scalar(1L)), o.randomness};
    EXPECT_FALSE(open_check(big, cc, wrong));
  }
}

TEST(Pedersen, CombineVectors) {
  const auto& grp = toy();
  std::vector<Commitment> num{{e(grp, 1)}}, den{{e(grp, 6)}, {e(grp, 12)}};
  EXPECT_EQ(combine(grp, num, den).value(), 8);
  EXPECT_EQ(combine(grp, den, den), grp.identity());
  EXPECT_EQ(combine(grp, num, {}).value(), 1);
  std::vector<Commitment> one{{e(grp, 13)}};
  EXPECT_EQ(combine(grp, one, {}).value(), 13);
  EXPECT_EQ(combine(grp, {}, {}), grp.identity());
}

TEST(Pedersen, HomomorphicAddVector) {
  const auto& grp = toy();
  auto a = commit(grp, op(grp, 2, 3)), b = commit(grp, op(grp, 4, 5));
  EXPECT_EQ(a.point.value(), 1);
  EXPECT_EQ(b.point.value(), 3);
  EXPECT_EQ(homomorphic_add(grp, a, b).point.value(), 3);
  EXPECT_EQ(commit(grp, op(grp, 6, 8)).point.value(), 3);
  EXPECT_EQ(homomorphic_add(grp, b, commit(grp, op(grp, 0, 0))), b);
}

TEST(Pedersen, HomomorphismRandomized) {
  const auto& grp = test_group();
  Rng rng("homo");
  for (int i = 0; i < 10000; ++i) {
    auto a = make_opening(grp, rng.below(std::uint64_t{1} << 30), rng);
    auto b = make_opening(grp, rng.below(std::uint64_t{1} << 30), rng);
    auto sum = homomorphic_add(grp, commit(grp, a), commit(grp, b));
    ASSERT_TRUE(open_check(grp, sum, add_openings(grp, a, b)));
  }
}

TEST(Pedersen, ToyBindingOnlyBreaksThroughTrapdoor) {
  // Every commitment in the toy group has q openings. Each alternative one
  // satisfies x - x' = a (r' - r) with a = log_g h = 3, so finding it is
  // the same as knowing a.
  const auto& grp = toy();
  for (long x = 0; x < 11; ++x)
    for (long r = 1; r < 11; ++r) {
      auto c = commit(grp, op(grp, x, r));
      int others = 0;
      for (long x2 = 0; x2 < 11; ++x2)
        for (long r2 = 0; r2 < 11; ++r2) {
          if (x2 == x && r2 == r) continue;
          if (!open_check(grp, c, op(grp, x2, r2))) continue;
          ++others;
          EXPECT_EQ(grp.scalar(x - x2), grp.mul(grp.scalar(static_cast<long>(kToyTrapdoor)), grp.scalar(r2 - r)));
        }
      EXPECT_EQ(others, 10);
    }
}

TEST(Pedersen, BindingWindowSearchInTestGroup) {
  // Without log_g h, a window of 2^12 values against 2^12 randomizers
  // turns up nothing besides the honest opening.
  const auto& grp = test_group();
  Rng rng("binding");
  auto c = attack::pedersen_substitution(grp, 100, 12, 1u << 12, rng);
  EXPECT_TRUE(c.honest_found);
  EXPECT_EQ(c.openings_found, 0u);
}

TEST(Pedersen, HidingSmallGroup) {
  // x fixed: the map r -> commitment is injective, so collisions come only
  // from equal r.
  const auto& grp = toy();
  Rng rng("hide");
  std::map<GroupElement, long> by_point;
  for (int i = 0; i < 10000; ++i) {
    auto r = grp.random_scalar(rng);
    auto c = commit(grp, {grp.scalar(4L), r});
    auto [it, fresh] = by_point.emplace(c.point, r.ul());
    if (!fresh) EXPECT_EQ(it->second, static_cast<long>(r.ul()));
  }
  EXPECT_EQ(by_point.size(), 10u);
}

TEST(Pedersen, HidingLargeGroup) {
  const auto& grp = test_group();
  Rng rng("hide-big");
  std::set<GroupElement> points;
  for (int i = 0; i < 10000; ++i) points.insert(commit(grp, make_opening(grp, 7, rng)).point);
  // q is about 2^31, so a birthday collision among 10^4 has probability ~2%.
  EXPECT_GE(points.size(), 9998u);
}

TEST(Pedersen, SerializationRoundTrip) {
  const auto& grp = test_group();
  Rng rng("ser");
  auto o = make_opening(grp, 99, rng);
  auto c = commit(grp, o);
  ByteWriter w;
  write(grp, w, c);
  write(grp, w, o);
  auto bytes = std::move(w).take();
  ByteReader r{ByteView(bytes)};
  EXPECT_EQ(read_commitment(grp, r), c);
  EXPECT_EQ(read_opening(grp, r), o);
  EXPECT_TRUE(r.done());
}
