#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace renev;
using testing_helpers::make_deployment;

namespace {

struct Fixture {
  Deployment dep;
  ResourceLedger ledger;
  SliceScheme scheme;

  explicit Fixture(SliceScheme s) : dep(make_deployment({{0, 0}}, 100, 100)), scheme(s) {
    ledger = ResourceLedger(dep, scheme.partition_count());
    apply_scheme(ledger, scheme);
  }
  bool admit1(int user, int slice, int station = 1, int rbs = 1) {
    return std::holds_alternative<Admission>(admit(ledger, station, user, rbs, slice, scheme));
  }
};

}  // namespace

TEST(Slicing, NvsIsolation) {
  Fixture f(SliceScheme::nvs());
  for (int u = 0; u < 50; ++u) ASSERT_TRUE(f.admit1(u, 0));
  const auto r = admit(f.ledger, 1, 99, 1, 0, f.scheme);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(std::get<Rejection>(r).accessible_free, 0);
  EXPECT_EQ(accessible_free(f.ledger, 1, 1, f.scheme), 50);
}

TEST(Slicing, PrrFullySharedFirstComeFirstServed) {
  Fixture f(SliceScheme::prr(1.0));
  for (int u = 0; u < 100; ++u) ASSERT_TRUE(f.admit1(u, u % 2));
  EXPECT_FALSE(f.admit1(100, 0));
}

TEST(Slicing, PrrHalfStepThrough) {
  Fixture f(SliceScheme::prr(0.5));
  const auto& parts = f.ledger.station(1).partitions;
  EXPECT_EQ(parts[0].budget, 25);
  EXPECT_EQ(parts[1].budget, 25);
  EXPECT_EQ(parts[2].budget, 50);
  int got0 = 0, got1 = 0;
  for (int u = 0; u < 60; ++u) got0 += f.admit1(u, 0);
  for (int u = 60; u < 70; ++u) got1 += f.admit1(u, 1);
  EXPECT_EQ(got0, 60);  // 25 reserved + 35 shared
  EXPECT_EQ(got1, 10);
  EXPECT_EQ(parts[2].used, 35);

  Fixture g(SliceScheme::prr(0.5));
  int a = 0;
  for (int u = 0; u < 100; ++u) a += g.admit1(u, 0);
  EXPECT_EQ(a, 75);
  int b = 0;
  for (int u = 0; u < 30; ++u) b += g.admit1(100 + u, 1);
  EXPECT_EQ(b, 25);  // reserved budget is untouched by slice 0
}

TEST(Slicing, Errors) {
  Fixture f(SliceScheme::prr(1.0));
  EXPECT_THROW(admit(f.ledger, 1, 0, 1, 2, f.scheme), ContractViolation);
  EXPECT_THROW(admit(f.ledger, 1, 0, 0, 0, f.scheme), ContractViolation);
  const auto r = admit(f.ledger, 1, 0, 101, 0, f.scheme);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(std::get<Rejection>(r).cause, RejectCause::ExceedsStationBudget);
}

TEST(Slicing, ParseScheme) {
  EXPECT_EQ(parse_slice_scheme("nvs").kind, SliceKind::Nvs);
  EXPECT_DOUBLE_EQ(parse_slice_scheme("prr:0.5").shared_fraction, 0.5);
  EXPECT_THROW(parse_slice_scheme("prr:1.5"), ConfigError);
  EXPECT_THROW(parse_slice_scheme("prr:x"), ConfigError);
  EXPECT_THROW(parse_slice_scheme("round-robin"), ConfigError);
}

TEST(Slicing, RandomisedBudgetsHold) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const bool nvs = trial % 2 == 0;
    const double p = std::uniform_real_distribution<double>(0, 1)(rng);
    Fixture f(nvs ? SliceScheme::nvs(3) : SliceScheme::prr(p, 3));
    std::vector<int> reserved(3);
    for (int k = 0; k < 3; ++k) reserved[k] = f.ledger.station(1).partitions[k].budget;
    std::vector<int> used(3, 0);
    for (int u = 0; u < 150; ++u) {
      const int s = std::uniform_int_distribution<int>(0, 2)(rng);
      const int rbs = std::uniform_int_distribution<int>(1, 4)(rng);
      const bool could = f.ledger.station(1).partitions[s].free() >= rbs;
      const bool ok = f.admit1(u, s, 1, rbs);
      if (could) EXPECT_TRUE(ok);  // reserved budget always honoured
      if (ok) used[s] += rbs;
      if (nvs) EXPECT_LE(used[s], reserved[s]);
      EXPECT_LE(f.ledger.used_count(1), 100);
    }
    EXPECT_FALSE(f.ledger.check_invariants().has_value());
  }
}
