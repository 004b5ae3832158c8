#include <catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "bsrspmm/autotune.hpp"
#include "bsrspmm/generate.hpp"
#include "fixtures.hpp"

using namespace bsrspmm;

namespace {

// Independent oracle: trial division over every value.
std::vector<std::size_t> divisors_upto(std::size_t k, std::size_t cap) {
  std::vector<std::size_t> out;
  for (std::size_t d = 1; d <= k; ++d)
    if (k % d == 0 && d <= cap) out.push_back(d);
  return out;
}

TuneOptions quick() {
  TuneOptions o;
  o.repeats = 3;
  o.env = "test";
  return o;
}

}  // namespace

TEST_CASE("candidate lanes are the capped divisors of k", "[autotune]") {
  CHECK(candidate_lanes(128, 1024).candidates == std::vector<std::size_t>{1, 2, 4, 8, 16, 32, 64, 128});
  CHECK(candidate_lanes(1, 5).candidates == std::vector<std::size_t>{1});
  CHECK(candidate_lanes(12, 6).candidates == std::vector<std::size_t>{1, 2, 3, 4, 6});
  for (std::size_t k = 1; k < 400; ++k)
    for (std::size_t cap : {1, 7, 64, 1024}) CHECK(candidate_lanes(k, cap).candidates == divisors_upto(k, cap));
  CHECK_THROWS_AS(candidate_lanes(0), Error);
}

TEST_CASE("trial plans respect the budget and keep the endpoints", "[autotune]") {
  const auto space = candidate_lanes(128);
  CHECK(plan_trials(space, 200, 0) == space.candidates);
  CHECK(plan_trials(space, 2, 0) == std::vector<std::size_t>{1, 128});
  CHECK(plan_trials(space, 1, 0) == std::vector<std::size_t>{1});
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto plan = plan_trials(space, 5, seed);
    CHECK(plan.size() == 5);
    CHECK(plan.front() == 1);
    CHECK(plan.back() == 128);
    CHECK(std::is_sorted(plan.begin(), plan.end()));
    CHECK(std::adjacent_find(plan.begin(), plan.end()) == plan.end());
    CHECK(plan == plan_trials(space, 5, seed));  // deterministic
  }
  CHECK_THROWS_AS(plan_trials(space, 0, 0), Error);
}

TEST_CASE("singleton space always picks t = 1", "[autotune]") {
  const auto w = bsrspmm::testing::worked_example<double>();
  const auto x = generate_dense<double>(2, 4, 1, ValueMode::uniform_real);
  auto opt = quick();
  opt.budget = 5;
  const auto r = tune(x, w, SearchSpace{{1}}, opt);
  CHECK(r.best.schedule.lanes == 1);
  CHECK(r.all_trials.size() == 1);
}

TEST_CASE("tuning the worked example tries all three divisors", "[autotune]") {
  const auto w = bsrspmm::testing::worked_example<double>();
  const auto x = generate_dense<double>(1, 4, 1, ValueMode::uniform_real);
  const auto r = tune(x, w, candidate_lanes(4), quick());
  REQUIRE(r.all_trials.size() == 3);
  CHECK(r.budget_used == 3);
  std::int64_t best = r.all_trials.front().median_ns;
  for (const auto& t : r.all_trials) {
    CHECK(t.valid);
    CHECK(t.min_ns <= t.median_ns);
    CHECK(t.repeats == 3);
    CHECK(t.schedule.kind == ScheduleKind::prwb);
    best = std::min(best, t.median_ns);
  }
  CHECK(r.best.median_ns == best);
  // Ties go to the smallest t.
  for (const auto& t : r.all_trials)
    if (t.median_ns == best) {
      CHECK(r.best.schedule.lanes <= t.schedule.lanes);
    }
}

TEST_CASE("a budget of 2 over k = 128 runs exactly t = 1 and t = 128", "[autotune]") {
  const auto w = generate_bsr<float>({64, 128, 8, 8, 0.8, 1});
  const auto x = generate_dense<float>(1, 128, 2, ValueMode::uniform_real);
  auto opt = quick();
  opt.budget = 2;
  const auto r = tune(x, w, candidate_lanes(128), opt);
  REQUIRE(r.all_trials.size() == 2);
  CHECK(r.all_trials[0].schedule.lanes == 1);
  CHECK(r.all_trials[1].schedule.lanes == 128);
}

TEST_CASE("records carry the problem metadata", "[autotune]") {
  const auto w = generate_bsr<float>({16, 32, 4, 4, 0.5, 3});
  const auto x = generate_dense<float>(2, 32, 4, ValueMode::uniform_real);
  auto opt = quick();
  opt.sparsity = 0.5;
  opt.data_seed = 3;
  const auto r = tune(x, w, candidate_lanes(32, 8), opt);
  CHECK(r.best.shape == ProblemShape{2, 32, 16, 4, 4});
  CHECK(r.best.sparsity == 0.5);
  CHECK(r.best.seed == 3);
  CHECK(r.best.env == "test");
  CHECK(r.best.timestamp.size() == 20);
}

TEST_CASE("failed verification marks trials invalid and yields NoValidCandidate", "[autotune]") {
  const auto w = generate_bsr<double>({8, 8, 2, 2, 0.0, 1});
  const auto x = generate_dense<double>(1, 8, 1, ValueMode::uniform_real);
  auto opt = quick();
  opt.tolerance = -1.0;  // nothing can pass
  try {
    tune(x, w, candidate_lanes(8), opt);
    FAIL("expected NoValidCandidate");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_valid_candidate);
  }
}

TEST_CASE("tune argument checks", "[autotune]") {
  const auto w = generate_bsr<double>({8, 12, 2, 2, 0.0, 1});
  const auto x = generate_dense<double>(1, 12, 1, ValueMode::uniform_real);
  auto opt = quick();
  opt.repeats = 4;
  CHECK_THROWS_AS(tune(x, w, candidate_lanes(12), opt), Error);
  opt.repeats = 3;
  CHECK_THROWS_AS(tune(x, w, SearchSpace{{5}}, opt), Error);
}
