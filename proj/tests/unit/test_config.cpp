#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dcmi/experiment/config.hpp"

using namespace dcmi::experiment;

namespace {

const char* kGood = R"({
  "data": {"synthetic": {"counts": [60, 30, 12], "positive_rates": [0.4], "seed": 3}},
  "variants": ["dcmi", "d_al"],
  "train": {"epochs": 2, "batch_size": 16, "lr": 0.01, "dim": 8},
  "seeds": 2
})";

std::vector<std::string> diagnostics_of(const std::string& text) {
  std::vector<std::string> d;
  parse_config(text, d);
  return d;
}

bool mentions(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("a valid config parses with defaults filled in") {
  std::vector<std::string> d;
  const auto c = parse_config(kGood, d);
  REQUIRE(c);
  CHECK(d.empty());
  CHECK(c->variants.size() == 2);
  CHECK(c->seeds == 2);
  CHECK(c->train.epochs == 2);
  CHECK(c->train.dim == 8);
  CHECK(c->synthetic->counts == std::vector<std::size_t>{60, 30, 12});
  CHECK(c->split == std::array<double, 3>{0.8, 0.1, 0.1});
}

TEST_CASE("negative lambda1 is named by field") {
  const auto d = diagnostics_of(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi"],"train":{"lambda1":-1}})");
  CHECK(mentions(d, "train.lambda1"));
}

TEST_CASE("unknown variants and keys are reported together") {
  const auto d = diagnostics_of(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi","bert"],"trian":{}})");
  CHECK(mentions(d, "variants"));
  CHECK(mentions(d, "trian"));
  CHECK(d.size() >= 2);
}

TEST_CASE("missing data and malformed JSON are diagnosed") {
  CHECK(mentions(diagnostics_of(R"({"variants":["dcmi"]})"), "data"));
  CHECK(!diagnostics_of("{not json").empty());
  CHECK(mentions(diagnostics_of(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi"],"train":{"epochs":"3"}})"),
                 "train.epochs"));
}

TEST_CASE("presets set lambdas; explicit train fields win") {
  std::vector<std::string> d;
  auto c = parse_config(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi"],"preset":"dsc"})", d);
  REQUIRE(c);
  CHECK(c->train.lambda1 == 30.0);
  CHECK(c->train.lambda2 == 15.0);
  c = parse_config(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi"],"preset":"asc","train":{"lambda2":1}})", d);
  REQUIRE(c);
  CHECK(c->train.lambda1 == 50.0);
  CHECK(c->train.lambda2 == 1.0);
  CHECK_FALSE(preset_lambdas("xyz"));
  CHECK(preset_lambdas("rfd") == std::pair{4.0, 3.0});
}

TEST_CASE("sweep grids accept lists and log grids") {
  std::vector<std::string> d;
  const auto c = parse_config(R"({"data":{"synthetic":{"counts":[10]}},"variants":["dcmi"],
    "sweep":{"lambda1":[0,1,10],"lambda2":{"log_grid":{"max":100,"points":5}},"seeds":2,"max_runs":50}})", d);
  REQUIRE(c);
  REQUIRE(c->sweep);
  CHECK(c->sweep->lambda1 == std::vector<double>{0, 1, 10});
  CHECK(c->sweep->lambda2.size() == 5);
  CHECK(c->sweep->cells() == 15);
  CHECK(c->sweep->max_runs == 50);
}

TEST_CASE("log_grid starts at zero and spans min..max geometrically") {
  const auto g = log_grid(100.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == doctest::Approx(0.01));
  CHECK(g[2] == doctest::Approx(0.01 * std::pow(1e4, 1.0 / 3.0)));
  CHECK(g[3] == doctest::Approx(0.01 * std::pow(1e4, 2.0 / 3.0)));
  CHECK(g[4] == 100.0);
  CHECK(log_grid(5.0, 1) == std::vector<double>{0.0});
  CHECK_THROWS(log_grid(5.0, 0));
  CHECK_THROWS(log_grid(0.001, 3));
}

TEST_CASE("load_config throws ConfigError carrying all diagnostics") {
  try {
    load_config_string(R"({"variants":["nope"]})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.diagnostics().size() >= 2);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/dcmi.json"), ConfigError);
}

TEST_CASE("check_config is the shared semantic gate") {
  auto c = load_config_string(kGood);
  CHECK(check_config(c).empty());
  c.train.lambda1 = -1.0;
  c.variants.clear();
  const auto d = check_config(c);
  CHECK(mentions(d, "train.lambda1"));
  CHECK(mentions(d, "variants"));
}

TEST_CASE("prepare_data splits and downsamples deterministically") {
  auto c = load_config_string(kGood);
  const auto a = prepare_data(c);
  const auto b = prepare_data(c);
  CHECK(a.train.size() + a.val.size() + a.test.size() == 102);
  CHECK(a.test.samples().front().text == b.test.samples().front().text);
  c.downsample_train = 4;
  CHECK(prepare_data(c).train.size() < a.train.size());
  CHECK(run_seed(c, 3) == c.base_seed + 3);
}
