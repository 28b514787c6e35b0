#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "dcmi/data/dataset.hpp"

using namespace dcmi::data;
namespace fs = std::filesystem;

namespace {

// Domain j gets sizes[j] samples, every third one positive.
Dataset make(std::vector<std::size_t> sizes) {
  std::vector<Sample> s;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    names.push_back("d" + std::to_string(j));
    for (std::size_t i = 0; i < sizes[j]; ++i) {
      s.push_back(Sample{s.size(), "t" + std::to_string(i), i % 3 == 0 ? 1 : 0, static_cast<int>(j)});
    }
  }
  return Dataset(std::move(s), 2, names);
}

fs::path write_temp(const std::string& name, const std::string& body) {
  const auto p = fs::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("dataset counts by domain and class") {
  const auto d = make({6, 3});
  CHECK(d.size() == 9);
  CHECK(d.num_domains() == 2);
  CHECK(d.count(0, 1) == 2);
  CHECK(d.count(1, 0) == 2);
  CHECK(d.domain_count(1) == 3);
  CHECK(d.class_counts() == std::vector<std::size_t>{6, 3});
  CHECK_THROWS_AS(Dataset({Sample{0, "x", 2, 0}}, 2, {"a"}), DataError);
  CHECK_THROWS_AS(Dataset({Sample{0, "x", 0, 1}}, 2, {"a"}), DataError);
}

TEST_CASE("split partitions the dataset and keeps every cell in train") {
  const auto d = make({200, 40, 7, 3});
  const auto s = split(d, {0.8, 0.1, 0.1}, 42);
  CHECK(s.train.size() + s.val.size() + s.test.size() == d.size());
  CHECK(s.val.size() == 25);
  CHECK(s.test.size() == 25);
  std::set<std::size_t> ids;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const auto& x : part->samples()) CHECK(ids.insert(x.id).second);
  CHECK(ids.size() == d.size());
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t c = 0; c < 2; ++c) CHECK(s.train.count(j, c) >= 1);

  const auto again = split(d, {0.8, 0.1, 0.1}, 42);
  CHECK(again.test.samples().front().id == s.test.samples().front().id);
  CHECK_THROWS_AS(split(d, {0.8, 0.1, 0.2}, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(d, {1.0, 0.0, 0.0}, 1), std::invalid_argument);
}

TEST_CASE("downsample keeps ceil(n / factor) per cell") {
  const auto d = make({30, 4});
  const auto small = downsample(d, 10, 3);
  CHECK(small.count(0, 0) == 2);
  CHECK(small.count(0, 1) == 1);
  CHECK(small.count(1, 0) == 1);
  CHECK(small.count(1, 1) == 1);
  CHECK(downsample(d, 1, 3).size() == d.size());
}

TEST_CASE("deferred re-weighting balances classes after the defer point") {
  const auto d = make({30, 12});
  const auto early = drs_weights(d, 7, 10);
  CHECK(std::all_of(early.begin(), early.end(), [](double w) { return w == 1.0; }));
  const auto late = drs_weights(d, 8, 10);
  double sums[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) sums[d.samples()[i].label] += late[i];
  CHECK(sums[0] == doctest::Approx(1.0));
  CHECK(sums[1] == doctest::Approx(1.0));
  CHECK_THROWS(drs_weights(d, 10, 10));
}

TEST_CASE("jsonl round-trip and line-numbered errors") {
  const auto p = write_temp("dcmi_ds.jsonl",
                            "{\"text\":\"good\",\"label\":1,\"domain\":\"books\"}\n"
                            "\n"
                            "{\"text\":\"bad\",\"label\":0,\"domain\":\"dvd\"}\n");
  const auto d = load_jsonl(p);
  CHECK(d.size() == 2);
  CHECK(d.domain_names() == std::vector<std::string>{"books", "dvd"});
  CHECK(d.samples()[1].domain == 1);

  const auto out = fs::temp_directory_path() / "dcmi_ds_out.jsonl";
  save_jsonl(d, out);
  const auto back = load_jsonl(out);
  CHECK(back.samples()[0].text == "good");
  CHECK(back.samples()[1].label == 0);

  const auto bad = write_temp("dcmi_ds_bad.jsonl", "{\"text\":\"a\",\"label\":1,\"domain\":\"x\"}\n{\"text\":\"b\"}\n");
  try {
    load_jsonl(bad);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_jsonl(fs::temp_directory_path() / "dcmi_missing.jsonl"), DataError);
  for (const auto& f : {p, out, bad}) fs::remove(f);
}
