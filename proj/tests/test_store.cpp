#include <doctest.h>

#include <fstream>
#include <functional>
#include <iterator>

#include "rantl/store.hpp"
#include "support.hpp"

using namespace rantl;
using namespace rantl::testing;
namespace fs = std::filesystem;

namespace {

ExpertArtifact artifact(const std::string& id, ResourceDim dim, double reward, std::uint64_t seed) {
  QTable t = random_table(dim, seed);
  t.training_tti = 5000;
  t.final_mean_reward = reward;
  return make_artifact(id, dim, std::move(t), "cafe0123");
}

StoreErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const StoreError& e) {
    return e.kind();
  }
  FAIL("expected StoreError");
  return StoreErrorKind::io;
}

}  // namespace

TEST_CASE("save then load is field-identical") {
  TempDir dir("store");
  ExpertStore st(dir.path);
  ExpertArtifact a = artifact("radio-a", ResourceDim::radio, 0.4123456789, 1);
  a.table.set_value(3, 4, 0.1 + 0.2);  // not representable in short decimal
  const std::string id = st.save(a);
  CHECK(id == "radio-a");
  const ExpertArtifact b = st.load(id);
  CHECK(b.table == a.table);
  CHECK(b.task_id == a.task_id);
  CHECK(b.resources == a.resources);
  CHECK(b.signature == a.signature);
  CHECK(b.action_grid == 11);
  CHECK(b.training_tti == 5000);
  CHECK(b.final_mean_reward == a.final_mean_reward);
  CHECK(b.config_hash == "cafe0123");
  CHECK(!b.created_at.empty());
  CHECK(b.sequence == 1);
  CHECK(load_expert(dir.path, id) == b);
}

TEST_CASE("duplicate ids are refused and the first artifact survives") {
  TempDir dir("store");
  save_expert(dir.path, artifact("dup", ResourceDim::radio, 0.1, 1));
  CHECK(kind_of([&] { save_expert(dir.path, artifact("dup", ResourceDim::radio, 0.9, 2)); }) ==
        StoreErrorKind::duplicate);
  CHECK(load_expert(dir.path, "dup").final_mean_reward == 0.1);
  CHECK(ExpertStore(dir.path).list().size() == 1);
}

TEST_CASE("a flipped byte is caught and the file named") {
  TempDir dir("store");
  save_expert(dir.path, artifact("flip", ResourceDim::compute, 0.3, 4));
  fs::path table;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "experts"))
    if (e.path().filename() == "table") table = e.path();
  REQUIRE(!table.empty());
  std::string bytes;
  {
    std::ifstream in(table, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  bytes[bytes.size() / 2] ^= 0x01;
  std::ofstream(table, std::ios::binary | std::ios::trunc) << bytes;
  try {
    load_expert(dir.path, "flip");
    FAIL("expected integrity error");
  } catch (const StoreError& e) {
    CHECK(e.kind() == StoreErrorKind::integrity);
    CHECK(std::string(e.what()).find(table.string()) != std::string::npos);
  }
}

TEST_CASE("missing ids and malformed artifacts") {
  TempDir dir("store");
  CHECK(kind_of([&] { load_expert(dir.path, "nobody"); }) == StoreErrorKind::not_found);
  ExpertArtifact bad = artifact("bad", ResourceDim::radio, 0.2, 1);
  bad.signature = {2, 3};
  CHECK(kind_of([&] { save_expert(dir.path, bad); }) == StoreErrorKind::format);
}

TEST_CASE("select: joint target gets both experts, best reward first") {
  TempDir dir("store");
  save_expert(dir.path, artifact("radio-low", ResourceDim::radio, 0.4, 1));
  save_expert(dir.path, artifact("compute", ResourceDim::compute, 0.5, 2));
  save_expert(dir.path, artifact("radio-high", ResourceDim::radio, 0.6, 3));

  const auto all = select_experts(dir.path, TargetDescriptor{});
  REQUIRE(all.size() == 3);
  CHECK(all[0].task_id == "radio-high");
  CHECK(all[1].task_id == "compute");
  CHECK(all[2].task_id == "radio-low");

  TargetDescriptor radio_only;
  radio_only.dimensions = {ResourceDim::radio};
  radio_only.signature = {0, 1};
  const auto r = select_experts(dir.path, radio_only);
  REQUIRE(r.size() == 2);
  CHECK(r[0].task_id == "radio-high");
}

TEST_CASE("select: equal rewards go to the newer artifact") {
  TempDir dir("store");
  save_expert(dir.path, artifact("old", ResourceDim::radio, 0.5, 1));
  save_expert(dir.path, artifact("new", ResourceDim::radio, 0.5, 2));
  const auto r = select_experts(dir.path, TargetDescriptor{});
  REQUIRE(r.size() == 2);
  CHECK(r[0].task_id == "new");
  CHECK(r[0].sequence > r[1].sequence);
}

TEST_CASE("select: a 22-level action grid is incompatible") {
  TempDir dir("store");
  QTable wide(signature_of(ResourceDim::radio), 0.1, 0.95, kQuantLevels, 22);
  ExpertArtifact a = make_artifact("wide", ResourceDim::radio, wide, "x");
  CHECK(a.action_grid == 22);
  save_expert(dir.path, a);
  save_expert(dir.path, artifact("narrow", ResourceDim::radio, 0.1, 1));
  const auto r = select_experts(dir.path, TargetDescriptor{});
  REQUIRE(r.size() == 1);
  CHECK(r[0].task_id == "narrow");
}

TEST_CASE("empty or absent store selects nothing") {
  TempDir dir("store");
  CHECK(select_experts(dir.path / "absent", TargetDescriptor{}).empty());
  CHECK(ExpertStore(dir.path).list().empty());
}

TEST_CASE("saving appends; existing artifacts do not change") {
  TempDir dir("store");
  ExpertStore st(dir.path);
  st.save(artifact("a", ResourceDim::radio, 0.1, 1));
  const ExpertArtifact before = st.load("a");
  st.save(artifact("b", ResourceDim::compute, 0.2, 2));
  CHECK(st.load("a") == before);
  const auto listed = st.list();
  REQUIRE(listed.size() == 2);
  CHECK(listed[0].task_id == "a");
  CHECK(listed[1].sequence == 2);
  CHECK(select_experts(dir.path, TargetDescriptor{}) == select_experts(dir.path, TargetDescriptor{}));
}
