#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pcmp/rate_loss_table.hpp"
#include "pcmp/shapes.hpp"
#include "pcmp/task_network.hpp"

using namespace pcmp;

namespace {

std::vector<LabeledCloud> tiny_dataset(int classes, std::size_t per_class) {
  return generate_dataset(classes, per_class, 64, 7, 0.01);
}

TaskNetwork& shared_network() {
  static TaskNetwork net = [] {
    TaskTrainConfig cfg;
    cfg.epochs = 40;
    return train_task_network(tiny_dataset(3, 24), 11, cfg);
  }();
  return net;
}

}  // namespace

TEST_CASE("task network separates easy shape classes") {
  const auto& net = shared_network();
  CHECK(net.frozen());
  CHECK(net.num_classes() == 3);
  const auto held_out = generate_dataset(3, 16, 64, 999, 0.01);
  CHECK(task_accuracy(net, held_out) >= 0.9);
}

TEST_CASE("task loss agrees with the reported probabilities") {
  const auto& net = shared_network();
  const auto sample = generate_shape(ShapeKind::kCubeSurface, 64, 42, 0.01);
  const auto r = task_loss(net, sample.cloud, sample.label);
  CHECK(r.probs.size() == 3);
  CHECK(r.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.loss == doctest::Approx(-std::log(r.probs(sample.label))).epsilon(1e-9));
  int argmax = 0;
  r.probs.maxCoeff(&argmax);
  CHECK(r.correct == (argmax == sample.label));
  CHECK_THROWS_AS(task_loss(net, sample.cloud, 3), InvalidDataset);
  CHECK_THROWS_AS(task_loss(net, sample.cloud, -1), InvalidDataset);
}

TEST_CASE("training is deterministic in the seed") {
  TaskTrainConfig cfg;
  cfg.epochs = 3;
  const auto data = tiny_dataset(2, 6);
  const auto a = train_task_network(data, 5, cfg);
  const auto b = train_task_network(data, 5, cfg);
  const auto c = train_task_network(data, 6, cfg);
  CHECK(a.weights_hash() == b.weights_hash());
  CHECK(a.weights_hash() != c.weights_hash());
  CHECK_THROWS_AS(train_task_network(tiny_dataset(1, 4), 5, cfg), InvalidDataset);
}

TEST_CASE("checkpoint round trip preserves behavior") {
  const auto& net = shared_network();
  const auto path = (std::filesystem::temp_directory_path() / "task.ptsk").string();
  net.save(path);
  const auto back = TaskNetwork::load(path);
  CHECK(back.weights_hash() == net.weights_hash());
  CHECK(back.num_classes() == net.num_classes());
  CHECK(back.frozen());
  const auto s = generate_shape(ShapeKind::kPlane, 64, 1, 0.01);
  CHECK((back.probabilities(s.cloud) - net.probabilities(s.cloud))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("rate-loss table has coherent rows") {
  const auto& net = shared_network();
  const auto data = tiny_dataset(3, 4);
  const std::vector<int> levels = {2, 3, 4, 5, 6};
  const auto table = build_rate_loss_table(data, {8}, net, levels);

  CHECK(table.samples() == data.size());
  CHECK(table.k() == 5);
  CHECK(table.candidate_levels == levels);
  CHECK(table.dataset_hash == dataset_hash(data));
  CHECK(table.network_hash == net.weights_hash());

  for (std::size_t i = 0; i < data.size(); ++i) {
    const Bitstream stream = encode_cloud(data[i].cloud, 8);
    for (int j = 0; j < table.k(); ++j) {
      const auto& e = table.rows[i][j];
      CHECK(e.bpp == bpp(stream, levels[j]));  // same codec path, exact
      CHECK(e.loss > 0.0);
      if (j > 0) CHECK(e.bpp > table.rows[i][j - 1].bpp);
      const auto rec = decode_cloud(stream, levels[j]).cloud;
      const auto l = task_loss(net, rec, data[i].label);
      CHECK(e.loss == doctest::Approx(l.loss).epsilon(1e-12));
      CHECK(e.correct == l.correct);
    }
  }
}

TEST_CASE("table rejects unfrozen networks and bad level lists") {
  const auto data = tiny_dataset(2, 2);
  TaskNetwork unfrozen;
  CHECK_THROWS_AS(build_rate_loss_table(data, {8}, unfrozen, {2, 3}),
                  ConfigError);
  const auto& net = shared_network();
  CHECK_THROWS_AS(build_rate_loss_table(data, {8}, net, {3, 2}), ConfigError);
  CHECK_THROWS_AS(build_rate_loss_table(data, {8}, net, {}), ConfigError);
  CHECK_THROWS_AS(build_rate_loss_table(data, {4}, net, {2, 5}), ConfigError);
}

TEST_CASE("csv save/load round trip") {
  const auto& net = shared_network();
  const auto data = tiny_dataset(2, 3);
  const auto table = build_rate_loss_table(data, {6}, net, {2, 4, 6});
  const auto path = (std::filesystem::temp_directory_path() / "rlt.csv").string();
  save_rate_loss_table(table, path);
  CHECK(load_rate_loss_table(path) == table);

  // Any tampering must be detected against the JSON sidecar.
  std::ifstream in(path);
  std::string contents((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto pos = contents.rfind('1');
  contents[pos] = '2';
  std::ofstream(path) << contents;
  CHECK_THROWS_AS(load_rate_loss_table(path), CacheCorrupt);
}

TEST_CASE("cached build hits the cache and survives corruption") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "pcmp_cache_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const auto& net = shared_network();
  const auto data = tiny_dataset(2, 3);
  const auto a =
      build_rate_loss_table_cached(data, {6}, net, {2, 4}, "classify", dir.string());
  REQUIRE(fs::exists(dir));
  std::size_t files = 0;
  fs::path entry;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.path().extension() == ".csv") { ++files; entry = f.path(); }
  CHECK(files == 1);

  const auto b =
      build_rate_loss_table_cached(data, {6}, net, {2, 4}, "classify", dir.string());
  CHECK(a == b);

  std::ofstream(entry) << "garbage\n";
  const auto c =
      build_rate_loss_table_cached(data, {6}, net, {2, 4}, "classify", dir.string());
  CHECK(a == c);

  // Different key -> second entry, not a false hit.
  build_rate_loss_table_cached(data, {6}, net, {2, 4, 6}, "classify", dir.string());
  files = 0;
  for (const auto& f : fs::directory_iterator(dir))
    if (f.path().extension() == ".csv") ++files;
  CHECK(files == 2);
  fs::remove_all(dir);
}
