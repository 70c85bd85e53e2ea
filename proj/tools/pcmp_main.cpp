// pcmp: octree point-cloud codec with learned depth selection.
//
// Subcommands: encode, decode, info, synth, train-task, build-table,
// train-predictor, eval, rd-curve. Every artifact gets a JSON sidecar
// echoing the resolved run configuration. Exit codes: 0 success,
// 2 config error, 3 data error, 4 corrupt stream.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcmp/cloud_io.hpp"
#include "pcmp/eval.hpp"
#include "pcmp/metrics.hpp"
#include "pcmp/predictor.hpp"
#include "pcmp/shapes.hpp"

using namespace pcmp;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitCorrupt = 4;

// "lo..hi" -> {lo, lo+1, ..., hi}
std::vector<int> parse_levels(const std::string& spec) {
  const auto dots = spec.find("..");
  if (dots == std::string::npos)
    throw ConfigError("--levels expects lo..hi, got '" + spec + "'");
  int lo = 0, hi = 0;
  try {
    lo = std::stoi(spec.substr(0, dots));
    hi = std::stoi(spec.substr(dots + 2));
  } catch (const std::exception&) {
    throw ConfigError("--levels expects integers in lo..hi");
  }
  if (lo < 1 || hi < lo) throw ConfigError("--levels range is empty or invalid");
  std::vector<int> out;
  for (int l = lo; l <= hi; ++l) out.push_back(l);
  return out;
}

std::vector<double> parse_lambdas(const std::string& spec) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string tok =
        spec.substr(pos, comma == std::string::npos ? spec.size() - pos
                                                    : comma - pos);
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("--lambdas expects comma-separated reals");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("--lambdas list is empty");
  return out;
}

void write_sidecar(const std::string& artifact_path, const json& config) {
  const std::string tmp = artifact_path + ".json.tmp";
  std::ofstream f(tmp);
  f << config.dump(2) << "\n";
  f.close();
  std::filesystem::rename(tmp, artifact_path + ".json");
}

// ---- dataset on disk: directory of .xyz files plus labels.csv ---------------

void save_dataset(const std::vector<LabeledCloud>& dataset,
                  const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string tmp = dir + "/labels.csv.tmp";
  std::ofstream labels(tmp);
  labels << "file,label\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "cloud_%05zu.xyz", i);
    save_cloud(dataset[i].cloud, dir + "/" + name);
    labels << name << "," << dataset[i].label << "\n";
  }
  labels.close();
  std::filesystem::rename(tmp, dir + "/labels.csv");
}

std::vector<LabeledCloud> load_dataset(const std::string& dir) {
  std::ifstream labels(dir + "/labels.csv");
  if (!labels) throw ParseError("missing " + dir + "/labels.csv");
  std::vector<LabeledCloud> out;
  std::string line;
  std::getline(labels, line);  // header
  while (std::getline(labels, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("bad labels.csv row: " + line);
    LabeledCloud sample;
    sample.cloud = load_cloud(dir + "/" + line.substr(0, comma));
    try {
      sample.label = std::stoi(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ParseError("bad label in row: " + line);
    }
    out.push_back(std::move(sample));
  }
  if (out.empty()) throw EmptyCloud("dataset " + dir + " has no samples");
  return out;
}

// ---- subcommand bodies ------------------------------------------------------

int cmd_encode(const std::string& in, const std::string& out, int depth,
               const std::string& transform_from) {
  const PointCloud cloud = load_cloud(in);
  Bitstream stream;
  if (transform_from.empty()) {
    stream = encode_cloud(cloud, depth);
  } else {
    // Reuse another stream's normalization so quantization grids line up;
    // this is what makes decode -> re-encode reproduce a stream exactly.
    const NormalizationTransform t = read_bitstream(transform_from).transform;
    std::vector<Point3> pts;
    pts.reserve(cloud.size());
    for (const auto& p : cloud.points()) pts.push_back(t.apply(p));
    stream = encode_cloud(PointCloud(std::move(pts), true), depth, t);
  }
  write_bitstream(stream, out);
  write_sidecar(out, json{{"subcommand", "encode"},
                          {"input", in},
                          {"out", out},
                          {"depth", depth},
                          {"transform_from", transform_from}});
  std::printf("encoded %zu points to %d levels\n",
              static_cast<std::size_t>(stream.point_count), depth);
  std::printf("level  symbols  bytes  cumulative_bpp\n");
  for (std::size_t i = 0; i < stream.segments.size(); ++i)
    std::printf("%5zu  %7u  %5zu  %14.6f\n", i + 1,
                stream.segments[i].symbol_count,
                stream.segments[i].payload.size(),
                bpp(stream, static_cast<int>(i) + 1));
  return kExitOk;
}

int cmd_decode(const std::string& in, const std::string& out, int depth) {
  const Bitstream stream = read_bitstream(in);
  const int k = depth > 0 ? depth : stream.max_depth;
  const DecodeResult result = decode_cloud(stream, k);
  save_cloud(result.cloud, out);
  write_sidecar(out, json{{"subcommand", "decode"},
                          {"input", in},
                          {"out", out},
                          {"depth", k}});
  std::printf("decoded %zu points at depth %d (%zu of %zu payload bytes)\n",
              result.cloud.size(), k, result.bytes_consumed,
              stream.payload_bytes());
  return kExitOk;
}

int cmd_info(const std::string& in) {
  const Bitstream s = read_bitstream(in);
  std::printf("magic: PCMP\n");
  std::printf("version: 1\n");
  std::printf("max_depth: %d\n", s.max_depth);
  std::printf("point_count: %zu\n", static_cast<std::size_t>(s.point_count));
  std::printf("offset: %.17g %.17g %.17g\n", s.transform.offset.x,
              s.transform.offset.y, s.transform.offset.z);
  std::printf("scale: %.17g\n", s.transform.scale);
  std::printf("header_bytes: %zu\n", s.header_bytes());
  std::printf("payload_bytes: %zu\n", s.payload_bytes());
  std::printf("file_bytes: %zu\n", s.header_bytes() + s.payload_bytes());
  std::printf("level  symbols  bytes  cumulative_bpp\n");
  for (std::size_t i = 0; i < s.segments.size(); ++i)
    std::printf("%5zu  %7u  %5zu  %14.6f\n", i + 1, s.segments[i].symbol_count,
                s.segments[i].payload.size(), bpp(s, static_cast<int>(i) + 1));
  return kExitOk;
}

int cmd_synth(int classes, int per_class, int points, std::uint64_t seed,
              double noise, const std::string& out) {
  if (classes < 1 || classes > kNumShapeKinds)
    throw ConfigError("--classes must be in 1.." +
                      std::to_string(kNumShapeKinds));
  if (per_class < 1 || points < 8)
    throw ConfigError("--per-class must be >= 1 and --points >= 8");
  const auto dataset = generate_dataset(classes, per_class, points, seed, noise);
  save_dataset(dataset, out);
  write_sidecar(out + "/dataset", json{{"subcommand", "synth"},
                                       {"classes", classes},
                                       {"per_class", per_class},
                                       {"points", points},
                                       {"seed", seed},
                                       {"noise", noise},
                                       {"out", out},
                                       {"dataset_hash", dataset_hash(dataset)}});
  std::printf("wrote %zu clouds (%d classes) to %s\n", dataset.size(), classes,
              out.c_str());
  return kExitOk;
}

int cmd_train_task(const std::string& data, std::uint64_t seed, int epochs,
                   int batch, const std::string& out) {
  const auto dataset = load_dataset(data);
  TaskTrainConfig cfg;
  if (epochs > 0) cfg.epochs = epochs;
  if (batch > 0) cfg.batch = batch;
  const TaskNetwork net = train_task_network(dataset, seed, cfg);
  net.save(out);
  write_sidecar(out, json{{"subcommand", "train-task"},
                          {"data", data},
                          {"seed", seed},
                          {"epochs", cfg.epochs},
                          {"batch", cfg.batch},
                          {"out", out},
                          {"weights_hash", net.weights_hash()}});
  std::printf("trained task network: train accuracy %.4f\n",
              task_accuracy(net, dataset));
  return kExitOk;
}

int cmd_build_table(const std::string& data, const std::string& task,
                    const std::string& levels_spec, int depth,
                    const std::string& out) {
  const auto dataset = load_dataset(data);
  const TaskNetwork net = TaskNetwork::load(task);
  const std::vector<int> levels = parse_levels(levels_spec);
  CodecConfig codec;
  codec.max_depth = depth;
  const RateLossTable table =
      build_rate_loss_table_cached(dataset, codec, net, levels);
  save_rate_loss_table(table, out);
  // save_rate_loss_table owns out + ".json"; echo the config next to it.
  write_sidecar(out + ".config", json{{"subcommand", "build-table"},
                                      {"data", data},
                                      {"task", task},
                                      {"levels", levels},
                                      {"depth", depth},
                                      {"out", out}});
  std::printf("built rate-loss table: %zu samples x %d levels\n",
              table.samples(), table.k());
  return kExitOk;
}

int cmd_train_predictor(const std::string& data, const std::string& table_path,
                        double lambda, std::uint64_t seed, int epochs,
                        int batch, const std::string& out) {
  const auto dataset = load_dataset(data);
  const RateLossTable table = load_rate_loss_table(table_path);
  PredictorTrainConfig cfg;
  if (epochs > 0) {
    cfg.epochs = epochs;
    cfg.schedule.total_epochs = epochs;
    cfg.lr_switch_epoch = epochs * 4 / 5;
  }
  if (batch > 0) cfg.batch = batch;
  std::vector<EpochStats> stats;
  const PredictorModel model =
      train_predictor(dataset, table, lambda, seed, cfg, &stats);
  const json config = {{"subcommand", "train-predictor"},
                       {"data", data},
                       {"table", table_path},
                       {"lambda", lambda},
                       {"seed", seed},
                       {"epochs", cfg.epochs},
                       {"batch", cfg.batch},
                       {"out", out},
                       {"final_objective", stats.back().mean_objective},
                       {"weights_hash", model.weights_hash()}};
  model.save(out, config.dump(2));
  std::printf("trained predictor: final mean objective %.6f\n",
              stats.back().mean_objective);
  return kExitOk;
}

int cmd_eval(const std::string& data, const std::string& table_path,
             const std::string& model_path, double lambda,
             const std::string& out) {
  const auto dataset = load_dataset(data);
  const RateLossTable table = load_rate_loss_table(table_path);
  std::vector<EvalReport> reports;
  reports.push_back(evaluate_policy(Policy::oracle(), dataset, table, lambda));
  for (const int level : table.candidate_levels)
    reports.push_back(
        evaluate_policy(Policy::fixed(level), dataset, table, lambda));
  PredictorModel model;
  if (!model_path.empty()) {
    model = PredictorModel::load(model_path);
    reports.push_back(
        evaluate_policy(Policy::learned(model), dataset, table, lambda));
  }
  write_reports_csv(reports, table.candidate_levels, out);
  write_sidecar(out, json{{"subcommand", "eval"},
                          {"data", data},
                          {"table", table_path},
                          {"model", model_path},
                          {"lambda", lambda},
                          {"out", out}});
  std::printf("wrote %zu policy reports to %s\n", reports.size(), out.c_str());
  return kExitOk;
}

int cmd_rd_curve(const std::string& data, const std::string& table_path,
                 const std::string& lambdas_spec, std::uint64_t seed,
                 int epochs, int batch, const std::string& out) {
  const auto dataset = load_dataset(data);
  const RateLossTable table = load_rate_loss_table(table_path);
  const std::vector<double> lambdas = parse_lambdas(lambdas_spec);
  PredictorTrainConfig cfg;
  if (epochs > 0) {
    cfg.epochs = epochs;
    cfg.schedule.total_epochs = epochs;
    cfg.lr_switch_epoch = epochs * 4 / 5;
  }
  if (batch > 0) cfg.batch = batch;
  const auto rows = rd_sweep(lambdas, dataset, table, seed, cfg);
  write_rd_csv(rows, out);
  write_sidecar(out, json{{"subcommand", "rd-curve"},
                          {"data", data},
                          {"table", table_path},
                          {"lambdas", lambdas},
                          {"seed", seed},
                          {"epochs", cfg.epochs},
                          {"batch", cfg.batch},
                          {"out", out}});
  std::printf("wrote %zu rate-distortion rows to %s\n", rows.size(),
              out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcmp: scalable octree point-cloud codec with learned depth "
               "selection"};
  app.require_subcommand(1);

  std::string in, out, data, task, table, model;
  std::string levels = "2..8", lambdas = "0.1,0.5,1,2,5,10";
  int depth = 8, classes = 6, per_class = 100, points = 256;
  int epochs = 0, batch = 0;
  std::uint64_t seed = 0;
  double lambda = 1.0, noise = 0.02;

  auto* enc = app.add_subcommand("encode", "compress a point cloud to .pcmp");
  enc->add_option("input", in)->required();
  enc->add_option("--out", out)->required();
  enc->add_option("--depth", depth, "octree depth (default 8)");
  std::string transform_from;
  enc->add_option("--transform", transform_from,
                  "reuse the normalization recorded in an existing .pcmp");

  auto* dec = app.add_subcommand("decode", "reconstruct a cloud from .pcmp");
  dec->add_option("input", in)->required();
  dec->add_option("--out", out)->required();
  int dec_depth = 0;
  dec->add_option("--depth", dec_depth, "prefix depth (default: full)");

  auto* inf = app.add_subcommand("info", "print .pcmp header and layout");
  inf->add_option("input", in)->required();

  auto* syn = app.add_subcommand("synth", "generate a labeled shape dataset");
  syn->add_option("--classes", classes);
  syn->add_option("--per-class", per_class);
  syn->add_option("--points", points);
  syn->add_option("--seed", seed);
  syn->add_option("--noise", noise);
  syn->add_option("--out", out)->required();

  auto* tt = app.add_subcommand("train-task", "train the frozen task network");
  tt->add_option("--data", data)->required();
  tt->add_option("--seed", seed);
  tt->add_option("--epochs", epochs);
  tt->add_option("--batch", batch);
  tt->add_option("--out", out)->required();

  auto* bt = app.add_subcommand("build-table", "precompute per-level bpp/loss");
  bt->add_option("--data", data)->required();
  bt->add_option("--task", task)->required();
  bt->add_option("--levels", levels, "candidate levels lo..hi");
  bt->add_option("--depth", depth, "codec max depth");
  bt->add_option("--out", out)->required();

  auto* tp = app.add_subcommand("train-predictor",
                                "train the depth-level predictor");
  tp->add_option("--data", data)->required();
  tp->add_option("--table", table)->required();
  tp->add_option("--lambda", lambda);
  tp->add_option("--seed", seed);
  tp->add_option("--epochs", epochs);
  tp->add_option("--batch", batch);
  tp->add_option("--out", out)->required();

  auto* ev = app.add_subcommand("eval", "evaluate oracle/fixed/learned policies");
  ev->add_option("--data", data)->required();
  ev->add_option("--table", table)->required();
  ev->add_option("--model", model);
  ev->add_option("--lambda", lambda);
  ev->add_option("--out", out)->required();

  auto* rd = app.add_subcommand("rd-curve", "lambda sweep across policies");
  rd->add_option("--data", data)->required();
  rd->add_option("--table", table)->required();
  rd->add_option("--lambdas", lambdas, "comma-separated lambda list");
  rd->add_option("--seed", seed);
  rd->add_option("--epochs", epochs);
  rd->add_option("--batch", batch);
  rd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (enc->parsed()) return cmd_encode(in, out, depth, transform_from);
    if (dec->parsed()) return cmd_decode(in, out, dec_depth);
    if (inf->parsed()) return cmd_info(in);
    if (syn->parsed())
      return cmd_synth(classes, per_class, points, seed, noise, out);
    if (tt->parsed()) return cmd_train_task(data, seed, epochs, batch, out);
    if (bt->parsed()) return cmd_build_table(data, task, levels, depth, out);
    if (tp->parsed())
      return cmd_train_predictor(data, table, lambda, seed, epochs, batch, out);
    if (ev->parsed()) return cmd_eval(data, table, model, lambda, out);
    if (rd->parsed())
      return cmd_rd_curve(data, table, lambdas, seed, epochs, batch, out);
  } catch (const CorruptStream& e) {
    std::fprintf(stderr, "error: corrupt stream: %s\n", e.what());
    return kExitCorrupt;
  } catch (const CacheCorrupt& e) {
    std::fprintf(stderr, "error: corrupt artifact: %s\n", e.what());
    return kExitCorrupt;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: parse failure: %s\n", e.what());
    return kExitData;
  } catch (const EmptyCloud& e) {
    std::fprintf(stderr, "error: empty input: %s\n", e.what());
    return kExitData;
  } catch (const InvalidDataset& e) {
    std::fprintf(stderr, "error: invalid dataset: %s\n", e.what());
    return kExitData;
  } catch (const TableMismatch& e) {
    std::fprintf(stderr, "error: table mismatch: %s\n", e.what());
    return kExitData;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: bad configuration: %s\n", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "error: bad configuration: %s\n", e.what());
    return kExitConfig;
  } catch (const DepthOutOfRange& e) {
    std::fprintf(stderr, "error: bad configuration: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
