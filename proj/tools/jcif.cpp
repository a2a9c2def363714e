// Copyright 2026 The JCIF Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: dataset generation, two-stage training, archive
// compression, indexing, querying, evaluation and rate-distortion curves.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "jcif/codec/checkpoint.hpp"
#include "jcif/codec/coding.hpp"
#include "jcif/common/byte_io.hpp"
#include "jcif/common/error.hpp"
#include "jcif/dataset/manifest.hpp"
#include "jcif/dataset/tensor_file.hpp"
#include "jcif/pipeline/evaluate.hpp"
#include "jcif/pipeline/rate_distortion.hpp"
#include "jcif/trainer/train.hpp"

namespace fs = std::filesystem;
using namespace jcif;

namespace {

enum ExitCode : int { kOk = 0, kIo = 1, kUsage = 2, kMissing = 3, kFormat = 4 };

struct GenDataArgs {
  fs::path out;
  std::size_t n = 2000;
  std::uint64_t seed = 7;
  std::size_t size = 32;
  std::size_t classes = 8;
  double train = 0.52, val = 0.24, test = 0.24;
};

struct TrainArgs {
  int stage = 1;
  fs::path data, out, log, checkpoint;
  std::size_t steps = 0;
  double learning_rate = 1e-3;
  std::size_t batch = 8;
  std::uint64_t seed = 7;
  double lambda = 0.01;
  std::size_t code_bits = 64;
  double alpha = 0.0, gamma = 0.0;
  double codec_factor = 0.1;
  int surgery = 4;
  std::string mgda_scaling = "loss";
  std::size_t early_stop_window = 500;
  std::size_t log_every = 100;
};

struct ArchiveArgs {
  fs::path data, checkpoint, archive, out, index;
  std::string split = "test";
  std::uint64_t id = 0;
  std::size_t top_k = 10;
  std::size_t k = 10;
  std::vector<fs::path> checkpoints;
};

std::uint64_t manifest_digest(const dataset::DatasetManifest& m) {
  const auto text = dataset::manifest_text(m);
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t file_digest(const fs::path& path) { return fnv1a64(read_file(path)); }

void require_file(const fs::path& path, const std::string& flag) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::exists(path)) throw IoError(flag + ": no such file " + path.string());
}

std::vector<trainer::TrainingSample> training_set(const dataset::DatasetManifest& m) {
  std::vector<trainer::TrainingSample> out;
  for (const auto* e : m.in_split(dataset::Split::kTrain)) {
    out.push_back({dataset::load_image(m, *e).pixels(), e->labels});
  }
  if (out.empty()) throw ConfigError("dataset has no training images");
  return out;
}

std::vector<pipeline::LabeledImage> labeled_split(const dataset::DatasetManifest& m, dataset::Split split) {
  std::vector<pipeline::LabeledImage> out;
  for (const auto* e : m.in_split(split)) out.push_back({e->id, dataset::load_image(m, *e), e->labels});
  return out;
}

int cmd_gen_data(const GenDataArgs& a) {
  dataset::SyntheticSceneConfig sc;
  sc.height = sc.width = a.size;
  sc.classes = a.classes;
  sc.max_labels = std::min<std::size_t>(sc.max_labels, a.classes);
  sc.seed = a.seed;
  const dataset::SplitRatios ratios{a.train, a.val, a.test};
  const auto m = dataset::build_dataset(sc, a.n, ratios, a.out);
  std::printf("images %zu  train %zu  val %zu  test %zu  classes %zu\n", m.entries.size(),
              m.in_split(dataset::Split::kTrain).size(), m.in_split(dataset::Split::kVal).size(),
              m.in_split(dataset::Split::kTest).size(), m.classes);
  std::printf("manifest %s  digest %016llx\n", (a.out / "manifest.csv").string().c_str(),
              static_cast<unsigned long long>(manifest_digest(m)));
  return kOk;
}

int cmd_train(const TrainArgs& a) {
  if (a.stage != 1 && a.stage != 2) throw ConfigError("--stage must be 1 or 2");
  if (a.stage == 2 && a.checkpoint.empty()) throw ConfigError("--checkpoint is required for stage 2");
  require_file(a.data, "--data");
  if (a.out.empty()) throw ConfigError("--out is required");
  if (a.stage == 2) require_file(a.checkpoint, "--checkpoint");

  const auto manifest = dataset::read_manifest(a.data);
  const auto data = training_set(manifest);

  trainer::TrainSchedule schedule;
  schedule.learning_rate = a.learning_rate;
  schedule.batch_size = a.batch;
  schedule.seed = a.seed;
  schedule.codec_factor = a.codec_factor;
  schedule.early_stop_window = a.early_stop_window;
  if (a.surgery != 3 && a.surgery != 4) throw ConfigError("--surgery must be 3 or 4");
  schedule.surgery = a.surgery == 3 ? trainer::SurgeryTasks::kHashingOnly : trainer::SurgeryTasks::kHashingAndCompression;
  if (a.mgda_scaling != "loss" && a.mgda_scaling != "raw") throw ConfigError("--mgda-scaling must be loss or raw");
  schedule.mgda_scaling = a.mgda_scaling == "raw" ? trainer::MgdaScaling::kRaw : trainer::MgdaScaling::kLoss;
  if (a.steps > 0) (a.stage == 1 ? schedule.stage1_steps : schedule.stage2_steps) = a.steps;

  const auto print = [&](const trainer::LogRow& r) {
    if (a.log_every == 0 || r.step % a.log_every != 0) return;
    if (r.stage == 1) {
      std::printf("stage 1 step %zu  L_C %.1f  bpp %.4f  psnr %.2f\n", r.step, r.compression, r.bpp, r.psnr);
    } else {
      std::printf("stage 2 step %zu  L_C %.1f  L_p %.3f  L_b %.1f  L_c %.3f  bpp %.4f  psnr %.2f\n", r.step,
                  r.compression, r.pairwise, r.balance, r.classification, r.bpp, r.psnr);
    }
    std::fflush(stdout);
  };

  trainer::StageReport report;
  numerics::ParameterSet params;
  codec::CodecConfig codec_cfg;
  std::optional<hash::HashHeadConfig> head;
  if (a.stage == 1) {
    codec_cfg.lambda = a.lambda;
    codec_cfg.validate();
    codec::init_codec_params(params, codec_cfg, a.seed);
    report = trainer::stage1_train(params, codec_cfg, data, schedule, print);
  } else {
    auto model = pipeline::load_model(a.checkpoint);
    params = std::move(model.params);
    codec_cfg = model.codec;
    if (!params.names(hash::kHashPrefix).empty()) throw ConfigError("--checkpoint already contains a hash head");
    hash::HashHeadConfig h;
    h.code_bits = a.code_bits;
    h.classes = manifest.classes;
    h.latent_channels = codec_cfg.latent_channels;
    h.alpha = a.alpha;
    h.gamma = a.gamma;
    h.validate();
    hash::init_hash_params(params, h, a.seed);
    head = h;
    report = trainer::stage2_train(params, codec_cfg, h, data, schedule, print);
  }

  codec::save_checkpoint(a.out, params, trainer::training_meta(schedule, codec_cfg, head));
  if (!a.log.empty()) trainer::write_log_csv(a.log, report.log);
  const auto& last = report.log.back();
  std::printf("stage %d finished after %zu steps%s  bpp %.4f  psnr %.2f\n", a.stage, report.log.size(),
              report.early_stopped ? " (early stop)" : "", last.bpp, last.psnr);
  std::printf("checkpoint %s  digest %016llx\n", a.out.string().c_str(),
              static_cast<unsigned long long>(file_digest(a.out)));
  return kOk;
}

int cmd_compress(const ArchiveArgs& a) {
  require_file(a.data, "--data");
  require_file(a.checkpoint, "--checkpoint");
  if (a.out.empty()) throw ConfigError("--out is required");
  const auto manifest = dataset::read_manifest(a.data);
  const auto model = pipeline::load_model(a.checkpoint);
  model.require_head();

  std::vector<pipeline::SourceImage> images;
  double estimated = 0.0;
  std::size_t pixels = 0;
  for (const auto* e : manifest.in_split(dataset::parse_split(a.split))) {
    images.push_back({e->id, dataset::load_image(manifest, *e)});
    estimated += codec::analyze(model.params, model.codec, images.back().image).estimated_bits;
    pixels += images.back().image.height() * images.back().image.width();
  }
  const auto archive = pipeline::compress_images(model, images);
  pipeline::save_archive(a.out, archive);
  const double denom = pixels ? static_cast<double>(pixels) : 1.0;
  std::printf("compressed %zu images  bpp %.4f  model-estimated bpp %.4f\n", archive.entries.size(),
              static_cast<double>(archive.payload_bits()) / denom, estimated / denom);
  std::printf("archive %s  digest %016llx\n", a.out.string().c_str(),
              static_cast<unsigned long long>(file_digest(a.out)));
  return kOk;
}

int cmd_decompress(const ArchiveArgs& a) {
  require_file(a.archive, "--archive");
  require_file(a.checkpoint, "--checkpoint");
  const auto archive = pipeline::load_archive(a.archive);
  const auto model = pipeline::load_model(a.checkpoint);
  const auto& entry = archive.find(a.id);
  const auto before = codec::decode_operation_count();
  const auto image = codec::decompress(model.params, model.codec, entry.image);
  const auto decodes = codec::decode_operation_count() - before;
  std::printf("id %llu  %zux%zux%zu  bits %llu  decode operations %llu\n", static_cast<unsigned long long>(a.id),
              image.height(), image.width(), image.channels(),
              static_cast<unsigned long long>(entry.image.payload_bits()), static_cast<unsigned long long>(decodes));
  if (!a.data.empty()) {
    const auto manifest = dataset::read_manifest(a.data);
    const auto original = dataset::load_image(manifest, manifest.find(a.id));
    const double db = codec::psnr(original.pixels(), image.pixels());
    if (codec::is_lossless_psnr(db)) {
      std::printf("psnr lossless\n");
    } else {
      std::printf("psnr %.3f dB\n", db);
    }
  }
  if (!a.out.empty()) dataset::write_tensor(a.out, {"image." + std::to_string(a.id), image.pixels()});
  return kOk;
}

int cmd_index(const ArchiveArgs& a) {
  require_file(a.archive, "--archive");
  if (a.out.empty()) throw ConfigError("--out is required");
  const auto archive = pipeline::load_archive(a.archive);
  std::vector<std::pair<retrieval::ImageId, retrieval::PackedCode>> codes;
  for (const auto& e : archive.entries) codes.emplace_back(e.id, e.code);
  const auto table = retrieval::HashTable::build_packed(archive.code_bits, codes);
  retrieval::save_index(a.out, table);
  std::printf("indexed %zu images into %zu buckets (q=%zu)\n", table.size(), table.bucket_count(), table.code_bits());
  std::printf("index %s  digest %016llx\n", a.out.string().c_str(),
              static_cast<unsigned long long>(file_digest(a.out)));
  return kOk;
}

int cmd_query(const ArchiveArgs& a) {
  require_file(a.index, "--index");
  require_file(a.checkpoint, "--checkpoint");
  require_file(a.data, "--data");
  const auto table = retrieval::load_index(a.index);
  const auto model = pipeline::load_model(a.checkpoint);
  if (model.require_head().code_bits != table.code_bits()) {
    throw FormatError("index code length " + std::to_string(table.code_bits()) + " differs from the model's " +
                      std::to_string(model.require_head().code_bits));
  }
  const auto manifest = dataset::read_manifest(a.data);
  const auto image = dataset::load_image(manifest, manifest.find(a.id));
  const auto before = codec::decode_operation_count();
  const auto start = std::chrono::steady_clock::now();
  const auto result = table.query(pipeline::image_code(model, image), a.top_k);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("rank,id,hamming\n");
  for (std::size_t i = 0; i < result.ids.size(); ++i) {
    std::printf("%zu,%llu,%u\n", i + 1, static_cast<unsigned long long>(result.ids[i]), result.distances[i]);
  }
  std::printf("elapsed %.6f s  decode operations %llu\n", seconds,
              static_cast<unsigned long long>(codec::decode_operation_count() - before));
  return kOk;
}

int cmd_evaluate(const ArchiveArgs& a) {
  require_file(a.archive, "--archive");
  require_file(a.checkpoint, "--checkpoint");
  require_file(a.data, "--data");
  if (a.out.empty()) throw ConfigError("--out-dir is required");
  const auto manifest = dataset::read_manifest(a.data);
  const auto archive = pipeline::load_archive(a.archive);
  const auto model = pipeline::load_model(a.checkpoint);
  if (model.require_head().code_bits != archive.code_bits) throw FormatError("archive code length differs from the model's");

  pipeline::GalleryLabels labels;
  for (const auto& e : archive.entries) labels.emplace(e.id, manifest.find(e.id).labels);
  const auto queries = labeled_split(manifest, dataset::Split::kVal);
  pipeline::EvaluationOptions options;
  options.k = a.k;
  std::vector<pipeline::MetricsReport> reports;
  reports.push_back(pipeline::evaluate_joint(model, archive, labels, queries, options));
  reports.push_back(pipeline::evaluate_standard(model, archive, labels, queries, options));

  fs::create_directories(a.out);
  write_text_file(a.out / "metrics.csv", pipeline::metrics_csv(reports));
  write_text_file(a.out / "summary.csv", pipeline::summary_csv(reports));
  write_text_file(a.out / "timing.csv", pipeline::timing_csv(reports));
  std::printf("approach,P@%zu,R@%zu,mAP,total_seconds,decode_operations\n", a.k, a.k);
  for (const auto& r : reports) {
    std::printf("%s,%.4f,%.4f,%.4f,%.4f,%llu\n", std::string(pipeline::approach_name(r.approach)).c_str(),
                r.precision, r.recall, r.map, r.total_seconds, static_cast<unsigned long long>(r.decode_operations));
  }
  return kOk;
}

int cmd_rd_curve(const ArchiveArgs& a) {
  require_file(a.data, "--data");
  if (a.checkpoints.empty()) throw ConfigError("--checkpoint is required (repeat it for each lambda)");
  if (a.out.empty()) throw ConfigError("--out is required");
  std::vector<std::string> missing;
  for (const auto& c : a.checkpoints) {
    if (!fs::exists(c)) missing.push_back(c.string());
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += "\n  " + m;
    throw ConfigError("missing checkpoints:" + list);
  }
  const auto manifest = dataset::read_manifest(a.data);
  std::vector<codec::RasterImage> images;
  for (const auto* e : manifest.in_split(dataset::parse_split(a.split))) images.push_back(dataset::load_image(manifest, *e));
  std::vector<pipeline::RdPoint> points;
  for (const auto& c : a.checkpoints) {
    const auto model = pipeline::load_model(c);
    points.push_back(pipeline::measure_codec(model.params, model.codec, images));
  }
  const auto baseline = pipeline::uniform_curve(images);
  const auto csv = pipeline::rd_csv(points, baseline);
  write_text_file(a.out, csv);
  std::cout << csv;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint learned image compression and hash-based retrieval"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate the synthetic multi-label dataset");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--n", gen.n, "Number of images");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--size", gen.size, "Image height and width");
  g->add_option("--classes", gen.classes, "Number of classes");
  g->add_option("--train", gen.train, "Training fraction");
  g->add_option("--val", gen.val, "Validation fraction");
  g->add_option("--test", gen.test, "Test fraction");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Run stage-1 or stage-2 training");
  t->add_option("--stage", tr.stage, "1 = codec alone, 2 = codec and hash head")->required();
  t->add_option("--data", tr.data, "Dataset manifest");
  t->add_option("--out", tr.out, "Output checkpoint");
  t->add_option("--log", tr.log, "Training log CSV");
  t->add_option("--checkpoint", tr.checkpoint, "Stage-1 checkpoint (stage 2)");
  t->add_option("--steps", tr.steps, "Step budget for the selected stage");
  t->add_option("--lr", tr.learning_rate, "Main learning rate");
  t->add_option("--batch", tr.batch, "Images per step");
  t->add_option("--seed", tr.seed, "Seed for initialization, sampling and noise");
  t->add_option("--lambda", tr.lambda, "Rate-distortion weight (stage 1)");
  t->add_option("--code-bits", tr.code_bits, "Hash code length (stage 2)");
  t->add_option("--alpha", tr.alpha, "Pairwise-loss relaxation, default 5/q");
  t->add_option("--gamma", tr.gamma, "Soft-pair weight, default 0.1/q");
  t->add_option("--codec-factor", tr.codec_factor, "Stage-2 learning-rate factor for the codec");
  t->add_option("--surgery", tr.surgery, "PCGrad task count: 4 includes L_C, 3 hashing losses only");
  t->add_option("--mgda-scaling", tr.mgda_scaling, "Stage-1 MGDA weight from loss-scaled (loss) or raw gradients");
  t->add_option("--early-stop-window", tr.early_stop_window, "Stage-1 plateau window in steps");
  t->add_option("--log-every", tr.log_every, "Print progress every N steps (0 = quiet)");

  ArchiveArgs ar;
  auto* c = app.add_subcommand("compress", "Compress a dataset split into an archive");
  c->add_option("--data", ar.data, "Dataset manifest");
  c->add_option("--checkpoint", ar.checkpoint, "Joint checkpoint");
  c->add_option("--out", ar.out, "Output archive");
  c->add_option("--split", ar.split, "train, val or test");

  auto* d = app.add_subcommand("decompress", "Reconstruct one archived image");
  d->add_option("--archive", ar.archive, "Archive file");
  d->add_option("--checkpoint", ar.checkpoint, "Checkpoint");
  d->add_option("--id", ar.id, "Image id")->required();
  d->add_option("--data", ar.data, "Manifest, to report PSNR against the original");
  d->add_option("--out", ar.out, "Write the reconstruction as a tensor file");

  auto* x = app.add_subcommand("index", "Build a hash-table index from an archive");
  x->add_option("--archive", ar.archive, "Archive file");
  x->add_option("--out", ar.out, "Output index");

  auto* q = app.add_subcommand("query", "Retrieve archive images similar to a dataset image");
  q->add_option("--index", ar.index, "Index file");
  q->add_option("--checkpoint", ar.checkpoint, "Joint checkpoint");
  q->add_option("--data", ar.data, "Dataset manifest");
  q->add_option("--id", ar.id, "Query image id")->required();
  q->add_option("--top-k", ar.top_k, "Number of results");

  auto* e = app.add_subcommand("evaluate", "Compare decode-free and decode-then-hash retrieval");
  e->add_option("--archive", ar.archive, "Archive of the gallery split");
  e->add_option("--checkpoint", ar.checkpoint, "Joint checkpoint");
  e->add_option("--data", ar.data, "Dataset manifest; queries come from the validation split");
  e->add_option("--k", ar.k, "Cut-off for P@k and R@k");
  e->add_option("--out-dir", ar.out, "Directory for metrics.csv, summary.csv and timing.csv");

  auto* r = app.add_subcommand("rd-curve", "Measure bpp and PSNR for several checkpoints");
  r->add_option("--data", ar.data, "Dataset manifest");
  r->add_option("--checkpoint", ar.checkpoints, "Stage-1 or joint checkpoint, one per lambda");
  r->add_option("--split", ar.split, "Split to measure on");
  r->add_option("--out", ar.out, "Output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*c) return cmd_compress(ar);
    if (*d) return cmd_decompress(ar);
    if (*x) return cmd_index(ar);
    if (*q) return cmd_query(ar);
    if (*e) return cmd_evaluate(ar);
    if (*r) return cmd_rd_curve(ar);
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const NotFoundError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kMissing;
  } catch (const FormatError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFormat;
  } catch (const ShapeError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFormat;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kIo;
  }
  return kUsage;
}
