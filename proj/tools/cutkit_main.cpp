#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cutkit/cutset.hpp"
#include "cutkit/errors.hpp"
#include "cutkit/jsonl.hpp"
#include "cutkit/kaldi.hpp"
#include "cutkit/manifest.hpp"
#include "cutkit/sampling.hpp"
#include "cutkit/synth.hpp"

namespace fs = std::filesystem;
using namespace cutkit;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  bool compress = false;
  bool quiet = false;
};

// Canonical manifest filename inside a directory, preferring the
// compressed variant when both exist.
std::string find_manifest(const fs::path& dir, const std::string& stem) {
  fs::path gz = dir / (stem + ".jsonl.gz");
  if (fs::exists(gz)) return gz.string();
  fs::path plain = dir / (stem + ".jsonl");
  if (fs::exists(plain)) return plain.string();
  return {};
}

CutSet load_cuts(const std::string& path) {
  if (fs::is_directory(path)) {
    std::string cuts = find_manifest(path, "cuts");
    if (!cuts.empty()) return CutSet::from_file(cuts);
    std::string recs = find_manifest(path, "recordings");
    std::string sups = find_manifest(path, "supervisions");
    if (recs.empty()) {
      throw ArgumentError("no cuts or recordings manifest in " + path);
    }
    auto recordings = read_all<Recording>(recs);
    std::vector<SupervisionSegment> supervisions;
    if (!sups.empty()) supervisions = read_all<SupervisionSegment>(sups);
    return CutSet::from_manifests(recordings, supervisions);
  }
  return CutSet::from_file(path);
}

int cmd_validate(const std::vector<std::string>& dirs, bool quiet) {
  bool any_errors = false;
  for (const auto& dir : dirs) {
    std::string recs = find_manifest(dir, "recordings");
    std::string sups = find_manifest(dir, "supervisions");
    std::string feats = find_manifest(dir, "features");
    if (recs.empty()) {
      std::cerr << dir << ": no recordings manifest found\n";
      any_errors = true;
      continue;
    }
    auto recordings = read_all<Recording>(recs);
    std::vector<SupervisionSegment> supervisions;
    if (!sups.empty()) supervisions = read_all<SupervisionSegment>(sups);
    std::optional<std::vector<FeaturesManifest>> features;
    if (!feats.empty()) features = read_all<FeaturesManifest>(feats);
    auto report =
        validate(recordings, supervisions, features ? &*features : nullptr);
    if (!quiet) std::cerr << dir << ": " << report.to_string();
    if (!report.ok()) any_errors = true;
  }
  return any_errors ? 1 : 0;
}

int cmd_kaldi_import(const std::string& in_dir, const std::string& out_dir,
                     const GlobalFlags& flags) {
  auto result = import_kaldi(in_dir);
  fs::create_directories(out_dir);
  std::string suffix = flags.compress ? ".jsonl.gz" : ".jsonl";
  write_manifests(result.recordings,
                  (fs::path(out_dir) / ("recordings" + suffix)).string());
  write_manifests(result.supervisions,
                  (fs::path(out_dir) / ("supervisions" + suffix)).string());
  std::cout << result.recordings.size() << " recordings, "
            << result.supervisions.size() << " supervisions\n";
  return 0;
}

int cmd_kaldi_export(const std::string& in_dir, const std::string& out_dir) {
  std::string recs = find_manifest(in_dir, "recordings");
  std::string sups = find_manifest(in_dir, "supervisions");
  if (recs.empty()) throw ArgumentError("no recordings manifest in " + in_dir);
  auto recordings = read_all<Recording>(recs);
  std::vector<SupervisionSegment> supervisions;
  if (!sups.empty()) supervisions = read_all<SupervisionSegment>(sups);
  export_kaldi(recordings, supervisions, out_dir);
  std::cout << recordings.size() << " recordings, " << supervisions.size()
            << " supervisions\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech corpus manifests, lazy cuts, and batch planning"};
  app.require_subcommand(1);
  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Seed for random operations");
  app.add_flag("--compress", flags.compress, "Gzip-compress written manifests");
  app.add_flag("--quiet", flags.quiet, "Suppress progress diagnostics");

  // validate
  std::vector<std::string> validate_dirs;
  auto* validate = app.add_subcommand("validate", "Validate manifest dirs");
  validate->add_option("dirs", validate_dirs, "Manifest directories")
      ->required();

  // kaldi import/export
  auto* kaldi = app.add_subcommand("kaldi", "Kaldi data-directory interop");
  kaldi->require_subcommand(1);
  std::string kaldi_in, kaldi_out;
  auto* kimport = kaldi->add_subcommand("import", "Kaldi dir -> manifests");
  kimport->add_option("in_dir", kaldi_in, "Kaldi data directory")->required();
  kimport->add_option("out_dir", kaldi_out, "Manifest output directory")
      ->required();
  auto* kexport = kaldi->add_subcommand("export", "Manifests -> Kaldi dir");
  kexport->add_option("in_dir", kaldi_in, "Manifest directory")->required();
  kexport->add_option("out_dir", kaldi_out, "Kaldi output directory")
      ->required();

  // cut
  auto* cut = app.add_subcommand("cut", "Derive cuts from manifests");
  std::string cut_mode, cut_in, cut_out;
  double cut_window = 0.0, cut_hop = 0.0;
  cut->add_option("mode", cut_mode, "trim-to-supervisions | windows")
      ->required()
      ->check(CLI::IsMember({"trim-to-supervisions", "windows"}));
  cut->add_option("in", cut_in, "Input manifest dir or cuts file")->required();
  cut->add_option("out", cut_out, "Output cuts.jsonl[.gz]")->required();
  cut->add_option("--window", cut_window, "Window length in seconds");
  cut->add_option("--hop", cut_hop, "Hop in seconds (default: window)");

  // describe
  auto* describe = app.add_subcommand("describe", "Print cut-set statistics");
  std::string describe_in;
  bool describe_speakers = false;
  describe->add_option("in", describe_in, "Cuts file or manifest dir")
      ->required();
  describe->add_flag("--per-speaker", describe_speakers,
                     "Include per-speaker durations");

  // sample-simulate
  auto* simulate =
      app.add_subcommand("sample-simulate", "Write a batch plan as JSONL");
  std::string sim_in, sim_out;
  double sim_max_duration = 0.0;
  std::size_t sim_max_cuts = 0, sim_buckets = 0, sim_world = 1, sim_rank = 0;
  bool sim_drop_last = false, sim_shuffle = false;
  simulate->add_option("in", sim_in, "Cuts file or manifest dir")->required();
  simulate->add_option("out", sim_out, "Batch-plan JSONL path")->required();
  simulate->add_option("--max-duration", sim_max_duration,
                       "Batch duration cap in seconds");
  simulate->add_option("--max-cuts", sim_max_cuts, "Batch size cap");
  simulate->add_option("--buckets", sim_buckets, "Number of duration buckets");
  simulate->add_option("--world-size", sim_world, "Number of ranks");
  simulate->add_option("--rank", sim_rank, "This rank");
  simulate->add_flag("--drop-last", sim_drop_last, "Drop the final partial batch");
  simulate->add_flag("--shuffle", sim_shuffle, "Shuffle with --seed first");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string synth_out;
  std::size_t synth_n = 10;
  synth->add_option("out_dir", synth_out, "Output directory")->required();
  synth->add_option("--num-recordings", synth_n, "Number of recordings");

  // combine
  auto* combine = app.add_subcommand("combine", "Concatenate cut sets");
  std::vector<std::string> combine_in;
  std::string combine_out;
  combine->add_option("out", combine_out, "Output cuts file")->required();
  combine->add_option("in", combine_in, "Input cuts files")->required();

  // subset
  auto* subset = app.add_subcommand("subset", "Take a prefix/suffix subset");
  std::string subset_in, subset_out;
  std::size_t subset_first = 0, subset_last = 0;
  subset->add_option("in", subset_in, "Input cuts file")->required();
  subset->add_option("out", subset_out, "Output cuts file")->required();
  subset->add_option("--first", subset_first, "Keep the first N cuts");
  subset->add_option("--last", subset_last, "Keep the last N cuts");

  // split
  auto* split = app.add_subcommand("split", "Split into equal parts");
  std::string split_in, split_out;
  std::size_t split_parts = 2;
  bool split_shuffle = false;
  split->add_option("in", split_in, "Input cuts file")->required();
  split->add_option("out_prefix", split_out, "Output prefix (.N.jsonl[.gz])")
      ->required();
  split->add_option("--parts", split_parts, "Number of parts");
  split->add_flag("--shuffle", split_shuffle, "Shuffle with --seed first");

  // shuffle
  auto* shuffle = app.add_subcommand("shuffle", "Shuffle a cut set");
  std::string shuffle_in, shuffle_out;
  shuffle->add_option("in", shuffle_in, "Input cuts file")->required();
  shuffle->add_option("out", shuffle_out, "Output cuts file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(validate_dirs, flags.quiet);

    if (*kimport) return cmd_kaldi_import(kaldi_in, kaldi_out, flags);
    if (*kexport) return cmd_kaldi_export(kaldi_in, kaldi_out);

    if (*cut) {
      CutSet cuts = load_cuts(cut_in);
      CutSet result;
      if (cut_mode == "trim-to-supervisions") {
        result = cuts.trim_to_supervisions();
      } else {
        if (cut_window <= 0) {
          std::cerr << "windows mode requires --window > 0\n";
          return 1;
        }
        double hop = cut_hop > 0 ? cut_hop : cut_window;
        if (hop > cut_window) {
          std::cerr << "--hop must not exceed --window\n";
          return 1;
        }
        result = cuts.cut_into_windows(cut_window, hop);
      }
      std::size_t n = result.to_file(
          cut_out, flags.compress ? std::optional<bool>(true) : std::nullopt);
      std::cout << n << " cuts\n";
      return 0;
    }

    if (*describe) {
      auto stats = load_cuts(describe_in).describe(describe_speakers);
      std::cout << stats.to_string();
      return 0;
    }

    if (*simulate) {
      CutSet cuts = load_cuts(sim_in);
      SamplerConstraints c;
      if (sim_max_duration > 0) c.max_duration = sim_max_duration;
      if (sim_max_cuts > 0) c.max_cuts = sim_max_cuts;
      c.drop_last = sim_drop_last;
      if (sim_shuffle) c.shuffle_seed = flags.seed;
      c.world_size = sim_world;
      c.rank = sim_rank;
      std::unique_ptr<BatchStream> stream;
      if (sim_buckets > 1) {
        stream = bucketing_sample(cuts, estimate_buckets(cuts, sim_buckets), c);
      } else {
        stream = dynamic_sample(cuts, c);
      }
      auto batches = stream->collect();
      LineSink sink(sim_out, flags.compress || path_looks_gzip(sim_out));
      for (const auto& batch : batches) {
        nlohmann::json j;
        j["batch_index"] = batch.index;
        j["cut_ids"] = batch.cut_ids();
        j["total_duration"] = batch.total_duration();
        j["oversized"] = batch.oversized;
        sink.write_line(dump_canonical(j));
      }
      sink.close();
      std::cout << batches.size() << " batches, padding waste "
                << padding_waste(batches) << " s\n";
      return 0;
    }

    if (*synth) {
      SynthSpec spec;
      spec.num_recordings = synth_n;
      spec.seed = flags.seed;
      spec.out_dir = synth_out;
      spec.compress = flags.compress;
      auto result = generate_synthetic_corpus(spec);
      std::cout << result.recordings.size() << " recordings, "
                << result.supervisions.size() << " supervisions\n";
      return 0;
    }

    if (*combine) {
      std::vector<CutSet> sets;
      for (const auto& path : combine_in) sets.push_back(load_cuts(path));
      std::size_t n = CutSet::combine(std::move(sets))
                          .to_file(combine_out,
                                   flags.compress ? std::optional<bool>(true)
                                                  : std::nullopt);
      std::cout << n << " cuts\n";
      return 0;
    }

    if (*subset) {
      if ((subset_first == 0) == (subset_last == 0)) {
        std::cerr << "exactly one of --first/--last is required\n";
        return 1;
      }
      CutSet cuts = load_cuts(subset_in);
      CutSet result = subset_first > 0 ? cuts.subset_first(subset_first)
                                       : cuts.subset_last(subset_last);
      std::size_t n = result.to_file(
          subset_out,
          flags.compress ? std::optional<bool>(true) : std::nullopt);
      std::cout << n << " cuts\n";
      return 0;
    }

    if (*split) {
      CutSet cuts = load_cuts(split_in);
      auto parts = cuts.split(
          split_parts, split_shuffle ? std::optional<std::uint64_t>(flags.seed)
                                     : std::nullopt);
      std::string suffix = flags.compress ? ".jsonl.gz" : ".jsonl";
      for (std::size_t i = 0; i < parts.size(); ++i) {
        std::size_t n = parts[i].to_file(
            split_out + "." + std::to_string(i) + suffix,
            flags.compress ? std::optional<bool>(true) : std::nullopt);
        std::cout << n << " cuts\n";
      }
      return 0;
    }

    if (*shuffle) {
      CutSet cuts = load_cuts(shuffle_in).materialize().shuffle(flags.seed);
      std::size_t n = cuts.to_file(
          shuffle_out,
          flags.compress ? std::optional<bool>(true) : std::nullopt);
      std::cout << n << " cuts\n";
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ExportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 2;  // unreachable: require_subcommand guarantees a branch
}
