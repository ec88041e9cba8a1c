#include "strandkit/codec.hpp"
#include "strandkit/density.hpp"
#include "strandkit/diffusion.hpp"
#include "strandkit/groom.hpp"
#include "strandkit/io.hpp"
#include "strandkit/metrics.hpp"
#include "strandkit/scalp.hpp"
#include "strandkit/texture.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace strandkit;

namespace {

int default_jobs() {
  if (const char* env = std::getenv("STRANDKIT_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

RandomSpec load_spec(const std::string& path) {
  if (path.empty()) return RandomSpec::defaults();
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path + "' for reading");
  return read_spec(in);
}

void fix_strand_count(RandomSpec& spec, int strands) {
  if (strands <= 0) return;
  for (auto& r : spec.ranges)
    if (r.name == "strand_count") {
      r = {"strand_count", Distribution::fixed, double(strands), double(strands)};
      return;
    }
  spec.ranges.push_back({"strand_count", Distribution::fixed, double(strands), double(strands)});
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out << text), ErrorCode::io, "error writing '" + path + "'");
}

std::string params_text(const GroomParams& p) {
  std::ostringstream s;
  write_params(s, p);
  return s.str();
}

CodecModel load_codec(const std::string& path) {
  Bundle b = read_bundle(path);
  require(b.codec.has_value(), ErrorCode::parse, path + ": no CODC chunk");
  return *b.codec;
}

Hairstyle load_hair(const std::string& path) {
  std::size_t resampled = 0;
  Hairstyle h = to_hairstyle(read_hair(path), kStrandPoints, &resampled);
  if (resampled) std::cerr << "note: resampled " << resampled << " strands of " << path << " to " << kStrandPoints << " points\n";
  return h;
}

struct SampleFiles {
  std::string hair, params, density, texture;
};

// One dataset sample; all outputs are a pure function of the seed.
SampleFiles write_sample(const fs::path& dir, const std::string& stem, const GuideSet& guides, const RandomSpec& spec,
                         std::uint64_t seed, const CodecModel* codec) {
  const ScalpSurface surface;
  const GroomSample s = generate_sample(guides, spec, seed, surface);
  SampleFiles f{stem + ".hair", stem + ".params.txt", stem + ".density.dlck", ""};
  write_hair((dir / f.hair).string(), to_hair_file(s.hair));
  write_text((dir / f.params).string(), params_text(s.params));
  Bundle d;
  d.density = s.density;
  d.params = s.params;
  write_bundle((dir / f.density).string(), d);
  if (codec) {
    BakeOptions opt;
    opt.seed = seed;
    const BakeResult baked = bake(s.hair, *codec, surface, opt);
    Bundle t;
    t.texture = baked.texture;
    t.density = baked.density;
    f.texture = stem + ".texture.dlck";
    write_bundle((dir / f.texture).string(), t);
  }
  return f;
}

// key value lines, '#' comments.
std::map<std::string, double> read_config(const std::string& path) {
  std::map<std::string, double> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path + "' for reading");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string key;
    double value = 0;
    if (!(ls >> key)) continue;
    require(static_cast<bool>(ls >> value), ErrorCode::parse, path + ":" + std::to_string(lineno) + ": expected 'key value'");
    out[key] = value;
  }
  return out;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"strandkit: procedural hair datasets, scalp textures, diffusion numerics and strand metrics"};
  app.require_subcommand(1);

  // groom
  auto* groom_cmd = app.add_subcommand("groom", "Groom one hairstyle from a seed");
  std::uint64_t groom_seed = 0;
  int groom_strands = 0;
  std::string groom_out = "groom", groom_style = "medium", groom_spec;
  groom_cmd->add_option("--seed", groom_seed, "Sample seed")->required();
  groom_cmd->add_option("--strands", groom_strands, "Override strand count");
  groom_cmd->add_option("--style", groom_style, "Guide style")->capture_default_str();
  groom_cmd->add_option("--spec", groom_spec, "Parameter distribution file");
  groom_cmd->add_option("--out", groom_out, "Output prefix (.hair, .params.txt, .density.dlck)")->capture_default_str();
  groom_cmd->callback([&] {
    RandomSpec spec = load_spec(groom_spec);
    fix_strand_count(spec, groom_strands);
    const fs::path prefix(groom_out);
    const fs::path dir = prefix.has_parent_path() ? prefix.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const GuideSet guides = make_guides(ScalpSurface{}, guide_style(groom_style));
    const SampleFiles f = write_sample(dir, prefix.filename().string(), guides, spec, groom_seed, nullptr);
    std::cout << (dir / f.hair).string() << '\n';
  });

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Groom N seeds in parallel and write a manifest");
  int ds_count = 0, ds_jobs = default_jobs(), ds_strands = 0;
  std::uint64_t ds_seed = 0;
  std::string ds_out = "dataset", ds_style = "medium", ds_spec, ds_codec;
  dataset_cmd->add_option("--count", ds_count, "Number of samples")->required()->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--seed", ds_seed, "First seed; samples use seed, seed+1, ...");
  dataset_cmd->add_option("--jobs", ds_jobs, "Worker threads (default: $STRANDKIT_JOBS or core count)")->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--strands", ds_strands, "Override strand count");
  dataset_cmd->add_option("--style", ds_style, "Guide style")->capture_default_str();
  dataset_cmd->add_option("--spec", ds_spec, "Parameter distribution file");
  dataset_cmd->add_option("--codec", ds_codec, "Codec bundle; also bake scalp textures");
  dataset_cmd->add_option("--out", ds_out, "Output directory")->capture_default_str();
  dataset_cmd->callback([&] {
    RandomSpec spec = load_spec(ds_spec);
    fix_strand_count(spec, ds_strands);
    std::optional<CodecModel> codec;
    if (!ds_codec.empty()) codec = load_codec(ds_codec);
    fs::create_directories(ds_out);
    const GuideSet guides = make_guides(ScalpSurface{}, guide_style(ds_style));

    std::vector<ManifestRecord> records(static_cast<std::size_t>(ds_count));
    std::atomic<int> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
      for (int i = next++; i < ds_count; i = next++) {
        try {
          const std::uint64_t seed = ds_seed + static_cast<std::uint64_t>(i);
          const SampleFiles f = write_sample(ds_out, "sample_" + std::to_string(seed), guides, spec, seed, codec ? &*codec : nullptr);
          records[static_cast<std::size_t>(i)] = {seed, f.params, f.hair, f.texture, f.density};
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = ds_count;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min(ds_jobs, ds_count); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    write_manifest((fs::path(ds_out) / "manifest.csv").string(), records);
    std::cout << (fs::path(ds_out) / "manifest.csv").string() << '\n';
  });

  // fit-codec
  auto* fit_cmd = app.add_subcommand("fit-codec", "Fit the linear strand codec to hair files");
  std::vector<std::string> fit_inputs;
  std::string fit_out = "codec.dlck";
  std::size_t fit_max = 20000;
  std::uint64_t fit_seed = 0;
  fit_cmd->add_option("hair", fit_inputs, "Hair files")->required();
  fit_cmd->add_option("--max-strands", fit_max, "Subsample the corpus to at most this many strands")->capture_default_str();
  fit_cmd->add_option("--seed", fit_seed, "Subsampling seed");
  fit_cmd->add_option("--out", fit_out, "Output bundle")->capture_default_str();
  fit_cmd->callback([&] {
    std::vector<Strand> corpus;
    for (const auto& p : fit_inputs) {
      Hairstyle h = load_hair(p);
      for (auto& s : h.strands) corpus.push_back(std::move(s));
    }
    if (corpus.size() > fit_max) {
      Rng rng(fit_seed);
      std::shuffle(corpus.begin(), corpus.end(), rng);
      corpus.resize(fit_max);
    }
    Bundle b;
    b.codec = fit_codec(corpus, ScalpSurface{});
    write_bundle(fit_out, b);
    std::cout << "fitted on " << corpus.size() << " strands; leading scale " << b.codec->scales[0] << '\n';
  });

  // encode
  auto* enc_cmd = app.add_subcommand("encode", "Bake a hair file into a scalp texture and density map");
  std::string enc_hair, enc_codec, enc_out = "texture.dlck";
  std::uint64_t enc_seed = 0;
  bool enc_blur = false;
  enc_cmd->add_option("hair", enc_hair, "Hair file")->required();
  enc_cmd->add_option("--codec", enc_codec, "Codec bundle")->required();
  enc_cmd->add_option("--seed", enc_seed, "Collision tie-break seed");
  enc_cmd->add_flag("--blur-density", enc_blur, "3x3 box blur on the density map");
  enc_cmd->add_option("--out", enc_out, "Output bundle")->capture_default_str();
  enc_cmd->callback([&] {
    BakeOptions opt;
    opt.seed = enc_seed;
    opt.blur_density = enc_blur;
    const BakeResult r = bake(load_hair(enc_hair), load_codec(enc_codec), ScalpSurface{}, opt);
    Bundle b;
    b.texture = r.texture;
    b.density = r.density;
    write_bundle(enc_out, b);
    std::cout << r.texture.valid_count() << " occupied texels\n";
  });

  // interp
  auto* interp_cmd = app.add_subcommand("interp", "Fill empty scalp texels by push-pull");
  std::string interp_in, interp_out = "filled.dlck";
  interp_cmd->add_option("texture", interp_in, "Texture bundle")->required();
  interp_cmd->add_option("--out", interp_out, "Output bundle")->capture_default_str();
  interp_cmd->callback([&] {
    Bundle b = read_bundle(interp_in);
    require(b.texture.has_value(), ErrorCode::parse, interp_in + ": no SCLP chunk");
    b.texture = push_pull(*b.texture, make_scalp_mask(b.texture->resolution));
    write_bundle(interp_out, b);
  });

  // decode
  auto* dec_cmd = app.add_subcommand("decode", "Sample roots from density and decode strands");
  std::string dec_tex, dec_codec, dec_out = "decoded.hair";
  std::size_t dec_count = 100000, dec_batch = 10000;
  std::uint64_t dec_seed = 0;
  dec_cmd->add_option("texture", dec_tex, "Texture bundle with SCLP and DENS chunks")->required();
  dec_cmd->add_option("--codec", dec_codec, "Codec bundle")->required();
  dec_cmd->add_option("--count", dec_count, "Number of strands")->capture_default_str()->check(CLI::PositiveNumber);
  dec_cmd->add_option("--batch", dec_batch, "Strands per write batch")->capture_default_str()->check(CLI::PositiveNumber);
  dec_cmd->add_option("--seed", dec_seed, "Root sampling seed");
  dec_cmd->add_option("--out", dec_out, "Output hair file")->capture_default_str();
  dec_cmd->callback([&] {
    const Bundle b = read_bundle(dec_tex);
    require(b.texture && b.density, ErrorCode::parse, dec_tex + ": needs SCLP and DENS chunks");
    const CodecModel codec = load_codec(dec_codec);
    const ScalpSurface surface;
    Rng rng(dec_seed);
    const auto roots = sample_roots(*b.density, make_scalp_mask(b.texture->resolution), dec_count, rng);
    HairWriter writer(dec_out, static_cast<std::uint32_t>(dec_count), static_cast<std::uint32_t>(codec.points));
    for (std::size_t start = 0; start < roots.size(); start += dec_batch) {
      const std::vector<Vec2> part(roots.begin() + start, roots.begin() + std::min(roots.size(), start + dec_batch));
      writer.append(decode_roots(*b.texture, part, codec, surface));
    }
    writer.close();
  });

  // weights
  auto* w_cmd = app.add_subcommand("weights", "Per-channel loss weights of a codec as CSV");
  std::string w_codec, w_out;
  double w_eps = 0.8;
  w_cmd->add_option("codec", w_codec, "Codec bundle")->required();
  w_cmd->add_option("--epsilon", w_eps, "Perturbation size")->capture_default_str();
  w_cmd->add_option("--out", w_out, "CSV path (default stdout)");
  w_cmd->callback([&] {
    const ChannelWeights w = channel_weights(load_codec(w_codec), {}, w_eps);
    std::ofstream file;
    if (!w_out.empty()) {
      file.open(w_out, std::ios::trunc);
      require(static_cast<bool>(file), ErrorCode::io, "cannot open '" + w_out + "' for writing");
    }
    std::ostream& out = w_out.empty() ? std::cout : file;
    out.precision(17);
    out << "channel,weight\n";
    for (int i = 0; i < kLatentDim; ++i) out << i << ',' << w[i] << '\n';
  });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Point-wise precision/recall/F-score of two hair files");
  std::string eval_pred, eval_gt, eval_csv;
  double eval_spacing = 1.0;
  MatchOptions eval_opt;
  eval_cmd->add_option("prediction", eval_pred, "Predicted hair file")->required();
  eval_cmd->add_option("ground_truth", eval_gt, "Reference hair file")->required();
  eval_cmd->add_option("--spacing", eval_spacing, "Sample spacing in mm")->capture_default_str();
  eval_cmd->add_option("--csv", eval_csv, "Also write CSV here");
  eval_cmd->add_flag("--unsigned", eval_opt.unsigned_directions, "Ignore tangent sign");
  eval_cmd->add_flag("--one-to-one", eval_opt.one_to_one, "Greedy one-to-one matching");
  eval_cmd->callback([&] {
    const MetricsReport r = precision_recall_f(point_samples(load_hair(eval_pred), eval_spacing),
                                               point_samples(load_hair(eval_gt), eval_spacing),
                                               default_thresholds(), eval_opt);
    print_report(std::cout, r);
    if (!eval_csv.empty()) {
      std::ofstream out(eval_csv, std::ios::trunc);
      require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + eval_csv + "' for writing");
      write_report_csv(out, r);
    }
  });

  // diffuse-selftest
  auto* diff_cmd = app.add_subcommand("diffuse-selftest", "Sample a Gaussian with the closed-form denoiser and check moments");
  int diff_dim = 8, diff_samples = 10000;
  std::uint64_t diff_seed = 0;
  std::string diff_config, diff_loss_csv;
  diff_cmd->add_option("--dim", diff_dim, "Dimension")->capture_default_str()->check(CLI::PositiveNumber);
  diff_cmd->add_option("--samples", diff_samples, "Number of samples")->capture_default_str()->check(CLI::Range(2, 100000000));
  diff_cmd->add_option("--seed", diff_seed, "Seed");
  diff_cmd->add_option("--config", diff_config, "Schedule/CFG config (steps, sigma_min, sigma_max, rho, guidance_scale, drop_probability)");
  diff_cmd->add_option("--loss-csv", diff_loss_csv, "Write per-sigma loss diagnostics of the denoiser");
  int diff_status = 0;
  diff_cmd->callback([&] {
    auto cfg = read_config(diff_config);
    auto get = [&](const char* k, double d) { return cfg.count(k) ? cfg[k] : d; };
    const int steps = static_cast<int>(get("steps", 64));
    const auto schedule = sigma_schedule(steps, get("sigma_min", 0.002), get("sigma_max", 80.0), get("rho", 7.0));
    CfgConfig cfg_guidance{get("drop_probability", 0.1), get("guidance_scale", 1.0)};
    cfg_guidance.validate();

    Rng rng(diff_seed);
    Eigen::MatrixXd a(diff_dim, diff_dim);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.uniform(-1, 1);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    Eigen::VectorXd ev(diff_dim), mu(diff_dim);
    for (int i = 0; i < diff_dim; ++i) {
      ev[i] = rng.uniform(0.2, 2.0);
      mu[i] = rng.uniform(-1, 1);
    }
    const Eigen::MatrixXd cov = q * ev.asDiagonal() * q.transpose();
    const GaussianDenoiser net(mu, cov, diff_dim);

    Eigen::MatrixXd samples(diff_dim, diff_samples);
    for (int k = 0; k < diff_samples; ++k) samples.col(k) = heun_sample(net, schedule, diff_dim, 1, rng, cfg_guidance).matrix();
    const Eigen::VectorXd mean = samples.rowwise().mean();
    const Eigen::MatrixXd centered = samples.colwise() - mean;
    const Eigen::MatrixXd emp = centered * centered.transpose() / (diff_samples - 1);
    const double mean_err = (mean - mu).cwiseAbs().maxCoeff();
    const double cov_err = (emp - cov).norm() / cov.norm();
    const bool ok = mean_err < 0.05 && cov_err < 0.05;
    std::cout << "mean_max_abs_error " << mean_err << "\ncov_frobenius_rel_error " << cov_err << '\n'
              << (ok ? "PASS" : "FAIL") << '\n';

    if (!diff_loss_csv.empty()) {
      std::vector<LossSample> batch;
      std::normal_distribution<double> normal;
      const Eigen::MatrixXd lower = Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
      for (double s : schedule) {
        if (s == 0.0) continue;
        for (int k = 0; k < 16; ++k) {
          Eigen::VectorXd e(diff_dim), n(diff_dim);
          for (int i = 0; i < diff_dim; ++i) {
            e[i] = normal(rng);
            n[i] = s * normal(rng);
          }
          batch.push_back({Tensor(mu + lower * e), Tensor(n), s, std::nullopt});
        }
      }
      const WeightedLoss wl = weighted_loss(net, UncertaintyModel::constant(0.0, schedule[steps - 1], schedule[0]),
                                            Eigen::VectorXd::Ones(1), batch);
      std::ofstream out(diff_loss_csv, std::ios::trunc);
      require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + diff_loss_csv + "' for writing");
      write_loss_csv(out, wl.per_sigma);
    }
    diff_status = ok ? 0 : 1;
  });

  // export-ply
  auto* ply_cmd = app.add_subcommand("export-ply", "Write a hair file as PLY polylines");
  std::string ply_in, ply_out = "hair.ply";
  ply_cmd->add_option("hair", ply_in, "Hair file")->required();
  ply_cmd->add_option("--out", ply_out, "Output PLY")->capture_default_str();
  ply_cmd->callback([&] {
    const HairFile f = read_hair(ply_in);
    Hairstyle h;
    std::size_t offset = 0;
    for (auto c : f.point_counts) {
      Strand s(c, 3);
      for (std::uint32_t i = 0; i < c; ++i)
        for (int k = 0; k < 3; ++k) s(i, k) = f.points[3 * (offset + i) + k];
      offset += c;
      h.strands.push_back(std::move(s));
    }
    write_ply(ply_out, h);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: code=usage message=" << e.what() << '\n';
    return 2;
  }
  return diff_status;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: code=" << to_string(e.code()) << " message=" << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=" << e.what() << '\n';
  }
  return 1;
}
