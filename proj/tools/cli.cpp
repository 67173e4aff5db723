#include "cli.hpp"

#include <leinert/leinert.hpp>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace leinert::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class NotConverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string group = "F2xF2";
  unsigned max_length = 12;
  std::uint64_t samples = 100000;
  std::optional<std::uint64_t> seed;
  unsigned s = 2;
  unsigned s_max = 0;
  double a = 0.25;
  std::string d_bound = "zero";
  int N = 75;
  unsigned trials = 4;
  double tol = 1e-6;
  unsigned max_iters = 5000;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
  double budget = kDefaultBudget;
  std::string alpha0 = "0";
  unsigned n_max = 5;
  std::string model = "valid";
  unsigned pass_cap = 0;
};

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

/// Files written by a subcommand, kept for the manifest.
class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  bool enabled() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& content) {
    if (!enabled()) return;
    fs::create_directories(dir_);
    fs::path p = fs::path(dir_) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
    digests_.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
  }

  void manifest(const std::string& subcommand, const json& config, std::optional<std::uint64_t> seed,
                double seconds) {
    if (!enabled()) return;
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["version"] = LEINERT_VERSION;
    m["duration_seconds"] = seconds;
    m["outputs"] = digests_;
    std::ofstream f(fs::path(dir_) / "manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
  }

 private:
  std::string dir_;
  json digests_ = json::array();
};

json config_json(const std::string& sub, const Options& o) {
  json c;
  c["subcommand"] = sub;
  c["group"] = o.group;
  c["max_length"] = o.max_length;
  c["samples"] = o.samples;
  c["s"] = o.s;
  c["s_max"] = o.s_max;
  c["a"] = o.a;
  c["d_bound"] = o.d_bound;
  c["N"] = o.N;
  c["trials"] = o.trials;
  c["tol"] = o.tol;
  c["max_iters"] = o.max_iters;
  c["threads"] = o.threads;
  c["format"] = o.format;
  c["budget"] = o.budget;
  c["alpha0"] = o.alpha0;
  c["n_max"] = o.n_max;
  c["model"] = o.model;
  c["pass_cap"] = o.pass_cap;
  return c;
}

std::uint64_t resolve_seed(Options& o, std::ostream& err) {
  if (!o.seed) {
    std::random_device rd;
    o.seed = (std::uint64_t{rd()} << 32) ^ rd();
    err << "seed: " << *o.seed << '\n';
  }
  return *o.seed;
}

// ---- census ----

std::string cmd_census(const Options& o, Outputs& files) {
  auto sig = GroupSignature::parse(o.group);
  auto census = run_census(sig, o.max_length, {o.budget, o.threads});
  std::string csv = census_csv(census);
  json j;
  j["signature"] = sig.to_string();
  j["entries"] = json::array();
  for (const auto& [len, e] : census.entries)
    j["entries"].push_back({{"length", len},
                            {"total_valid", e.total_valid.str()},
                            {"bad", e.bad.str()},
                            {"kernels", e.kernels.str()},
                            {"frequency", e.frequency()}});
  if (sig.factor_count() == 2) {
    json cmp;
    BigInt b8 = closed_form_b8(sig.rank(0), sig.rank(1));
    cmp["formula_b8"] = b8.str();
    if (census.entries.count(8)) cmp["enumerated_b8"] = census.entries.at(8).bad.str();
    if (sig.total_generators() >= 2) cmp["formula_b12"] = closed_form_b12(b8, sig.total_generators()).str();
    if (census.entries.count(12)) cmp["enumerated_b12"] = census.entries.at(12).bad.str();
    j["comparisons"] = cmp;
  }
  try {
    auto g = growth_rate(census);
    j["growth"] = {{"rate", g.rate}, {"residual", g.residual}};
  } catch (const InsufficientData&) {
    j["growth"] = nullptr;
  }
  files.write("census.csv", csv);
  files.write("census.json", j.dump(2) + "\n");
  return o.format == "json" ? j.dump(2) + "\n" : csv;
}

// ---- sample ----

std::string cmd_sample(Options& o, Outputs& files, std::ostream& err) {
  auto sig = GroupSignature::parse(o.group);
  std::uint64_t seed = resolve_seed(o, err);
  if (o.samples == 0) throw std::invalid_argument("--samples must be >= 1");
  StringModel model;
  if (o.model == "valid") {
    model = StringModel::ValidStrings;
  } else if (o.model == "reduced") {
    model = StringModel::ReducedStrings;
  } else {
    throw std::invalid_argument("--model must be valid or reduced");
  }
  std::string csv = sample_csv_header();
  json j;
  j["config"] = {{"group", sig.to_string()}, {"samples", o.samples}, {"seed", seed}, {"model", o.model}};
  j["rows"] = json::array();
  std::vector<std::pair<unsigned, double>> pts;
  for (unsigned len = 2; len <= o.max_length; len += 2) {
    SampleConfig cfg;
    cfg.signature = sig;
    cfg.length = len;
    cfg.samples = o.samples;
    cfg.seed = derive_stream(seed, len);
    cfg.model = model;
    cfg.threads = o.threads;
    if (o.pass_cap) cfg.reduce_pass_cap = o.pass_cap;
    auto rep = estimate_bad_frequency(cfg);
    csv += sample_csv_row(rep);
    pts.emplace_back(len / 2, rep.frequency);
    j["rows"].push_back({{"length", len},
                         {"samples", o.samples},
                         {"bad", rep.bad_count},
                         {"freq", rep.frequency},
                         {"wilson_lo", rep.wilson_lo},
                         {"wilson_hi", rep.wilson_hi},
                         {"parity_rejected", rep.tallies.parity_rejected},
                         {"adjacent_rejected", rep.tallies.adjacent_rejected},
                         {"reduce_rejected", rep.tallies.reduce_rejected}});
  }
  try {
    auto g = fit_growth(pts);
    j["decay"] = {{"rate", g.rate}, {"residual", g.residual}};
  } catch (const InsufficientData&) {
    j["decay"] = nullptr;
  }
  files.write("sample.csv", csv);
  files.write("sample.json", j.dump(2) + "\n");
  return o.format == "json" ? j.dump(2) + "\n" : csv;
}

// ---- verify-series ----

json rational_array(const std::vector<Rational>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

std::string cmd_verify_series(const Options& o, Outputs& files) {
  auto sig = GroupSignature::parse(o.group);
  auto w = WalkWeights::uniform(sig, parse_rational(o.alpha0));
  if (!w.is_probability()) throw std::invalid_argument("--alpha0 must lie in [0, 1]");
  auto t = dp_tables(sig, w, o.n_max);
  auto rep = verify_recurrences(t, w);
  auto gf = generating_functions(t);
  std::ostringstream csv;
  csv << "identity,n,residual\n";
  for (const auto* r : rep.all())
    for (std::size_t n = 0; n < r->per_n.size(); ++n) csv << r->name << ',' << n + 1 << ',' << to_string(r->per_n[n]) << '\n';
  json j;
  j["signature"] = sig.to_string();
  j["alpha0"] = to_string(w.alpha0);
  j["n_max"] = o.n_max;
  j["tables"] = {{"mu", rational_array(t.mu)}, {"p", rational_array(t.p)}, {"f0", rational_array(t.f0)},
                 {"f_first", rational_array(t.f_first)}};
  for (unsigned g = 0; g < sig.total_generators(); ++g) {
    auto [fi, gi] = sig.base_at(g);
    std::string key = "f" + std::to_string(fi + 1) + "g" + std::to_string(gi + 1);
    j["tables"]["generators"][key] = {{"f", rational_array(t.f[g])},
                                      {"a", rational_array(t.a[g])},
                                      {"b", rational_array(t.b[g])},
                                      {"d", rational_array(t.d[g])}};
  }
  for (const auto* r : rep.all())
    j["residuals"][r->name] = {{"max_abs", to_string(r->max_abs)},
                               {"first_nonzero", r->first_nonzero ? json(*r->first_nonzero) : json(nullptr)}};
  auto zero = [](const RSeries& s) { return GeneratingFunctions::is_zero(s); };
  bool split_ok = true;
  for (const auto& s : gf.split_residual) split_ok = split_ok && zero(s);
  j["series_relations"] = {{"G=1/(1-F-F0)", zero(gf.renewal_residual)},
                           {"F=alpha^2 z^2 A + D", split_ok},
                           {"G+H=1/(1-alpha0 z-F_first)", zero(gf.whole_walk_residual)},
                           {"H=alpha0 z G/(1-F)", zero(gf.h_residual)},
                           {"F0=alpha0^2 z^2/(1-F)", zero(gf.f0_residual)}};
  j["series"] = {{"G", rational_array(gf.G.coefficients())}, {"H", rational_array(gf.H.coefficients())},
                 {"F", rational_array(gf.F.coefficients())}, {"F0", rational_array(gf.F0.coefficients())}};
  files.write("verify_series.csv", csv.str());
  files.write("verify_series.json", j.dump(2) + "\n");
  return o.format == "json" ? j.dump(2) + "\n" : csv.str();
}

// ---- radius / bounds ----

std::string cmd_radius(const Options& o, Outputs& files) {
  RadiusProblem pb{o.s, o.a, DBound::parse(o.d_bound)};
  pb.check();
  double z = radius_from_discriminant(pb);
  std::ostringstream csv;
  csv << "s,a,d_bound,z,z_inverse\n"
      << o.s << ',' << format_double(o.a) << ',' << pb.d_bound.to_string() << ',' << format_double(z) << ','
      << format_double(1 / z) << '\n';
  json j = {{"s", o.s}, {"a", o.a}, {"d_bound", pb.d_bound.to_string()}, {"z", z}, {"z_inverse", 1 / z},
            {"scaled_residual", pb.d_bound.kind == DBound::Kind::Zero ? 0.0 : discriminant_scaled_residual(z, pb)}};
  files.write("radius.csv", csv.str());
  files.write("radius.json", j.dump(2) + "\n");
  return o.format == "json" ? j.dump(2) + "\n" : csv.str();
}

std::string cmd_bounds(const Options& o, Outputs& files) {
  DBound db = DBound::parse(o.d_bound);
  unsigned s_max = std::max(o.s, o.s_max);
  double a = o.a;
  auto rows = curve_points(o.s, s_max, [a](unsigned) { return a; }, db);
  std::string csv = curve_csv(rows);
  json j = json::array();
  for (unsigned s = o.s; s <= s_max; ++s) {
    auto rep = bound_report({s, a, db});
    j.push_back({{"s", s},
                 {"a", a},
                 {"d_bound", db.to_string()},
                 {"r_lower", rep.r_lower},
                 {"r_upper", rep.r_upper},
                 {"gap", rep.gap},
                 {"relative_gap", rep.relative_gap},
                 {"theta", rep.theta},
                 {"z_free", rep.z_free}});
  }
  files.write("bounds.csv", csv);
  files.write("bounds.json", j.dump(2) + "\n");
  return o.format == "json" ? j.dump(2) + "\n" : csv;
}

// ---- spectral ----

std::string cmd_spectral(Options& o, Outputs& files, std::ostream& err) {
  SpectralConfig cfg;
  cfg.s = o.s;
  cfg.N = o.N;
  cfg.a = o.a;
  cfg.trials = o.trials;
  cfg.seed = resolve_seed(o, err);
  cfg.power_tol = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.threads = o.threads;
  auto est = estimate_z_inverse(cfg);
  std::string csv = spectral_csv(est);
  json j = {{"s", cfg.s},         {"N", cfg.N},           {"a", cfg.a},
            {"trials", cfg.trials}, {"seed", cfg.seed},    {"mean", est.mean},
            {"std", est.stddev},  {"converged", est.all_converged}};
  files.write("spectral.csv", csv);
  files.write("spectral.json", j.dump(2) + "\n");
  if (!est.all_converged) {
    err << "power iteration did not converge in " << cfg.max_iters << " iterations\n";
    throw NotConverged("power iteration did not converge");
  }
  return o.format == "json" ? j.dump(2) + "\n" : csv;
}

// ---- figure ----

std::string cmd_figure(Options& o, Outputs& files, std::ostream& err) {
  if (!files.enabled()) throw std::invalid_argument("figure needs --out");
  std::uint64_t seed = resolve_seed(o, err);
  unsigned s_max = std::max(2u, o.s_max ? o.s_max : 5u);
  DBound db = DBound::parse(o.d_bound == "zero" ? "R=10" : o.d_bound);
  std::ostringstream fb;
  fb << "# s  z_free(a=1)  z_lower(a=1)  z_upper(a=1)  z_free(a=1/2s)  z_lower(a=1/2s)  z_upper(a=1/2s)  "
     << "d_bound=" << db.to_string() << "\n";
  // The D bound is given in units where a = 1/(2s); for a = 1 the same
  // bound is rescaled to R/(2s) so both columns describe one walk.
  for (unsigned s = 1; s <= s_max; ++s) {
    RadiusProblem unit{s, 1.0, db.kind == DBound::Kind::RadiusForm ? DBound::radius(db.value / (2 * s)) : db};
    RadiusProblem prob{s, 1.0 / (2 * s), db};
    auto ru = bound_report(unit);
    auto rp = bound_report(prob);
    fb << s << ' ' << format_double(unit.z_free()) << ' ' << format_double(ru.r_lower) << ' '
       << format_double(ru.r_upper) << ' ' << format_double(prob.z_free()) << ' ' << format_double(rp.r_lower) << ' '
       << format_double(rp.r_upper) << '\n';
  }
  std::ostringstream fs_;
  fs_ << "# s  predicted_z_inverse=2sqrt(2s-1)  mean_norm  std  trials  N  a=1\n";
  for (unsigned s = 1; s <= s_max; ++s) {
    SpectralConfig cfg;
    cfg.s = s;
    cfg.N = o.N;
    cfg.a = 1;
    cfg.trials = o.trials;
    cfg.seed = derive_stream(seed, s);
    cfg.power_tol = o.tol;
    cfg.max_iters = o.max_iters;
    cfg.threads = o.threads;
    auto est = estimate_z_inverse(cfg);
    fs_ << s << ' ' << format_double(2 * std::sqrt(2.0 * s - 1)) << ' ' << format_double(est.mean) << ' '
        << format_double(est.stddev) << ' ' << cfg.trials << ' ' << cfg.N << '\n';
  }
  std::ostringstream fd;
  fd << "# n  exact_frequency  sampled_frequency  wilson_lo  wilson_hi  group=" << o.group << '\n';
  auto sig = GroupSignature::parse(o.group);
  auto census = run_census(sig, o.max_length, {o.budget, o.threads});
  for (const auto& [len, e] : census.entries) {
    SampleConfig cfg;
    cfg.signature = sig;
    cfg.length = len;
    cfg.samples = o.samples;
    cfg.seed = derive_stream(seed, 1000 + len);
    cfg.threads = o.threads;
    auto rep = estimate_bad_frequency(cfg);
    fd << len / 2 << ' ' << format_double(e.frequency()) << ' ' << format_double(rep.frequency) << ' '
       << format_double(rep.wilson_lo) << ' ' << format_double(rep.wilson_hi) << '\n';
  }
  files.write("figure_bounds.dat", fb.str());
  files.write("figure_spectral.dat", fs_.str());
  files.write("figure_decay.dat", fd.str());
  return "wrote figure_bounds.dat figure_spectral.dat figure_decay.dat\n";
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bad-string census, walk series, radius bounds and spectral experiments", "leinert"};
  app.set_version_flag("--version", LEINERT_VERSION);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "worker threads (0 = logical cores)");
    sub->add_option("--out", o.out, "output directory for data files and manifest.json");
    sub->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; },
                                            "RNG seed (printed when generated)");
  };

  auto* census = app.add_subcommand("census", "exact count of bad valid strings");
  census->add_option("--group", o.group, "signature such as F2xF2 or Z3")->required();
  census->add_option("--max-length", o.max_length, "largest even length");
  census->add_option("--budget", o.budget, "largest search space s(s-1)^(L-1) allowed");
  common(census);

  auto* sample = app.add_subcommand("sample", "Monte Carlo bad-string frequency");
  sample->add_option("--group", o.group)->required();
  sample->add_option("--max-length", o.max_length);
  sample->add_option("--samples", o.samples);
  sample->add_option("--model", o.model, "valid or reduced strings");
  sample->add_option("--pass-cap", o.pass_cap, "cap on reduction passes (0 = none)");
  seed_opt(sample);
  common(sample);

  auto* series = app.add_subcommand("verify-series", "exact walk tables and identity residuals");
  series->add_option("--group", o.group);
  series->add_option("--n-max", o.n_max);
  series->add_option("--alpha0", o.alpha0, "identity-step weight, e.g. 1/9");
  common(series);

  auto* radius = app.add_subcommand("radius", "radius from the discriminant");
  radius->add_option("--s", o.s);
  radius->add_option("--a", o.a);
  radius->add_option("--d-bound", o.d_bound, "zero | c=<float> | R=<float>");
  common(radius);

  auto* bounds = app.add_subcommand("bounds", "lower/upper radius table");
  bounds->add_option("--s", o.s);
  bounds->add_option("--s-max", o.s_max);
  bounds->add_option("--a", o.a);
  bounds->add_option("--d-bound", o.d_bound);
  common(bounds);

  auto* spectral = app.add_subcommand("spectral", "norm of a sum(U_i x I + I x V_i)");
  spectral->add_option("--s", o.s);
  spectral->add_option("--N", o.N);
  spectral->add_option("--a", o.a);
  spectral->add_option("--trials", o.trials);
  spectral->add_option("--tol", o.tol);
  spectral->add_option("--max-iters", o.max_iters);
  seed_opt(spectral);
  common(spectral);

  auto* figure = app.add_subcommand("figure", "plot-ready data tables");
  figure->add_option("--group", o.group);
  figure->add_option("--max-length", o.max_length);
  figure->add_option("--samples", o.samples);
  figure->add_option("--s-max", o.s_max);
  figure->add_option("--N", o.N);
  figure->add_option("--trials", o.trials);
  figure->add_option("--tol", o.tol);
  figure->add_option("--max-iters", o.max_iters);
  figure->add_option("--d-bound", o.d_bound);
  seed_opt(figure);
  common(figure);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string name = sub->get_name();
  Outputs files(o.out);
  auto start = std::chrono::steady_clock::now();
  try {
    std::string text;
    if (name == "census") {
      text = cmd_census(o, files);
    } else if (name == "sample") {
      text = cmd_sample(o, files, err);
    } else if (name == "verify-series") {
      text = cmd_verify_series(o, files);
    } else if (name == "radius") {
      text = cmd_radius(o, files);
    } else if (name == "bounds") {
      text = cmd_bounds(o, files);
    } else if (name == "spectral") {
      text = cmd_spectral(o, files, err);
    } else {
      text = cmd_figure(o, files, err);
    }
    out << text;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    files.manifest(name, config_json(name, o), o.seed, secs);
    return kOk;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const NoAdmissibleRoot& e) {
    err << "error: " << e.what() << '\n';
    return kBudget;
  } catch (const NotConverged& e) {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    files.manifest(name, config_json(name, o), o.seed, secs);
    return kBudget;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace leinert::cli
