#include <fftw3.h>
#include <unistd.h>

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "command.hpp"
#include "heislab/cli.hpp"
#include "heislab/error.hpp"
#include "heislab/parallel.hpp"

namespace heis::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value lines become --key=value arguments placed before the command
// line ones, so flags given explicitly win.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw InvalidArgument(path + ":" + std::to_string(lineno) + ": bad key");
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    else continue;
    auto extra = config_arguments(path);
    std::vector<std::string> out{args[0]};
    out.insert(out.end(), extra.begin(), extra.end());
    out.insert(out.end(), args.begin() + 1, args.end());
    return out;
  }
  return args;
}

Json versions() {
  return {{"heislab", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"fftw", std::string(fftw_version)},
          {"cli11", CLI11_VERSION},
          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

void write_atomic(const std::string& path, const std::string& data) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("cannot open " + tmp + " for writing");
    f << data;
    f.flush();
    if (!f) {
      std::remove(tmp.c_str());
      throw ResourceError("write failed for " + tmp, static_cast<double>(data.size()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw InvalidArgument("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

int exit_code(Error::Kind k) {
  switch (k) {
    case Error::Kind::Validation:
    case Error::Kind::Overflow:
    case Error::Kind::OutOfRange:
    case Error::Kind::Coverage:
    case Error::Kind::Boundary: return 2;
    case Error::Kind::Resource:
    case Error::Kind::Convergence:
    case Error::Kind::Quadrature: return 3;
    case Error::Kind::Internal: return 1;
  }
  return 1;
}

std::vector<std::unique_ptr<Command>> all_commands() {
  std::vector<std::unique_ptr<Command>> all;
  for (auto* make : {&group_commands, &analysis_commands, &embedding_commands})
    for (auto& c : make()) all.push_back(std::move(c));
  return all;
}

}  // namespace

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidArgument(what + ": not a number: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  auto commands = all_commands();
  CLI::App app{"Heisenberg group numerical laboratory", "heislab"};
  app.require_subcommand(1);
  app.fallthrough(false);

  struct Common {
    std::string out, format = "json", config;
    unsigned threads = 0;
    std::uint64_t seed = 1;
  };
  std::vector<Common> common(commands.size());
  std::vector<Params> params;
  params.reserve(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto& c = *commands[i];
    CLI::App* sub = app.add_subcommand(c.name(), c.help());
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    auto& cm = common[i];
    cm.format = c.formats().front();
    sub->add_option("--out", cm.out, "output file (stdout when absent); written atomically");
    sub->add_option("--format", cm.format, "output format")->check(CLI::IsMember(c.formats()))->capture_default_str();
    sub->add_option("--threads", cm.threads, "worker threads (default: HEISLAB_THREADS or 1)");
    sub->add_option("--seed", cm.seed, "random seed")->capture_default_str();
    sub->add_option("--config", cm.config, "key=value file; command-line flags override it");
    params.emplace_back(sub);
    c.define(params.back());
  }

  std::vector<std::string> args;
  try {
    args = raw.empty() ? raw : expand_config(raw);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  std::size_t idx = 0;
  while (idx < commands.size() && !app.got_subcommand(commands[idx]->name())) ++idx;
  if (idx == commands.size()) {
    err << app.help();
    return 2;
  }
  Command& cmd = *commands[idx];
  const Common& cm = common[idx];
  if (cm.threads > 0) parallel::set_threads(cm.threads);

  Context ctx;
  ctx.seed = cm.seed;
  ctx.format = cm.format;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cmd.run(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Json config = params[idx].echo();
  config["format"] = cm.format;
  std::string primary;
  if (cm.format == "json") {
    Json doc{{"command", cmd.name()}, {"config", config}, {"seed", cm.seed}, {"versions", versions()},
             {"provenance", ctx.provenance}, {"result", ctx.result}};
    primary = doc.dump(2) + "\n";
  } else {
    primary = ctx.body;
  }
  // Wall time and thread count live outside the primary output so that the
  // latter is identical for every thread count.
  Json run_info{{"command", cmd.name()},     {"config", config},
                {"seed", cm.seed},           {"versions", versions()},
                {"provenance", ctx.provenance}, {"threads", parallel::threads()},
                {"wall_time_s", wall}};
  try {
    if (cm.out.empty()) {
      out << primary;
      err << "wall_time_s " << wall << '\n';
    } else {
      write_atomic(cm.out, primary);
      write_atomic(cm.out + ".run.json", run_info.dump(2) + "\n");
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  }
  return 0;
}

}  // namespace heis::cli
