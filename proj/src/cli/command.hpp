#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace heis::cli {

using Json = nlohmann::ordered_json;

/// Registers options on a subcommand and remembers how to echo them.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    echo_.emplace_back(name, [&var] { return Json(var); });
    return app_->add_option("--" + name, var, help)->capture_default_str();
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    echo_.emplace_back(name, [&var] { return Json(var); });
    return app_->add_flag("--" + name, var, help);
  }
  Json echo() const {
    Json j = Json::object();
    for (const auto& [k, f] : echo_) j[k] = f();
    return j;
  }
  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<Json()>>> echo_;
};

struct Context {
  std::uint64_t seed = 1;
  std::string format = "json";
  Json result = Json::object();
  Json provenance = Json::array();
  std::string body;  // csv or text payload

  void constant(const std::string& name, double value, const std::string& source, const std::string& note = "") {
    Json c{{"name", name}, {"value", value}, {"source", source}};
    if (!note.empty()) c["note"] = note;
    provenance.push_back(std::move(c));
  }
};

class Command {
 public:
  virtual ~Command() = default;
  virtual std::string name() const = 0;
  virtual std::string help() const = 0;
  virtual std::vector<std::string> formats() const { return {"json"}; }
  virtual void define(Params& p) = 0;
  virtual void run(Context& ctx) = 0;
};

std::vector<std::unique_ptr<Command>> group_commands();
std::vector<std::unique_ptr<Command>> analysis_commands();
std::vector<std::unique_ptr<Command>> embedding_commands();

/// Comma-separated numbers; empty string gives an empty list.
std::vector<double> parse_list(const std::string& s, const std::string& what);

}  // namespace heis::cli
