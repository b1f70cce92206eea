// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the gauge-equivalence toolkit.  Everything goes
// through the public C interface, so this binary doubles as a smoke test of
// the shared library.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gauge_nlse.h"

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += char(c);
        }
    }
  }
  return out;
}

int report(gn_status st) {
  if (st == GN_OK) return 0;
  std::fprintf(stderr, "{\"error\": {\"code\": %d, \"message\": \"%s\"}}\n",
               int(st), json_escape(gn_last_error()).c_str());
  return int(st);
}

int fail_usage(const std::string& msg) {
  std::fprintf(stderr, "{\"error\": {\"code\": %d, \"message\": \"%s\"}}\n",
               int(GN_ERR_CONFIG), json_escape(msg).c_str());
  return int(GN_ERR_CONFIG);
}

bool read_file(const std::string& path, std::string* out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) return false;
  std::ostringstream ss;
  ss << f.rdbuf();
  *out = ss.str();
  return true;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string preset;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("-c,--config", args->config_path,
                  "JSON configuration file (\"-\" reads standard input)")
      ->required();
  cmd->add_option("-o,--out", args->out_dir,
                  "directory that receives the artifacts (default: .)");
  cmd->add_option("--preset", args->preset,
                  "overlay the configuration on named defaults")
      ->check(CLI::IsMember({"desk"}));
}

int load_config(const CommonArgs& args, std::string* text) {
  if (args.config_path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    *text = ss.str();
    return 0;
  }
  if (!read_file(args.config_path, text)) {
    return fail_usage("cannot read configuration file: " + args.config_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate divergence-defect Schrodinger equations and verify "
               "their gauge equivalences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gn_version());

  CommonArgs run_args, transform_args, derive_args, check_args;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "integrate the equation(s) and write diagnostics");
  add_common(run_cmd, &run_args);
  CLI::App* transform_cmd = app.add_subcommand(
      "transform", "construct the phase map on the initial state");
  add_common(transform_cmd, &transform_args);
  CLI::App* derive_cmd = app.add_subcommand(
      "derive", "cross-check the variational structure of the model");
  add_common(derive_cmd, &derive_args);
  CLI::App* check_cmd = app.add_subcommand(
      "check", "run the model's invariant checklist (exit 1 on failures)");
  add_common(check_cmd, &check_args);
  CLI::App* catalog_cmd =
      app.add_subcommand("catalog", "print the model catalog as JSON");

  CLI11_PARSE(app, argc, argv);

  if (catalog_cmd->parsed()) {
    char* text = gn_catalog_json();
    std::fputs(text, stdout);
    gn_string_free(text);
    return 0;
  }

  const CommonArgs* args = nullptr;
  if (run_cmd->parsed()) args = &run_args;
  if (transform_cmd->parsed()) args = &transform_args;
  if (derive_cmd->parsed()) args = &derive_args;
  if (check_cmd->parsed()) args = &check_args;

  std::string config;
  if (int rc = load_config(*args, &config)) return rc;
  const int preset = args->preset == "desk" ? 1 : 0;

  if (run_cmd->parsed()) {
    return report(gn_cmd_run(config.c_str(), args->out_dir.c_str(), preset));
  }
  if (transform_cmd->parsed()) {
    return report(
        gn_cmd_transform(config.c_str(), args->out_dir.c_str(), preset));
  }
  if (derive_cmd->parsed()) {
    return report(gn_cmd_derive(config.c_str(), args->out_dir.c_str(), preset));
  }
  int all_pass = 0;
  gn_status st =
      gn_cmd_check(config.c_str(), args->out_dir.c_str(), preset, &all_pass);
  if (st != GN_OK) return report(st);
  if (!all_pass) {
    std::fprintf(stderr, "check: failures recorded in check.json\n");
    return 1;
  }
  return 0;
}
