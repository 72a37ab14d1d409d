#pragma once

#include <sys/wait.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace clitest {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch(const std::string& group) {
  const auto dir = std::filesystem::path(RACER_TEST_TMP) / group;
  std::filesystem::create_directories(dir);
  return dir;
}

/// Runs the CLI with `args` (already shell-quoted), capturing both streams.
inline Run run_cli(const std::string& args, const std::string& env = "") {
  static std::atomic<int> counter{0};
  const auto dir = scratch("runs");
  const int id = counter++;
  const auto out = dir / ("out" + std::to_string(id));
  const auto err = dir / ("err" + std::to_string(id));
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" RACER_CLI_PATH "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace clitest
