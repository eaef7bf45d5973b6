#pragma once
// Runs the bsslca executable in a shell and captures exit code and streams.
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace cli {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

inline std::filesystem::path scratch_dir()
{
  static const auto dir = [] {
    std::random_device rd;
    auto d = std::filesystem::temp_directory_path() / ("bsslca_test_" + std::to_string(rd()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

inline std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream(p, std::ios::binary) << text;
}

// args are passed to the shell verbatim
inline Run run(const std::string& args, const std::string& env = "")
{
  const auto err_path = scratch_dir() / "stderr.txt";
  const std::string cmd =
      env + (env.empty() ? "" : " ") + "'" BSSLCA_CLI "' " + args + " 2>'" + err_path.string() + "'";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

}  // namespace cli
