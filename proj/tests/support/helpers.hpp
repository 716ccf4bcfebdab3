#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "cfp/model/model.hpp"
#include "cfp/numerics/rng.hpp"
#include "cfp/numerics/tensor.hpp"

namespace cfp::testing {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(CFP_FIXTURE_DIR) / rel; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cfp-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const fs::path& path() const { return path_; }
  [[nodiscard]] std::string str(const std::string& rel = {}) const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline numerics::Tensor random_tensor(numerics::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  numerics::Rng rng(seed);
  numerics::Tensor t(std::move(shape));
  for (double& v : t.data()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Small but complete: 2 layers, 2 heads.
inline model::ModelConfig tiny_config(std::size_t d = 8, std::vector<std::string> prompts = {"Seq", "IC"}) {
  model::ModelConfig c;
  c.d = d;
  c.layers = 2;
  c.heads = 2;
  c.max_len = 24;
  c.ffn_mult = 4;
  c.prompts = std::move(prompts);
  c.init_std = 0.3;
  return c;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Fixed-width PDB ATOM/HETATM record.
inline std::string atom_line(int serial, const std::string& name, char alt, const std::string& res, char chain,
                             int seq, double x, double y, double z, char icode = ' ',
                             const std::string& record = "ATOM  ") {
  char buf[96];
  const std::string padded = name.size() == 4 ? name : " " + name + std::string(3 - name.size(), ' ');
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4s%c%3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2c\n",
                record.c_str(), serial, padded.c_str(), alt, res.c_str(), chain, seq, icode, x, y, z, 1.0, 0.0,
                name[0]);
  return buf;
}

// Metrics log with the trailing wall-clock column removed from each record.
inline std::string strip_wall_clock(const std::string& log) {
  std::istringstream in(log);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') {
      const auto comma = line.rfind(',');
      if (comma != std::string::npos) line.resize(comma);
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace cfp::testing
