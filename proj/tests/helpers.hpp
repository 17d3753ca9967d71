#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ppest/designs.hpp"
#include "ppest/population.hpp"

namespace testing {

// SRS sample of n draws from a population of N with the first k labelled 1.
inline ppest::Sample srs_sample(std::size_t n, std::size_t k, std::size_t N, double p_hat = 0.5) {
  ppest::Sample s;
  s.design = ppest::Design::kSrsWor;
  s.parent_N = N;
  for (std::size_t i = 0; i < n; ++i) {
    ppest::Draw d;
    d.unit = i;
    d.pi = static_cast<double>(n) / static_cast<double>(N);
    d.aux_prob = p_hat;
    d.label = i < k ? 1 : 0;
    s.draws.push_back(d);
  }
  return s;
}

inline ppest::Frame frame_of(const std::vector<int>& labels, const std::vector<double>& p_hat) {
  std::vector<ppest::Unit> units;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ppest::Unit u;
    u.id = "x" + std::to_string(i);
    if (labels[i] >= 0) u.label = static_cast<std::uint8_t>(labels[i]);
    u.aux_prob = p_hat[i];
    units.push_back(std::move(u));
  }
  return ppest::Frame(std::move(units));
}

// Random labeled frame for property tests: size in [lo, hi], prevalence up to
// `max_prev`, p_hat loosely correlated with the label.
inline ppest::Frame random_frame(std::mt19937_64& g, std::size_t lo, std::size_t hi, double max_prev = 0.5) {
  std::uniform_int_distribution<std::size_t> size(lo, hi);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t N = size(g);
  const double prev = u(g) * max_prev;
  std::vector<int> y(N);
  std::vector<double> p(N);
  for (std::size_t i = 0; i < N; ++i) {
    y[i] = u(g) < prev ? 1 : 0;
    p[i] = y[i] ? 0.3 + 0.7 * u(g) : 0.7 * u(g);
  }
  if (N > 0) y[0] = 1;  // at least one positive
  return frame_of(y, p);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ppest_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace testing
