#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "mdtlab/data/dataset.hpp"
#include "mdtlab/env/environment.hpp"
#include "mdtlab/rng.hpp"

namespace mdtlab::test {

namespace fs = std::filesystem;

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("mdtlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  fs::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Exit status of a shell command, stdout and stderr discarded.
inline int run_quiet(const std::string& cmd) {
  const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Exit status and combined stdout/stderr of a shell command.
inline int run_capture(const std::string& cmd, std::string& out) {
  out.clear();
  FILE* pipe = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) return -1;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int rc = ::pclose(pipe);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// |a - b| relative to the larger magnitude, with an absolute floor.
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

using Policy = std::function<env::Action(const env::Environment&, int state, Rng&)>;

// Plays a whole session of `spec` with a policy that may look at the true
// environment, recording it in the dataset schema.
inline data::SubjectDataset play(const env::TaskSpec& spec, const Policy& policy, std::uint64_t seed = 7) {
  env::Environment e(spec);
  Rng rng(seed);
  data::SubjectDataset ds;
  ds.subject_id = "scripted";
  ds.task_id = spec.id;
  do {
    data::BehaviorRecord r;
    r.trial = e.trial_index();
    r.goal = e.current_goal();
    r.p_transition = e.transition_p();
    r.uncertainty = e.uncertainty();
    r.s1 = e.current_state();
    r.a1 = policy(e, r.s1, rng);
    r.s2 = e.step(r.a1).next_state;
    r.a2 = policy(e, r.s2, rng);
    const auto last = e.step(r.a2);
    r.s3 = last.next_state;
    r.reward = last.reward;
    ds.records.push_back(r);
  } while (e.advance_trial());
  return ds;
}

inline env::Action ideal_policy(const env::Environment& e, int s, Rng&) { return e.ideal_action(s).action; }
inline env::Action coin_policy(const env::Environment&, int, Rng& rng) {
  return rng.bernoulli(0.5) ? env::Action::kRight : env::Action::kLeft;
}

}  // namespace mdtlab::test
