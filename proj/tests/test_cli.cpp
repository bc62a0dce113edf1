#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#ifndef RWRKIT_CLI
#error "RWRKIT_CLI must name the command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("rwrkit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
};

int run(const std::string& args) {
  std::string cmd = std::string(RWRKIT_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  Scratch s;
  s.write("k3.txt", "0 1\n1 2\n2 0\n");
  s.write("bad.txt", "0 1 2\n");
  CHECK(run("rwr compute --graph " + s.path("k3.txt")) == 0);
  CHECK(run("rwr compute --graph " + s.path("missing.txt")) == 1);
  CHECK(run("rwr compute --graph " + s.path("bad.txt")) == 1);
  CHECK(run("rwr compute --graph " + s.path("k3.txt") + " --c 0") == 1);
  CHECK(run("rwr compute --graph " + s.path("k3.txt") + " --max-iter 1") == 2);
  CHECK(run("rwr topk --graph " + s.path("k3.txt") + " --k 9") == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("outputs and sidecars") {
  Scratch s;
  CHECK(run("gen sbm --block-size 20 --seed 4 --out " + s.path("g.json")) == 0);
  CHECK(run("analyze hops --graph " + s.path("g.json") + " --out " + s.path("hops.csv")) == 0);
  CHECK(s.read("hops.csv").rfind("distance,mass,cumulative\n", 0) == 0);
  CHECK(s.read("hops.json").find("\"command\": \"analyze hops\"") != std::string::npos);

  CHECK(run("rwr compute --graph " + s.path("g.json") + " --out " + s.path("s.csv")) == 0);
  CHECK(run("rwr topk --table " + s.path("s.csv") + " --k 5 --out " + s.path("t.csv")) == 0);
  CHECK(s.read("t.csv").find("kind=top_k") != std::string::npos);

  CHECK(run("wl pairsweep --n 4 --out " + s.path("pairs.csv")) == 0);
  CHECK(s.read("pairs.json").find("\"violations\": 0") != std::string::npos);

  s.write("cfg.json", R"({"runs": 2, "epochs": 5, "train_per_class": 5, "val_size": 10, "test_size": 10})");
  CHECK(run("train --graph " + s.path("g.json") + " --config " + s.path("cfg.json") + " --out " + s.path("m.json") +
            " --curves " + s.path("curves.csv")) == 0);
  CHECK(s.read("m.json").find("\"config_hash\"") != std::string::npos);
  s.write("bad_cfg.json", R"({"runs": 2, "speed": 5})");
  CHECK(run("train --graph " + s.path("g.json") + " --config " + s.path("bad_cfg.json")) == 1);
}

TEST_CASE("seeded outputs are byte identical") {
  Scratch s;
  CHECK(run("gen triangles --count 20 --seed 9 --out " + s.path("a.json")) == 0);
  CHECK(run("gen triangles --count 20 --seed 9 --out " + s.path("b.json")) == 0);
  CHECK(run("gen triangles --count 20 --seed 10 --out " + s.path("c.json")) == 0);
  CHECK(s.read("a.json") == s.read("b.json"));
  CHECK(s.read("a.json") != s.read("c.json"));
}

}
