// Golden tests for the command-line interface: exit-status contract and
// byte-determinism of outputs across worker counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("specsde_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPECSDE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMomentsCfg = R"([equation]
name = fractional
gamma = 0.316227766016838
[basis]
m = 3
[solver]
dt = 1e-3
T = 0.1
seed = 5
[task]
kind = moments
n_paths = 64
)";

}  // namespace

TEST_CASE("exit status contract") {
  TempDir tmp;

  SUBCASE("successful moments run returns 0 and writes outputs") {
    write_file(tmp.path / "m.cfg", kMomentsCfg);
    CHECK(run_cli("run --config " + (tmp.path / "m.cfg").string() + " --out " +
                  (tmp.path / "out").string() + " --quiet") == 0);
    CHECK(fs::exists(tmp.path / "out" / "moments.csv"));
    CHECK(fs::exists(tmp.path / "out" / "moments.json"));
    CHECK(fs::exists(tmp.path / "out" / "manifest.json"));
    const std::string csv = read_file(tmp.path / "out" / "moments.csv");
    CHECK(csv.rfind("# specsde-csv v1 task=moments", 0) == 0);
  }

  SUBCASE("missing config file maps to the config-error status") {
    CHECK(run_cli("run --config /nonexistent.cfg") == 2);
  }

  SUBCASE("schema violation maps to the config-error status") {
    write_file(tmp.path / "bad.cfg",
               "[equation]\nname = burgers\ngamma = 0.1\nwhoops = 1\n[basis]\nm = 8\n"
               "[task]\nkind = check\n");
    CHECK(run_cli("run --config " + (tmp.path / "bad.cfg").string() + " --out " +
                  (tmp.path / "o1").string()) == 2);
  }

  SUBCASE("unknown equation name maps to the config-error status") {
    write_file(tmp.path / "eq.cfg",
               "[equation]\nname = kuramoto\ngamma = 0.1\n[basis]\nm = 8\n[task]\nkind = check\n");
    CHECK(run_cli("run --config " + (tmp.path / "eq.cfg").string()) == 2);
  }

  SUBCASE("assumption violation maps to its own status") {
    // supercritical torus coercivity: 2 g^2 (p0 - 1) = 1.2 > 1
    write_file(tmp.path / "v.cfg",
               "[equation]\nname = fractional\ngamma = 0.447213595499958\np0 = 4\n"
               "[basis]\nm = 17\n[solver]\nseed = 3\n[task]\nkind = check\nsamples = 800\n");
    CHECK(run_cli("run --config " + (tmp.path / "v.cfg").string() + " --out " +
                  (tmp.path / "o2").string() + " --quiet") == 4);
  }

  SUBCASE("numerical explosion in simulate maps to its own status") {
    write_file(tmp.path / "x.cfg",
               "[equation]\nname = burgers\ngamma = 0\n[basis]\nm = 8\n"
               "[solver]\ndt = 0.05\nT = 2\nscheme = explicit_em\ntame_threshold = inf\n"
               "u0 = mode:1:60\n[task]\nkind = simulate\n");
    CHECK(run_cli("run --config " + (tmp.path / "x.cfg").string() + " --out " +
                  (tmp.path / "o3").string() + " --quiet") == 3);
  }
}

TEST_CASE("outputs are byte-identical across worker counts and reruns") {
  TempDir tmp;
  write_file(tmp.path / "m.cfg", kMomentsCfg);
  const std::string base = "moments --config " + (tmp.path / "m.cfg").string();
  REQUIRE(run_cli(base + " --out " + (tmp.path / "a").string() + " --threads 1 --quiet") == 0);
  REQUIRE(run_cli(base + " --out " + (tmp.path / "b").string() + " --threads 2 --quiet") == 0);
  REQUIRE(run_cli(base + " --out " + (tmp.path / "c").string() + " --threads 1 --quiet") == 0);
  for (const char* name : {"moments.csv", "moments.json"}) {
    const std::string a = read_file(tmp.path / "a" / name);
    CHECK(a == read_file(tmp.path / "b" / name));
    CHECK(a == read_file(tmp.path / "c" / name));
    CHECK(!a.empty());
  }
  // manifests agree except for wall time
  auto strip_wall = [](std::string s) {
    const auto pos = s.find("\"wall_time_s\"");
    if (pos != std::string::npos) {
      const auto end = s.find('\n', pos);
      s.erase(pos, end - pos);
    }
    return s;
  };
  const std::string ma = strip_wall(read_file(tmp.path / "a" / "manifest.json"));
  CHECK(ma == strip_wall(read_file(tmp.path / "b" / "manifest.json")));
  CHECK(ma == strip_wall(read_file(tmp.path / "c" / "manifest.json")));
}

TEST_CASE("JSON configs drive the same pipeline") {
  TempDir tmp;
  write_file(tmp.path / "m.json", R"({
    "equation": {"name": "fractional", "gamma": 0.316227766016838},
    "basis": {"m": 3},
    "solver": {"dt": 1e-3, "T": 0.1, "seed": 5},
    "task": {"kind": "moments", "n_paths": 64}
  })");
  write_file(tmp.path / "m.cfg", kMomentsCfg);
  REQUIRE(run_cli("run --config " + (tmp.path / "m.json").string() + " --out " +
                  (tmp.path / "j").string() + " --quiet") == 0);
  REQUIRE(run_cli("run --config " + (tmp.path / "m.cfg").string() + " --out " +
                  (tmp.path / "i").string() + " --quiet") == 0);
  CHECK(read_file(tmp.path / "j" / "moments.csv") == read_file(tmp.path / "i" / "moments.csv"));
}

TEST_CASE("simulate exports the documented binary layout") {
  TempDir tmp;
  write_file(tmp.path / "s.cfg",
             "[equation]\nname = fractional\ngamma = 0.2\n[basis]\nm = 3\n"
             "[solver]\ndt = 0.01\nT = 0.05\n[task]\nkind = simulate\nexport_binary = true\n");
  REQUIRE(run_cli("run --config " + (tmp.path / "s.cfg").string() + " --out " +
                  (tmp.path / "o").string() + " --quiet") == 0);
  const std::string bin = read_file(tmp.path / "o" / "trajectory.bin");
  REQUIRE(bin.size() == 4 + 4 * 3 + 8 * 6 * 3);  // magic + 3 u32 + (steps+1) * m doubles
  CHECK(bin.substr(0, 4) == "SPSD");
  auto u32 = [&](size_t off) {
    return static_cast<unsigned>(static_cast<unsigned char>(bin[off])) |
           (static_cast<unsigned>(static_cast<unsigned char>(bin[off + 1])) << 8) |
           (static_cast<unsigned>(static_cast<unsigned char>(bin[off + 2])) << 16) |
           (static_cast<unsigned>(static_cast<unsigned char>(bin[off + 3])) << 24);
  };
  CHECK(u32(4) == 1u);   // version
  CHECK(u32(8) == 3u);   // m
  CHECK(u32(12) == 5u);  // steps
}

TEST_CASE("remaining task kinds run end to end") {
  TempDir tmp;

  SUBCASE("check reports are byte-identical across reruns") {
    write_file(tmp.path / "c.cfg",
               "[equation]\nname = burgers\ngamma = 0.3\nh = sin:0.5\n[basis]\nm = 12\n"
               "[solver]\nseed = 9\n[task]\nkind = check\nsamples = 400\n");
    REQUIRE(run_cli("check --config " + (tmp.path / "c.cfg").string() + " --out " +
                    (tmp.path / "r1").string() + " --quiet") == 0);
    REQUIRE(run_cli("check --config " + (tmp.path / "c.cfg").string() + " --out " +
                    (tmp.path / "r2").string() + " --quiet") == 0);
    const std::string a = read_file(tmp.path / "r1" / "assumptions.json");
    CHECK(!a.empty());
    CHECK(a == read_file(tmp.path / "r2" / "assumptions.json"));
    CHECK(read_file(tmp.path / "r1" / "assumptions.csv") ==
          read_file(tmp.path / "r2" / "assumptions.csv"));
  }

  SUBCASE("sharpness sweep emits the verdict table") {
    write_file(tmp.path / "s.cfg",
               "[equation]\nname = fractional\ngamma = 0\n[basis]\nm = 3\n[solver]\nT = 0.5\n"
               "[task]\nkind = sharpness\ngamma_sq_grid = 0.05,0.15,0.25\np_grid = 4\nk = 1\n"
               "n_paths = 0\n");
    REQUIRE(run_cli("run --config " + (tmp.path / "s.cfg").string() + " --out " +
                    (tmp.path / "sh").string() + " --quiet") == 0);
    const std::string csv = read_file(tmp.path / "sh" / "sharpness.csv");
    CHECK(csv.find("gamma_sq,p,exponent,bounded") != std::string::npos);
    CHECK(csv.find("0.25,4,") != std::string::npos);
  }

  SUBCASE("convergence fits an order") {
    write_file(tmp.path / "v.cfg",
               "[equation]\nname = fractional\ngamma = 0.31622776601683794\n[basis]\nm = 3\n"
               "[solver]\nT = 0.1\ndt = 1e-3\nseed = 3\n[task]\nkind = convergence\n"
               "dt_list = 4e-3,2e-3,1e-3\nn_paths = 32\n");
    REQUIRE(run_cli("run --config " + (tmp.path / "v.cfg").string() + " --out " +
                    (tmp.path / "cv").string() + " --quiet") == 0);
    CHECK(read_file(tmp.path / "cv" / "convergence.json").find("\"slope\"") != std::string::npos);
  }

  SUBCASE("unique-monitor emits the mean monitor path") {
    write_file(tmp.path / "u.cfg",
               "[equation]\nname = burgers\ngamma = 0.3\n[basis]\nm = 8\n"
               "[solver]\ndt = 1e-2\nT = 0.1\nseed = 9\nu0 = mode:1:0.5\n"
               "[task]\nkind = unique-monitor\nn_paths = 16\nperturbation = 1e-3\n");
    REQUIRE(run_cli("run --config " + (tmp.path / "u.cfg").string() + " --out " +
                    (tmp.path / "um").string() + " --quiet") == 0);
    CHECK(read_file(tmp.path / "um" / "unique_monitor.csv").find("t,mean_M,std_error") !=
          std::string::npos);
    CHECK(read_file(tmp.path / "um" / "unique_monitor.json").find("monotone_ok") !=
          std::string::npos);
  }

  SUBCASE("moments with an m list writes one report per dimension") {
    write_file(tmp.path / "mm.cfg",
               "[equation]\nname = burgers\ngamma = 0.3\n[basis]\nm = 8\n"
               "[solver]\ndt = 1e-2\nT = 0.1\nseed = 9\n[task]\nkind = moments\n"
               "n_paths = 16\nm_list = 8,16\np_list = 2\n");
    REQUIRE(run_cli("run --config " + (tmp.path / "mm.cfg").string() + " --out " +
                    (tmp.path / "ms").string() + " --quiet") == 0);
    const std::string csv = read_file(tmp.path / "ms" / "moments.csv");
    CHECK(csv.find("mean_hp0,4,8,") != std::string::npos);
    CHECK(csv.find("mean_hp0,4,16,") != std::string::npos);
  }

  SUBCASE("moments with every path exploded maps to the explosion status") {
    write_file(tmp.path / "xx.cfg",
               "[equation]\nname = burgers\ngamma = 0\n[basis]\nm = 8\n"
               "[solver]\ndt = 0.05\nT = 1\nscheme = explicit_em\ntame_threshold = inf\n"
               "u0 = mode:1:60\n[task]\nkind = moments\nn_paths = 4\n");
    CHECK(run_cli("run --config " + (tmp.path / "xx.cfg").string() + " --out " +
                  (tmp.path / "xo").string() + " --quiet") == 3);
  }

  SUBCASE("default output root comes from the environment") {
    write_file(tmp.path / "m.cfg", kMomentsCfg);
    const std::string cmd = "SPECSDE_OUT_ROOT=" + (tmp.path / "root").string() + " " +
                            SPECSDE_BIN + " moments --config " + (tmp.path / "m.cfg").string() +
                            " --quiet >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    bool found = false;
    for (const auto& e : fs::directory_iterator(tmp.path / "root")) {
      found = found || fs::exists(e.path() / "moments.csv");
    }
    CHECK(found);
  }
}
