// End-to-end checks of the dpmarket binary: exit codes, output formats,
// seed handling and byte-stable CSV. Usage: cli_tests <path-to-binary>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

int g_failures = 0;

#define EXPECT(cond)                                                     \
  do {                                                                   \
    if (!(cond)) {                                                       \
      ++g_failures;                                                      \
      std::cerr << "FAIL " << __FILE__ << ":" << __LINE__ << "  " #cond  \
                << "\n";                                                 \
    }                                                                    \
  } while (0)

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& command) {
  RunResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer{};
  size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::filesystem::path write_file(const std::filesystem::path& dir,
                                 const std::string& name,
                                 const std::string& content) {
  const std::filesystem::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

std::string scenario_with_intensity(double intensity, double p = 1.0) {
  std::ostringstream out;
  out << "coeffs = [1]\nprivacy_weights = [1.0]\ngamma = 1.0\n"
      << "sigma_min = 1.0\np = " << p << "\nintensity_kind = constant\n"
      << "intensity_value = " << intensity << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-dpmarket-binary>\n";
    return 2;
  }
  const std::string binary = argv[1];
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "dpmarket_cli_tests";
  std::filesystem::create_directories(dir);

  const auto profitable =
      write_file(dir, "profitable.scn", scenario_with_intensity(10.0));
  const auto breakeven =
      write_file(dir, "breakeven.scn", scenario_with_intensity(2.5));
  const auto notrade =
      write_file(dir, "notrade.scn", scenario_with_intensity(1.0));
  const auto invalid_p =
      write_file(dir, "invalid_p.scn", scenario_with_intensity(10.0, 1.5));
  const auto unknown_key = write_file(dir, "unknown_key.scn",
                                      scenario_with_intensity(10.0) +
                                          "mystery = 1\n");

  // --- classify -----------------------------------------------------------
  {
    const RunResult r = run(binary + " classify " + profitable.string());
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "regime: Profitable"));
    EXPECT(contains(r.output, "A: 10"));
    EXPECT(contains(r.output, "Gamma: 1.4142135623730951"));
    EXPECT(contains(r.output, "2pGamma: 2.8284271247461903"));
  }
  {
    const RunResult r = run(binary + " classify " + notrade.string());
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "regime: NoTrade"));
  }
  {
    const RunResult r = run(binary + " classify " + invalid_p.string());
    EXPECT(r.exit_code == 3);
    EXPECT(contains(r.output, "(1/2, 1]"));
  }
  {
    const RunResult r = run(binary + " classify " + unknown_key.string());
    EXPECT(r.exit_code == 2);
    EXPECT(contains(r.output, "mystery"));
  }
  {
    const RunResult r = run(binary + " classify " + dir.string() + "/nope.scn");
    EXPECT(r.exit_code == 2);
  }
  {
    const RunResult r = run(binary);
    EXPECT(r.exit_code == 2);  // missing subcommand is a usage error
  }

  // --- equilibrium --------------------------------------------------------
  {
    const RunResult r = run(binary + " equilibrium " + profitable.string());
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "k_star: 5"));
    EXPECT(contains(r.output, "sigma_star: 1"));
    EXPECT(contains(r.output, "maker_profit: 3.585786437626905"));
    EXPECT(contains(r.output, "k_lower: 1.4142135623730951"));
  }
  {
    const RunResult r =
        run(binary + " equilibrium " + breakeven.string() + " --json");
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "\"k_star\": \"indifferent\""));
    EXPECT(contains(r.output, "\"maker_profit\": 0"));
    EXPECT(contains(r.output, "\"k_lower\": null"));
  }
  {
    const RunResult r =
        run(binary + " equilibrium " + notrade.string() + " --csv");
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output,
                    "regime,k_star,sigma_star,maker_profit,buyer_utility,"
                    "k_lower,k_upper"));
    EXPECT(contains(r.output, "NoTrade,indifferent,no-trade,0,0,,"));
  }
  {
    const RunResult r = run(binary + " equilibrium " + profitable.string() +
                            " --json --csv");
    EXPECT(r.exit_code == 2);  // mutually exclusive flags
  }

  // --- sweep ---------------------------------------------------------------
  const auto out_a = dir / "sweep_a.csv";
  const auto out_b = dir / "sweep_b.csv";
  {
    const std::string cmd = binary + " sweep " + profitable.string() +
                            " --var k --lo 0.1 --hi 20 --points 50 "
                            "--scale log --out ";
    EXPECT(run(cmd + out_a.string()).exit_code == 0);
    EXPECT(run(cmd + out_b.string()).exit_code == 0);
    const std::string a = slurp(out_a);
    EXPECT(!a.empty());
    EXPECT(a == slurp(out_b));  // byte-identical across runs
    EXPECT(contains(
        a, "value,A,Gamma,regime,k_star,sigma_star,psi_star,phi_star"));
  }
  {
    const RunResult r = run(binary + " sweep " + profitable.string() +
                            " --var p --lo 0.6 --hi 1 --points 9 "
                            "--scale linear");
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "Profitable"));
  }
  {
    // sweep block in the file supplies the grid; flags not needed
    const auto with_block = write_file(
        dir, "with_block.scn",
        scenario_with_intensity(10.0) +
            "sweep_var = k\nsweep_lo = 0.5\nsweep_hi = 10\n"
            "sweep_points = 7\nsweep_scale = log\n");
    const RunResult r = run(binary + " sweep " + with_block.string());
    EXPECT(r.exit_code == 0);
    size_t lines = 0;
    for (char ch : r.output) lines += ch == '\n';
    EXPECT(lines == 8);  // header + 7 rows
  }
  {
    const RunResult r = run(binary + " sweep " + profitable.string());
    EXPECT(r.exit_code == 2);  // no sweep block and no --var
  }
  {
    // q sweeps demand a one-dimensional scenario
    const auto wide = write_file(dir, "wide.scn",
                                 "coeffs = [1, 1]\n"
                                 "privacy_weights = [1.0, 1.0]\n"
                                 "gamma = 1.0\nsigma_min = 1.0\np = 1.0\n"
                                 "intensity_kind = constant\n"
                                 "intensity_value = 10.0\n");
    const RunResult r = run(binary + " sweep " + wide.string() +
                            " --var q --lo -1 --hi 1 --points 5 "
                            "--scale linear");
    EXPECT(r.exit_code == 3);
    EXPECT(contains(r.output, "one-dimensional"));
  }

  // --- verify ---------------------------------------------------------------
  {
    const RunResult r = run(binary + " verify " + profitable.string() +
                            " --instances 3 --seed 11");
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "oracle comparisons: 3/3"));
    EXPECT(contains(r.output, "verify: PASS"));
  }
  {
    const RunResult r =
        run(binary + " verify " + profitable.string() + " --instances 0");
    EXPECT(r.exit_code == 2);
  }
  {
    // seed falls back to DP_MARKET_SEED
    const RunResult r = run("DP_MARKET_SEED=11 " + binary + " verify " +
                            profitable.string() + " --instances 3");
    EXPECT(r.exit_code == 0);
    EXPECT(contains(r.output, "verify: PASS"));
  }
  {
    const RunResult r = run(binary + " verify " + invalid_p.string() +
                            " --test-mode-allow-invalid-p --instances 1 "
                            "--seed 5");
    EXPECT(r.exit_code == 1);
    EXPECT(contains(r.output, "witness alphas"));
    EXPECT(contains(r.output, "verify: FAIL"));
  }
  {
    // without the test-mode flag the invalid exponent is a domain error
    const RunResult r =
        run(binary + " verify " + invalid_p.string() + " --instances 1");
    EXPECT(r.exit_code == 3);
  }

  if (g_failures == 0) {
    std::cout << "cli_tests: all checks passed\n";
    return 0;
  }
  std::cerr << "cli_tests: " << g_failures << " check(s) failed\n";
  return 1;
}
