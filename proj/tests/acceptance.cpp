// Acceptance suite. Each criterion prints one pass/fail line; the binary
// exits nonzero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spindec/analysis.hpp"
#include "spindec/config.hpp"
#include "spindec/engine.hpp"
#include "spindec/pipeline.hpp"
#include "spindec/pulseq.hpp"
#include "support/oracle.hpp"
#include "support/testsys.hpp"

namespace fs = std::filesystem;
using namespace spindec;
namespace orc = spindec::testing::oracle;
using std::numbers::pi;

namespace {

// The published display convention writes the corner-family deviation
// matrix with the opposite overall sign; reconciled here, once.
constexpr double kCornerFamilySign = -1.0;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("spindec_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, std::string* output = nullptr) {
  static int counter = 0;
  const fs::path log = scratch_dir() / ("log" + std::to_string(counter++));
  const std::string cmd =
      std::string(SPINDEC_BIN) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(log);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    *output = buffer.str();
  }
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const std::string kTceConfig = std::string(SPINDEC_ASSETS_DIR) + "/tce.cfg";
constexpr double kTheoryPeriod = 2.0 / (201.3 + 9.23);  // 9.4998 ms

Operator embedded_entangled_state(int n) {
  return product_operator({{Axis::X, 1}, {Axis::X, 2}}, n) -
         product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, n) -
         product_operator({{Axis::Y, 1}, {Axis::Y, 2}}, n);
}

Operator pseudo_pure_target(int n) {
  return product_operator({{Axis::Z, 1}}, n) +
         product_operator({{Axis::Z, 2}}, n) -
         2.0 * product_operator({{Axis::Z, 1}, {Axis::Z, 2}}, n);
}

// 1. The scan on the bundled config recovers the theoretical period.
void criterion_1() {
  const fs::path out = scratch_dir() / "scan";
  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli("scan --config " + kTceConfig + " --out " +
                           out.string());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (code != 0) {
    report(1, false, "scan exited with code " + std::to_string(code));
    return;
  }
  std::ifstream in(out / "fit.json");
  nlohmann::json fit;
  in >> fit;
  const double period = fit["fit"]["period_seconds"].get<double>();
  const double rel = std::abs(period - kTheoryPeriod) / kTheoryPeriod;
  report(1, rel < 5e-3 && seconds < 10.0,
         "fitted period " + fmt(period * 1e3) + " ms vs theory " +
             fmt(kTheoryPeriod * 1e3) + " ms (relative error " + fmt(rel) +
             ", runtime " + fmt(seconds) + " s)");
}

// 2. Corner coherence equals -cos(pi (J13+J23) t) at every scan point.
void criterion_2() {
  const ExperimentConfig cfg = load_config(kTceConfig);
  const SpinSystem& sys = cfg.sys;
  const Sequence prep = evaluate_durations(compile_builtin("prep", sys), sys);
  const Sequence ent =
      evaluate_durations(compile_builtin("entangle", sys), sys);
  SimState base = equilibrium_state(sys);
  base = run_sequence(std::move(base), prep);
  base = run_sequence(std::move(base), ent);
  base.decoupled.clear();
  const double j_sum = sys.j_hz(0, 2) + sys.j_hz(1, 2);
  double worst = 0.0;
  for (int i = 0; i < cfg.scan.points; ++i) {
    const double t = cfg.scan.t_start_s +
                     (cfg.scan.t_stop_s - cfg.scan.t_start_s) * i /
                         (cfg.scan.points - 1);
    const double corner = corner_coherence(
        partial_trace(refocused_evolve(base, t).rho, sys.n, sys.env_spins));
    worst = std::max(worst, std::abs(corner + std::cos(pi * j_sum * t)));
  }
  report(2, worst < 1e-9,
         "max |corner + cos(pi (J13+J23) t)| = " + fmt(worst, "%.3g") +
             " over " + std::to_string(cfg.scan.points) + " points");
}

// 3. The preparation block lands on the pseudo-pure state, and the engine
//    agrees with the independent direct-multiplication oracle.
void criterion_3() {
  const ExperimentConfig cfg = load_config(kTceConfig);
  const SpinSystem& sys = cfg.sys;
  const Sequence prep = evaluate_durations(compile_builtin("prep", sys), sys);
  const SimState engine_out = run_sequence(equilibrium_state(sys), prep);
  const Operator oracle_out = orc::prep(sys);
  const double engine_vs_oracle = max_abs_diff(engine_out.rho, oracle_out);
  const Operator target = pseudo_pure_target(sys.n);
  const double vs_target = max_abs_diff(deviation_normalized(oracle_out),
                                        deviation_normalized(target));
  report(3, engine_vs_oracle < 1e-12 && vs_target < 1e-8,
         "oracle vs pseudo-pure target " + fmt(vs_target, "%.3g") +
             ", engine vs oracle " + fmt(engine_vs_oracle, "%.3g"));
}

// 4. The entangling block maps the pseudo-pure state onto the corner
//    state; the traced deviation matrix shows the (1,0,0,1) / -1 pattern.
void criterion_4() {
  const ExperimentConfig cfg = load_config(kTceConfig);
  const SpinSystem& sys = cfg.sys;
  const Sequence ent =
      evaluate_durations(compile_builtin("entangle", sys), sys);
  SimState state = equilibrium_state(sys);
  state.rho = pseudo_pure_target(sys.n);
  state = run_sequence(std::move(state), ent);

  const double vs_eq3 =
      max_abs_diff(deviation_normalized(state.rho),
                   deviation_normalized(embedded_entangled_state(sys.n)));

  Operator corner_form = Operator::Zero(4, 4);
  corner_form(0, 0) = corner_form(3, 3) = 1.0;
  corner_form(0, 3) = corner_form(3, 0) = -1.0;
  const Operator traced = partial_trace(state.rho, sys.n, sys.env_spins);
  const double vs_corner_form =
      max_abs_diff(deviation_normalized(traced),
                   kCornerFamilySign * deviation_normalized(corner_form));
  report(4, vs_eq3 < 1e-8 && vs_corner_form < 1e-8,
         "vs entangled target " + fmt(vs_eq3, "%.3g") +
             ", traced vs corner pattern " + fmt(vs_corner_form, "%.3g"));
}

// 5. Refocusing cancels Zeeman evolution over random systems.
void criterion_5() {
  std::mt19937 rng(0xacce5);
  std::uniform_real_distribution<double> tdist(0.0, 20e-3);
  std::uniform_int_distribution<int> ndist(2, 4);
  double worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const SpinSystem sys =
        spindec::testing::random_system(rng, ndist(rng), 10e3, 500.0);
    const double t = tdist(rng);
    const Operator half =
        matrix_exponential_unitary(full_hamiltonian(sys), t / 2.0);
    const Operator r = rf_propagator(pi, Phase::X, sys.all_spins(), sys.n);
    const Operator lhs = half * r * half;
    const Operator rhs =
        r * matrix_exponential_unitary(effective_hamiltonian(sys), t);
    Eigen::Index br, bc;
    lhs.cwiseAbs().maxCoeff(&br, &bc);
    const Complex ratio = lhs(br, bc) / rhs(br, bc);
    worst =
        std::max(worst, max_abs_diff(lhs, (ratio / std::abs(ratio)) * rhs));
  }
  report(5, worst < 1e-10,
         "max echo-identity deviation " + fmt(worst, "%.3g") +
             " over 50 random systems");
}

// 6. Product-of-cosines envelope for 1..4 environment spins.
void criterion_6() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(0xe27);
  std::uniform_real_distribution<double> coupling(5.0, 300.0);
  std::uniform_real_distribution<double> tdist(0.0, 20e-3);
  double worst = 0.0;
  for (int n_env = 1; n_env <= 4; ++n_env) {
    const int n = 2 + n_env;
    SpinSystem sys;
    sys.n = n;
    sys.j_hz = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
      sys.labels.push_back("S" + std::to_string(k + 1));
      sys.offset_hz.push_back(0.0);
      sys.gradient_weights.push_back(1.0);
      if (k < 2)
        sys.system_spins.insert(k + 1);
      else
        sys.env_spins.insert(k + 1);
    }
    sys.j_hz(0, 1) = sys.j_hz(1, 0) = 103.1;
    std::vector<std::pair<double, double>> couplings;
    for (int k : sys.env_spins) {
      sys.j_hz(0, k - 1) = sys.j_hz(k - 1, 0) = coupling(rng);
      sys.j_hz(1, k - 1) = sys.j_hz(k - 1, 1) = coupling(rng);
      couplings.emplace_back(sys.j_hz(0, k - 1), sys.j_hz(1, k - 1));
    }
    const Operator rho0 = embedded_entangled_state(n);
    for (int draw = 0; draw < 20; ++draw) {
      const double t = tdist(rng);
      SimState state{rho0, sys, {}, 0.0};
      state = multi_env_evolve(std::move(state), t);
      const double corner =
          corner_coherence(partial_trace(state.rho, n, sys.env_spins));
      worst = std::max(worst,
                       std::abs(corner + analytic_envelope(t, couplings)));
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report(6, worst < 1e-9 && seconds < 30.0,
         "max |corner + product of cosines| = " + fmt(worst, "%.3g") +
             " for 1..4 environment spins (runtime " + fmt(seconds) + " s)");
}

// 7. Spectrum structure: C1/C2 doublets split by J12, centered at the
//    configured ppm positions.
void criterion_7() {
  const fs::path out = scratch_dir() / "spectrum";
  const int code = run_cli("spectrum --config " + kTceConfig +
                           " --t 3.5e-3 --out " + out.string());
  if (code != 0) {
    report(7, false, "spectrum exited with code " + std::to_string(code));
    return;
  }
  std::ifstream in(out / "spectrum.csv");
  std::string header;
  std::getline(in, header);
  std::vector<double> freq, mag, ppm;
  for (std::string line; std::getline(in, line);) {
    double f, re, im, p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &f, &re, &im, &p) != 4)
      continue;
    freq.push_back(f);
    mag.push_back(std::hypot(re, im));
    ppm.push_back(p);
  }
  auto peak_in = [&](double lo, double hi) {
    int best = -1;
    for (size_t i = 0; i < freq.size(); ++i)
      if (freq[i] >= lo && freq[i] <= hi &&
          (best < 0 || mag[i] > mag[best]))
        best = static_cast<int>(i);
    return best;
  };
  const double df = 1.0 / (4096 * 100e-6);  // one FFT bin, 2.44 Hz
  const int c1_left = peak_in(350.0, 450.0);
  const int c1_right = peak_in(450.0, 550.0);
  const int c2_left = peak_in(-550.0, -450.0);
  const int c2_right = peak_in(-450.0, -350.0);
  const double c1_split = freq[c1_right] - freq[c1_left];
  const double c2_split = freq[c2_right] - freq[c2_left];
  const double c1_ppm = 0.5 * (ppm[c1_left] + ppm[c1_right]);
  const double c2_ppm = 0.5 * (ppm[c2_left] + ppm[c2_right]);
  const double dppm = df / 125.72;
  const bool pass = std::abs(c1_split - 103.1) <= df &&
                    std::abs(c2_split - 103.1) <= df &&
                    std::abs(c1_ppm - 124.16) <= dppm &&
                    std::abs(c2_ppm - 117.00) <= dppm;
  report(7, pass,
         "C1 split " + fmt(c1_split) + " Hz at " + fmt(c1_ppm, "%.6g") +
             " ppm, C2 split " + fmt(c2_split) + " Hz at " +
             fmt(c2_ppm, "%.6g") + " ppm (bin " + fmt(df, "%.3g") + " Hz)");
}

// 8. The externally measured period is reported as a labeled,
//    non-reproducible reference, not simulated.
void criterion_8() {
  std::string output;
  const fs::path out = scratch_dir() / "scan8";
  const int code =
      run_cli("scan --config " + kTceConfig + " --out " + out.string(),
              &output);
  if (code != 0) {
    report(8, false, "scan exited with code " + std::to_string(code));
    return;
  }
  std::ifstream in(out / "fit.json");
  nlohmann::json fit;
  in >> fit;
  const double simulated = fit["fit"]["period_seconds"].get<double>();
  const double reference =
      fit["reference_experiment"]["period_seconds"].get<double>();
  const double discrepancy = (simulated - reference) / simulated;
  const bool labeled = output.find("not reproducible") != std::string::npos;
  // the simulation must stay on the ideal period, away from the
  // hardware-afflicted reference value
  const bool pass = labeled && std::abs(reference - 8.72e-3) < 1e-9 &&
                    discrepancy > 0.05 && discrepancy < 0.12;
  report(8, pass,
         "reference " + fmt(reference * 1e3) + " ms reported against " +
             fmt(simulated * 1e3) + " ms (discrepancy " +
             fmt(100.0 * discrepancy, "%.1f") + "%, labeled: " +
             (labeled ? "yes" : "no") + ")");
}

// 9. Parser robustness under 1e5 random token streams.
void criterion_9() {
  const SpinSystem sys = spindec::testing::two_spin_system();
  const std::vector<std::string> alphabet = {
      "pulse", "readout", "delay",  "grad", "decouple", "refocus", "on",
      "off",   "all",     "x",      "y",    "z",        "-x",      "-y",
      "pi",    "J",       "[",      "]",    "(",        ")",       "+",
      "-",     "*",       "/",      ";",    ",",        "\n",      "1",
      "2",     "9",       "0.5",    "1e-3", "3.5e-3",   "foo",     "@",
      "#",     "1e999",   "..",     "J[1,2]", "\t",     "0"};
  std::mt19937 rng(0xf022);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 48);
  std::uniform_int_distribution<int> glue(0, 4);
  long parsed = 0, rejected = 0, bad_span = 0, crashed = 0;
  for (int trial = 0; trial < 100000; ++trial) {
    std::string script;
    const int tokens = len(rng);
    for (int i = 0; i < tokens; ++i) {
      script += alphabet[pick(rng)];
      if (glue(rng)) script += " ";
    }
    int lines = 1;
    for (char c : script) lines += c == '\n';
    try {
      parse(script, sys);
      ++parsed;
    } catch (const ParseError& e) {
      if (e.line() < 1 || e.line() > lines + 1 || e.col() < 1) ++bad_span;
      ++rejected;
    } catch (...) {
      ++crashed;
    }
  }
  report(9, crashed == 0 && bad_span == 0,
         std::to_string(parsed) + " accepted, " + std::to_string(rejected) +
             " rejected with valid spans, " + std::to_string(crashed) +
             " unexpected exceptions out of 100000 streams");
}

}  // namespace

int main() {
  const std::pair<int, void (*)()> criteria[] = {
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3},
      {4, criterion_4}, {5, criterion_5}, {6, criterion_6},
      {7, criterion_7}, {8, criterion_8}, {9, criterion_9}};
  for (const auto& [number, run] : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      report(number, false, std::string("unexpected exception: ") + e.what());
    }
  }
  if (g_failures == 0) {
    std::printf("acceptance: all 9 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failures);
  return 1;
}
