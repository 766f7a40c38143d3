#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkalman/cli_io.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 validation error, 2 structural/tolerance failure,
// 3 I/O error.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitStructure = 2;
constexpr int kExitIo = 3;

struct ToleranceFlags {
  double rank = 0.0, zero = 0.0, eig = 0.0;
  bool has_rank = false, has_zero = false, has_eig = false;
};

// Precedence: command-line flag > QKALMAN_TOL_ZERO > spec file > default.
void apply_tolerances(qk::StructureTolerance& tol, const ToleranceFlags& flags) {
  if (const char* env = std::getenv("QKALMAN_TOL_ZERO")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
      throw qk::ValidationError("QKALMAN_TOL_ZERO: expected a positive number, got \"" +
                                std::string(env) + "\"");
    }
    tol.zero_tol = v;
  }
  if (flags.has_rank) tol.rank_tol = flags.rank;
  if (flags.has_zero) tol.zero_tol = flags.zero;
  if (flags.has_eig) tol.eig_tol = flags.eig;
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw qk::IOError("cannot open output file: " + out_path);
  out << text;
  if (!out) throw qk::IOError("error while writing output file: " + out_path);
}

int cmd_decompose(const std::string& spec_path, const std::string& format,
                  const ToleranceFlags& flags, const std::string& out_path) {
  qk::SystemSpecFile spec = qk::parse_spec_file(spec_path);
  apply_tolerances(spec.tol, flags);
  const qk::DecompositionReport rep = qk::run_pipeline(spec);
  const qk::ReportFormat fmt =
      format == "text" ? qk::ReportFormat::kText : qk::ReportFormat::kJson;
  write_output(qk::emit_report(rep, fmt), out_path);
  return kExitOk;
}

int cmd_check(const std::string& spec_path) {
  qk::SystemSpecFile spec = qk::parse_spec_file(spec_path);
  ToleranceFlags no_flags;
  apply_tolerances(spec.tol, no_flags);

  qk::RealizabilityReport rep;
  if (spec.representation == "complex") {
    rep = qk::check_realizability(
        qk::build_general(spec.omega_minus, spec.omega_plus, spec.c_minus, spec.c_plus),
        spec.tol.zero_tol);
  } else if (spec.representation == "passive") {
    rep = qk::check_realizability(qk::build_passive(spec.omega_minus, spec.c_minus),
                                  spec.tol.zero_tol);
  } else {
    rep = qk::check_realizability(qk::build_real(spec.h, spec.c), spec.tol.zero_tol);
  }
  std::cout << "dynamics identity residual: " << rep.dynamics_residual << "\n";
  std::cout << "coupling identity residual: " << rep.coupling_residual << "\n";
  std::cout << "realizable: " << (rep.ok ? "yes" : "no") << "\n";
  return rep.ok ? kExitOk : kExitValidation;
}

std::string read_file_or_empty(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::string();
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string resolve_corpus_dir(const std::string& flag_dir) {
  if (!flag_dir.empty()) return flag_dir;
  if (const char* env = std::getenv("QKALMAN_CORPUS_DIR")) {
    if (*env != '\0') return env;
  }
#ifdef QKALMAN_DEFAULT_CORPUS_DIR
  if (fs::is_directory(QKALMAN_DEFAULT_CORPUS_DIR)) return QKALMAN_DEFAULT_CORPUS_DIR;
#endif
  return "corpus";
}

int cmd_corpus_run(const std::string& flag_dir) {
  const fs::path dir = resolve_corpus_dir(flag_dir);
  if (!fs::is_directory(dir)) {
    throw qk::IOError("corpus directory not found: " + dir.string());
  }
  std::vector<fs::path> specs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      specs.push_back(entry.path());
    }
  }
  std::sort(specs.begin(), specs.end());
  if (specs.empty()) {
    throw qk::IOError("corpus directory has no spec files: " + dir.string());
  }

  bool any_failed = false;
  for (const fs::path& path : specs) {
    const std::string stem = path.stem().string();
    std::string status;
    try {
      qk::SystemSpecFile spec = qk::parse_spec_file(path.string());
      ToleranceFlags no_flags;
      apply_tolerances(spec.tol, no_flags);
      const qk::DecompositionReport rep = qk::run_pipeline(spec);

      const fs::path golden_json = dir / "golden" / (stem + ".report.json");
      const fs::path golden_text = dir / "golden" / (stem + ".report.txt");
      bool compared = false;
      bool matched = true;
      if (fs::exists(golden_json)) {
        compared = true;
        matched = qk::emit_report(rep, qk::ReportFormat::kJson) ==
                  read_file_or_empty(golden_json);
        if (!matched) std::cerr << stem << ": JSON report differs from golden\n";
      }
      if (matched && fs::exists(golden_text)) {
        compared = true;
        matched = qk::emit_report(rep, qk::ReportFormat::kText) ==
                  read_file_or_empty(golden_text);
        if (!matched) std::cerr << stem << ": text report differs from golden\n";
      }
      if (!compared) {
        status = "RUN (no golden)";
      } else if (matched) {
        status = "PASS";
      } else {
        status = "FAIL";
        any_failed = true;
      }
    } catch (const std::exception& e) {
      status = std::string("ERROR (") + e.what() + ")";
      any_failed = true;
    }
    std::cout << path.filename().string() << ": " << status << "\n";
  }
  return any_failed ? kExitStructure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman canonical decomposition of linear quantum systems"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string format = "json";
  std::string out_path;
  std::string corpus_dir;
  ToleranceFlags flags;

  CLI::App* dec = app.add_subcommand("decompose", "Decompose a system and emit a report");
  dec->add_option("spec", spec_path, "System spec file (JSON)")->required();
  dec->add_option("--format", format, "Report format")
      ->check(CLI::IsMember({"json", "text"}));
  dec->add_option("--tol-rank", flags.rank, "Relative rank tolerance");
  dec->add_option("--tol-zero", flags.zero, "Absolute zero tolerance");
  dec->add_option("--tol-eig", flags.eig, "Eigenvalue proximity tolerance");
  dec->add_option("--out", out_path, "Write the report to this path instead of stdout");

  CLI::App* chk = app.add_subcommand("check", "Check physical realizability only");
  chk->add_option("spec", spec_path, "System spec file (JSON)")->required();

  CLI::App* corpus = app.add_subcommand("corpus", "Operate on the bundled example corpus");
  corpus->require_subcommand(1);
  CLI::App* corpus_run =
      corpus->add_subcommand("run", "Run every bundled example and diff against goldens");
  corpus_run->add_option("--dir", corpus_dir, "Corpus directory override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitValidation;
  }

  flags.has_rank = dec->count("--tol-rank") > 0;
  flags.has_zero = dec->count("--tol-zero") > 0;
  flags.has_eig = dec->count("--tol-eig") > 0;

  try {
    if (dec->parsed()) return cmd_decompose(spec_path, format, flags, out_path);
    if (chk->parsed()) return cmd_check(spec_path);
    if (corpus->parsed() && corpus_run->parsed()) return cmd_corpus_run(corpus_dir);
    std::cerr << "no subcommand selected\n";
    return kExitValidation;
  } catch (const qk::IOError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const qk::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const qk::StructureError& e) {
    std::cerr << "structure error: " << e.what() << "\n";
    return kExitStructure;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitStructure;
  }
}
