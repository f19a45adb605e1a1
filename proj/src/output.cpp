#include "tsync/output.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "tsync/config.hpp"

namespace tsync {

namespace {

void add2(std::vector<std::string>& cols, const std::string& base) {
  cols.push_back(base + "_1");
  cols.push_back(base + "_2");
}

void put(std::string& line, double v) {
  line += ',';
  line += fmt::format("{}", v);
}

void put2(std::string& line, const Vec2d& v) {
  put(line, v(0));
  put(line, v(1));
}

}  // namespace

std::vector<std::string> csv_columns(bool with_diagnostics) {
  std::vector<std::string> c{"t"};
  for (const char* b : {"theta", "theta_dot", "p", "p_h", "p_ht", "e_p", "e_pt", "eta", "eta_t", "tau", "zeta_j_hat"})
    add2(c, b);
  for (int i = 1; i <= 7; ++i) c.push_back("zeta_y_hat_" + std::to_string(i));
  for (const char* b : {"norm_e_p", "norm_e_pt", "v1", "lambda_min"}) c.emplace_back(b);
  add2(c, "constraint_margin");
  for (const char* b : {"p_dot", "p_h_dot", "p_h_ddot"}) add2(c, b);
  c.emplace_back("window_count");
  c.emplace_back("jp_damped");
  if (with_diagnostics) {
    for (const char* b : {"p1", "p2", "p3", "skew_residual"}) c.emplace_back(b);
    add2(c, "safe_radius");
  }
  return c;
}

void write_log_csv(std::ostream& os, const std::vector<LogRecord>& log,
                   const std::vector<DiagnosticsRecord>* diagnostics) {
  const bool diag = diagnostics != nullptr;
  if (diag && diagnostics->size() != log.size())
    throw std::invalid_argument("write_log_csv: diagnostics length does not match log");

  os << kCsvSchemaLine << '\n';
  const auto cols = csv_columns(diag);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';

  std::string line;
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    line = fmt::format("{}", r.t);
    for (const Vec2d* v : {&r.theta, &r.theta_dot, &r.p, &r.p_h, &r.p_hT, &r.e_p, &r.e_pT, &r.eta, &r.eta_T, &r.tau,
                           &r.zeta_j_hat})
      put2(line, *v);
    for (int i = 0; i < 7; ++i) put(line, r.zeta_y_hat(i));
    put(line, r.norm_e_p);
    put(line, r.norm_e_pT);
    put(line, r.V1);
    put(line, r.lambda_min);
    put2(line, r.constraint_margin);
    put2(line, r.p_dot);
    put2(line, r.p_h_dot);
    put2(line, r.p_h_ddot);
    put(line, static_cast<double>(r.window_count));
    put(line, r.jp_damped ? 1.0 : 0.0);
    if (diag) {
      const auto& d = (*diagnostics)[k];
      put(line, d.P1);
      put(line, d.P2);
      put(line, d.P3);
      put(line, d.skew_residual);
      put2(line, d.safe_radius);
    }
    os << line << '\n';
  }
}

void write_excitation_csv(std::ostream& os, const std::vector<LogRecord>& log) {
  os << "t,lambda_min,window_count\n";
  for (const auto& r : log) os << fmt::format("{},{},{}\n", r.t, r.lambda_min, r.window_count);
}

void write_summary(std::ostream& os, const RunSummary& s) {
  auto kv = [&](const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [](double v) { return fmt::format("{}", v); };
  kv("status", to_string(s.status));
  if (!s.message.empty()) kv("message", s.message);
  kv("steps", std::to_string(s.steps));
  kv("t_end", num(s.t_end));
  kv("final_norm_e_p", num(s.final_norm_e_p));
  kv("final_norm_e_pt", num(s.final_norm_e_pT));
  kv("peak_norm_e_p", num(s.peak_norm_e_p));
  kv("peak_norm_e_pt", num(s.peak_norm_e_pT));
  kv("max_abs_e_p_1", num(s.max_abs_e_p(0)));
  kv("max_abs_e_p_2", num(s.max_abs_e_p(1)));
  kv("min_constraint_margin_1", num(s.min_constraint_margin(0)));
  kv("min_constraint_margin_2", num(s.min_constraint_margin(1)));
  kv("zeta_j_final_1", num(s.zeta_j_final(0)));
  kv("zeta_j_final_2", num(s.zeta_j_final(1)));
  for (int i = 0; i < 7; ++i) kv("zeta_y_final_" + std::to_string(i + 1), num(s.zeta_y_final(i)));
  kv("lambda_min_final", num(s.lambda_min_final));
  kv("t_first_excited", s.t_first_excited ? num(*s.t_first_excited) : "none");
  kv("damped_steps", std::to_string(s.damped_steps));
  kv("violation_axis", std::to_string(s.violation_axis + (s.violation_axis >= 0 ? 1 : 0)));
  kv("wall_clock_s", num(s.wall_clock_s));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.schema.empty()) t.schema = line;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(t.header.size());
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw std::runtime_error("CSV row width does not match header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

void write_outputs(const RunResult& result, const SimConfig& cfg, const std::filesystem::path& dir,
                   bool with_diagnostics) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  auto close = [&](std::ofstream& f, const char* name) {
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + (dir / name).string());
  };

  {
    auto f = open("log.csv");
    if (with_diagnostics) {
      const auto diag = compute_diagnostics(result.log, cfg);
      write_log_csv(f, result.log, &diag);
    } else {
      write_log_csv(f, result.log);
    }
    close(f, "log.csv");
  }
  {
    auto f = open("excitation.csv");
    write_excitation_csv(f, result.log);
    close(f, "excitation.csv");
  }
  {
    auto f = open("summary.txt");
    write_summary(f, result.summary);
    close(f, "summary.txt");
  }
  {
    auto f = open("config.ini");
    f << write_config(cfg);
    close(f, "config.ini");
  }
}

int execute(const SimConfig& cfg, const std::filesystem::path& out_dir, const ExecuteOptions& opt,
            std::ostream& log_stream) {
  RunResult result;
  try {
    result = run(cfg);
  } catch (const WorkspaceError& e) {
    log_stream << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const BarrierViolation& e) {
    log_stream << "barrier violation at start: " << e.what() << '\n';
    return kExitBarrier;
  }

  try {
    write_outputs(result, cfg, out_dir, opt.diagnostics);
  } catch (const std::exception& e) {
    log_stream << "error: " << e.what() << '\n';
    return kExitIo;
  }

  const auto& s = result.summary;
  if (!opt.quiet) {
    log_stream << fmt::format("status {} after {} steps ({:.3f} s wall)\n", to_string(s.status), s.steps,
                              s.wall_clock_s);
    log_stream << fmt::format("  |e_p| final {:.5f} peak {:.5f}   |e_pT| final {:.5f} peak {:.5f}\n",
                              s.final_norm_e_p, s.peak_norm_e_p, s.final_norm_e_pT, s.peak_norm_e_pT);
    log_stream << fmt::format("  zeta_j final [{:.5f}, {:.5f}]   min margin [{:.4f}, {:.4f}]\n", s.zeta_j_final(0),
                              s.zeta_j_final(1), s.min_constraint_margin(0), s.min_constraint_margin(1));
    if (!s.message.empty()) log_stream << "  " << s.message << '\n';
    log_stream << "  outputs in " << out_dir.string() << '\n';
  }

  switch (s.status) {
    case RunStatus::completed:
      return kExitOk;
    case RunStatus::barrier_violation:
      return kExitBarrier;
    case RunStatus::numeric_failure:
      return kExitNumeric;
  }
  return kExitNumeric;
}

}  // namespace tsync
