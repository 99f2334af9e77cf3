#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "icann/refmodels.hpp"

namespace icann {

namespace {

const char* const kColumns[] = {"time", "C11", "C22", "C33", "sigma11"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace

std::string format_dataset(const Dataset& ds) {
  ds.validate();
  std::ostringstream out;
  for (const auto& [k, v] : ds.provenance)
    if (k != "normalization") out << "# " << k << '=' << v << '\n';
  out << "# normalization=" << sci(ds.normalization) << '\n';
  out << "time,C11,C22,C33,sigma11\n";
  for (std::size_t i = 0; i < ds.size(); ++i)
    out << sci(ds.time[i]) << ',' << sci(ds.C[i].xx()) << ',' << sci(ds.C[i].yy()) << ',' << sci(ds.C[i].zz())
        << ',' << sci(ds.sigma11[i]) << '\n';
  return out.str();
}

void save_dataset(const Dataset& ds, const std::string& file) {
  const std::string text = format_dataset(ds);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write dataset " + file);
  out << text;
}

Dataset parse_dataset(const std::string& text, const std::string& name) {
  Dataset ds;
  ds.name = name;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int col_index[5] = {-1, -1, -1, -1, -1};
  std::size_t n_cols = 0;
  bool have_header = false;
  bool have_norm = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string kv = trim(t.substr(1));
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(kv.substr(0, eq)), value = trim(kv.substr(eq + 1));
      if (key == "normalization") {
        char* end = nullptr;
        ds.normalization = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0') throw ParseError("bad normalization value", line_no, 1);
        have_norm = true;
      } else {
        ds.provenance.emplace_back(key, value);
      }
      continue;
    }
    const std::vector<std::string> cells = split(line);
    if (!have_header) {
      n_cols = cells.size();
      for (int c = 0; c < 5; ++c) {
        for (std::size_t j = 0; j < cells.size(); ++j)
          if (cells[j] == kColumns[c]) col_index[c] = int(j);
        if (col_index[c] < 0) throw ParseError(std::string("missing column '") + kColumns[c] + "'", line_no, 1);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != n_cols)
      throw ParseError("expected " + std::to_string(n_cols) + " fields, found " + std::to_string(cells.size()),
                       line_no, std::min(cells.size(), n_cols) + 1);
    double v[5];
    for (int c = 0; c < 5; ++c) {
      const std::string& s = cells[col_index[c]];
      char* end = nullptr;
      errno = 0;
      v[c] = std::strtod(s.c_str(), &end);
      if (s.empty() || end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v[c]))
        throw ParseError(std::string("invalid number in column '") + kColumns[c] + "'", line_no,
                         std::size_t(col_index[c]) + 1);
    }
    ds.time.push_back(v[0]);
    ds.C.push_back(Sym3::diag(v[1], v[2], v[3]));
    ds.sigma11.push_back(v[4]);
  }
  if (!have_header) throw ParseError("missing header line", line_no + 1, 1);
  if (!have_norm) ds.normalization = max_abs_stress(ds);
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError("cannot open dataset " + file);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = file;
  const auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  const auto dot = name.rfind('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_dataset(buf.str(), name);
}

}  // namespace icann
