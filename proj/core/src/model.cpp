#include "ovb/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ovb {

std::string to_string(Estimand e) {
  switch (e) {
    case Estimand::LATE: return "late";
    case Estimand::LATT: return "latt";
    case Estimand::PLIVM: return "plivm";
  }
  return "late";
}

std::optional<Estimand> estimand_from_string(const std::string& s) {
  if (s == "late" || s == "LATE") return Estimand::LATE;
  if (s == "latt" || s == "LATT") return Estimand::LATT;
  if (s == "plivm" || s == "PLIVM") return Estimand::PLIVM;
  return std::nullopt;
}

Matrix Matrix::select_rows(const std::vector<std::size_t>& idx) const {
  Matrix out(idx.size(), cols_);
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(r, c) = (*this)(idx[r], c);
  return out;
}

Matrix Matrix::select_cols(const std::vector<std::size_t>& idx) const {
  Matrix out(rows_, idx.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) out(r, c) = (*this)(r, idx[c]);
  return out;
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return j;
  return std::nullopt;
}

Mat5 Mat5::identity() {
  Mat5 m;
  for (int i = 0; i < 5; ++i) m(i, i) = 1.0;
  return m;
}

Mat5 Mat5::diagonal(const Vec5& d) {
  Mat5 m;
  for (int i = 0; i < 5; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

Vec5 Mat5::multiply(const Vec5& v) const {
  Vec5 out{};
  for (int i = 0; i < 5; ++i) {
    double s = 0.0;
    for (int j = 0; j < 5; ++j) s += (*this)(i, j) * v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

double Mat5::quad_form(const Vec5& u, const Vec5& v) const {
  Vec5 mv = multiply(v);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += u[static_cast<std::size_t>(i)] * mv[static_cast<std::size_t>(i)];
  return s;
}

double ShortEstimates::se(int param) const {
  if (n == 0) return 0.0;
  double var = omega(param, param);
  return var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
}

std::vector<std::string> SensitivityConfig::validate() const {
  std::vector<std::string> errors;
  if (!(c_alpha >= 0.0) || !std::isfinite(c_alpha)) errors.push_back("c_alpha must be >= 0");
  if (!(c_y >= 0.0) || !std::isfinite(c_y)) errors.push_back("c_y must be >= 0");
  if (!(c_d >= 0.0) || !std::isfinite(c_d)) errors.push_back("c_d must be >= 0");
  if (!(rho_y_abs >= 0.0 && rho_y_abs <= 1.0)) errors.push_back("rho_y_abs must lie in [0, 1]");
  if (!(rho_d_abs >= 0.0 && rho_d_abs <= 1.0)) errors.push_back("rho_d_abs must lie in [0, 1]");
  return errors;
}

namespace {

bool is_binary01(double v) { return v == 0.0 || v == 1.0; }

void check_finite(const std::vector<double>& v, const char* label,
                  std::vector<std::string>& errors) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      errors.push_back(std::string(label) + " has a non-finite value at row " +
                       std::to_string(i));
      return;  // one report per column is enough
    }
  }
}

}  // namespace

std::vector<std::string> validate(const Dataset& data, Estimand estimand) {
  std::vector<std::string> errors;
  const std::size_t n = data.y.size();
  if (data.d.size() != n || data.z.size() != n || (data.x.cols() > 0 && data.x.rows() != n) ||
      (data.x.cols() == 0 && data.x.rows() != 0 && data.x.rows() != n)) {
    errors.push_back("column length mismatch: y=" + std::to_string(n) +
                     " d=" + std::to_string(data.d.size()) + " z=" + std::to_string(data.z.size()) +
                     " x=" + std::to_string(data.x.rows()));
    return errors;  // later checks assume aligned columns
  }
  if (data.names.size() != data.x.cols())
    errors.push_back("covariate name count does not match matrix width");
  if (n < 4) errors.push_back("need at least 4 observations, got " + std::to_string(n));

  check_finite(data.y, "y", errors);
  check_finite(data.d, "d", errors);
  check_finite(data.z, "z", errors);
  for (std::size_t j = 0; j < data.x.cols(); ++j) {
    for (std::size_t i = 0; i < data.x.rows(); ++i) {
      if (!std::isfinite(data.x(i, j))) {
        errors.push_back("covariate '" + (j < data.names.size() ? data.names[j] : std::to_string(j)) +
                         "' has a non-finite value at row " + std::to_string(i));
        break;
      }
    }
  }

  if (estimand == Estimand::LATE || estimand == Estimand::LATT) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_binary01(data.z[i])) {
        errors.push_back("instrument must be binary for " + to_string(estimand) +
                         "; z[" + std::to_string(i) + "]=" + format_double(data.z[i]));
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_binary01(data.d[i])) {
        errors.push_back("treatment must be binary for " + to_string(estimand) +
                         "; d[" + std::to_string(i) + "]=" + format_double(data.d[i]));
        break;
      }
    }
    bool any0 = false, any1 = false;
    for (double zi : data.z) {
      if (zi == 0.0) any0 = true;
      if (zi == 1.0) any1 = true;
    }
    if (n > 0 && !(any0 && any1))
      errors.push_back("instrument must take both values 0 and 1 (P(Z=1) in (0,1))");
  }
  return errors;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, std::size_t row, const std::string& col) {
  const std::string t = trim(field);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::runtime_error("csv: cannot parse value '" + field + "' in column '" + col +
                             "' at data row " + std::to_string(row));
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path + "' is empty");
  const auto header = split_csv_line(line);

  long iy = -1, id = -1, iz = -1;
  std::vector<std::size_t> cov_idx;
  std::vector<std::string> cov_names;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string name = trim(header[j]);
    if (name == "y") iy = static_cast<long>(j);
    else if (name == "d") id = static_cast<long>(j);
    else if (name == "z") iz = static_cast<long>(j);
    else {
      cov_idx.push_back(j);
      cov_names.push_back(name);
    }
  }
  if (iy < 0) throw std::runtime_error("csv: required column 'y' missing in '" + path + "'");
  if (id < 0) throw std::runtime_error("csv: required column 'd' missing in '" + path + "'");
  if (iz < 0) throw std::runtime_error("csv: required column 'z' missing in '" + path + "'");

  Dataset data;
  data.names = cov_names;
  std::vector<double> xflat;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    data.y.push_back(parse_double(fields[static_cast<std::size_t>(iy)], row, "y"));
    data.d.push_back(parse_double(fields[static_cast<std::size_t>(id)], row, "d"));
    data.z.push_back(parse_double(fields[static_cast<std::size_t>(iz)], row, "z"));
    for (std::size_t k = 0; k < cov_idx.size(); ++k)
      xflat.push_back(parse_double(fields[cov_idx[k]], row, cov_names[k]));
    ++row;
  }
  data.x = Matrix(row, cov_idx.size());
  data.x.data() = std::move(xflat);
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write '" + path + "'");
  out << "y,d,z";
  for (const auto& name : data.names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]) << ',' << format_double(data.d[i]) << ','
        << format_double(data.z[i]);
    for (std::size_t j = 0; j < data.x.cols(); ++j) out << ',' << format_double(data.x(i, j));
    out << '\n';
  }
}

std::vector<CovariateGroup> parse_group_text(const std::string& text) {
  std::vector<CovariateGroup> groups;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("groups: line " + std::to_string(lineno) +
                               " is missing ':' between name and columns");
    CovariateGroup g;
    g.name = trim(line.substr(0, colon));
    std::string cols = line.substr(colon + 1);
    std::string item;
    std::istringstream cs(cols);
    while (std::getline(cs, item, ',')) {
      item = trim(item);
      if (!item.empty()) g.columns.push_back(item);
    }
    if (g.name.empty() || g.columns.empty())
      throw std::runtime_error("groups: line " + std::to_string(lineno) +
                               " must be 'name: col1,col2,...'");
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<CovariateGroup> parse_group_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("groups: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_group_text(ss.str());
}

}  // namespace ovb
