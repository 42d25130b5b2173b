#include "brownne/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "brownne/error.hpp"

#ifndef BROWNNE_BUILD_ID
#define BROWNNE_BUILD_ID "unknown"
#endif

namespace brownne {

ReportTable::ReportTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
  std::set<std::string> unique(columns_.begin(), columns_.end());
  if (unique.size() != columns_.size()) throw ContractError("report columns must be unique");
  if (columns_.empty()) throw ContractError("report needs at least one column");
}

void ReportTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw ContractError("row has " + std::to_string(row.size()) + " cells, table has " +
                        std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

std::size_t ReportTable::column_index(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) throw ContractError("no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> ReportTable::numeric_column(const std::string& name) const {
  const auto c = column_index(name);
  std::vector<double> out;
  for (const auto& row : rows_) {
    if (const auto* d = std::get_if<double>(&row[c])) {
      out.push_back(*d);
    } else if (const auto* i = std::get_if<long long>(&row[c])) {
      out.push_back(static_cast<double>(*i));
    } else {
      throw ContractError("column '" + name + "' is not numeric");
    }
  }
  return out;
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const ReportTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns().size(); ++i) {
    out += (i ? "," : "") + quote(table.columns()[i]);
  }
  out += "\n";
  for (const auto& row : table.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(format_cell(row[i]));
    out += "\n";
  }
  out += "# seed=" + std::to_string(table.provenance.seed) + "\n";
  out += "# build=" + table.provenance.build_id + "\n";
  out += "# timestamp=" + table.provenance.timestamp + "\n";
  return out;
}

void emit_csv(const ReportTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << to_csv(table);
  if (!out) throw IoError("failed while writing '" + path + "'");
}

std::vector<std::string> emit_svg(const ReportTable& table, const std::string& x_col,
                                  const std::vector<std::string>& y_cols, const std::string& path,
                                  bool log_y) {
  if (y_cols.empty()) throw ContractError("SVG needs at least one y column");
  const auto xs = table.numeric_column(x_col);
  std::vector<std::vector<double>> ys;
  std::vector<std::string> warnings;
  for (const auto& name : y_cols) {
    auto col = table.numeric_column(name);
    if (log_y) {
      double smallest = std::numeric_limits<double>::infinity();
      for (double v : col) {
        if (v > 0.0) smallest = std::min(smallest, v);
      }
      if (!std::isfinite(smallest)) smallest = 1.0;
      bool clamped = false;
      for (double& v : col) {
        if (!(v > 0.0)) {
          v = smallest;
          clamped = true;
        }
      }
      if (clamped) warnings.push_back("column '" + name + "' has nonpositive values clamped for log scale");
      for (double& v : col) v = std::log10(v);
    }
    ys.push_back(std::move(col));
  }

  const double width = 640, height = 420, left = 70, right = 160, top = 20, bottom = 50;
  auto bounds = [](const std::vector<double>& v) {
    if (v.empty()) return std::pair{0.0, 1.0};
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    double a = *lo, b = *hi;
    if (a == b) a -= 0.5, b += 0.5;
    return std::pair{a, b};
  };
  const auto [x0, x1] = bounds(xs);
  std::vector<double> all_y;
  for (const auto& c : ys) all_y.insert(all_y.end(), c.begin(), c.end());
  const auto [y0, y1] = bounds(all_y);
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-size=\"13\">" << x_col << "</text>\n";
  svg << "<text x=\"" << left - 5 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\" font-size=\"11\">"
      << (log_y ? "1e" : "") << y1 << "</text>\n";
  svg << "<text x=\"" << left - 5 << "\" y=\"" << height - bottom << "\" text-anchor=\"end\" font-size=\"11\">"
      << (log_y ? "1e" : "") << y0 << "</text>\n";
  svg << "<text x=\"" << left << "\" y=\"" << height - bottom + 15 << "\" font-size=\"11\">" << x0 << "</text>\n";
  svg << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 15
      << "\" text-anchor=\"end\" font-size=\"11\">" << x1 << "</text>\n";
  for (std::size_t s = 0; s < ys.size(); ++s) {
    const char* color = palette[s % std::size(palette)];
    if (xs.size() == 1) {
      svg << "<circle cx=\"" << px(xs[0]) << "\" cy=\"" << py(ys[s][0]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < xs.size(); ++i) svg << (i ? " " : "") << px(xs[i]) << "," << py(ys[s][i]);
      svg << "\"/>\n";
    }
    const double ly = top + 15 + 18.0 * s;
    svg << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text class=\"legend\" x=\"" << width - right + 35 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">"
        << y_cols[s] << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg.str();
  if (!out) throw IoError("failed while writing '" + path + "'");
  return warnings;
}

std::string build_id() { return BROWNNE_BUILD_ID; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace brownne
