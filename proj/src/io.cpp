#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "acmorse/io.hpp"

namespace acmorse {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": '" + s + "' is not a number");
  }
}

std::string field_header(int dim) {
  std::string h;
  for (int a = 0; a < dim; ++a) h += "i" + std::to_string(a) + ",";
  return h + "value";
}

}  // namespace

std::string format_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_field_csv(const std::string& path, const ScalarField& u) {
  if (!u.grid) throw std::invalid_argument("write_field_csv: field has no grid");
  const TorusGrid& g = *u.grid;
  std::ofstream out = open_out(path);
  out << field_header(g.dim()) << "\n";
  for (std::int64_t i = 0; i < g.node_count(); ++i) {
    const auto mi = g.multi_index(i);
    for (int a = 0; a < g.dim(); ++a) out << mi[a] << ",";
    out << format_full(u.values[i]) << "\n";
  }
}

ScalarField read_field_csv(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open field file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != field_header(grid->dim()))
    throw std::invalid_argument(path + ":1: expected header '" + field_header(grid->dim()) +
                                "', got '" + line + "'");
  Eigen::VectorXd v(grid->node_count());
  std::int64_t row = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (row >= grid->node_count())
      throw std::invalid_argument(where + ": more rows than grid nodes");
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != grid->dim() + 1)
      throw std::invalid_argument(where + ": expected " + std::to_string(grid->dim() + 1) +
                                  " columns");
    const auto mi = grid->multi_index(row);
    for (int a = 0; a < grid->dim(); ++a)
      if (static_cast<std::int64_t>(parse_number(cells[a], where)) != mi[a])
        throw std::invalid_argument(where + ": node index out of lexicographic order");
    v[row] = parse_number(cells.back(), where);
    ++row;
  }
  if (row != grid->node_count())
    throw std::invalid_argument(path + ": " + std::to_string(row) + " rows for " +
                                std::to_string(grid->node_count()) + " grid nodes");
  return ScalarField(grid, std::move(v));
}

MetricPtr read_tensor_metric_csv(const std::string& path, const GridPtr& grid) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tensor file '" + path + "'");
  const int d = grid->dim();
  const int ncomp = d * (d + 1) / 2;
  std::string expect;
  for (int a = 0; a < d; ++a) expect += "i" + std::to_string(a) + ",";
  {
    bool first = true;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        if (!first) expect += ",";
        expect += "g" + std::to_string(i) + std::to_string(j);
        first = false;
      }
  }
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expect)
    throw std::invalid_argument(path + ":1: expected header '" + expect + "', got '" + line +
                                "'");
  std::vector<double> comps(static_cast<std::size_t>(grid->node_count()) * d * d, 0.0);
  std::int64_t row = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    if (row >= grid->node_count())
      throw std::invalid_argument(where + ": more rows than grid nodes");
    const auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != d + ncomp)
      throw std::invalid_argument(where + ": expected " + std::to_string(d + ncomp) +
                                  " columns");
    const auto mi = grid->multi_index(row);
    for (int a = 0; a < d; ++a)
      if (static_cast<std::int64_t>(parse_number(cells[a], where)) != mi[a])
        throw std::invalid_argument(where + ": node index out of lexicographic order");
    int c = d;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double x = parse_number(cells[c++], where);
        comps[static_cast<std::size_t>(row) * d * d + i * d + j] = x;
        comps[static_cast<std::size_t>(row) * d * d + j * d + i] = x;
      }
    ++row;
  }
  if (row != grid->node_count())
    throw std::invalid_argument(path + ": " + std::to_string(row) + " rows for " +
                                std::to_string(grid->node_count()) + " grid nodes");
  return MetricField::from_tensor(grid, std::move(comps));
}

void write_spectrum_csv(const std::string& path, const SpectrumResult& spec) {
  std::ofstream out = open_out(path);
  out << "index,eigenvalue,cluster\n";
  const auto clusters = spec.cluster_ids();
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
    out << i << "," << format_full(spec.eigenvalues[i]) << "," << clusters[i] << "\n";
}

void write_branch_csv(const std::string& path, const Branch& branch) {
  std::ofstream out = open_out(path);
  out << "arclength,epsilon,supnorm,energy,index,nullity,event\n";
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const SolutionPoint& p = branch.points[i];
    std::string event;
    for (const BranchEvent& e : branch.events)
      if (std::abs(e.arclength - branch.arclengths[i]) < 1e-12 && event.empty()) event = e.kind;
    out << format_full(branch.arclengths[i]) << "," << format_full(p.epsilon) << ","
        << format_full(p.u.sup_norm()) << "," << format_full(p.energy) << "," << p.index << ","
        << p.nullity << "," << event << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& tr,
                          const std::vector<SolutionPoint>& known, const Eigen::VectorXd& w) {
  std::ofstream out = open_out(path);
  out << "t,energy,supnorm,nearest\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    double nearest = 0.0;
    if (!known.empty()) nearest = nearest_solution(known, tr.states[i], w).second;
    out << format_full(tr.times[i]) << "," << format_full(tr.energies[i]) << ","
        << format_full(tr.states[i].sup_norm()) << "," << format_full(nearest) << "\n";
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
}

std::string branch_diagram_svg(const std::vector<Branch>& branches,
                               const Eigen::VectorXd& sign_field, const Eigen::VectorXd& w) {
  const int width = 800, height = 520, margin = 50;
  double elo = 1e300, ehi = -1e300, ylo = 1e300, yhi = -1e300;
  std::vector<std::vector<std::pair<double, double>>> curves;
  std::vector<std::vector<int>> indices;
  for (const Branch& b : branches) {
    std::vector<std::pair<double, double>> c;
    std::vector<int> ix;
    for (const SolutionPoint& p : b.points) {
      const double s = dot_w(p.u.values, sign_field, w);
      const double y = (s < 0 ? -1.0 : 1.0) * p.u.sup_norm();
      c.emplace_back(p.epsilon, y);
      ix.push_back(p.index);
      elo = std::min(elo, p.epsilon);
      ehi = std::max(ehi, p.epsilon);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
    curves.push_back(std::move(c));
    indices.push_back(std::move(ix));
  }
  if (curves.empty() || elo > ehi) {
    elo = 0;
    ehi = 1;
    ylo = -1;
    yhi = 1;
  }
  if (ehi - elo < 1e-12) ehi = elo + 1e-12;
  if (yhi - ylo < 1e-12) {
    yhi += 0.5;
    ylo -= 0.5;
  }
  const char* palette[8] = {"#1b6ca8", "#c0392b", "#1e8449", "#8e44ad",
                            "#d68910", "#148f77", "#7b241c", "#2c3e50"};
  auto px = [&](double e) {
    return margin + (e - elo) / (ehi - elo) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - ylo) / (yhi - ylo) * (height - 2 * margin);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\""
     << width - margin << "\" y2=\"" << height - margin
     << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
     << "\" font-size=\"13\" text-anchor=\"middle\">epsilon</text>\n";
  os << "<text x=\"14\" y=\"" << height / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
     << height / 2 << ")\">signed sup norm</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double e = elo + (ehi - elo) * t / 4.0;
    const double y = ylo + (yhi - ylo) * t / 4.0;
    os << "<text x=\"" << num(px(e)) << "\" y=\"" << height - margin + 16
       << "\" font-size=\"11\" text-anchor=\"middle\">" << num(e) << "</text>\n";
    os << "<text x=\"" << margin - 6 << "\" y=\"" << num(py(y) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << num(y) << "</text>\n";
  }
  for (std::size_t b = 0; b < curves.size(); ++b) {
    const auto& c = curves[b];
    if (c.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"#999999\" stroke-width=\"1\" points=\"";
      for (const auto& [e, y] : c) os << num(px(e)) << "," << num(py(y)) << " ";
      os << "\"/>\n";
    }
    for (std::size_t i = 0; i < c.size(); ++i)
      os << "<circle cx=\"" << num(px(c[i].first)) << "\" cy=\"" << num(py(c[i].second))
         << "\" r=\"2.2\" fill=\"" << palette[indices[b][i] & 7] << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace acmorse
