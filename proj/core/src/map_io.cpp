#include "qstrat/map_io.hpp"

#include "qstrat/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qstrat {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      tokens.clear();
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }
  long line() const { return line_; }

  double number(const std::string& t) const {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw InputError("'" + t + "' is not a number", line_);
    }
    if (pos != t.size()) throw InputError("'" + t + "' is not a number", line_);
    if (!std::isfinite(v)) throw InputError("non-finite value '" + t + "'", line_);
    return v;
  }
  long integer(const std::string& t) const {
    double v = number(t);
    if (v != std::floor(v) || std::fabs(v) > 1e15) throw InputError("'" + t + "' is not an integer", line_);
    return static_cast<long>(v);
  }

 private:
  std::istream& in_;
  long line_ = 0;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'", 0);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'", 0);
  return out;
}

Vec read_vec(const LineReader& r, const std::vector<std::string>& t, std::size_t from, int count) {
  Vec v(count);
  for (int i = 0; i < count; ++i) v[i] = r.number(t[from + i]);
  return v;
}

void write_vec(std::ostream& out, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_number(v[i]);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MapFileData parse_map(std::istream& in) {
  LineReader rd(in);
  std::vector<std::string> t;
  if (!rd.next(t)) throw InputError("empty map file", 1);
  if (t.size() != 5) throw InputError("header must be 'm n R h count'", rd.line());
  MapFileData d;
  d.domain.m = static_cast<int>(rd.integer(t[0]));
  d.n = static_cast<int>(rd.integer(t[1]));
  d.domain.R = rd.number(t[2]);
  d.domain.h = rd.number(t[3]);
  long count = rd.integer(t[4]);
  const int m = d.domain.m, n = d.n;
  if (m < 2 || n < 1 || count < 1) throw InputError("header needs m >= 2, n >= 1, count >= 1", rd.line());
  try {
    d.domain.validate();
  } catch (const ConfigError& e) {
    throw InputError(e.what(), rd.line());
  }
  const double h = d.domain.h;
  bool with_res = false;
  Vec origin;
  while (rd.next(t)) {
    long line = rd.line();
    if (static_cast<long>(d.coords.size()) >= count)
      throw InputError("more node lines than the declared count " + std::to_string(count), line);
    bool first = d.coords.empty();
    std::size_t plain = m + n, full = m + 2 * n;
    if (first) {
      if (t.size() != plain && t.size() != full)
        throw InputError("expected " + std::to_string(plain) + " or " + std::to_string(full) + " fields, got " +
                             std::to_string(t.size()),
                         line);
      with_res = t.size() == full;
    } else if (t.size() != (with_res ? full : plain)) {
      throw InputError("expected " + std::to_string(with_res ? full : plain) + " fields, got " +
                           std::to_string(t.size()),
                       line);
    }
    Vec x = read_vec(rd, t, 0, m);
    if (first) {
      origin = Vec(m);
      for (int i = 0; i < m; ++i) origin[i] = x[i] - h * std::round(x[i] / h);
    }
    for (int i = 0; i < m; ++i) {
      double q = (x[i] - origin[i]) / h;
      if (std::fabs(q - std::round(q)) > 1e-6) throw InputError("node is not on the lattice of spacing h", line);
    }
    if (x.norm() > d.domain.R * (1.0 + 1e-12)) throw InputError("node lies outside the ball of radius R", line);
    d.coords.push_back(x);
    d.values.push_back(read_vec(rd, t, m, n));
    if (with_res) d.residuals.push_back(read_vec(rd, t, m + n, n));
  }
  if (static_cast<long>(d.coords.size()) != count)
    throw InputError("declared " + std::to_string(count) + " nodes but found " + std::to_string(d.coords.size()),
                     rd.line() + 1);
  if (origin.size() == m && origin.norm() > 1e-12 * h) d.domain.origin = origin;
  return d;
}

MapFileData read_map_data(const std::string& path) {
  auto in = open_in(path);
  return parse_map(in);
}

SampledMap map_from_data(const MapFileData& d) {
  return SampledMap::from_nodes(d.domain, d.n, d.coords, d.values, d.residuals.empty() ? nullptr : &d.residuals);
}

SampledMap read_map(const std::string& path) { return map_from_data(read_map_data(path)); }

void write_map(std::ostream& out, const SampledMap& map, bool residuals) {
  const GridDomain& d = map.domain();
  const int n = map.n();
  std::vector<Vec> xs;
  std::vector<std::vector<long>> ids;
  for_each_lattice_node(d, Vec::Zero(d.m), d.R * (1.0 + 1e-12), [&](const std::vector<long>& id, const Vec& x) {
    xs.push_back(x);
    ids.push_back(id);
  });
  out << d.m << ' ' << n << ' ' << format_number(d.R) << ' ' << format_number(d.h) << ' ' << xs.size() << '\n';
  Vec u(n), f(n);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    map.value_at(xs[i].data(), u.data());
    if (residuals && map.analytic()) {
      Vec y = xs[i];
      if (map.singular_distance(y.data()) < 1e-12) y[0] += d.h / 100.0;
      map.eval(y.data(), nullptr, nullptr, f.data());
    } else if (residuals) {
      {
        long j = map.dense_index(ids[i]);
        const DenseField& D = map.dense();
        for (int a = 0; a < n; ++a) f[a] = j >= 0 ? D.f[j * n + a] : 0.0;
      }
    }
    write_vec(out, xs[i]);
    out << ' ';
    write_vec(out, u);
    if (residuals) {
      out << ' ';
      write_vec(out, f);
    }
    out << '\n';
  }
}

void write_map(const std::string& path, const SampledMap& map, bool residuals) {
  auto out = open_out(path);
  write_map(out, map, residuals);
}

DiscreteMeasure parse_measure(std::istream& in) {
  LineReader rd(in);
  std::vector<std::string> t;
  if (!rd.next(t)) throw InputError("empty measure file", 1);
  if (t.size() != 2) throw InputError("header must be 'm count'", rd.line());
  int m = static_cast<int>(rd.integer(t[0]));
  long count = rd.integer(t[1]);
  if (m < 1 || count < 0) throw InputError("header needs m >= 1, count >= 0", rd.line());
  DiscreteMeasure mu(m);
  long seen = 0;
  while (rd.next(t)) {
    if (seen >= count) throw InputError("more atom lines than the declared count", rd.line());
    if (t.size() != static_cast<std::size_t>(m + 1))
      throw InputError("expected " + std::to_string(m + 1) + " fields, got " + std::to_string(t.size()), rd.line());
    Vec x = read_vec(rd, t, 0, m);
    double w = rd.number(t[m]);
    if (w < 0.0) throw InputError("negative atom weight", rd.line());
    mu.add(x, w);
    ++seen;
  }
  if (seen != count)
    throw InputError("declared " + std::to_string(count) + " atoms but found " + std::to_string(seen), rd.line() + 1);
  return mu;
}

DiscreteMeasure read_measure(const std::string& path) {
  auto in = open_in(path);
  return parse_measure(in);
}

void write_measure(std::ostream& out, const DiscreteMeasure& mu) {
  out << mu.dim() << ' ' << mu.size() << '\n';
  for (const Atom& a : mu.atoms()) {
    write_vec(out, a.x);
    out << ' ' << format_number(a.w) << '\n';
  }
}

BallCovering parse_covering(std::istream& in) {
  LineReader rd(in);
  std::vector<std::string> t;
  if (!rd.next(t)) throw InputError("empty covering file", 1);
  if (t.size() != 3) throw InputError("header must be 'm k count'", rd.line());
  BallCovering c;
  c.m = static_cast<int>(rd.integer(t[0]));
  c.k = static_cast<int>(rd.integer(t[1]));
  long count = rd.integer(t[2]);
  if (c.m < 1 || c.k < 0 || c.k > c.m || count < 0) throw InputError("header needs m >= 1, 0 <= k <= m", rd.line());
  while (rd.next(t)) {
    if (static_cast<long>(c.balls.size()) >= count)
      throw InputError("more ball lines than the declared count", rd.line());
    if (t.size() != static_cast<std::size_t>(c.m + 2))
      throw InputError("expected " + std::to_string(c.m + 2) + " fields, got " + std::to_string(t.size()), rd.line());
    Ball b;
    b.center = read_vec(rd, t, 0, c.m);
    b.radius = rd.number(t[c.m]);
    if (!(b.radius > 0.0)) throw InputError("radius must be positive", rd.line());
    try {
      b.label = parse_label(t[c.m + 1]);
    } catch (const ArgumentError& e) {
      throw InputError(e.what(), rd.line());
    }
    c.balls.push_back(std::move(b));
  }
  if (static_cast<long>(c.balls.size()) != count)
    throw InputError("declared " + std::to_string(count) + " balls but found " + std::to_string(c.balls.size()),
                     rd.line() + 1);
  return c;
}

BallCovering read_covering(const std::string& path) {
  auto in = open_in(path);
  return parse_covering(in);
}

void write_covering(std::ostream& out, const BallCovering& c) {
  out << c.m << ' ' << c.k << ' ' << c.balls.size() << '\n';
  for (const Ball& b : c.balls) {
    write_vec(out, b.center);
    out << ' ' << format_number(b.radius) << ' ' << to_string(b.label) << '\n';
  }
}

void write_covering(const std::string& path, const BallCovering& c) {
  auto out = open_out(path);
  write_covering(out, c);
}

namespace {
void center_header(std::ostream& out, int m) {
  for (int i = 0; i < m; ++i) out << (i ? "," : "") << "x" << i;
}
void center_cells(std::ostream& out, const Vec& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? "," : "") << format_number(x[i]);
}
}  // namespace

void write_profile_csv(std::ostream& out, const std::vector<EnergyProfile>& profiles) {
  int m = profiles.empty() ? 0 : static_cast<int>(profiles[0].center.size());
  center_header(out, m);
  out << (m ? "," : "") << "scale,theta,theta_hat,W,defect\n";
  for (const auto& p : profiles) {
    for (std::size_t j = 0; j < p.scales.size(); ++j) {
      center_cells(out, p.center);
      out << (m ? "," : "") << format_number(p.scales[j]) << ',' << format_number(p.theta[j]) << ','
          << format_number(p.theta_hat[j]) << ',' << format_number(p.W[j]) << ',' << format_number(p.defect[j])
          << '\n';
    }
  }
}

void write_strata_csv(std::ostream& out, const std::vector<StrataMembership>& rows) {
  int m = rows.empty() ? 0 : static_cast<int>(rows[0].x.size());
  center_header(out, m);
  out << (m ? "," : "") << "k,eps,r,member,witness_scale,witness_eps\n";
  for (const auto& s : rows) {
    center_cells(out, s.x);
    out << (m ? "," : "") << s.k << ',' << format_number(s.eps) << ',' << format_number(s.r) << ','
        << (s.member ? 1 : 0) << ',' << format_number(s.witness_scale) << ',' << format_number(s.witness_eps)
        << '\n';
  }
}

void write_beta_csv(std::ostream& out, const std::vector<BetaRow>& rows) {
  int m = rows.empty() ? 0 : static_cast<int>(rows[0].center.size());
  center_header(out, m);
  out << (m ? "," : "") << "scale,k,beta2,dini_partial\n";
  for (const auto& b : rows) {
    center_cells(out, b.center);
    out << (m ? "," : "") << format_number(b.scale) << ',' << b.k << ',' << format_number(b.beta2) << ','
        << format_number(b.dini_partial) << '\n';
  }
}

}  // namespace qstrat
