#include "oslab/grid.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace oslab {

Grid::Grid(int dim, double period, int points) : d(dim), L(period), N(points) {
  if (d < 1 || d > kMaxDim) throw DomainError("grid: dimension must lie in [1, 3]");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("grid: period L must be positive");
  if (N < 8 || (N & (N - 1)) != 0) throw DomainError("grid: N must be a power of two >= 8");
}

std::int64_t Grid::size() const {
  std::int64_t s = 1;
  for (int i = 0; i < d; ++i) s *= N;
  return s;
}

std::array<int, kMaxDim> Grid::unflatten(std::int64_t flat) const {
  std::array<int, kMaxDim> idx{};
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % N);
    flat /= N;
  }
  return idx;
}

std::int64_t Grid::flatten(const std::array<int, kMaxDim>& idx) const {
  std::int64_t flat = 0;
  for (int a = 0; a < d; ++a) flat = flat * N + idx[a];
  return flat;
}

Point Grid::coordinate(std::int64_t flat) const {
  const auto idx = unflatten(flat);
  Point x(d);
  for (int a = 0; a < d; ++a) x(a) = -0.5 * L + idx[a] * spacing();
  return x;
}

std::array<int, kMaxDim> Grid::wavenumber(std::int64_t flat) const {
  auto idx = unflatten(flat);
  for (int a = 0; a < d; ++a)
    if (idx[a] >= N / 2) idx[a] -= N;
  return idx;
}

Point Grid::frequency(std::int64_t flat) const {
  const auto k = wavenumber(flat);
  Point xi(d);
  for (int a = 0; a < d; ++a) xi(a) = k[a] / L;
  return xi;
}

namespace {

// Per-axis phase factors e^{2 pi i k s / L}, cosine form at Nyquist.
std::vector<Complex> axis_phases(const Grid& g, double s) {
  std::vector<Complex> ph(g.N);
  for (int j = 0; j < g.N; ++j) {
    const int k = j < g.N / 2 ? j : j - g.N;
    const double arg = 2.0 * M_PI * k * s / g.L;
    ph[j] = (k == -g.N / 2) ? Complex(std::cos(arg), 0.0) : std::polar(1.0, arg);
  }
  return ph;
}

Eigen::VectorXcd phase_field(const Grid& g, const Point& shift) {
  std::vector<std::vector<Complex>> ph;
  for (int a = 0; a < g.d; ++a) ph.push_back(axis_phases(g, shift(a)));
  Eigen::VectorXcd out(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    Complex f = 1.0;
    for (int a = 0; a < g.d; ++a) f *= ph[a][idx[a]];
    out(i) = f;
  }
  return out;
}

}  // namespace

TrigInterpolant::TrigInterpolant(const GridFunction& u) : grid_(u.grid()), spectrum_(fft_forward(u)) {
  spectrum_ /= static_cast<double>(grid_.size());
}

Complex TrigInterpolant::operator()(const Point& x) const {
  Point offset(grid_.d);
  for (int a = 0; a < grid_.d; ++a) offset(a) = x(a) + 0.5 * grid_.L;
  return spectrum_.cwiseProduct(phase_field(grid_, offset)).sum();
}

Complex spectral_evaluate(const GridFunction& u, const Point& x) { return TrigInterpolant(u)(x); }

GridFunction spectral_shift(const GridFunction& u, const Point& shift) {
  Eigen::VectorXcd spec = fft_forward(u);
  spec = spec.cwiseProduct(phase_field(u.grid(), shift));
  return fft_inverse(u.grid(), std::move(spec));
}

GridFunction spectral_derivative(const GridFunction& u, const std::array<int, kMaxDim>& alpha) {
  const Grid& g = u.grid();
  Eigen::VectorXcd spec = fft_forward(u);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const auto k = g.wavenumber(i);
    Complex f = 1.0;
    for (int a = 0; a < g.d; ++a) {
      if (alpha[a] == 0) continue;
      // The Nyquist mode is a cosine on the grid: odd derivatives vanish there.
      if (k[a] == -g.N / 2 && alpha[a] % 2 == 1) {
        f = 0.0;
        break;
      }
      f *= ipow(Complex(0.0, 2.0 * M_PI * k[a] / g.L), alpha[a]);
    }
    spec(i) *= f;
  }
  return fft_inverse(g, std::move(spec));
}

void write_csv(const GridFunction& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  const Grid& g = u.grid();
  for (int a = 0; a < g.d; ++a) out << 'i' << a + 1 << ',';
  out << "re,im\n";
  out << std::setprecision(17);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    for (int a = 0; a < g.d; ++a) out << idx[a] << ',';
    out << u[i].real() << ',' << u[i].imag() << '\n';
  }
}

GridFunction read_csv(const Grid& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  GridFunction u(g);
  std::string line;
  std::getline(in, line);  // header
  std::int64_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::array<int, kMaxDim> idx{};
    for (int a = 0; a < g.d; ++a) {
      std::getline(ss, cell, ',');
      idx[a] = std::stoi(cell);
      if (idx[a] < 0 || idx[a] >= g.N) throw UsageError(path + ": index out of range");
    }
    double re = 0.0, im = 0.0;
    std::getline(ss, cell, ',');
    re = std::stod(cell);
    std::getline(ss, cell, ',');
    im = std::stod(cell);
    u[g.flatten(idx)] = Complex(re, im);
    ++rows;
  }
  if (rows != g.size()) throw UsageError(path + ": expected " + std::to_string(g.size()) + " rows");
  return u;
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary grid format assumes little-endian host");

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw UsageError("truncated binary grid file");
  return v;
}

}  // namespace

void write_binary(const GridFunction& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  put<std::uint32_t>(out, static_cast<std::uint32_t>(u.grid().d));
  put<double>(out, u.grid().L);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(u.grid().N));
  for (std::int64_t i = 0; i < u.grid().size(); ++i) {
    put<double>(out, u[i].real());
    put<double>(out, u[i].imag());
  }
}

GridFunction read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  const auto d = get<std::uint32_t>(in);
  const auto L = get<double>(in);
  const auto N = get<std::uint32_t>(in);
  Grid g(static_cast<int>(d), L, static_cast<int>(N));
  GridFunction u(g);
  for (std::int64_t i = 0; i < g.size(); ++i) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    u[i] = Complex(re, im);
  }
  return u;
}

}  // namespace oslab
