// SPDX-License-Identifier: Apache-2.0
#include "rydsim/noise_sim.hpp"

#include <cmath>
#include <fstream>

#include "rydsim/config_file.hpp"
#include "rydsim/constants.hpp"
#include "rydsim/errors.hpp"

namespace rydsim {

void ScanData::validate(double f_resonance) const {
  if (frequencies.size() != voltages.size())
    throw InvalidArgument("ScanData: frequency/voltage length mismatch");
  if (per_point_averages < 1) throw InvalidArgument("ScanData: per_point_averages must be >= 1");
  for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
    if (side == PeakLineshape::Side::Right && !(frequencies[i] > f_resonance))
      throw InvalidArgument("ScanData: right-side scan contains f <= f_resonance");
    if (side == PeakLineshape::Side::Left && !(frequencies[i] < f_resonance))
      throw InvalidArgument("ScanData: left-side scan contains f >= f_resonance");
  }
}

void ScanData::save_csv(const std::string& path, std::uint64_t seed) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "# side=" << (side == PeakLineshape::Side::Right ? "right" : "left") << "\n";
  out << "# n_avg=" << per_point_averages << "\n";
  out << "# seed=" << seed << "\n";
  out << "f,z\n";
  for (Eigen::Index i = 0; i < frequencies.size(); ++i)
    out << format_double(frequencies[i]) << ',' << format_double(voltages[i]) << '\n';
  if (!out.flush()) throw IoError("failed writing " + path);
}

ScanData ScanData::load_csv(const std::string& path, std::uint64_t* seed_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ScanData scan;
  std::vector<double> fs, zs;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# side=", 0) == 0) {
      scan.side = line.substr(7) == "left" ? PeakLineshape::Side::Left
                                           : PeakLineshape::Side::Right;
      continue;
    }
    if (line.rfind("# n_avg=", 0) == 0) {
      scan.per_point_averages = std::atoi(line.c_str() + 8);
      continue;
    }
    if (line.rfind("# seed=", 0) == 0) {
      if (seed_out) *seed_out = std::strtoull(line.c_str() + 7, nullptr, 10);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "f,z") throw IoError("scan csv missing 'f,z' header: " + path);
      header_seen = true;
      continue;
    }
    char* end = nullptr;
    const double f = std::strtod(line.c_str(), &end);
    if (*end != ',') throw IoError("scan csv malformed row: " + line);
    const double z = std::strtod(end + 1, &end);
    fs.push_back(f);
    zs.push_back(z);
  }
  scan.frequencies = Eigen::Map<Eigen::VectorXd>(fs.data(), fs.size());
  scan.voltages = Eigen::Map<Eigen::VectorXd>(zs.data(), zs.size());
  return scan;
}

Eigen::VectorXd sample_idd(const MarginalCurve& f_i, double x, int n, const NoiseSpec& noise,
                           std::uint64_t stream, DrawCounter* counter) {
  if (n < 1) throw InvalidArgument("sample_idd: n must be >= 1");
  const double mean = f_i(x);
  const CounterRng rng(noise.seed, stream);
  Eigen::VectorXd z(n);
  for (int k = 0; k < n; ++k) z[k] = mean + noise.sigma0 * rng.normal(k);
  if (counter) counter->count += static_cast<std::uint64_t>(n);
  return z;
}

Eigen::VectorXd sample_isd(const MarginalCurve& f_i, double x_lo, double x, double phi,
                           int n1, int n2, const NoiseSpec& noise, std::uint64_t stream,
                           DrawCounter* counter) {
  if (n1 < 1) throw InvalidArgument("sample_isd: n1 must be >= 1");
  if (n2 < 4) throw InvalidArgument("sample_isd: n2 must be >= 4");
  const double dc = f_i(x_lo);
  const double amp = f_i.derivative(x_lo) * x;
  const CounterRng rng(noise.seed, stream);
  const int n = n1 * n2;
  Eigen::VectorXd z(n);
  for (int k = 1; k <= n; ++k) {
    const int k_in_period = ((k - 1) % n2) + 1;
    z[k - 1] = dc + amp * std::cos(constants::two_pi * k_in_period / n2 + phi) +
               noise.sigma0 * rng.normal(static_cast<std::uint64_t>(k - 1));
  }
  if (counter) counter->count += static_cast<std::uint64_t>(n);
  return z;
}

ScanData sample_scan(const PeakLineshape& shape, const SamplingPlan& plan, int n_sf2,
                     const NoiseSpec& noise, std::uint64_t stream, DrawCounter* counter) {
  if (n_sf2 < 1) throw InvalidArgument("sample_scan: n_sf2 must be >= 1");
  if (plan.frequencies.size() < 1) throw InvalidArgument("sample_scan: empty plan");
  const CounterRng rng(noise.seed, stream);
  const Eigen::Index n1 = plan.frequencies.size();
  ScanData scan;
  scan.frequencies = plan.frequencies;
  scan.voltages.resize(n1);
  scan.per_point_averages = n_sf2;
  scan.side = plan.side;
  for (Eigen::Index i = 0; i < n1; ++i) {
    const double mean = shape.value(plan.frequencies[i] - shape.center_abs());
    double acc = 0.0;
    for (int j = 0; j < n_sf2; ++j)
      acc += noise.sigma0 * rng.normal(static_cast<std::uint64_t>(i) * n_sf2 + j);
    scan.voltages[i] = mean + acc / n_sf2;
  }
  if (counter) counter->count += static_cast<std::uint64_t>(n1) * n_sf2;
  return scan;
}

}  // namespace rydsim
