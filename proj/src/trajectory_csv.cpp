#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "rescat/error.hpp"
#include "rescat/integrate.hpp"

namespace rescat {

namespace {

constexpr std::string_view kHeader = "t,I1,I2,phi_wrapped,phi_unwrapped";

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("malformed number '" + std::string(field) + "' on line " + std::to_string(line));
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << kHeader << '\n';
  for (const TrajectoryPoint& p : traj.points) {
    out << format_double(p.t) << ',' << format_double(p.I[0]) << ',' << format_double(p.I[1]) << ','
        << format_double(p.phi_wrapped) << ',' << format_double(p.phi_unwrapped) << '\n';
  }
  if (!out) throw IoError("failed writing trajectory CSV");
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trajectory_csv(out, traj);
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw IoError("missing trajectory CSV header");

  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v[5];
    std::string_view rest = line;
    for (int k = 0; k < 5; ++k) {
      const auto comma = rest.find(',');
      if ((k < 4) == (comma == std::string_view::npos)) {
        throw IoError("expected 5 fields on line " + std::to_string(line_no));
      }
      v[k] = parse_double(rest.substr(0, comma), line_no);
      if (k < 4) rest.remove_prefix(comma + 1);
    }
    traj.points.push_back(TrajectoryPoint{v[0], {v[1], v[2]}, v[3], v[4]});
  }
  if (traj.points.empty()) throw IoError("trajectory CSV has no rows");
  traj.stride = 1;
  traj.kappa = traj.points.size() > 1 ? traj.points[1].t - traj.points[0].t : 0.0;
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trajectory_csv(in);
}

}  // namespace rescat
